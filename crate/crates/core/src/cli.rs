//! Command-line front end.
//!
//! Configuration comes from built-in defaults, then an optional JSON file
//! (`--config`), then command-line flags; later sources win. Every command
//! writes its artifacts and a `manifest.json` into the output directory and
//! reports failures as one JSON object on standard error.
//!
//! Exit codes: 0 success, 1 computation or check failure, 2 unreadable
//! input, 3 pair outside the renormalizable class, 4 linearization failure,
//! 5 no bracket in the parameter search.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::afunc::{DiskDomain, C64};
use crate::curve::{self, CurveError, HyperbolicityOptions, RenormalizedSeed};
use crate::henon::{self, HenonError, HenonMap, SearchOptions};
use crate::renorm1d::{self, FixedPointReport, Pair1D, Renorm1DConfig};
use crate::renorm2d::{self, Domains2D, Renorm2DConfig, Renorm2DError};
use crate::words::RotationNumber;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_MEMBERSHIP: i32 = 3;
pub const EXIT_LINEARIZATION: i32 = 4;
pub const EXIT_BRACKET: i32 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Newton residual of the one-dimensional fixed point.
    pub fixed_point: f64,
    /// Relative eigenvalue drift between orders for a trusted eigenvalue.
    pub spectrum_drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { fixed_point: 1e-12, spectrum_drift: renorm1d::RESOLUTION_REL }
    }
}

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rotation: RotationNumber,
    /// Second multiplier of the semi-Siegel fixed point; ignored when `a`
    /// is given.
    pub mu: C64,
    /// Jacobian parameter; the map is then `H(x, y) = (x² + c + ay, ax)`.
    pub a: Option<C64>,
    /// Truncation order of one-dimensional pairs.
    pub order_1d: usize,
    /// Extra orders of the comparison spectrum.
    pub order_extra: usize,
    /// Orders of the truncation-stability table of `fixed-point`.
    pub order_sweep: Vec<usize>,
    /// Truncation orders `(w, y)` of two-dimensional pairs.
    pub orders: (usize, usize),
    pub eta_disk: DiskDomain,
    pub xi_disk: DiskDomain,
    pub y_radius: f64,
    pub tolerances: Tolerances,
    /// Seed level of Hénon pairs.
    pub level: usize,
    pub steps: usize,
    /// Microscope depth of `curve`.
    pub depth: usize,
    /// Run the parameter search before building the curve.
    pub search: bool,
    pub search_options: SearchOptions,
    /// Points of the Siegel boundary cloud.
    pub points: usize,
    /// Order of the linearizing series.
    pub lin_order: usize,
    pub cone: HyperbolicityOptions,
    /// Cone apertures reported besides `cone.rho`.
    pub rho_sweep: Vec<f64>,
    /// A fixed-point file: seed of `fixed-point`, target of `renorm2d`.
    pub fixed_point_file: Option<PathBuf>,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = Domains2D::default();
        RunConfig {
            rotation: RotationNumber::golden(),
            mu: C64::new(1e-3, 0.0),
            a: None,
            order_1d: 40,
            order_extra: 8,
            order_sweep: Vec::new(),
            orders: (32, 6),
            eta_disk: d.a,
            xi_disk: d.b,
            y_radius: d.y.radius,
            tolerances: Tolerances::default(),
            level: 6,
            steps: 4,
            depth: 5,
            search: false,
            search_options: SearchOptions::default(),
            points: 2048,
            lin_order: 200,
            cone: HyperbolicityOptions::default(),
            rho_sweep: vec![0.1, 0.5, 1.0],
            fixed_point_file: None,
            output: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("tolerances.fixed_point", self.tolerances.fixed_point),
            ("tolerances.spectrum_drift", self.tolerances.spectrum_drift),
            ("y_radius", self.y_radius),
            ("eta_disk.radius", self.eta_disk.radius),
            ("xi_disk.radius", self.xi_disk.radius),
            ("cone.rho", self.cone.rho),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Parse(format!("{name} must be positive, got {v}")));
            }
        }
        if self.rho_sweep.iter().any(|&r| !(r > 0.0)) {
            return Err(CliError::Parse("rho_sweep entries must be positive".into()));
        }
        if self.order_1d < 4 || self.orders.0 < 4 {
            return Err(CliError::Parse("truncation orders must be at least 4".into()));
        }
        if self.points < 8 || self.cone.samples == 0 || self.cone.directions == 0 {
            return Err(CliError::Parse("sample counts must be positive".into()));
        }
        Ok(())
    }

    pub fn domains(&self) -> Domains2D {
        Domains2D { a: self.eta_disk, b: self.xi_disk, y: DiskDomain::centered(self.y_radius) }
    }

    pub fn renorm1d(&self) -> Renorm1DConfig {
        Renorm1DConfig { theta: self.rotation.clone(), order: self.order_1d, samples: 0, domains: self.domains().one_d() }
    }

    pub fn renorm2d(&self) -> Renorm2DConfig {
        Renorm2DConfig { theta: self.rotation.clone(), orders: self.orders, domains: self.domains(), ..Default::default() }
    }

    /// The semi-Siegel map with multiplier `λ` and either `a` or `μ`.
    pub fn henon_map(&self, lambda: C64) -> Result<HenonMap, CliError> {
        let h = match self.a {
            Some(a) => HenonMap::semi_siegel_with_a(lambda, a),
            None => HenonMap::semi_siegel(lambda, self.mu),
        };
        h.map_err(|e| CliError::Failed(e.to_string()))
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Membership(String),
    #[error("{0}")]
    Linearization(String),
    #[error("{0}")]
    Bracket(String),
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Membership(_) => EXIT_MEMBERSHIP,
            CliError::Linearization(_) => EXIT_LINEARIZATION,
            CliError::Bracket(_) => EXIT_BRACKET,
            CliError::Failed(_) | CliError::Io { .. } => EXIT_FAILED,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Membership(_) => "membership",
            CliError::Linearization(_) => "linearization",
            CliError::Bracket(_) => "bracket",
            CliError::Failed(_) => "failed",
            CliError::Io { .. } => "io",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() })
    }
}

impl From<Renorm2DError> for CliError {
    fn from(e: Renorm2DError) -> Self {
        match e {
            Renorm2DError::Membership { .. } => CliError::Membership(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<HenonError> for CliError {
    fn from(e: HenonError) -> Self {
        match e {
            HenonError::Renorm2D(inner) => inner.into(),
            HenonError::Bracket { .. } => CliError::Bracket(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::Renorm2D(inner) => inner.into(),
            CurveError::Henon(inner) => inner.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<renorm1d::Renorm1DError> for CliError {
    fn from(e: renorm1d::Renorm1DError) -> Self {
        CliError::Failed(e.to_string())
    }
}

/// On-disk form of a one-dimensional fixed point.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointFile {
    pub format: String,
    pub version: u32,
    pub rotation: RotationNumber,
    pub order: usize,
    pub report: FixedPointReport,
    pub pair: Pair1D,
}

pub const FIXED_POINT_FORMAT: &str = "siegel-renorm/fixed-point";
pub const FIXED_POINT_VERSION: u32 = 1;

impl FixedPointFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        let file: FixedPointFile =
            serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        if file.format != FIXED_POINT_FORMAT || file.version != FIXED_POINT_VERSION {
            return Err(CliError::Parse(format!(
                "{}: expected {FIXED_POINT_FORMAT} version {FIXED_POINT_VERSION}, found {} version {}",
                path.display(),
                file.format,
                file.version
            )));
        }
        Ok(file)
    }
}

#[derive(Debug, Parser)]
#[command(name = "siegel-renorm", version, about = "Renormalization of dissipative Hénon maps with semi-Siegel fixed points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Fixed point of the one-dimensional operator and its spectrum.
    FixedPoint,
    /// Renormalizations of a Hénon seed pair.
    Renorm2d,
    /// Boundary cloud of the Siegel disk of the fixed point.
    Siegel,
    /// Invariant curve and the non-smoothness diagnostic.
    Curve,
    /// Vertical cone fields of the return maps.
    Cone,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FixedPoint => "fixed-point",
            Command::Renorm2d => "renorm2d",
            Command::Siegel => "siegel",
            Command::Curve => "curve",
            Command::Cone => "cone",
        }
    }
}

/// Flags overriding fields of the configuration file.
#[derive(Debug, Args, Default, Clone)]
pub struct Overrides {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// μ as `re` or `re,im`.
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub mu: Option<C64>,
    /// a as `re` or `re,im`.
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub a: Option<C64>,
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Two-dimensional orders as `w,y`.
    #[arg(long, global = true, value_parser = parse_pair)]
    pub orders: Option<(usize, usize)>,
    /// Comma-separated orders for the stability table.
    #[arg(long, global = true, value_delimiter = ',')]
    pub order_sweep: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub level: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub search: bool,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub fixed_point_file: Option<PathBuf>,
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `w,y`, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.out {
            cfg.output = v.clone();
        }
        if let Some(v) = self.mu {
            cfg.mu = v;
            cfg.a = None;
        }
        if let Some(v) = self.a {
            cfg.a = Some(v);
        }
        if let Some(v) = self.order {
            cfg.order_1d = v;
        }
        if let Some(v) = self.orders {
            cfg.orders = v;
        }
        if let Some(v) = &self.order_sweep {
            cfg.order_sweep = v.clone();
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.depth {
            cfg.depth = v;
        }
        if self.search {
            cfg.search = true;
        }
        if let Some(v) = self.points {
            cfg.points = v;
        }
        if let Some(v) = self.rho {
            cfg.cone.rho = v;
        }
        if let Some(v) = self.seed {
            cfg.cone.seed = v;
        }
        if let Some(v) = &self.fixed_point_file {
            cfg.fixed_point_file = Some(v.clone());
        }
    }
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io { path: p.into(), source })?;
            serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
        }
    }
}

/// Collects output files and summary values for the manifest.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    summary: BTreeMap<String, Value>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
        Ok(Outputs { dir: dir.into(), files: Vec::new(), summary: BTreeMap::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
        self.files.push(name.into());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Failed(e.to_string());
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
        self.write(name, &bytes)
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn finish(mut self, command: Command, cfg: &RunConfig) -> Result<(), CliError> {
        let manifest = json!({
            "command": command.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": cfg.hash(),
            "config": cfg,
            "outputs": self.files,
            "summary": self.summary,
        });
        self.json("manifest.json", &manifest)
    }
}

fn cloud_rows(points: &[(C64, C64)]) -> impl Iterator<Item = Vec<f64>> + '_ {
    points.iter().map(|(x, y)| vec![x.re, x.im, y.re, y.im])
}

pub fn cmd_fixed_point(cfg: &RunConfig) -> Result<(), CliError> {
    let c1 = cfg.renorm1d();
    let mut out = Outputs::new(&cfg.output)?;
    let seed = match &cfg.fixed_point_file {
        Some(p) => FixedPointFile::read(p)?.pair,
        None => renorm1d::quadratic_seed(16, &c1)?,
    };
    let (z, report) = renorm1d::fixed_point(&seed, &c1, cfg.tolerances.fixed_point)?;
    let (_, coarse, fine) = renorm1d::resolved_spectrum(&z, &c1, cfg.order_extra, cfg.tolerances.fixed_point)?;
    out.note("residual", report.residual);
    out.note("tail", report.tail);
    out.note("kappa", coarse.kappa);
    out.note("trusted_expanding", coarse.trusted_expanding());
    out.json(
        "fixed_point.json",
        &FixedPointFile {
            format: FIXED_POINT_FORMAT.into(),
            version: FIXED_POINT_VERSION,
            rotation: cfg.rotation.clone(),
            order: c1.order,
            report,
            pair: z.clone(),
        },
    )?;
    out.json("spectrum.json", &json!({ "coarse": coarse, "fine": fine }))?;
    if !cfg.order_sweep.is_empty() {
        let mut rows = Vec::new();
        let mut prev = z.clone();
        for &order in &cfg.order_sweep {
            let c = Renorm1DConfig { order, ..c1.clone() };
            let (zn, rep) = renorm1d::fixed_point(&prev, &c, cfg.tolerances.fixed_point)?;
            let spec = renorm1d::jacobian_spectrum(&zn, &c)?;
            rows.push(json!({ "order": order, "residual": rep.residual, "kappa": spec.kappa }));
            prev = zn;
        }
        out.json("stability.json", &rows)?;
    }
    let expanding = coarse.trusted_expanding();
    out.finish(Command::FixedPoint, cfg)?;
    if expanding != 1 {
        return Err(CliError::Failed(format!("{expanding} trusted expanding eigenvalues, expected exactly one")));
    }
    Ok(())
}

pub fn cmd_renorm2d(cfg: &RunConfig) -> Result<(), CliError> {
    let c2 = cfg.renorm2d();
    let h = cfg.henon_map(cfg.rotation.multiplier())?;
    let mut out = Outputs::new(&cfg.output)?;
    let seed = henon::seed_pair(&h, &cfg.rotation, cfg.level, &c2)?;
    let zstar = match &cfg.fixed_point_file {
        Some(p) => {
            let z = FixedPointFile::read(p)?.pair;
            Some(z.refit(c2.domains.one_d(), c2.orders.0, c2.samples().0)?)
        }
        None => None,
    };
    let (_, rows) = renorm2d::renorm2d_iterate(&seed.pair, cfg.steps, &c2, zstar.as_ref())?;
    out.note("map", h);
    out.note("seed_delta", seed.delta);
    out.note("final_slice_distance", rows.last().map(|r| r.slice_distance));
    out.json("trace.json", &json!({ "map": h, "seed_delta": seed.delta, "scale": seed.scale, "rows": rows }))?;
    out.finish(Command::Renorm2d, cfg)
}

pub fn cmd_siegel(cfg: &RunConfig) -> Result<(), CliError> {
    let h = cfg.henon_map(cfg.rotation.multiplier())?;
    let mut out = Outputs::new(&cfg.output)?;
    let cloud = henon::boundary_points(&h, cfg.points, cfg.lin_order).map_err(|e| CliError::Linearization(e.to_string()))?;
    out.note("radius", cloud.radius);
    out.note("invariance", cloud.invariance);
    out.note("orbit_drift", cloud.orbit_drift);
    out.csv("cloud.csv", &["re_x", "im_x", "re_y", "im_y"], cloud_rows(&cloud.points))?;
    out.json(
        "siegel.json",
        &json!({
            "map": h,
            "radius": cloud.radius,
            "residual": cloud.residual,
            "invariance": cloud.invariance,
            "orbit_drift": cloud.orbit_drift,
        }),
    )?;
    out.finish(Command::Siegel, cfg)
}

pub fn cmd_curve(cfg: &RunConfig) -> Result<(), CliError> {
    let c2 = cfg.renorm2d();
    let mut out = Outputs::new(&cfg.output)?;
    let lambda = if cfg.search {
        let (zstar, _) = renorm1d::golden_fixed_point(&c2.one_d(), cfg.tolerances.fixed_point)?;
        let coord = henon::ExpandingCoordinate::new(zstar, &c2)?;
        let mu = cfg.henon_map(cfg.rotation.multiplier())?.semi_siegel_point()?.multipliers[1];
        let found = henon::stable_param_search(&cfg.rotation, mu, &cfg.search_options, &coord, &c2)?;
        out.json("search.json", &found)?;
        found.l_star
    } else {
        cfg.rotation.multiplier()
    };
    let h = cfg.henon_map(lambda)?;
    let rs = RenormalizedSeed::new(&h, cfg.level, cfg.depth, &c2)?;
    let curve = curve::invariant_curve(&h, &rs, cfg.depth, &c2)?;
    let smooth = curve::smoothness_diagnostic(&h, &curve, &cfg.rotation, 4..=9);
    out.csv(
        "curve.csv",
        &["mark_lo", "mark_hi", "re_x", "im_x", "re_y", "im_y"],
        curve.cells.iter().zip(&curve.points).map(|(m, (x, y))| vec![m.0, m.1, x.re, x.im, y.re, y.im]),
    )?;
    let smooth_json = match &smooth {
        Ok(s) => serde_json::to_value(s).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    };
    out.json(
        "curve.json",
        &json!({
            "map": h,
            "depth": curve.depth,
            "points": curve.points.len(),
            "defect": curve.defect,
            "max_cell_diameter": curve.max_cell_diameter,
            "closed": curve.closed,
            "simple": curve.simple,
            "min_separation": curve.min_separation,
            "smoothness": smooth_json,
        }),
    )?;
    out.note("defect", curve.defect);
    out.note("max_cell_diameter", curve.max_cell_diameter);
    out.finish(Command::Curve, cfg)?;
    if !(curve.defect < curve.max_cell_diameter) {
        return Err(CliError::Failed(format!(
            "conjugacy defect {:.3e} is not below the cell diameter {:.3e}",
            curve.defect, curve.max_cell_diameter
        )));
    }
    Ok(())
}

pub fn cmd_cone(cfg: &RunConfig) -> Result<(), CliError> {
    let c2 = cfg.renorm2d();
    let h = cfg.henon_map(cfg.rotation.multiplier())?;
    let mut out = Outputs::new(&cfg.output)?;
    let mut rows = Vec::new();
    let mut violations = 0;
    let mut rhos = vec![cfg.cone.rho];
    rhos.extend(cfg.rho_sweep.iter().copied().filter(|&r| r != cfg.cone.rho));
    for n in [cfg.level, cfg.level + 1] {
        for &rho in &rhos {
            let opts = HyperbolicityOptions { rho, ..cfg.cone.clone() };
            let r = curve::henon_cone_check(&h, &cfg.rotation, n, &c2.domains, &opts)?;
            if rho == cfg.cone.rho {
                violations += r.report.violations;
            }
            rows.push(r);
        }
    }
    out.note("violations", violations);
    out.json("cone.json", &json!({ "map": h, "rho": cfg.cone.rho, "levels": rows }))?;
    out.finish(Command::Cone, cfg)?;
    if violations > 0 {
        return Err(CliError::Failed(format!("{violations} cone violations at rho = {}", cfg.cone.rho)));
    }
    Ok(())
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    match command {
        Command::FixedPoint => cmd_fixed_point(cfg),
        Command::Renorm2d => cmd_renorm2d(cfg),
        Command::Siegel => cmd_siegel(cfg),
        Command::Curve => cmd_curve(cfg),
        Command::Cone => cmd_cone(cfg),
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let err = CliError::Parse(e.to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let result = load_config(cli.overrides.config.as_deref()).and_then(|mut cfg| {
        cli.overrides.apply(&mut cfg);
        run(cli.command, &cfg)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flags() {
        assert_eq!(parse_complex("0.01,0.01").unwrap(), C64::new(0.01, 0.01));
        assert_eq!(parse_complex("-1e-3").unwrap(), C64::new(-1e-3, 0.0));
        assert!(parse_complex("1,2,3").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let mut cfg = RunConfig { level: 4, ..Default::default() };
        let cli = Cli::try_parse_from(["siegel-renorm", "cone", "--level", "7", "--a", "0.01,0.01"]).unwrap();
        cli.overrides.apply(&mut cfg);
        assert_eq!(cfg.level, 7);
        assert_eq!(cfg.a, Some(C64::new(0.01, 0.01)));
        assert_eq!(cli.command, Command::Cone);
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn invalid_tolerance_is_a_parse_error() {
        let cfg = RunConfig { tolerances: Tolerances { fixed_point: 0.0, ..Default::default() }, ..Default::default() };
        assert_eq!(cfg.validate().unwrap_err().exit_code(), EXIT_PARSE);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"levle": 3}"#).is_err());
        let partial: RunConfig = serde_json::from_str(r#"{"level": 3}"#).unwrap();
        assert_eq!(partial.level, 3);
    }

    #[test]
    fn membership_errors_map_to_exit_three() {
        let e: CliError = HenonError::Renorm2D(Renorm2DError::Membership { detail: "x".into(), delta: 1.0 }).into();
        assert_eq!(e.exit_code(), EXIT_MEMBERSHIP);
        let e: CliError = HenonError::Bracket { scan: vec![] }.into();
        assert_eq!(e.exit_code(), EXIT_BRACKET);
    }
}
