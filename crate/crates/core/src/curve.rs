//! Dynamical partitions, the renormalization microscope, the invariant curve
//! of a renormalizable Hénon map, the non-smoothness diagnostic and the
//! vertical cone-field check.
//!
//! The combinatorics are done in exact arithmetic on the golden rotation,
//! so everything here is specific to `θ = θ*`.

use std::cmp::Ordering;
use std::fmt;
use std::num::NonZero;
use std::ops::{Add, Mul, Neg, Sub};

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use nalgebra::Matrix2;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::afunc::{AfuncError, DiskDomain, C64};
use crate::henon::{self, HenonError, HenonMap, SeedChart};
use crate::renorm2d::{self, Domains2D, HTransform, Pair2D, Renorm2DConfig, Renorm2DError, StepTrace2D};
use crate::words::{self, convergents, Letter, MultiIndex, RotationNumber, WordsError};

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("exact partitions need the golden rotation number")]
    NotGolden,
    #[error("letter {letter} applied to {interval}, outside its domain {domain}")]
    Domain { letter: Letter, interval: Interval, domain: Interval },
    #[error("partition check failed: {0}")]
    Partition(String),
    #[error("arc J_{n} contains {points} curve points")]
    Arc { n: usize, points: usize },
    #[error("microscope level {level}: {source}")]
    Microscope { level: usize, source: Renorm2DError },
    #[error(transparent)]
    Words(#[from] WordsError),
    #[error(transparent)]
    Renorm2D(#[from] Renorm2DError),
    #[error(transparent)]
    Henon(#[from] HenonError),
    #[error(transparent)]
    Afunc(#[from] AfuncError),
}

pub type Result<T> = std::result::Result<T, CurveError>;

const THETA: f64 = 0.618_033_988_749_894_9;

/// `u + v·θ*`, exact. `θ*² = 1 − θ*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Golden {
    pub u: i64,
    pub v: i64,
}

impl Golden {
    pub const ZERO: Golden = Golden { u: 0, v: 0 };
    pub const ONE: Golden = Golden { u: 1, v: 0 };
    pub const THETA: Golden = Golden { u: 0, v: 1 };

    pub const fn new(u: i64, v: i64) -> Self {
        Golden { u, v }
    }

    pub fn value(self) -> f64 {
        self.u as f64 + self.v as f64 * THETA
    }

    /// Exact sign: `u + vθ = (p + v√5)/2` with `p = 2u − v`.
    pub fn signum(self) -> i32 {
        let p = 2 * self.u as i128 - self.v as i128;
        let q = self.v as i128;
        if p >= 0 && q >= 0 {
            ((p + q) > 0) as i32
        } else if p <= 0 && q <= 0 {
            -(((p + q) < 0) as i32)
        } else if p * p > 5 * q * q {
            p.signum() as i32
        } else {
            q.signum() as i32
        }
    }

    pub fn floor(self) -> i64 {
        let mut n = self.value().floor() as i64;
        while (self - Golden::new(n, 0)).signum() < 0 {
            n -= 1;
        }
        while (self - Golden::new(n + 1, 0)).signum() >= 0 {
            n += 1;
        }
        n
    }

    /// Representative in `[0, 1)`.
    pub fn frac(self) -> Golden {
        self - Golden::new(self.floor(), 0)
    }

    pub fn theta_pow(k: u32) -> Golden {
        (0..k).fold(Golden::ONE, |acc, _| acc * Golden::THETA)
    }
}

impl From<i64> for Golden {
    fn from(u: i64) -> Self {
        Golden::new(u, 0)
    }
}

impl Add for Golden {
    type Output = Golden;
    fn add(self, o: Golden) -> Golden {
        Golden::new(self.u + o.u, self.v + o.v)
    }
}

impl Sub for Golden {
    type Output = Golden;
    fn sub(self, o: Golden) -> Golden {
        Golden::new(self.u - o.u, self.v - o.v)
    }
}

impl Neg for Golden {
    type Output = Golden;
    fn neg(self) -> Golden {
        Golden::new(-self.u, -self.v)
    }
}

impl Mul for Golden {
    type Output = Golden;
    fn mul(self, o: Golden) -> Golden {
        Golden::new(self.u * o.u + self.v * o.v, self.u * o.v + self.v * o.u - self.v * o.v)
    }
}

impl PartialOrd for Golden {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Golden {
    fn cmp(&self, other: &Self) -> Ordering {
        (*self - *other).signum().cmp(&0)
    }
}

impl fmt::Display for Golden {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}θ", self.u, self.v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Golden,
    pub hi: Golden,
}

impl Interval {
    pub fn between(a: Golden, b: Golden) -> Self {
        Interval { lo: a.min(b), hi: a.max(b) }
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_point(&self, x: Golden) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn shift(&self, t: Golden) -> Interval {
        Interval { lo: self.lo + t, hi: self.hi + t }
    }

    /// Image under `x ↦ s·x + t`.
    pub fn affine(&self, s: Golden, t: Golden) -> Interval {
        Interval::between(s * self.lo + t, s * self.hi + t)
    }

    pub fn len(&self) -> Golden {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo.value() + self.hi.value())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn is_golden(theta: &RotationNumber) -> bool {
    theta.period() > 0 && theta.digits(48).map(|d| d.iter().all(|&a| a == 1)).unwrap_or(false)
}

fn require_golden(theta: &RotationNumber) -> Result<()> {
    if is_golden(theta) {
        Ok(())
    } else {
        Err(CurveError::NotGolden)
    }
}

/// A pair of translations restricted to intervals.
#[derive(Clone, Copy, Debug)]
pub struct RotationPair {
    pub eta: Golden,
    pub xi: Golden,
    pub eta_domain: Interval,
    pub xi_domain: Interval,
}

impl RotationPair {
    /// `f(x) = x + 2θ − 1` on `I = [θ − 1, 0]`, `g(x) = x + θ − 1` on
    /// `J = [0, 2θ − 1]`.
    pub fn standard() -> Self {
        let f0 = Golden::new(-1, 2);
        let g0 = Golden::new(-1, 1);
        RotationPair { eta: f0, xi: g0, eta_domain: Interval::between(g0, Golden::ZERO), xi_domain: Interval::between(Golden::ZERO, f0) }
    }

    /// The same pair rescaled so that `ξ(0) = 1`: `η(x) = x − θ` on `[0, 1]`
    /// and `ξ(x) = x + 1` on `[−θ, 0]`.
    pub fn normalized() -> Self {
        let t = -Golden::THETA;
        RotationPair {
            eta: t,
            xi: Golden::ONE,
            eta_domain: Interval::between(Golden::ZERO, Golden::ONE),
            xi_domain: Interval::between(t, Golden::ZERO),
        }
    }

    pub fn shift_of(&self, l: Letter) -> Golden {
        match l {
            Letter::Eta => self.eta,
            Letter::Xi => self.xi,
        }
    }

    pub fn domain_of(&self, l: Letter) -> Interval {
        match l {
            Letter::Eta => self.eta_domain,
            Letter::Xi => self.xi_domain,
        }
    }

    pub fn word_shift(&self, letters: &[Letter]) -> Golden {
        letters.iter().fold(Golden::ZERO, |acc, &l| acc + self.shift_of(l))
    }

    /// Image of an interval under the letters, checking every domain.
    pub fn apply_word(&self, letters: &[Letter], iv: Interval) -> Result<Interval> {
        let mut cur = iv;
        for &l in letters {
            let domain = self.domain_of(l);
            if !domain.contains(&cur) {
                return Err(CurveError::Domain { letter: l, interval: cur, domain });
            }
            cur = cur.shift(self.shift_of(l));
        }
        Ok(cur)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    I,
    J,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionCell1D {
    pub interval: Interval,
    pub word: MultiIndex,
    pub kind: CellKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Partition1D {
    pub level: usize,
    pub support: Interval,
    pub cells: Vec<PartitionCell1D>,
}

/// Outcome of checking that intervals tile a segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingCheck {
    pub covering: bool,
    pub disjoint: bool,
    pub failures: Vec<String>,
}

impl TilingCheck {
    pub fn ok(&self) -> bool {
        self.covering && self.disjoint
    }
}

/// Covering of `support` and disjoint interiors, decided exactly.
pub fn check_tiling(intervals: &[Interval], support: Interval) -> TilingCheck {
    let mut iv = intervals.to_vec();
    iv.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    let mut failures = Vec::new();
    let mut covering = true;
    let mut disjoint = true;
    for c in &iv {
        if c.lo >= c.hi {
            failures.push(format!("degenerate cell {c}"));
            covering = false;
        }
    }
    match (iv.first(), iv.last()) {
        (Some(first), Some(last)) => {
            if first.lo != support.lo || last.hi != support.hi {
                covering = false;
                failures.push(format!("cells span [{}, {}], support {support}", first.lo, last.hi));
            }
        }
        _ => {
            covering = false;
            failures.push("no cells".into());
        }
    }
    for w in iv.windows(2) {
        match w[0].hi.cmp(&w[1].lo) {
            Ordering::Less => {
                covering = false;
                failures.push(format!("gap between {} and {}", w[0], w[1]));
            }
            Ordering::Greater => {
                disjoint = false;
                failures.push(format!("overlap of {} and {}", w[0], w[1]));
            }
            Ordering::Equal => {}
        }
    }
    TilingCheck { covering, disjoint, failures }
}

impl Partition1D {
    pub fn check(&self) -> TilingCheck {
        let iv: Vec<Interval> = self.cells.iter().map(|c| c.interval).collect();
        check_tiling(&iv, self.support)
    }
}

/// The n-th dynamical partition of `I ∪ J` for the golden rotation pair:
/// `H^{w̄}(Iₙ)` for `w̄ ≺ s̄ₙ` and `H^{w̄}(Jₙ)` for `w̄ ≺ t̄ₙ`.
pub fn partition1d(theta: &RotationNumber, n: usize) -> Result<Partition1D> {
    require_golden(theta)?;
    let h = RotationPair::standard();
    let (s, t) = words::renorm_words(theta, n)?;
    let fn0 = h.word_shift(&words::word_expand(&s));
    let gn0 = h.word_shift(&words::word_expand(&t));
    let i_n = Interval::between(Golden::ZERO, gn0);
    let j_n = Interval::between(Golden::ZERO, fn0);
    let mut cells = Vec::with_capacity(s.len() + t.len());
    for (top, base, kind) in [(&s, i_n, CellKind::I), (&t, j_n, CellKind::J)] {
        for w in top.predecessors() {
            let interval = h.apply_word(&words::word_expand(&w), base)?;
            cells.push(PartitionCell1D { interval, word: w, kind });
        }
    }
    cells.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
    Ok(Partition1D { level: n, support: Interval::between(h.eta_domain.lo, h.xi_domain.hi), cells })
}

/// The words conjugated by `H_Σ` in one step of the operator:
/// `u_A = η·ŝ·F` and `u_B = η·t̂·F`, in application order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepWords {
    pub u_a: Vec<Letter>,
    pub u_b: Vec<Letter>,
}

impl StepWords {
    pub fn new(theta: &RotationNumber, cfg: &Renorm2DConfig) -> Result<Self> {
        let w = renorm2d::operator_words(theta, cfg.k()?)?;
        let build = |hat: &[Letter]| {
            let mut u = vec![Letter::Eta];
            u.extend_from_slice(hat);
            u.push(w.f);
            u
        };
        Ok(StepWords { u_a: build(&w.s_hat), u_b: build(&w.t_hat) })
    }

    /// The word renormalized into the map named by `l`.
    pub fn of(&self, l: Letter) -> &[Letter] {
        match l {
            Letter::Eta => &self.u_a,
            Letter::Xi => &self.u_b,
        }
    }
}

/// A cell of the partition generated by the microscope.
///
/// `chain[j] = (u, m)` means that at level `j` (outermost first) the prefix
/// of length `m` of the word renormalized into `u` is applied. `kind` is
/// the map of `Σ` whose domain contains the cell, and `interval` its
/// position in the normalized rotation model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MicroCell {
    pub chain: Vec<(Letter, usize)>,
    pub base: Letter,
    pub kind: Letter,
    pub interval: Interval,
}

/// All microscope cells of the given depth, ordered along the rotation
/// model. Every translation is checked against its domain.
pub fn micro_cells(words: &StepWords, depth: usize) -> Result<Vec<MicroCell>> {
    let rot = RotationPair::normalized();
    // L(x) = η⁻¹(θ²x): H_Σ is η on the rotation model, and ℓ = ξ'(0) = θ².
    let scale = Golden::theta_pow(2);
    let mut cells: Vec<MicroCell> = [Letter::Eta, Letter::Xi]
        .into_iter()
        .map(|l| MicroCell { chain: Vec::new(), base: l, kind: l, interval: rot.domain_of(l) })
        .collect();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(3 * cells.len());
        for c in &cells {
            let u = words.of(c.kind);
            let inner = c.interval.affine(scale, -rot.eta);
            for m in 0..u.len() {
                let interval = rot.apply_word(&u[..m], inner)?;
                let mut chain = Vec::with_capacity(c.chain.len() + 1);
                chain.push((c.kind, m));
                chain.extend_from_slice(&c.chain);
                next.push(MicroCell { chain, base: c.base, kind: u[m], interval });
            }
        }
        cells = next;
    }
    cells.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
    Ok(cells)
}

struct Level<'a> {
    sigma: &'a Pair2D,
    ht: HTransform<'a>,
    trace: StepTrace2D,
}

/// The charts `L_{Σⱼ} = H_{Σⱼ}⁻¹ ∘ M_j` along a sequence of renormalizations,
/// where `M_j(x, y) = ℓ₀(ℓ₁(x, y) + (c₁, c₁))` undoes the rescaling and the
/// critical translation of step `j`.
pub struct Microscope<'a> {
    levels: Vec<Level<'a>>,
    pub words: StepWords,
    domains: Domains2D,
}

impl<'a> Microscope<'a> {
    /// `pairs[j] = ℛʲΣ` and `traces[j]` the trace of the step taking it to
    /// `ℛʲ⁺¹Σ`.
    pub fn new(pairs: &[&'a Pair2D], traces: &[StepTrace2D], cfg: &Renorm2DConfig) -> Result<Self> {
        let words = StepWords::new(&cfg.theta, cfg)?;
        let levels = pairs
            .iter()
            .zip(traces)
            .enumerate()
            .map(|(level, (&sigma, trace))| {
                let (ht, _) = renorm2d::h_transform(sigma, cfg).map_err(|source| CurveError::Microscope { level, source })?;
                Ok(Level { sigma, ht, trace: trace.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Microscope { levels, words, domains: cfg.domains })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn chart(&self, j: usize, (x, y): (C64, C64)) -> Result<(C64, C64)> {
        let lv = &self.levels[j];
        let t = &lv.trace;
        let m = |z: C64| t.l0 * (t.l1 * z + t.c1);
        lv.ht.inverse((m(x), m(y))).map_err(|source| CurveError::Microscope { level: j, source })
    }

    /// `Ψ^{Σⱼ}_w = Σⱼ^w ∘ L_{Σⱼ}`.
    pub fn psi(&self, j: usize, word: &[Letter], p: (C64, C64)) -> Result<(C64, C64)> {
        let q = self.chart(j, p)?;
        Ok(self.levels[j].sigma.eval_word(word, q)?)
    }

    /// `Φ = Ψ^{Σ₀}_{w⁰} ∘ … ∘ Ψ^{Σ_{d−1}}_{w^{d−1}}` for a chain of
    /// `(u, m)` pairs as in [`MicroCell`].
    pub fn phi(&self, chain: &[(Letter, usize)], p: (C64, C64)) -> Result<(C64, C64)> {
        let mut q = p;
        for (j, &(u, m)) in chain.iter().enumerate().rev() {
            q = self.psi(j, &self.words.of(u)[..m], q)?;
        }
        Ok(q)
    }

    /// `L_{Σ₀} ∘ … ∘ L_{Σ_{d−1}}`.
    pub fn chart_chain(&self, depth: usize, p: (C64, C64)) -> Result<(C64, C64)> {
        let mut q = p;
        for j in (0..depth).rev() {
            q = self.chart(j, q)?;
        }
        Ok(q)
    }

    /// The word of `Σ₀` equal to `Φ` when every level is the exact
    /// renormalization of the previous one: deeper prefixes are expanded
    /// letter by letter into `u_A`, `u_B` and run before the outer ones.
    pub fn word_of(&self, chain: &[(Letter, usize)]) -> Vec<Letter> {
        let mut word: Vec<Letter> = Vec::new();
        for &(u, m) in chain.iter().rev() {
            let mut expanded: Vec<Letter> = word.iter().flat_map(|&l| self.words.of(l).iter().copied()).collect();
            expanded.extend_from_slice(&self.words.of(u)[..m]);
            word = expanded;
        }
        word
    }

    /// Operator norm of `DΦ` at `p`, by central differences.
    pub fn phi_derivative_norm(&self, chain: &[(Letter, usize)], p: (C64, C64)) -> Result<f64> {
        let h = 1e-6;
        let mut m = Matrix2::<C64>::zeros();
        for col in 0..2 {
            let d = if col == 0 { (C64::new(h, 0.0), C64::new(0.0, 0.0)) } else { (C64::new(0.0, 0.0), C64::new(h, 0.0)) };
            let plus = self.phi(chain, (p.0 + d.0, p.1 + d.1))?;
            let minus = self.phi(chain, (p.0 - d.0, p.1 - d.1))?;
            m[(0, col)] = (plus.0 - minus.0) / (2.0 * h);
            m[(1, col)] = (plus.1 - minus.1) / (2.0 * h);
        }
        Ok(m.svd(false, false).singular_values[0])
    }

    /// The center of the half of `Υ` that carries the dynamics: the square
    /// root of the center of the `w`-disk on the side of `ξ(0) = 1` for `A`
    /// and of `η(0)` for `B`.
    pub fn base_point(&self, l: Letter) -> (C64, C64) {
        let zero = C64::new(0.0, 0.0);
        let (w, toward) = match l {
            Letter::Eta => (self.domains.a.center, C64::new(1.0, 0.0)),
            Letter::Xi => {
                let last = self.levels.last().map(|lv| lv.sigma.a.eval_unchecked(zero, zero));
                (self.domains.b.center, last.unwrap_or(C64::new(-0.22, 0.71)))
            }
        };
        let r = w.sqrt();
        let x = if (r - toward).norm() <= (-r - toward).norm() { r } else { -r };
        (x, zero)
    }

    /// Boundary samples of `Υ`: both square-root branches of the `w`-circle
    /// at `y = 0` and the `y`-circle above the base point.
    pub fn domain_samples(&self, l: Letter, count: usize) -> Vec<(C64, C64)> {
        let wd = match l {
            Letter::Eta => self.domains.a,
            Letter::Xi => self.domains.b,
        };
        let zero = C64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(3 * count);
        for w in wd.boundary(count) {
            let r = w.sqrt();
            out.push((r, zero));
            out.push((-r, zero));
        }
        // Half-step offset: on the real axis the continuation of H_Σ⁻¹ can
        // run into a critical point of the slice.
        let x0 = self.base_point(l).0;
        let m = (count / 2).max(1);
        for k in 0..m {
            let phase = std::f64::consts::TAU * (k as f64 + 0.5) / m as f64;
            out.push((x0, self.domains.y.center + C64::from_polar(self.domains.y.radius, phase)));
        }
        out
    }
}

/// Largest Euclidean distance in `ℂ²` among the points.
pub fn diameter(points: &[(C64, C64)]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(((p.0 - q.0).norm_sqr() + (p.1 - q.1).norm_sqr()).sqrt());
        }
    }
    best
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cell2D {
    pub cell: MicroCell,
    pub representative: (C64, C64),
    pub diameter: f64,
    /// Images of the boundary samples of `Υ`.
    #[serde(skip)]
    pub outline: Vec<(C64, C64)>,
}

/// The cells `Q = Φ(Υ)` of one depth, in the order of the rotation model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Partition2D {
    pub depth: usize,
    pub cells: Vec<Cell2D>,
}

impl Partition2D {
    pub fn max_diameter(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    /// Largest diameter ratio of cells adjacent in the rotation order.
    pub fn commensurability(&self) -> f64 {
        self.cells
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].diameter, w[1].diameter);
                a.max(b) / a.min(b)
            })
            .fold(1.0, f64::max)
    }
}

/// Boundary samples per domain circle used for cell diameters.
pub const CELL_SAMPLES: usize = 16;

pub fn partition2d(scope: &Microscope, depth: usize) -> Result<Partition2D> {
    if depth > scope.depth() {
        return Err(CurveError::Partition(format!("depth {depth} needs {depth} renormalizations, have {}", scope.depth())));
    }
    let cells = micro_cells(&scope.words, depth)?;
    let samples = [Letter::Eta, Letter::Xi].map(|l| scope.domain_samples(l, CELL_SAMPLES));
    let out = cells
        .into_par_iter()
        .map(|cell| {
            let chain = &cell.chain;
            let representative = scope.phi(chain, scope.base_point(cell.base))?;
            let idx = if cell.base == Letter::Eta { 0 } else { 1 };
            let outline = samples[idx].iter().map(|&p| scope.phi(chain, p)).collect::<Result<Vec<_>>>()?;
            Ok(Cell2D { diameter: diameter(&outline), representative, cell, outline })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition2D { depth, cells: out })
}

/// A Hénon seed pair with its renormalizations.
#[derive(Clone, Debug)]
pub struct RenormalizedSeed {
    pub chart: SeedChart,
    pub level: usize,
    pub pairs: Vec<Pair2D>,
    pub traces: Vec<StepTrace2D>,
}

impl RenormalizedSeed {
    pub fn new(h: &HenonMap, level: usize, steps: usize, cfg: &Renorm2DConfig) -> Result<Self> {
        let seed = henon::seed_pair(h, &cfg.theta, level, cfg)?;
        let chart = henon::seed_chart(h, &cfg.theta, level)?;
        let mut pairs = vec![seed.pair];
        let mut traces = Vec::with_capacity(steps);
        for _ in 0..steps {
            let (next, tr) = renorm2d::renorm2d_step_traced(pairs.last().expect("nonempty"), cfg)?;
            pairs.push(next);
            traces.push(tr);
        }
        Ok(RenormalizedSeed { chart, level, pairs, traces })
    }

    pub fn microscope<'a>(&'a self, depth: usize, cfg: &Renorm2DConfig) -> Result<Microscope<'a>> {
        let refs: Vec<&Pair2D> = self.pairs.iter().take(depth).collect();
        Microscope::new(&refs, &self.traces[..depth.min(self.traces.len())], cfg)
    }
}

/// Piecewise-constant approximation `φ_l` of the invariant curve, sampled
/// at one point per cell of the level-`(N + 2l)` partition of the circle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveApprox {
    pub depth: usize,
    pub level: usize,
    /// Cell of the circle `[0, 1)` carrying each point, ordered.
    pub cells: Vec<(f64, f64)>,
    /// Hénon coordinates, one per cell.
    pub points: Vec<(C64, C64)>,
    pub max_cell_diameter: f64,
    /// `sup |H∘φ_l − φ_l∘T_θ|` over the sample marks.
    pub defect: f64,
    pub closure_gap: f64,
    pub max_gap: f64,
    pub min_separation: f64,
    pub tiles_circle: bool,
    pub closed: bool,
    pub simple: bool,
}

impl CurveApprox {
    /// Index of the cell containing the mark `t ∈ [0, 1)`.
    pub fn cell_of(&self, t: f64) -> usize {
        let t = t.rem_euclid(1.0);
        match self.cells.partition_point(|c| c.0 <= t) {
            0 => self.cells.len() - 1,
            k => k - 1,
        }
    }

    pub fn marks(&self) -> Vec<f64> {
        self.cells.iter().map(|c| 0.5 * (c.0 + c.1)).collect()
    }
}

/// Points closer than this count as a self-intersection.
pub const SEPARATION_TOL: f64 = 1e-9;

/// Uniform marks added to the cell midpoints when measuring the defect.
pub const DEFECT_MARKS: usize = 4096;

fn henon_point(h: &HenonMap, chart: &SeedChart, p: (C64, C64)) -> (C64, C64) {
    let (x, yt) = chart.to_tilde(p);
    (x, h.a * yt)
}

/// The curve at the given depth from the renormalizations of a seed.
///
/// Cells of the microscope partition of `Σ₀` lying in the domain of `A`
/// are spread by `Hʲ`, `j < q_{N+1}`, the others by `Hʲ`, `j < q_N`;
/// positions on the circle come from the rotation model, where the normalized
/// coordinate `x` of `Σ₀` sits at `x·(q_Nθ − p_N)`.
pub fn invariant_curve(h: &HenonMap, rs: &RenormalizedSeed, depth: usize, cfg: &Renorm2DConfig) -> Result<CurveApprox> {
    require_golden(&cfg.theta)?;
    let scope = rs.microscope(depth, cfg)?;
    let part = partition2d(&scope, depth)?;
    let conv = convergents(&cfg.theta, rs.level + 2);
    let (pn, qn) = conv[rs.level];
    let qn1 = conv[rs.level + 1].1;
    let eps = Golden::new(-(pn as i64), qn as i64);

    struct Piece {
        lo: Golden,
        len: Golden,
        point: (C64, C64),
        diameter: f64,
    }
    let mut pieces: Vec<Piece> = part
        .cells
        .par_iter()
        .flat_map_iter(|c| {
            let iv = c.cell.interval.affine(eps, Golden::ZERO);
            let reps = if c.cell.interval.lo >= Golden::ZERO { qn1 } else { qn };
            let mut p = henon_point(h, &rs.chart, c.representative);
            let mut q: Vec<(C64, C64)> = c.outline.iter().map(|&z| henon_point(h, &rs.chart, z)).collect();
            let mut out = Vec::with_capacity(reps as usize);
            for j in 0..reps {
                let lo = (iv.lo + Golden::THETA * Golden::from(j as i64)).frac();
                out.push(Piece { lo, len: iv.len(), point: p, diameter: diameter(&q) });
                p = h.apply(p);
                for z in q.iter_mut() {
                    *z = h.apply(*z);
                }
            }
            out
        })
        .collect();
    pieces.sort_by(|a, b| a.lo.cmp(&b.lo));

    let mut tiles_circle = !pieces.is_empty();
    for (k, pc) in pieces.iter().enumerate() {
        let next = pieces.get(k + 1).map(|n| n.lo).unwrap_or(pieces[0].lo + Golden::ONE);
        if pc.lo + pc.len != next {
            tiles_circle = false;
        }
    }

    let cells: Vec<(f64, f64)> = pieces.iter().map(|pc| (pc.lo.value(), pc.lo.value() + pc.len.value())).collect();
    let points: Vec<(C64, C64)> = pieces.iter().map(|pc| pc.point).collect();
    let max_cell_diameter = pieces.iter().map(|pc| pc.diameter).fold(0.0, f64::max);
    let dist = |a: (C64, C64), b: (C64, C64)| ((a.0 - b.0).norm_sqr() + (a.1 - b.1).norm_sqr()).sqrt();
    let n = points.len();
    let gaps: Vec<f64> = (0..n).map(|k| dist(points[k], points[(k + 1) % n])).collect();
    let closure_gap = gaps[n - 1];
    let max_gap = gaps[..n - 1].iter().copied().fold(0.0, f64::max);

    let mut curve = CurveApprox {
        depth,
        level: rs.level,
        cells,
        points,
        max_cell_diameter,
        defect: 0.0,
        closure_gap,
        max_gap,
        min_separation: min_nonadjacent_separation(&as_real4(&pieces.iter().map(|p| p.point).collect::<Vec<_>>())),
        tiles_circle,
        closed: false,
        simple: false,
    };
    // Neighboring cells overlap up to their size, so consecutive samples,
    // including the last and the first, are at most one cell diameter apart.
    curve.closed = curve.tiles_circle && closure_gap.max(max_gap) <= max_cell_diameter;
    curve.simple = curve.min_separation > SEPARATION_TOL;
    let mut marks = curve.marks();
    marks.extend((0..DEFECT_MARKS).map(|k| (k as f64 + 0.5) / DEFECT_MARKS as f64));
    curve.defect = marks
        .iter()
        .map(|&t| {
            let here = curve.points[curve.cell_of(t)];
            let there = curve.points[curve.cell_of(t + THETA)];
            dist(h.apply(here), there)
        })
        .fold(0.0, f64::max);
    Ok(curve)
}

fn as_real4(points: &[(C64, C64)]) -> Vec<[f64; 4]> {
    points.iter().map(|p| [p.0.re, p.0.im, p.1.re, p.1.im]).collect()
}

/// Smallest distance between points that are not neighbors on the closed
/// polyline.
fn min_nonadjacent_separation(pts: &[[f64; 4]]) -> f64 {
    let n = pts.len();
    if n < 4 {
        return f64::INFINITY;
    }
    let tree: ImmutableKdTree<f64, 4> = ImmutableKdTree::new_from_slice(pts);
    let k = NonZero::new(5).expect("nonzero");
    let mut best = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        for nb in tree.nearest_n::<SquaredEuclidean>(p, k) {
            let j = nb.item as usize;
            let d = (i + n - j) % n;
            if d >= 2 && d <= n - 2 {
                best = best.min(nb.distance.sqrt());
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothnessRow {
    pub n: usize,
    pub q_n: u64,
    pub q_n1: u64,
    pub arc_points: usize,
    pub diam_arc: f64,
    pub diam_image: f64,
    /// `diam(H^{q_{n+1}}(Jₙ)) / diam(Jₙ)`.
    pub ratio: f64,
    /// `diam(H^{q_{n+1}}(Jₙ)) / diam(Jₙ)²`.
    pub r: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub rows: Vec<SmoothnessRow>,
    /// `max log rₙ − min log rₙ`.
    pub log_band: f64,
    pub max_ratio: f64,
    pub ratios_decreasing: bool,
}

/// `rₙ` over the arcs `Jₙ` from the critical mark 0 to `q_nθ − p_n`.
pub fn smoothness_diagnostic(
    h: &HenonMap,
    curve: &CurveApprox,
    theta: &RotationNumber,
    ns: std::ops::RangeInclusive<usize>,
) -> Result<SmoothnessReport> {
    let conv = convergents(theta, *ns.end() + 2);
    let marks = curve.marks();
    let mut rows = Vec::new();
    for n in ns {
        let (pn, qn) = conv[n];
        let qn1 = conv[n + 1].1;
        let e = qn as f64 * THETA - pn as f64;
        let inside = |t: f64| if e >= 0.0 { t <= e } else { t >= 1.0 + e };
        let arc: Vec<(C64, C64)> = marks.iter().zip(&curve.points).filter(|(t, _)| inside(**t)).map(|(_, p)| *p).collect();
        if arc.len() < 2 {
            return Err(CurveError::Arc { n, points: arc.len() });
        }
        let image = arc.iter().map(|&p| h.iterate(p, qn1)).collect::<std::result::Result<Vec<_>, _>>()?;
        let (da, di) = (diameter(&arc), diameter(&image));
        rows.push(SmoothnessRow { n, q_n: qn, q_n1: qn1, arc_points: arc.len(), diam_arc: da, diam_image: di, ratio: di / da, r: di / (da * da) });
    }
    let logs: Vec<f64> = rows.iter().map(|r| r.r.ln()).collect();
    let log_band = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - logs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let ratios_decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(SmoothnessReport { rows, log_band, max_ratio, ratios_decreasing })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeWitness {
    pub point: (C64, C64),
    pub direction: (C64, C64),
    /// `|ũ| / (ρ|ṽ|)` of the image direction.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeReport {
    pub rho: f64,
    pub samples: usize,
    pub directions: usize,
    pub violations: usize,
    /// The first few violating samples.
    pub witnesses: Vec<ConeWitness>,
    /// Largest `|ũ| / (ρ|ṽ|)`; below 1 means every cone maps inside.
    pub max_ratio: f64,
    /// Smallest `|DF⁻¹v| / |v|` over the tested directions.
    pub min_expansion: f64,
    /// Smallest `|∂ₓF₁| / |det DF|`, the expansion expected from a map
    /// that is nearly a product.
    pub predicted_expansion: f64,
}

impl ConeReport {
    /// `log₁₀` of measured over predicted expansion.
    pub fn prediction_gap(&self) -> f64 {
        (self.min_expansion / self.predicted_expansion).log10()
    }
}

const MAX_WITNESSES: usize = 16;

/// Tests `DF⁻¹(C^{v,ρ}) ⊂ C^{v,ρ}` at `F(p)` for every sample `p`, along
/// `directions` equally spaced directions on the boundary of the cone.
///
/// `jacobian` returns `DF(p)` together with its determinant, which for long
/// compositions is far below the roundoff of `ad − bc`.
pub fn cone_check(
    jacobian: impl Fn((C64, C64)) -> Result<([[C64; 2]; 2], C64)> + Sync,
    points: &[(C64, C64)],
    rho: f64,
    directions: usize,
) -> Result<ConeReport> {
    let jacobians = points.par_iter().map(|&p| jacobian(p)).collect::<Result<Vec<_>>>()?;
    Ok(cone_report(points, &jacobians, rho, directions))
}

/// [`cone_check`] with the derivatives and determinants already computed.
pub fn cone_report(points: &[(C64, C64)], jacobians: &[([[C64; 2]; 2], C64)], rho: f64, directions: usize) -> ConeReport {
    let mut report = ConeReport {
        rho,
        samples: points.len(),
        directions,
        violations: 0,
        witnesses: Vec::new(),
        max_ratio: 0.0,
        min_expansion: f64::INFINITY,
        predicted_expansion: f64::INFINITY,
    };
    for (&p, &([[a, b], [c, d]], det)) in points.iter().zip(jacobians) {
        report.predicted_expansion = report.predicted_expansion.min(a.norm() / det.norm());
        for k in 0..directions {
            let u = C64::from_polar(rho, std::f64::consts::TAU * k as f64 / directions as f64);
            let v = C64::new(1.0, 0.0);
            // adj(DF)·(u, v); the cone test only needs its direction.
            let ut = d * u - b * v;
            let vt = -c * u + a * v;
            let ratio = ut.norm() / (rho * vt.norm());
            let expansion = (ut.norm_sqr() + vt.norm_sqr()).sqrt() / (det.norm() * (u.norm_sqr() + v.norm_sqr()).sqrt());
            report.max_ratio = report.max_ratio.max(ratio);
            report.min_expansion = report.min_expansion.min(expansion);
            if !(ratio < 1.0) {
                report.violations += 1;
                if report.witnesses.len() < MAX_WITNESSES {
                    report.witnesses.push(ConeWitness { point: p, direction: (u, v), ratio });
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperbolicityOptions {
    pub k: usize,
    pub samples: usize,
    pub rho: f64,
    pub directions: usize,
    pub seed: u64,
}

impl Default for HyperbolicityOptions {
    fn default() -> Self {
        HyperbolicityOptions { k: 2, samples: 1024, rho: 0.5, directions: 32, seed: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HenonConeReport {
    pub level: usize,
    pub chart: SeedChart,
    pub report: ConeReport,
}

fn in_domains(d: &Domains2D, (x, y): (C64, C64)) -> bool {
    (d.a.contains(x * x, 0.0) || d.b.contains(x * x, 0.0)) && d.y.contains(y, 0.0)
}

fn sample_disk(rng: &mut StdRng, d: &DiskDomain) -> C64 {
    let r = d.radius * rng.random::<f64>().sqrt();
    d.center + C64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
}

/// Cone check for the inverse branches of the level-`n` pair of `H` on
/// `Δₙ ∖ Δₙ₊ₖ`, in the normalized coordinates of level `n`.
///
/// Half of the samples lie in the domain of `A = H^{q_{n+1}}`, half in that
/// of `B = H^{q_n}`; the derivative is the exact product along the orbit.
pub fn henon_cone_check(h: &HenonMap, theta: &RotationNumber, n: usize, d: &Domains2D, opts: &HyperbolicityOptions) -> Result<HenonConeReport> {
    let outer = henon::seed_chart(h, theta, n)?;
    let inner = henon::seed_chart(h, theta, n + opts.k)?;
    if (outer.c_minus - inner.c_minus).norm() > 1e-12 {
        return Err(CurveError::Partition(format!("levels {n} and {} use different preimages of 0", n + opts.k)));
    }
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let mut points = Vec::with_capacity(opts.samples);
    let mut tries = 0usize;
    while points.len() < opts.samples {
        tries += 1;
        if tries > 1000 * opts.samples {
            return Err(CurveError::Partition("Δₙ ∖ Δₙ₊ₖ is too thin to sample".into()));
        }
        let letter = if points.len() % 2 == 0 { Letter::Eta } else { Letter::Xi };
        let wd = if letter == Letter::Eta { d.a } else { d.b };
        let x = sample_disk(&mut rng, &wd).sqrt() * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let y = sample_disk(&mut rng, &d.y);
        let deep = inner.from_tilde(outer.to_tilde((x, y)));
        if in_domains(d, deep) {
            continue;
        }
        points.push((letter, (x, y)));
    }
    let a2 = h.a * h.a;
    let jac = |letter: Letter, p: (C64, C64)| -> Result<([[C64; 2]; 2], C64)> {
        let q = if letter == Letter::Eta { outer.qn1 } else { outer.qn };
        let mut z = outer.to_tilde(p);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut m = [[one, zero], [zero, one]];
        for step in 0..q {
            let j = [[2.0 * z.0, a2], [one, zero]];
            m = [
                [j[0][0] * m[0][0] + j[0][1] * m[1][0], j[0][0] * m[0][1] + j[0][1] * m[1][1]],
                [j[1][0] * m[0][0] + j[1][1] * m[1][0], j[1][0] * m[0][1] + j[1][1] * m[1][1]],
            ];
            z = h.apply_tilde(z);
            if !(z.0.norm().max(z.1.norm()) < 1e8) {
                return Err(HenonError::Escape { step: step + 1, size: z.0.norm().max(z.1.norm()) }.into());
            }
        }
        Ok((m, (-a2).powu(q as u32)))
    };
    let jacobians = points.par_iter().map(|&(l, p)| jac(l, p)).collect::<Result<Vec<_>>>()?;
    let points: Vec<(C64, C64)> = points.into_iter().map(|(_, p)| p).collect();
    let report = cone_report(&points, &jacobians, opts.rho, opts.directions);
    Ok(HenonConeReport { level: n, chart: outer, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_sign_is_exact() {
        // θ² + θ − 1 = 0 and θ⁵ − (5θ − 3) = 0.
        assert_eq!(Golden::theta_pow(2) + Golden::THETA - Golden::ONE, Golden::ZERO);
        assert_eq!(Golden::theta_pow(5), Golden::new(-3, 5));
        assert_eq!(Golden::new(-3, 5).signum(), 1);
        assert_eq!(Golden::new(3, -5).signum(), -1);
        assert_eq!(Golden::new(34, -55).signum(), (34.0 - 55.0 * THETA).signum() as i32);
        assert_eq!(Golden::new(5, -3).floor(), 3);
        assert_eq!(Golden::new(-1, 1).floor(), -1);
    }

    #[test]
    fn first_partition_has_golden_lengths() {
        let p = partition1d(&RotationNumber::golden(), 0).unwrap();
        let lens: Vec<f64> = p.cells.iter().map(|c| c.interval.len().value()).collect();
        assert!((lens[0] - 0.381966).abs() < 1e-6 && (lens[1] - 0.236068).abs() < 1e-6);
        assert!(p.check().ok());
    }

    #[test]
    fn partition_counts_follow_fibonacci() {
        let theta = RotationNumber::golden();
        for n in 0..10 {
            let p = partition1d(&theta, n).unwrap();
            let q = convergents(&theta, n + 3);
            assert_eq!(p.cells.len() as u64, q[n].1 + q[n + 1].1, "level {n}");
            assert!(p.check().ok(), "level {n}: {:?}", p.check().failures);
        }
    }

    #[test]
    fn microscope_cells_tile_the_normalized_domains() {
        let cfg = Renorm2DConfig::default();
        let w = StepWords::new(&cfg.theta, &cfg).unwrap();
        let support = Interval::between(-Golden::THETA, Golden::ONE);
        for depth in 0..6 {
            let cells = micro_cells(&w, depth).unwrap();
            let iv: Vec<Interval> = cells.iter().map(|c| c.interval).collect();
            let check = check_tiling(&iv, support);
            assert!(check.ok(), "depth {depth}: {:?}", check.failures);
        }
    }

    #[test]
    fn diagonal_map_preserves_vertical_cones() {
        let jac = |_p: (C64, C64)| -> Result<([[C64; 2]; 2], C64)> {
            Ok(([[C64::new(2.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.1, 0.0)]], C64::new(0.2, 0.0)))
        };
        let pts = vec![(C64::new(0.1, 0.0), C64::new(0.2, 0.0))];
        let r = cone_check(jac, &pts, 0.5, 32).unwrap();
        assert_eq!(r.violations, 0);
        assert!((r.max_ratio - 0.05).abs() < 1e-12);
        // On (0, 1) the inverse expands by 10.
        let lo = ((0.25f64 / 4.0 + 100.0) / 1.25).sqrt();
        assert!((r.min_expansion - lo).abs() < 1e-9);
        assert!((r.predicted_expansion - 10.0).abs() < 1e-12 && r.prediction_gap().abs() < 1.0);
    }

    #[test]
    fn shear_breaks_vertical_cones() {
        let jac = |_p: (C64, C64)| -> Result<([[C64; 2]; 2], C64)> {
            Ok(([[C64::new(1.0, 0.0), C64::new(3.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]], C64::new(1.0, 0.0)))
        };
        let r = cone_check(jac, &[(C64::new(0.0, 0.0), C64::new(0.0, 0.0))], 0.5, 32).unwrap();
        assert!(r.violations > 0 && !r.witnesses.is_empty());
    }
}
