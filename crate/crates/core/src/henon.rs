//! Complex Hénon maps `H(x, y) = (x² + c + a·y, a·x)` near a semi-Siegel
//! fixed point: multipliers, linearization, boundary clouds, seeds for the
//! two-dimensional renormalization and the search for the stable parameter.

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::afunc::{AfuncError, ParityMap2D, C64};
use crate::renorm1d::{self, Pair1D, Renorm1DError};
use crate::renorm2d::{self, embed, ClassLimits, Pair2D, Renorm2DConfig, Renorm2DError};
use crate::words::{convergents, RotationNumber};

#[derive(Debug, Error, Clone)]
pub enum HenonError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("orbit escaped at step {step}: |z| = {size:.3e}")]
    Escape { step: u64, size: f64 },
    #[error("degenerate fixed point: {0}")]
    Degenerate(String),
    #[error("small divisor at index ({i}, {j}): |divisor| = {size:.3e}")]
    SmallDivisor { i: usize, j: usize, size: f64 },
    #[error("coefficient ({i}, {j}) of the linearization overflows")]
    Overflow { i: usize, j: usize },
    #[error("no radius with residual below {tol:.1e}; best residual {best:.3e} at r = {radius:.3e}")]
    Radius { tol: f64, best: f64, radius: f64 },
    #[error("no sign change of the expanding coordinate; scan {scan:?}")]
    Bracket { scan: Vec<(f64, Option<f64>)> },
    #[error(transparent)]
    Fit(#[from] AfuncError),
    #[error(transparent)]
    Renorm1D(#[from] Renorm1DError),
    #[error(transparent)]
    Renorm2D(#[from] Renorm2DError),
}

pub type Result<T> = std::result::Result<T, HenonError>;

const ESCAPE: f64 = 1e8;

/// `c = (1 − a²)(λ/2 − a²/(2λ)) − (λ/2 − a²/(2λ))²`, the parameter for which
/// one fixed point has multiplier `λ`.
pub fn c_from(lambda: C64, a2: C64) -> Result<C64> {
    if lambda == C64::new(0.0, 0.0) {
        return Err(HenonError::Invalid("λ = 0".into()));
    }
    let x = lambda / 2.0 - a2 / (2.0 * lambda);
    Ok((1.0 - a2) * x - x * x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x: C64,
    pub y: C64,
    /// Eigenvalues of `DH`, the one of larger modulus first.
    pub multipliers: [C64; 2],
}

impl FixedPoint {
    pub fn is_semi_siegel(&self) -> bool {
        (self.multipliers[0].norm() - 1.0).abs() < 1e-6 && self.multipliers[1].norm() < 1.0 - 1e-6
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HenonMap {
    pub c: C64,
    pub a: C64,
}

impl HenonMap {
    pub fn new(c: C64, a: C64) -> Self {
        HenonMap { c, a }
    }

    /// The map with a fixed point of multipliers `λ` and `μ`, so that
    /// `a² = −λμ`. The principal root is taken for `a`.
    pub fn semi_siegel(lambda: C64, mu: C64) -> Result<Self> {
        let a = (-lambda * mu).sqrt();
        Ok(HenonMap { c: c_from(lambda, a * a)?, a })
    }

    pub fn semi_siegel_with_a(lambda: C64, a: C64) -> Result<Self> {
        Ok(HenonMap { c: c_from(lambda, a * a)?, a })
    }

    pub fn apply(&self, (x, y): (C64, C64)) -> (C64, C64) {
        (x * x + self.c + self.a * y, self.a * x)
    }

    pub fn apply_inverse(&self, (x, y): (C64, C64)) -> Result<(C64, C64)> {
        if self.a == C64::new(0.0, 0.0) {
            return Err(HenonError::Invalid("the map is not invertible at a = 0".into()));
        }
        let xp = y / self.a;
        Ok((xp, (x - xp * xp - self.c) / self.a))
    }

    pub fn iterate(&self, p: (C64, C64), n: u64) -> Result<(C64, C64)> {
        let mut q = p;
        for step in 0..n {
            q = self.apply(q);
            check_escape(q, step + 1)?;
        }
        Ok(q)
    }

    pub fn inverse_iterate(&self, p: (C64, C64), n: u64) -> Result<(C64, C64)> {
        let mut q = p;
        for step in 0..n {
            q = self.apply_inverse(q)?;
            check_escape(q, step + 1)?;
        }
        Ok(q)
    }

    pub fn jacobian(&self, (x, _): (C64, C64)) -> [[C64; 2]; 2] {
        [[2.0 * x, self.a], [self.a, C64::new(0.0, 0.0)]]
    }

    pub fn fixed_points(&self) -> Result<[FixedPoint; 2]> {
        let b = 1.0 - self.a * self.a;
        let disc = b * b - 4.0 * self.c;
        if disc.norm() < 1e-14 {
            return Err(HenonError::Degenerate(format!("double fixed point at c = {}", self.c)));
        }
        let r = disc.sqrt();
        Ok([(b + r) / 2.0, (b - r) / 2.0].map(|x| {
            let s = (x * x + self.a * self.a).sqrt();
            let (m1, m2) = (x + s, x - s);
            let multipliers = if m1.norm() >= m2.norm() { [m1, m2] } else { [m2, m1] };
            FixedPoint { x, y: self.a * x, multipliers }
        }))
    }

    pub fn semi_siegel_point(&self) -> Result<FixedPoint> {
        self.fixed_points()?
            .into_iter()
            .find(FixedPoint::is_semi_siegel)
            .ok_or_else(|| HenonError::Degenerate("no semi-Siegel fixed point".into()))
    }

    /// The map in the coordinates `(x, ỹ) = (x, y/a)`, where `ỹ` is the
    /// previous first coordinate: `(x² + c + a²ỹ, x)`.
    pub fn apply_tilde(&self, (x, yt): (C64, C64)) -> (C64, C64) {
        (x * x + self.c + self.a * self.a * yt, x)
    }

    pub fn iterate_tilde(&self, p: (C64, C64), n: u64) -> Result<(C64, C64)> {
        let mut q = p;
        for step in 0..n {
            q = self.apply_tilde(q);
            check_escape(q, step + 1)?;
        }
        Ok(q)
    }
}

fn check_escape((x, y): (C64, C64), step: u64) -> Result<()> {
    let size = x.norm().max(y.norm());
    if size.is_finite() && size < ESCAPE {
        Ok(())
    } else {
        Err(HenonError::Escape { step, size })
    }
}

/// `φ(s, t) = q + Σ φᵢⱼ sⁱ tʲ` with `H ∘ φ = φ ∘ L`, `L(s, t) = (λs, μt)`.
///
/// The `s`-direction is normalized by `φ₁₀ = (1, a/λ)` and the
/// `t`-direction by `φ₀₁ = (−a/λ, 1)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Linearization {
    pub map: HenonMap,
    pub fixed_point: FixedPoint,
    /// Orders in `s` and `t`.
    pub orders: (usize, usize),
    /// `coeffs[i][j] = (φ₁ᵢⱼ, φ₂ᵢⱼ)`.
    pub coeffs: Vec<Vec<(C64, C64)>>,
}

/// Divisors below this (relative to the size of the terms they combine)
/// count as resonant. The coefficients themselves grow like `r⁻ⁿ` with `r`
/// the conformal radius, so their size says nothing about resonance.
const SMALL_DIVISOR_TOL: f64 = 1e-13;

pub fn linearize(h: &HenonMap, orders: (usize, usize)) -> Result<Linearization> {
    let fp = h.semi_siegel_point()?;
    let [lambda, mu] = fp.multipliers;
    let (ns, nt) = orders;
    let zero = C64::new(0.0, 0.0);
    let mut p = vec![vec![zero; nt + 1]; ns + 1];
    let mut q = vec![vec![zero; nt + 1]; ns + 1];
    p[0][0] = fp.x;
    q[0][0] = fp.y;
    if ns >= 1 {
        p[1][0] = C64::new(1.0, 0.0);
        q[1][0] = h.a / lambda;
    }
    if nt >= 1 {
        p[0][1] = -h.a / lambda;
        q[0][1] = C64::new(1.0, 0.0);
    }
    for deg in 2..=(ns + nt) {
        for i in deg.saturating_sub(nt)..=deg.min(ns) {
            let j = deg - i;
            // Quadratic part of φ₁² without the terms containing φᵢⱼ.
            let mut r = zero;
            for i1 in 0..=i {
                for j1 in 0..=j {
                    let (i2, j2) = (i - i1, j - j1);
                    if (i1 + j1 == 0) || (i2 + j2 == 0) {
                        continue;
                    }
                    r += p[i1][j1] * p[i2][j2];
                }
            }
            let m = lambda.powu(i as u32) * mu.powu(j as u32);
            let det = m * m - 2.0 * fp.x * m - h.a * h.a;
            let scale = m.norm_sqr() + 2.0 * (fp.x * m).norm() + h.a.norm_sqr();
            let (pi, qi) = if !(det.norm() > SMALL_DIVISOR_TOL * scale) {
                if r != zero {
                    return Err(HenonError::SmallDivisor { i, j, size: det.norm() });
                }
                (zero, zero)
            } else {
                (r * m / det, r * h.a / det)
            };
            if !(pi.is_finite() && qi.is_finite()) {
                return Err(HenonError::Overflow { i, j });
            }
            p[i][j] = pi;
            q[i][j] = qi;
        }
    }
    let coeffs = (0..=ns).map(|i| (0..=nt).map(|j| (p[i][j], q[i][j])).collect()).collect();
    Ok(Linearization { map: *h, fixed_point: fp, orders, coeffs })
}

impl Linearization {
    pub fn eval(&self, s: C64, t: C64) -> (C64, C64) {
        let (ns, nt) = self.orders;
        let zero = C64::new(0.0, 0.0);
        let mut out = (zero, zero);
        for i in (0..=ns).rev() {
            let mut row = (zero, zero);
            for j in (0..=nt).rev() {
                if i + j > ns + nt {
                    continue;
                }
                let (a, b) = self.coeffs[i][j];
                row = (row.0 * t + a, row.1 * t + b);
            }
            out = (out.0 * s + row.0, out.1 * s + row.1);
        }
        out
    }

    pub fn multipliers(&self) -> [C64; 2] {
        self.fixed_point.multipliers
    }

    /// `sup |H(φ(s, t)) − φ(λs, μt)|` over `m` points on each of the
    /// circles `|s| = rs`, `|t| = rt` (only `t = 0` when `rt = 0`).
    pub fn residual(&self, rs: f64, rt: f64, m: usize) -> f64 {
        let [lambda, mu] = self.multipliers();
        let ts: Vec<C64> = if rt == 0.0 {
            vec![C64::new(0.0, 0.0)]
        } else {
            (0..m).map(|k| C64::from_polar(rt, std::f64::consts::TAU * k as f64 / m as f64)).collect()
        };
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let s = C64::from_polar(rs, std::f64::consts::TAU * (k as f64 + 0.5) / m as f64);
            for &t in &ts {
                let lhs = self.map.apply(self.eval(s, t));
                let rhs = self.eval(lambda * s, mu * t);
                worst = worst.max((lhs.0 - rhs.0).norm()).max((lhs.1 - rhs.1).norm());
            }
        }
        worst
    }
}

/// Points `(x, y)` of a cloud in ℂ², written as CSV rows
/// `re_x, im_x, re_y, im_y`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCloud {
    pub radius: f64,
    pub residual: f64,
    pub points: Vec<(C64, C64)>,
    /// Hausdorff distance between the cloud and its image under `H`.
    pub invariance: f64,
    /// Largest distance from the cloud of `ORBIT_PUSH` iterates of one point.
    pub orbit_drift: f64,
}

const ORBIT_PUSH: u64 = 1000;
const RADIUS_TOL: f64 = 1e-6;

fn to4((x, y): (C64, C64)) -> [f64; 4] {
    [x.re, x.im, y.re, y.im]
}

/// Largest distance from a point of `a` to the set `b`.
pub fn directed_hausdorff(a: &[(C64, C64)], b: &[(C64, C64)]) -> f64 {
    let pts: Vec<[f64; 4]> = b.iter().map(|&p| to4(p)).collect();
    let tree: ImmutableKdTree<f64, 4> = ImmutableKdTree::new_from_slice(&pts);
    a.par_iter().map(|p| tree.nearest_one::<SquaredEuclidean>(&to4(*p)).distance.sqrt()).reduce(|| 0.0, f64::max)
}

pub fn hausdorff(a: &[(C64, C64)], b: &[(C64, C64)]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Largest radius (found by bisection) at which the `t = 0` restriction of
/// the linearization has residual below `RADIUS_TOL`.
pub fn siegel_radius(lin: &Linearization) -> Result<(f64, f64)> {
    let m = 256;
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    let mut best = (0.0, f64::INFINITY);
    for _ in 0..40 {
        let r = 0.5 * (lo + hi);
        let res = lin.residual(r, 0.0, m);
        if res < RADIUS_TOL {
            lo = r;
            best = (r, res);
        } else {
            hi = r;
        }
    }
    if best.0 == 0.0 {
        let r = 1e-3;
        return Err(HenonError::Radius { tol: RADIUS_TOL, best: lin.residual(r, 0.0, m), radius: r });
    }
    Ok(best)
}

pub fn boundary_points(h: &HenonMap, count: usize, order: usize) -> Result<BoundaryCloud> {
    let lin = linearize(h, (order, 0))?;
    let (radius, residual) = siegel_radius(&lin)?;
    let points: Vec<(C64, C64)> = (0..count)
        .map(|k| lin.eval(C64::from_polar(radius, std::f64::consts::TAU * k as f64 / count as f64), C64::new(0.0, 0.0)))
        .collect();
    let image: Vec<(C64, C64)> = points.iter().map(|&p| h.apply(p)).collect();
    let invariance = hausdorff(&image, &points);
    let mut orbit = Vec::with_capacity(ORBIT_PUSH as usize);
    let mut p = points[0];
    for step in 0..ORBIT_PUSH {
        p = h.apply(p);
        check_escape(p, step + 1)?;
        orbit.push(p);
    }
    let orbit_drift = directed_hausdorff(&orbit, &points);
    Ok(BoundaryCloud { radius, residual, points, invariance, orbit_drift })
}

/// A renormalization pair `(A, B) = Λ⁻¹ ∘ (H̃^{q_{N+1}}, H̃^{q_N}) ∘ Λ`, built
/// in the coordinates `(x, ỹ)` of [`HenonMap::apply_tilde`] with
/// `Λ(x, y) = (l·x, c₋₁ + l·y)`.
///
/// `c₋₁` is the preimage `±√(−c)` of 0 visited just before the close
/// returns of the critical orbit and `l = π₁H̃^{q_N}(0, c₋₁)`. At `a = 0`
/// the first components are the quadratic seed of the same level.
#[derive(Clone, Debug)]
pub struct SeedPair {
    pub pair: Pair2D,
    pub level: usize,
    pub scale: C64,
    pub c_minus: C64,
    pub delta: f64,
}

/// Normalization of the level-`N` return maps: `Λ(x, y) = (l·x, c₋₁ + l·y)`
/// in the coordinates `(x, ỹ)`, with return times `q_N` and `q_{N+1}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeedChart {
    pub c_minus: C64,
    pub scale: C64,
    pub qn: u64,
    pub qn1: u64,
}

impl SeedChart {
    /// From normalized coordinates to `(x, ỹ)`.
    pub fn to_tilde(&self, (x, y): (C64, C64)) -> (C64, C64) {
        (self.scale * x, self.c_minus + self.scale * y)
    }

    pub fn from_tilde(&self, (x, yt): (C64, C64)) -> (C64, C64) {
        (x / self.scale, (yt - self.c_minus) / self.scale)
    }
}

pub fn seed_chart(h: &HenonMap, theta: &RotationNumber, level: usize) -> Result<SeedChart> {
    let q = convergents(theta, level + 2);
    if q.len() < level + 2 {
        return Err(HenonError::Invalid(format!("rotation number has fewer than {} convergents", level + 2)));
    }
    let (qn, qn1) = (q[level].1, q[level + 1].1);
    if qn == 0 {
        return Err(HenonError::Invalid(format!("level {level} has no return time")));
    }
    let zero = C64::new(0.0, 0.0);
    let root = (-h.c).sqrt();
    let before = h.iterate_tilde((zero, zero), qn - 1)?.0;
    let c_minus = if (before - root).norm() <= (before + root).norm() { root } else { -root };
    let scale = h.iterate_tilde((zero, c_minus), qn)?.0;
    Ok(SeedChart { c_minus, scale, qn, qn1 })
}

pub fn seed_pair(h: &HenonMap, theta: &RotationNumber, level: usize, cfg: &Renorm2DConfig) -> Result<SeedPair> {
    seed_pair_with_limits(h, theta, level, cfg, &ClassLimits::default())
}

pub fn seed_pair_with_limits(
    h: &HenonMap,
    theta: &RotationNumber,
    level: usize,
    cfg: &Renorm2DConfig,
    limits: &ClassLimits,
) -> Result<SeedPair> {
    let SeedChart { c_minus, scale, qn, qn1 } = seed_chart(h, theta, level)?;
    let d = cfg.domains;
    let fit = |w, n: u64, comp: usize| -> Result<ParityMap2D> {
        ParityMap2D::try_from_fn(w, d.y, cfg.orders, cfg.samples(), |x, y| {
            let p = h.iterate_tilde((scale * x, c_minus + scale * y), n)?;
            Ok::<C64, HenonError>(if comp == 0 { p.0 / scale } else { (p.1 - c_minus) / scale })
        })
    };
    let pair = Pair2D { a: fit(d.a, qn1, 0)?, h: fit(d.a, qn1, 1)?, b: fit(d.b, qn, 0)?, g: fit(d.b, qn, 1)? };
    let delta = pair.delta();
    renorm2d::check_membership(&pair, None, limits)?;
    Ok(SeedPair { pair, level, scale, c_minus, delta })
}

/// Left eigenvector of `m` for the eigenvalue closest to `shift`, by inverse
/// iteration on the transpose.
fn left_eigenvector(m: &DMatrix<C64>, shift: C64) -> Result<DVector<C64>> {
    let n = m.nrows();
    let a = m.transpose() - DMatrix::<C64>::identity(n, n) * (shift * (1.0 + 1e-10));
    let lu = a.lu();
    let mut u = DVector::from_element(n, C64::new(1.0, 0.0));
    for _ in 0..8 {
        u = lu.solve(&u).ok_or_else(|| HenonError::Degenerate("singular shifted Jacobian".into()))?;
        let s = u.norm();
        u /= C64::new(s, 0.0);
    }
    Ok(u)
}

/// Measures the unstable coordinate of slices relative to `ζ*`.
pub struct ExpandingCoordinate {
    pub zstar: Pair1D,
    pub kappa: C64,
    left: DVector<C64>,
}

impl ExpandingCoordinate {
    pub fn new(zstar: Pair1D, cfg: &Renorm2DConfig) -> Result<Self> {
        let c1 = cfg.one_d();
        let jac = renorm1d::jacobian_matrix(&zstar, &c1)?;
        let eigs = renorm1d::eigenvalues(&jac)?;
        let kappa = eigs[0];
        let left = left_eigenvector(&jac, kappa)?;
        Ok(ExpandingCoordinate { zstar, kappa, left })
    }

    pub fn measure(&self, sigma: &Pair2D) -> C64 {
        let v = renorm2d::slice(sigma).to_vec();
        let z = self.zstar.to_vec();
        v.iter().zip(&z).zip(self.left.iter()).map(|((a, b), u)| (a - b) * u).sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamSearch {
    /// The multiplier `l*` at the crossing.
    pub l_star: C64,
    /// Angle offset `t*` with `l* = λ₁·e^{i t*}`.
    pub t_star: f64,
    /// Coefficient distance from `ι(ζ*)` after the requested number of steps.
    pub distance: f64,
    /// Growth of the expanding coordinate per step near the crossing.
    pub growth: f64,
    /// `(t, expanding coordinate along the bracket direction)` of the
    /// initial scan; `None` marks parameters that left the class.
    pub scan: Vec<(f64, Option<f64>)>,
}

/// Options of [`stable_param_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub level: usize,
    pub steps: usize,
    /// Half-width of the initial bracket along the circle.
    pub width: f64,
    pub scan_points: usize,
    pub refine_points: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { level: 6, steps: 6, width: 0.05, scan_points: 64, refine_points: 16 }
    }
}

/// The pair obtained from the map with multipliers `(λ₁e^{it}, μ)` after
/// `steps` renormalizations.
pub fn renormalized_family_member(
    theta: &RotationNumber,
    mu: C64,
    t: f64,
    steps: usize,
    level: usize,
    cfg: &Renorm2DConfig,
) -> Result<Pair2D> {
    let l = theta.multiplier() * C64::from_polar(1.0, t);
    let h = HenonMap::semi_siegel(l, mu)?;
    let mut s = seed_pair(&h, theta, level, cfg)?.pair;
    for _ in 0..steps {
        s = renorm2d::renorm2d_step(&s, cfg)?;
    }
    Ok(s)
}

/// Searches `l = λ₁e^{it}`, `|t| ≤ width`, for the parameter whose
/// renormalizations stay near `ι(ζ*)`.
///
/// The expanding coordinate `v(t)` after `d` steps behaves like
/// `β κᵈ (t − t*)`. At each depth the scan locates a sign change of
/// `Re(v·β̄)`; the bracket is then narrowed at the next depth and finally
/// refined by bisection.
pub fn stable_param_search(
    theta: &RotationNumber,
    mu: C64,
    opts: &SearchOptions,
    coord: &ExpandingCoordinate,
    cfg: &Renorm2DConfig,
) -> Result<ParamSearch> {
    let eval = |t: f64, d: usize| -> Option<C64> {
        renormalized_family_member(theta, mu, t, d, opts.level, cfg).ok().map(|s| coord.measure(&s))
    };
    let (mut lo, mut hi) = (-opts.width, opts.width);
    let mut first_scan = None;
    let mut beta = C64::new(1.0, 0.0);
    for d in 1..=opts.steps {
        let n = if d == 1 { opts.scan_points } else { opts.refine_points };
        let ts: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let vs: Vec<Option<C64>> = ts.iter().map(|&t| eval(t, d)).collect();
        // Direction of v along the family, from the two smallest successful values.
        let mut ok: Vec<(f64, C64)> = ts.iter().zip(&vs).filter_map(|(t, v)| v.map(|v| (*t, v))).collect();
        ok.sort_by(|a, b| a.1.norm().total_cmp(&b.1.norm()));
        if ok.len() >= 2 {
            let (ta, va) = ok[0];
            let (tb, vb) = ok[1];
            if ta != tb {
                let slope = (vb - va) / (tb - ta);
                if slope.norm() > 0.0 {
                    beta = slope / slope.norm();
                }
            }
        }
        let real: Vec<Option<f64>> = vs.iter().map(|v| v.map(|v| (v * beta.conj()).re)).collect();
        if d == 1 {
            first_scan = Some(ts.iter().copied().zip(real.iter().copied()).collect::<Vec<_>>());
        }
        let bracket = (0..n - 1).find_map(|k| match (real[k], real[k + 1]) {
            (Some(a), Some(b)) if a == 0.0 || a.signum() != b.signum() => Some((ts[k], ts[k + 1])),
            _ => None,
        });
        let Some((a, b)) = bracket else {
            return Err(HenonError::Bracket { scan: ts.into_iter().zip(real).collect() });
        };
        (lo, hi) = (a, b);
    }
    let f = |t: f64| eval(t, opts.steps).map(|v| (v * beta.conj()).re);
    let mut flo = f(lo).ok_or_else(|| HenonError::Bracket { scan: vec![(lo, None)] })?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let Some(fm) = f(mid) else { break };
        if fm == 0.0 {
            (lo, hi) = (mid, mid);
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let t_star = 0.5 * (lo + hi);
    let s = renormalized_family_member(theta, mu, t_star, opts.steps, opts.level, cfg)?;
    let target = embed(&coord.zstar, cfg.domains.y, cfg.orders.1);
    let distance = s.coeff_distance(&target);
    // Growth per step from the expanding coordinate at two depths.
    let dt = 1e-9_f64.max((hi - lo).abs());
    let growth = match (eval(t_star + dt, opts.steps - 1), eval(t_star, opts.steps - 1), eval(t_star + dt, opts.steps), eval(t_star, opts.steps)) {
        (Some(a1), Some(b1), Some(a2), Some(b2)) => (a2 - b2).norm() / (a1 - b1).norm(),
        _ => f64::NAN,
    };
    Ok(ParamSearch {
        l_star: theta.multiplier() * C64::from_polar(1.0, t_star),
        t_star,
        distance,
        growth,
        scan: first_scan.unwrap_or_default(),
    })
}
