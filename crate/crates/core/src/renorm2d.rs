//! Pairs of two-dimensional maps near the embedded one-dimensional pairs and
//! the renormalization operator acting on them.
//!
//! A pair `Σ = (A, B)` has components `A = (a, h)` and `B = (b, g)`, each a
//! [`ParityMap2D`] in `(w = x², y)`. One step is `Λ⁻¹ ∘ Π₂ ∘ Π₁ ∘ pℛ ∘ Λ`,
//! where the pre-renormalization `pℛ` is pulled back by the change of
//! variables `H_Σ(x, y) = (a(x, y), w⁻¹_{q₀⁻¹(y)}(y))`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::afunc::{AfuncError, AnalyticMap1D, DiskDomain, Jet2, ParityMap1D, ParityMap2D, C64};
use crate::renorm1d::{self, Domains1D, Pair1D, Renorm1DConfig, Renorm1DError, SpectrumReport};
use crate::words::{self, k_of_period, operator_split, renorm_words, Letter, RotationNumber, WordsError};

#[derive(Debug, Error, Clone)]
pub enum Renorm2DError {
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: AfuncError },
    #[error("{stage}: {detail}")]
    Solve { stage: &'static str, detail: String },
    #[error("pair is outside the renormalizable class: {detail}")]
    Membership { detail: String, delta: f64 },
    #[error(transparent)]
    OneD(#[from] Renorm1DError),
    #[error("words: {0}")]
    Words(#[from] WordsError),
}

pub type Result<T> = std::result::Result<T, Renorm2DError>;

trait At<T> {
    fn at(self, stage: &'static str) -> Result<T>;
}

impl<T> At<T> for std::result::Result<T, AfuncError> {
    fn at(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| Renorm2DError::Stage { stage, source })
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = C64::new(0.0, 0.0);

/// Disks carrying `A` and `B`: one `w`-disk each and a shared `y`-disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domains2D {
    pub a: DiskDomain,
    pub b: DiskDomain,
    pub y: DiskDomain,
}

impl Default for Domains2D {
    fn default() -> Self {
        Domains2D::from_1d(Domains1D::default(), DiskDomain::centered(1.2))
    }
}

impl Domains2D {
    pub fn from_1d(d: Domains1D, y: DiskDomain) -> Self {
        Domains2D { a: d.eta, b: d.xi, y }
    }

    pub fn one_d(&self) -> Domains1D {
        Domains1D { eta: self.a, xi: self.b }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Renorm2DConfig {
    pub theta: RotationNumber,
    /// Truncation orders in `w` and `y`.
    pub orders: (usize, usize),
    /// Boundary samples in `w` and `y`; zeros pick twice the next power of
    /// two above each order.
    #[serde(default)]
    pub samples: (usize, usize),
    #[serde(default)]
    pub domains: Domains2D,
    /// Radius of the disk searched for the critical points of Π₁.
    #[serde(default = "default_search_radius")]
    pub search_radius: f64,
}

fn default_search_radius() -> f64 {
    0.3
}

impl Default for Renorm2DConfig {
    fn default() -> Self {
        Renorm2DConfig {
            theta: RotationNumber::golden(),
            orders: (32, 6),
            samples: (0, 0),
            domains: Domains2D::default(),
            search_radius: default_search_radius(),
        }
    }
}

impl Renorm2DConfig {
    pub fn with_orders(nw: usize, ny: usize) -> Self {
        Renorm2DConfig { orders: (nw, ny), ..Default::default() }
    }

    pub fn samples(&self) -> (usize, usize) {
        let auto = |n: usize, m: usize| if m > 0 { m } else { 2 * (n + 1).next_power_of_two() };
        (auto(self.orders.0, self.samples.0), auto(self.orders.1, self.samples.1))
    }

    pub fn k(&self) -> Result<usize> {
        if self.theta.period() == 0 || self.theta.preperiod() != 0 {
            return Err(Renorm2DError::Solve {
                stage: "config",
                detail: "the operator needs a purely periodic rotation number".into(),
            });
        }
        Ok(k_of_period(self.theta.period()))
    }

    /// The one-dimensional configuration with matching order, samples and
    /// domains.
    pub fn one_d(&self) -> Renorm1DConfig {
        Renorm1DConfig {
            theta: self.theta.clone(),
            order: self.orders.0,
            samples: self.samples().0,
            domains: self.domains.one_d(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pair2D {
    pub a: ParityMap2D,
    pub h: ParityMap2D,
    pub b: ParityMap2D,
    pub g: ParityMap2D,
}

impl Pair2D {
    pub fn domains(&self) -> Domains2D {
        Domains2D { a: self.a.wdomain(), b: self.b.wdomain(), y: self.a.ydomain() }
    }

    pub fn orders(&self) -> (usize, usize) {
        self.a.orders()
    }

    fn comps(&self, l: Letter) -> (&ParityMap2D, &ParityMap2D) {
        match l {
            Letter::Eta => (&self.a, &self.h),
            Letter::Xi => (&self.b, &self.g),
        }
    }

    pub fn apply_unchecked(&self, l: Letter, (x, y): (C64, C64)) -> (C64, C64) {
        let (f1, f2) = self.comps(l);
        (f1.eval_unchecked(x, y), f2.eval_unchecked(x, y))
    }

    pub fn apply(&self, l: Letter, (x, y): (C64, C64)) -> std::result::Result<(C64, C64), AfuncError> {
        let (f1, f2) = self.comps(l);
        Ok((f1.eval(x, y)?, f2.eval_unchecked(x, y)))
    }

    pub fn jets(&self, l: Letter, (x, y): (C64, C64)) -> (Jet2, Jet2) {
        let (f1, f2) = self.comps(l);
        (f1.jet_unchecked(x, y), f2.jet_unchecked(x, y))
    }

    /// `Σ^{s̄}` for a letter list in application order.
    pub fn eval_word(&self, letters: &[Letter], p: (C64, C64)) -> std::result::Result<(C64, C64), AfuncError> {
        letters.iter().try_fold(p, |q, &l| self.apply(l, q))
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = self.a.to_vec();
        v.extend(self.h.to_vec());
        v.extend(self.b.to_vec());
        v.extend(self.g.to_vec());
        v
    }

    pub fn from_vec(v: &[C64], d: Domains2D, orders: (usize, usize)) -> Self {
        let n = v.len() / 4;
        let part = |i: usize, w: DiskDomain| ParityMap2D::from_vec(&v[i * n..(i + 1) * n], w, d.y, orders);
        Pair2D { a: part(0, d.a), h: part(1, d.a), b: part(2, d.b), g: part(3, d.b) }
    }

    /// `½(max(‖Δa‖, ‖Δh‖) + max(‖Δb‖, ‖Δg‖))`, the sup norm of each map
    /// over both components.
    pub fn distance(&self, other: &Pair2D) -> Result<f64> {
        let d = |x: &ParityMap2D, y: &ParityMap2D| -> Result<f64> { Ok(x.sub(y).at("distance")?.uniform_norm()) };
        let da = d(&self.a, &other.a)?.max(d(&self.h, &other.h)?);
        let db = d(&self.b, &other.b)?.max(d(&self.g, &other.g)?);
        Ok(0.5 * (da + db))
    }

    /// Same as [`Pair2D::distance`] but on the truncated coefficients,
    /// without tail estimates.
    pub fn coeff_distance(&self, other: &Pair2D) -> f64 {
        let d = |x: &ParityMap2D, y: &ParityMap2D| -> f64 {
            let dom = x.wdomain();
            let rx = (dom.center.norm() + dom.radius).sqrt();
            let l1 = |p: &[C64], q: &[C64]| -> f64 { p.iter().zip(q).map(|(u, v)| (u - v).norm()).sum() };
            l1(&x.even.coeffs, &y.even.coeffs) + rx * l1(&x.odd.coeffs, &y.odd.coeffs)
        };
        0.5 * (d(&self.a, &other.a).max(d(&self.h, &other.h)) + d(&self.b, &other.b).max(d(&self.g, &other.g)))
    }

    pub fn tail_bound(&self) -> f64 {
        let t = [&self.a, &self.h, &self.b, &self.g].map(|f| f.tail_bound());
        0.5 * (t[0].max(t[1]) + t[2].max(t[3]))
    }

    pub fn norm(&self) -> f64 {
        0.5 * (self.a.uniform_norm().max(self.h.uniform_norm()) + self.b.uniform_norm().max(self.g.uniform_norm()))
    }

    /// Measured `y`-variation of the second components, used as δ.
    pub fn delta(&self) -> f64 {
        self.h.y_variation().max(self.g.y_variation())
    }

    /// Distance to the embedding of the own slice, an upper bound for the
    /// distance to the embedded slice.
    pub fn slice_distance(&self) -> Result<f64> {
        let e = embed(&slice(self), self.domains().y, self.orders().1);
        self.distance(&e)
    }

    /// Re-expands every component at other orders or on other disks.
    pub fn refit(&self, d: Domains2D, orders: (usize, usize), samples: (usize, usize)) -> Result<Pair2D> {
        let fit = |f: &ParityMap2D, w: DiskDomain| {
            ParityMap2D::try_from_fn(w, d.y, orders, samples, |x, y| f.eval(x, y)).at("refit")
        };
        Ok(Pair2D { a: fit(&self.a, d.a)?, h: fit(&self.h, d.a)?, b: fit(&self.b, d.b)?, g: fit(&self.g, d.b)? })
    }
}

/// `ι(η, ξ) = ((η(x), η(x)), (ξ(x), ξ(x)))`.
pub fn embed(z: &Pair1D, ydomain: DiskDomain, ny: usize) -> Pair2D {
    let e = ParityMap2D::from_1d(&z.eta, ydomain, ny);
    let x = ParityMap2D::from_1d(&z.xi, ydomain, ny);
    Pair2D { a: e.clone(), h: e, b: x.clone(), g: x }
}

/// `(a(x, 0), b(x, 0))`.
pub fn slice(s: &Pair2D) -> Pair1D {
    Pair1D { eta: s.a.slice(ZERO), xi: s.b.slice(ZERO), antilinear: false }
}

/// Thresholds of the class membership test.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ClassLimits {
    pub delta_max: f64,
    /// Radius of the neighborhood `Q` of the critical point.
    pub q_radius: f64,
    /// Allowed distance of the slice from the reference pair.
    pub slice_radius: f64,
}

impl Default for ClassLimits {
    fn default() -> Self {
        ClassLimits { delta_max: 0.25, q_radius: 0.25, slice_radius: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Membership {
    pub delta: f64,
    /// Smallest sampled `|∂ₓh(x,0)|`, `|∂ₓg(x,0)|` outside `Q`.
    pub min_dx: f64,
    pub slice_defect: Option<f64>,
}

pub fn membership(s: &Pair2D, reference: Option<&Pair1D>, limits: &ClassLimits) -> Result<Membership> {
    let mut min_dx = f64::INFINITY;
    for f in [&s.h, &s.g] {
        for x in f.wdomain().boundary(64) {
            for r in [x.sqrt(), -x.sqrt()] {
                if r.norm() > limits.q_radius {
                    min_dx = min_dx.min(f.jet_unchecked(r, ZERO).fx.norm());
                }
            }
        }
    }
    let slice_defect = match reference {
        Some(z) => Some(slice(s).distance(z)?),
        None => None,
    };
    Ok(Membership { delta: s.delta(), min_dx, slice_defect })
}

pub fn check_membership(s: &Pair2D, reference: Option<&Pair1D>, limits: &ClassLimits) -> Result<Membership> {
    let m = membership(s, reference, limits)?;
    let fail = |detail: String| Err(Renorm2DError::Membership { detail, delta: m.delta });
    if !(m.delta <= limits.delta_max) {
        return fail(format!("δ = {:.3e} exceeds {:.3e}", m.delta, limits.delta_max));
    }
    if !(m.min_dx > 1e-8) {
        return fail(format!("second component degenerate outside Q (min |∂ₓ| = {:.3e})", m.min_dx));
    }
    if let Some(d) = m.slice_defect {
        if !(d <= limits.slice_radius) {
            return fail(format!("slice is {d:.3e} away from the reference pair"));
        }
    }
    Ok(m)
}

const NEWTON_ITERS: usize = 40;

/// Newton for `f(x) = target` from `x`; `f` returns value and derivative.
/// Steps that increase the residual are halved up to eight times.
fn newton_solve(
    f: impl Fn(C64) -> Result<(C64, C64)>,
    mut x: C64,
    target: C64,
    stage: &'static str,
) -> Result<C64> {
    let (mut v, mut d) = f(x)?;
    for _ in 0..NEWTON_ITERS {
        if !(d.norm() > 0.0) || !d.is_finite() {
            return Err(Renorm2DError::Solve { stage, detail: format!("vanishing derivative at {x}") });
        }
        let r = (v - target).norm();
        let mut step = (v - target) / d;
        let mut next = x - step;
        let mut trial = f(next);
        for _ in 0..8 {
            match &trial {
                Ok((w, _)) if (w - target).norm() <= r => break,
                _ => {
                    step *= 0.5;
                    next = x - step;
                    trial = f(next);
                }
            }
        }
        (v, d) = trial?;
        x = next;
        if !x.is_finite() {
            return Err(Renorm2DError::Solve { stage, detail: "Newton diverged".into() });
        }
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + x.norm()) {
            return Ok(x);
        }
    }
    let r = (f(x)?.0 - target).norm();
    if r <= 1e-11 * (1.0 + target.norm()) {
        Ok(x)
    } else {
        Err(Renorm2DError::Solve { stage, detail: format!("residual {r:.3e} after {NEWTON_ITERS} steps") })
    }
}

/// Solves `f(x) = target` by following `f(x) = t` from `t = f(x0)`.
fn continuation(
    f: impl Fn(C64) -> Result<(C64, C64)>,
    x0: C64,
    target: C64,
    steps: usize,
    stage: &'static str,
) -> Result<C64> {
    let t0 = f(x0)?.0;
    let mut x = x0;
    for k in 1..=steps {
        let t = t0 + (target - t0) * (k as f64 / steps as f64);
        x = newton_solve(&f, x, t, stage)?;
    }
    Ok(x)
}

const CONTINUATION_STEPS: usize = 4;

/// The change of variables `H_Σ` with its inverse.
///
/// With `F` the letter applied last before the final `η`, the second
/// component is computed through an auxiliary variable `z`:
/// `y = q(z, 0)`, `q(s, z) = y`, `H₂ = π₁A(F(s, z))`, where `q = π₂F`.
/// Branches of the inverses are fixed by `p₀` (the zero of `a(·, 0)` used
/// for the first component) and `z_ref` (the point where `F` acts on the
/// origin).
pub struct HTransform<'a> {
    sigma: &'a Pair2D,
    f: Letter,
    eta0: ParityMap1D,
    f0: ParityMap1D,
    pub p0: C64,
    pub zref: C64,
}

impl<'a> HTransform<'a> {
    pub fn new(sigma: &'a Pair2D, f: Letter, zref: C64, p0_guess: C64) -> Result<Self> {
        let eta0 = sigma.a.slice(ZERO);
        let f0 = sigma.comps(f).0.slice(ZERO);
        let p0 = newton_solve(
            |x| {
                let (v, d, _) = eta0.jet_unchecked(x);
                Ok((v, d))
            },
            p0_guess,
            ZERO,
            "H_Σ: zero of a(·,0)",
        )?;
        Ok(HTransform { sigma, f, eta0, f0, p0, zref })
    }

    fn q_jet(&self, s: C64, z: C64) -> (Jet2, Jet2) {
        self.sigma.jets(self.f, (s, z))
    }

    /// `(H₂, y, dH₂/dz)` as functions of the auxiliary variable `z`.
    fn psi(&self, z: C64) -> Result<(C64, C64, C64)> {
        let (_, q0) = self.q_jet(z, ZERO);
        let y = q0.f;
        let s = newton_solve(
            |s| {
                let (_, q) = self.q_jet(s, z);
                Ok((q.f, q.fx))
            },
            z,
            y,
            "H_Σ: solve q(s, z) = y",
        )?;
        let (f1, f2) = self.q_jet(s, z);
        let ds = (q0.fx - f2.fy) / f2.fx;
        let (px, py) = (f1.f, f2.f);
        let (dpx, dpy) = (f1.fx * ds + f1.fy, f2.fx * ds + f2.fy);
        let ja = self.sigma.a.jet_unchecked(px, py);
        Ok((ja.f, y, ja.fx * dpx + ja.fy * dpy))
    }

    /// `H_Σ(x, y)`, with `hint` a guess for `q₀⁻¹(y)`.
    pub fn forward_hint(&self, (x, y): (C64, C64), hint: C64) -> Result<(C64, C64)> {
        let first = self.sigma.a.eval(x, y).at("H_Σ: first component")?;
        let z = newton_solve(
            |z| {
                let (_, q) = self.q_jet(z, ZERO);
                Ok((q.f, q.fx))
            },
            hint,
            y,
            "H_Σ: q₀⁻¹",
        )?;
        self.sigma.comps(self.f).0.eval(z, ZERO).at("H_Σ: q₀⁻¹ range")?;
        Ok((first, self.psi(z)?.0))
    }

    pub fn forward(&self, p: (C64, C64)) -> Result<(C64, C64)> {
        let hint = continuation(
            |z| {
                let (_, q) = self.q_jet(z, ZERO);
                Ok((q.f, q.fx))
            },
            self.zref,
            p.1,
            CONTINUATION_STEPS,
            "H_Σ: q₀⁻¹ continuation",
        )?;
        self.forward_hint(p, hint)
    }

    /// `H_Σ⁻¹(X, Y)`.
    pub fn inverse(&self, (xn, yn): (C64, C64)) -> Result<(C64, C64)> {
        let slice_inv = |m: &ParityMap1D, from: C64, target: C64, stage| {
            continuation(
                |x| {
                    let (v, d, _) = m.jet_unchecked(x);
                    Ok((v, d))
                },
                from,
                target,
                CONTINUATION_STEPS,
                stage,
            )
        };
        let v = slice_inv(&self.eta0, self.p0, yn, "H_Σ⁻¹: slice inverse of a")?;
        let z0 = slice_inv(&self.f0, self.zref, v, "H_Σ⁻¹: slice inverse of F")?;
        let z = newton_solve(
            |z| {
                let (y, _, d) = self.psi(z)?;
                Ok((y, d))
            },
            z0,
            yn,
            "H_Σ⁻¹: second component",
        )?;
        let y_old = self.psi(z)?.1;
        let x_old = continuation(
            |x| {
                let j = self.sigma.a.jet_unchecked(x, y_old);
                Ok((j.f, j.fx))
            },
            self.p0,
            xn,
            CONTINUATION_STEPS,
            "H_Σ⁻¹: first component",
        )?;
        Ok((x_old, y_old))
    }

    /// Largest `|H_Σ(H_Σ⁻¹(p)) − p|` over the given points.
    pub fn roundtrip_error(&self, pts: &[(C64, C64)]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &p in pts {
            let q = self.inverse(p)?;
            let r = self.forward(q)?;
            worst = worst.max((r.0 - p.0).norm()).max((r.1 - p.1).norm());
        }
        Ok(worst)
    }
}

/// The factorization `ζ^{s̄} = η ∘ F ∘ ζ^{ŝ}` of both level-`k` words.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorWords {
    pub s_hat: Vec<Letter>,
    pub t_hat: Vec<Letter>,
    pub f: Letter,
}

pub fn operator_words(theta: &RotationNumber, k: usize) -> Result<OperatorWords> {
    let (s, t) = renorm_words(theta, k)?;
    let (sh, fs) = operator_split(&s)?;
    let (th, ft) = operator_split(&t)?;
    if fs != ft {
        return Err(Renorm2DError::Solve {
            stage: "operator words",
            detail: format!("the level-{k} words end in different letters"),
        });
    }
    Ok(OperatorWords { s_hat: words::word_expand(&sh), t_hat: words::word_expand(&th), f: fs })
}

/// `H_Σ` with its branches fixed by the slice of `Σ`, together with the
/// operator words it was built for.
pub fn h_transform<'a>(sigma: &'a Pair2D, cfg: &Renorm2DConfig) -> Result<(HTransform<'a>, OperatorWords)> {
    let w = operator_words(&cfg.theta, cfg.k()?)?;
    let sl = slice(sigma);
    let zref = sl.eval_word(&w.s_hat, ZERO)?;
    let p0_guess = sl.map(w.f).eval(zref).map_err(|source| Renorm2DError::Stage { stage: "pℛ: p₀ guess", source })?;
    let ht = HTransform::new(sigma, w.f, zref, p0_guess)?;
    Ok((ht, w))
}

/// Output of the pre-renormalization, rescaled by `ℓ₀ = π₁B̄(0,0)` onto the
/// standard disks.
#[derive(Clone, Debug)]
pub struct PreRenorm2D {
    pub pair: Pair2D,
    pub l0: C64,
    pub p0: C64,
    pub zref: C64,
}

/// `x ↦ H_Σ ∘ F ∘ Σ^{hat} ∘ A ∘ H_Σ⁻¹(x)`.
fn bar_point(
    sigma: &Pair2D,
    ht: &HTransform,
    w: &OperatorWords,
    hat: &[Letter],
    p: (C64, C64),
    second: bool,
) -> Result<(C64, C64)> {
    let q = ht.inverse(p)?;
    let mut q = sigma.apply(Letter::Eta, q).at("pℛ: A after H_Σ⁻¹")?;
    for &l in hat {
        q = sigma.apply(l, q).at("pℛ: word")?;
    }
    let hint = q.0;
    let q = sigma.apply(w.f, q).at("pℛ: F")?;
    if second {
        ht.forward_hint(q, hint)
    } else {
        Ok((sigma.a.eval(q.0, q.1).at("pℛ: H_Σ first component")?, ZERO))
    }
}

pub fn prerenorm2d(sigma: &Pair2D, cfg: &Renorm2DConfig) -> Result<PreRenorm2D> {
    let (ht, w) = h_transform(sigma, cfg)?;
    let zref = ht.zref;
    let l0 = bar_point(sigma, &ht, &w, &w.t_hat, (ZERO, ZERO), false)?.0;
    let d = cfg.domains;
    let samples = cfg.samples();
    let fit = |wdom: DiskDomain, hat: &[Letter]| -> Result<(ParityMap2D, ParityMap2D)> {
        let pts = ParityMap2D::signed_sample_points(&wdom, &d.y, samples);
        let mut v1 = Vec::with_capacity(pts.len());
        let mut v2 = Vec::with_capacity(pts.len());
        for (x, y) in pts {
            let (p, q) = bar_point(sigma, &ht, &w, hat, (l0 * x, l0 * y), true)?;
            v1.push(p / l0);
            v2.push(q / l0);
        }
        Ok((
            ParityMap2D::from_signed_grid(&v1, wdom, d.y, cfg.orders, samples).at("pℛ: fit")?,
            ParityMap2D::from_signed_grid(&v2, wdom, d.y, cfg.orders, samples).at("pℛ: fit")?,
        ))
    };
    let (a, h) = fit(d.a, &w.s_hat)?;
    let (b, g) = fit(d.b, &w.t_hat)?;
    Ok(PreRenorm2D { pair: Pair2D { a, h, b, g }, l0, p0: ht.p0, zref })
}

/// `(F, F′, F″)` of `x ↦ outer(inner(x, 0))` where `inner = (i1, i2)`.
fn composite_jet(outer: &ParityMap2D, i1: &ParityMap2D, i2: &ParityMap2D, x: C64) -> (C64, C64, C64) {
    let j1 = i1.jet_unchecked(x, ZERO);
    let j2 = i2.jet_unchecked(x, ZERO);
    let o = outer.jet_unchecked(j1.f, j2.f);
    let d1 = o.fx * j1.fx + o.fy * j2.fx;
    let d2 = o.fxx * j1.fx * j1.fx + 2.0 * o.fxy * j1.fx * j2.fx + o.fyy * j2.fx * j2.fx + o.fx * j1.fxx + o.fy * j2.fxx;
    (o.f, d1, d2)
}

/// `(∂ₓF, ∂ₓₓF + ∂ₓᵧF)` of `F = π₁ outer ∘ inner` at the diagonal point
/// `(x, x)`: the function whose zero is the offset of a diagonal translation
/// centering the critical point, and its derivative along the diagonal.
fn diagonal_critical_jet(outer: &ParityMap2D, i1: &ParityMap2D, i2: &ParityMap2D, x: C64) -> (C64, C64) {
    let j1 = i1.jet_unchecked(x, x);
    let j2 = i2.jet_unchecked(x, x);
    let o = outer.jet_unchecked(j1.f, j2.f);
    let fx = o.fx * j1.fx + o.fy * j2.fx;
    let fxx = o.fxx * j1.fx * j1.fx + 2.0 * o.fxy * j1.fx * j2.fx + o.fyy * j2.fx * j2.fx + o.fx * j1.fxx + o.fy * j2.fxx;
    let fxy = (o.fxx * j1.fy + o.fxy * j2.fy) * j1.fx
        + o.fx * j1.fxy
        + (o.fxy * j1.fy + o.fyy * j2.fy) * j2.fx
        + o.fy * j2.fxy;
    (fx, fxx + fxy)
}

/// Winding number of `f` around 0 along the circle `|x| = r`.
fn zero_count(f: impl Fn(C64) -> C64, r: f64) -> i64 {
    let m = 512;
    let mut total = 0.0;
    let mut prev = f(c(r, 0.0));
    for k in 1..=m {
        let x = C64::from_polar(r, std::f64::consts::TAU * k as f64 / m as f64);
        let v = f(x);
        total += (v / prev).arg();
        prev = v;
    }
    (total / std::f64::consts::TAU).round() as i64
}

/// The unique zero of `g` in the disk of radius `radius`, where `jet`
/// returns `(g, g′)`.
fn unique_zero(jet: impl Fn(C64) -> (C64, C64), radius: f64, stage: &'static str) -> Result<C64> {
    let n = zero_count(|x| jet(x).0, radius);
    if n != 1 {
        return Err(Renorm2DError::Solve { stage, detail: format!("{n} critical points in the search disk") });
    }
    newton_solve(|x| Ok(jet(x)), ZERO, ZERO, stage)
}

/// Result of Π₁ followed by the rescaling that restores `π₁B(0,0) = 1`.
#[derive(Clone, Debug)]
pub struct CriticalProjection {
    pub pair: Pair2D,
    /// Offsets of the translations `T₁(x,y) = (x + c₁, y + c₁)` and
    /// `T₂(x,y) = (x + c₂, y + c₂)`.
    pub c1: C64,
    pub c2: C64,
    pub l1: C64,
}

/// Relative slack allowed when a refit samples slightly outside the disks;
/// the expansions converge on a larger disk.
const REFIT_SLACK: f64 = 0.1;

fn eval_near(f: &ParityMap2D, x: C64, y: C64) -> std::result::Result<C64, AfuncError> {
    if f.wdomain().contains(x * x, REFIT_SLACK) && f.ydomain().contains(y, REFIT_SLACK) {
        Ok(f.eval_unchecked(x, y))
    } else {
        f.eval(x, y)
    }
}

/// Π₁: conjugates `Ā` and `B̄` by the translations that move the critical
/// points of `π₁B̄∘Ā` and `π₁Ā∘B̄` to the origin, then rescales by
/// `l₁ = π₁B̃(0,0)`.
///
/// The translations act on both coordinates, so that embedded pairs stay
/// embedded and the step agrees with the one-dimensional operator on them.
pub fn critical_projection(p: &Pair2D, cfg: &Renorm2DConfig) -> Result<CriticalProjection> {
    let r = cfg.search_radius;
    let c1 = unique_zero(|x| diagonal_critical_jet(&p.b, &p.a, &p.h, x), r, "Π₁: critical point of π₁B̄∘Ā")?;
    let c2 = unique_zero(|x| diagonal_critical_jet(&p.a, &p.b, &p.g, x + c1), r, "Π₁: critical point of π₁Ā∘B̄")?;
    let s = c1 + c2;
    let l1 = p.b.eval(s, s).at("Π₁: π₁B̃(0,0)")? - c1;
    if c1 == ZERO && c2 == ZERO && l1 == c(1.0, 0.0) {
        return Ok(CriticalProjection { pair: p.clone(), c1, c2, l1 });
    }
    let d = cfg.domains;
    let (orders, samples) = (cfg.orders, cfg.samples());
    let fit = |f: &ParityMap2D, w: DiskDomain, shift: C64, sub: C64| {
        ParityMap2D::try_from_fn(w, d.y, orders, samples, |x, y| {
            Ok::<C64, AfuncError>((eval_near(f, l1 * x + shift, l1 * y + shift)? - sub) / l1)
        })
        .at("Π₁: refit")
    };
    let pair = Pair2D {
        a: fit(&p.a, d.a, c1, s)?,
        h: fit(&p.h, d.a, c1, s)?,
        b: fit(&p.b, d.b, s, c1)?,
        g: fit(&p.g, d.b, s, c1)?,
    };
    Ok(CriticalProjection { pair, c1, c2, l1 })
}

/// The three conditions of Π₂: commutation of first components along
/// `(x, 0)` at orders 0 and 2, and `π₁B(0,0) = 1`.
pub fn commutation_defect(p: &Pair2D) -> [C64; 3] {
    let ab = composite_jet(&p.a, &p.b, &p.g, ZERO);
    let ba = composite_jet(&p.b, &p.a, &p.h, ZERO);
    [ab.0 - ba.0, ab.2 - ba.2, p.b.eval_unchecked(ZERO, ZERO) - 1.0]
}

/// Adds `a·x⁴ + b·x⁶` to both components of `A` and `c` to both components
/// of `B` so that [`commutation_defect`] vanishes. Returns `(a, b, c)`.
pub fn commutation_projection(p: &Pair2D) -> Result<(Pair2D, [C64; 3])> {
    let (nw, ny) = p.orders();
    let one = c(1.0, 0.0);
    let w2 = AnalyticMap1D::from_poly(p.a.wdomain(), nw, &[ZERO, ZERO, one]);
    let w3 = AnalyticMap1D::from_poly(p.a.wdomain(), nw, &[ZERO, ZERO, ZERO, one]);
    let apply = |q: [C64; 3]| -> Pair2D {
        let mut out = p.clone();
        for f in [&mut out.a, &mut out.h] {
            for i in 0..=nw {
                f.even.coeffs[i * (ny + 1)] += q[0] * w2.coeffs[i] + q[1] * w3.coeffs[i];
            }
        }
        for f in [&mut out.b, &mut out.g] {
            f.even.coeffs[0] += q[2];
        }
        out
    };
    let q = renorm1d::newton3(|q| Ok(commutation_defect(&apply(q))), renorm1d::PI2_TOL, "Π₂")?;
    Ok((apply(q), q))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepTrace2D {
    pub l0: C64,
    pub c1: C64,
    pub c2: C64,
    pub l1: C64,
    pub pi2: [C64; 3],
    pub delta_in: f64,
}

pub fn renorm2d_step_traced(sigma: &Pair2D, cfg: &Renorm2DConfig) -> Result<(Pair2D, StepTrace2D)> {
    let delta_in = sigma.delta();
    let pre = prerenorm2d(sigma, cfg)?;
    let cp = critical_projection(&pre.pair, cfg)?;
    let (out, pi2) = commutation_projection(&cp.pair)?;
    Ok((out, StepTrace2D { l0: pre.l0, c1: cp.c1, c2: cp.c2, l1: cp.l1, pi2, delta_in }))
}

pub fn renorm2d_step(sigma: &Pair2D, cfg: &Renorm2DConfig) -> Result<Pair2D> {
    renorm2d_step_traced(sigma, cfg).map(|(p, _)| p)
}

/// Per-step record of an iterated run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub trace: StepTrace2D,
    pub delta_out: f64,
    pub slice_distance: f64,
    pub distance_to_fixed_point: Option<f64>,
}

pub fn renorm2d_iterate(
    sigma: &Pair2D,
    steps: usize,
    cfg: &Renorm2DConfig,
    zstar: Option<&Pair1D>,
) -> Result<(Pair2D, Vec<TraceRow>)> {
    let target = zstar.map(|z| embed(z, cfg.domains.y, cfg.orders.1));
    let mut s = sigma.clone();
    let mut rows = Vec::with_capacity(steps);
    for step in 1..=steps {
        let (next, trace) = renorm2d_step_traced(&s, cfg)?;
        let distance_to_fixed_point = match &target {
            Some(t) => Some(next.distance(t)?),
            None => None,
        };
        rows.push(TraceRow {
            step,
            trace,
            delta_out: next.delta(),
            slice_distance: next.slice_distance()?,
            distance_to_fixed_point,
        });
        s = next;
    }
    Ok((s, rows))
}

/// Finite-difference Jacobian of one step over all coefficients of the four
/// components, and its eigenvalues.
pub fn jacobian_spectrum_2d(sigma: &Pair2D, cfg: &Renorm2DConfig) -> Result<SpectrumReport> {
    let d = cfg.domains;
    let orders = cfg.orders;
    let v = sigma.to_vec();
    let jac = renorm1d::fd_jacobian(&v, |w| Ok::<_, Renorm2DError>(renorm2d_step(&Pair2D::from_vec(w, d, orders), cfg)?.to_vec()))?;
    let dim = jac.nrows();
    let eigs = renorm1d::eigenvalues(&jac)?;
    let mut rep = renorm1d::spectrum_from(eigs, orders.0, dim);
    if !jac.iter().all(|x| x.is_finite()) {
        rep.warnings.push("non-finite Jacobian entries".into());
    }
    Ok(rep)
}

/// Matching of a two-dimensional spectrum against a one-dimensional one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralMatch {
    /// `(2D eigenvalue, nearest 1D eigenvalue, distance)` for matched ones.
    pub matched: Vec<(C64, C64, f64)>,
    /// Two-dimensional eigenvalues without a 1D partner within tolerance.
    pub unmatched: Vec<C64>,
    /// One-dimensional eigenvalues above the floor with no 2D partner.
    pub missing: Vec<C64>,
}

impl SpectralMatch {
    pub fn largest_unmatched(&self) -> f64 {
        self.unmatched.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Greedy one-to-one matching: each 1D eigenvalue of modulus at least
/// `floor` claims the nearest unclaimed 2D eigenvalue within `tol`.
pub fn match_spectra(two_d: &[C64], one_d: &[C64], tol: f64, floor: f64) -> SpectralMatch {
    let mut claimed = vec![false; two_d.len()];
    let mut matched = Vec::new();
    let mut missing = Vec::new();
    for &e in one_d.iter().filter(|e| e.norm() >= floor) {
        let best = two_d
            .iter()
            .enumerate()
            .filter(|(i, _)| !claimed[*i])
            .map(|(i, z)| (i, (z - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, dist)) if dist <= tol => {
                claimed[i] = true;
                matched.push((two_d[i], e, dist));
            }
            _ => missing.push(e),
        }
    }
    let unmatched = two_d.iter().zip(&claimed).filter(|(_, c)| !**c).map(|(z, _)| *z).collect();
    SpectralMatch { matched, unmatched, missing }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> Renorm2DConfig {
        Renorm2DConfig::with_orders(24, 3)
    }

    #[test]
    fn embedding_is_isometric() {
        let cfg = small_cfg();
        let c1 = cfg.one_d();
        let z1 = renorm1d::quadratic_seed(8, &c1).unwrap();
        let z2 = renorm1d::quadratic_seed(10, &c1).unwrap();
        let d1 = z1.distance(&z2).unwrap();
        let e1 = embed(&z1, cfg.domains.y, 3);
        let e2 = embed(&z2, cfg.domains.y, 3);
        assert!((e1.distance(&e2).unwrap() - d1).abs() < 1e-12);
        assert_eq!(slice(&e1), Pair1D { antilinear: false, ..z1 });
        assert!(e1.delta() == 0.0);
    }

    #[test]
    fn embedded_h_transform_is_eta_in_both_variables() {
        let cfg = small_cfg();
        let z = renorm1d::quadratic_seed(10, &cfg.one_d()).unwrap();
        let e = embed(&z, cfg.domains.y, 3);
        let w = operator_words(&cfg.theta, 2).unwrap();
        let zref = z.eval_word(&w.s_hat, ZERO).unwrap();
        let ht = HTransform::new(&e, w.f, zref, z.xi.eval(zref).unwrap()).unwrap();
        let p = (ht.p0 + c(0.05, -0.02), ht.p0 + c(-0.03, 0.04));
        let q = ht.forward(p).unwrap();
        assert!((q.0 - z.eta.eval(p.0).unwrap()).norm() < 1e-12);
        assert!((q.1 - z.eta.eval(p.1).unwrap()).norm() < 1e-12);
        let pts = [(c(0.2, 0.1), c(0.1, 0.0)), (c(-0.3, 0.2), c(-0.1, -0.25)), (ZERO, ZERO)];
        assert!(ht.roundtrip_error(&pts).unwrap() < 1e-12);
    }

    #[test]
    fn commuting_diagram_on_even_pairs() {
        let cfg = small_cfg();
        let c1 = cfg.one_d();
        let z = renorm1d::quadratic_seed(8, &c1).unwrap();
        let r1 = renorm1d::renorm_step(&z, &c1).unwrap();
        let r2 = renorm2d_step(&embed(&z, cfg.domains.y, 3), &cfg).unwrap();
        let e = embed(&r1, cfg.domains.y, 3);
        assert!(r2.coeff_distance(&e) < 1e-11, "{}", r2.coeff_distance(&e));
    }

    #[test]
    fn projections_fix_their_image() {
        let cfg = small_cfg();
        let z = renorm1d::quadratic_seed(10, &cfg.one_d()).unwrap();
        let e = embed(&z, cfg.domains.y, 3);
        let z1 = renorm1d::project_ac(&z).unwrap().0;
        let (_, q) = commutation_projection(&embed(&z1, cfg.domains.y, 3)).unwrap();
        assert!(q.iter().all(|x| x.norm() < 1e-12), "{q:?}");
        let (p, _) = commutation_projection(&e).unwrap();
        let (_, q2) = commutation_projection(&p).unwrap();
        assert!(q2.iter().all(|x| x.norm() < 1e-13));
        let cp = critical_projection(&e, &cfg).unwrap();
        assert!(cp.c1.norm() < 1e-10 && cp.c2.norm() < 1e-10);
    }

    #[test]
    fn normalization_offset_is_recovered() {
        let cfg = small_cfg();
        let z = renorm1d::quadratic_seed(10, &cfg.one_d()).unwrap();
        let mut e = embed(&z, cfg.domains.y, 3);
        e.b.even.coeffs[0] += 1e-5;
        e.g.even.coeffs[0] += 1e-5;
        let (_, q) = commutation_projection(&e).unwrap();
        assert!((q[2] + 1e-5).norm() < 1e-8, "{q:?}");
    }
}
