//! Almost-commuting pairs, the one-dimensional renormalization operator and
//! its hyperbolic fixed point.
//!
//! A pair is stored as two parity maps `η(x) = E(x²) + x·O(x²)` on fixed
//! disks of the `w = x²` plane. One operator step is: pre-renormalize with
//! the words of level `k`, rescale so the fit lives on the standard disks,
//! move the critical points back to 0 (Π₁), rescale by `ξ(0)`, then restore
//! the almost-commuting conditions (Π₂).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::afunc::{AfuncError, AnalyticMap1D, DiskDomain, ParityMap1D, C64};
use crate::words::{self, k_of_period, renorm_words, Letter, RotationNumber, WordsError};

#[derive(Debug, Error, Clone)]
pub enum Renorm1DError {
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: AfuncError },
    #[error("words: {0}")]
    Words(#[from] WordsError),
    #[error("{0}")]
    Newton(String),
    #[error("{0}")]
    Invalid(String),
}

impl From<AfuncError> for Renorm1DError {
    fn from(source: AfuncError) -> Self {
        Renorm1DError::Stage { stage: "fit", source }
    }
}

pub type Result<T> = std::result::Result<T, Renorm1DError>;

pub(crate) trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for std::result::Result<T, AfuncError> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| Renorm1DError::Stage { stage, source })
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Disks in the `w = x²` plane carrying `η` and `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domains1D {
    pub eta: DiskDomain,
    pub xi: DiskDomain,
}

impl Default for Domains1D {
    /// The `ξ` disk is centered at `α*²/2`, halfway between 0 and the square
    /// of the golden scaling, where `ξ` gets evaluated.
    fn default() -> Self {
        Domains1D {
            eta: DiskDomain { center: c(0.5, 0.1), radius: 0.6 },
            xi: DiskDomain { center: c(-0.2268, -0.1559), radius: 0.35 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Renorm1DConfig {
    pub theta: RotationNumber,
    pub order: usize,
    /// Boundary samples per fit; 0 picks `2·next_pow2(order+1)`.
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub domains: Domains1D,
}

impl Default for Renorm1DConfig {
    fn default() -> Self {
        Renorm1DConfig { theta: RotationNumber::golden(), order: 40, samples: 0, domains: Domains1D::default() }
    }
}

impl Renorm1DConfig {
    pub fn with_order(order: usize) -> Self {
        Renorm1DConfig { order, ..Default::default() }
    }

    pub fn samples(&self) -> usize {
        if self.samples > 0 {
            self.samples
        } else {
            2 * (self.order + 1).next_power_of_two()
        }
    }

    /// Operator exponent `k` from the period of θ.
    pub fn k(&self) -> Result<usize> {
        if self.theta.period() == 0 || self.theta.preperiod() != 0 {
            return Err(Renorm1DError::Invalid("the operator needs a purely periodic rotation number".into()));
        }
        Ok(k_of_period(self.theta.period()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pair1D {
    pub eta: ParityMap1D,
    pub xi: ParityMap1D,
    /// Set when the pair came out of an odd number of single-digit steps,
    /// where the natural normalization is anti-linear.
    #[serde(default)]
    pub antilinear: bool,
}

impl Pair1D {
    pub fn map(&self, l: Letter) -> &ParityMap1D {
        match l {
            Letter::Eta => &self.eta,
            Letter::Xi => &self.xi,
        }
    }

    pub fn domains(&self) -> Domains1D {
        Domains1D { eta: self.eta.domain(), xi: self.xi.domain() }
    }

    pub fn order(&self) -> usize {
        self.eta.order()
    }

    /// `ζ^{s̄}(x)` for a letter list in application order.
    pub fn eval_word(&self, letters: &[Letter], x: C64) -> Result<C64> {
        let mut z = x;
        for (i, &l) in letters.iter().enumerate() {
            z = self.map(l).eval(z).map_err(|source| Renorm1DError::Stage {
                stage: word_stage(i),
                source,
            })?;
        }
        Ok(z)
    }

    /// Value and first two derivatives of `ζ^{s̄}` at `x`.
    pub fn word_jet(&self, letters: &[Letter], x: C64) -> Result<(C64, C64, C64)> {
        let (mut f, mut d1, mut d2) = (x, c(1.0, 0.0), c(0.0, 0.0));
        for (i, &l) in letters.iter().enumerate() {
            let (g, g1, g2) = self.map(l).jet(f).map_err(|source| Renorm1DError::Stage { stage: word_stage(i), source })?;
            d2 = g2 * d1 * d1 + g1 * d2;
            d1 = g1 * d1;
            f = g;
        }
        Ok((f, d1, d2))
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = self.eta.to_vec();
        v.extend(self.xi.to_vec());
        v
    }

    pub fn from_vec(v: &[C64], domains: Domains1D) -> Self {
        let n = v.len() / 2;
        Pair1D {
            eta: ParityMap1D::from_vec(&v[..n], domains.eta),
            xi: ParityMap1D::from_vec(&v[n..], domains.xi),
            antilinear: false,
        }
    }

    /// `½(‖η₁ − η₂‖ + ‖ξ₁ − ξ₂‖)`.
    pub fn distance(&self, other: &Pair1D) -> Result<f64> {
        let de = self.eta.sub(&other.eta).stage("distance")?;
        let dx = self.xi.sub(&other.xi).stage("distance")?;
        Ok(0.5 * (de.uniform_norm() + dx.uniform_norm()))
    }

    pub fn norm(&self) -> f64 {
        0.5 * (self.eta.uniform_norm() + self.xi.uniform_norm())
    }

    /// Distance between the truncated expansions, leaving out the tail
    /// estimates. This is the quantity Newton drives to zero.
    pub fn coeff_distance(&self, other: &Pair1D) -> f64 {
        let a = self.to_vec();
        let b = other.to_vec();
        let n1 = self.order() + 1;
        let part = |off: usize, dom: DiskDomain| -> f64 {
            let rx = (dom.center.norm() + dom.radius).sqrt();
            let e: f64 = (0..n1).map(|k| (a[off + k] - b[off + k]).norm()).sum();
            let o: f64 = (n1..2 * n1).map(|k| (a[off + k] - b[off + k]).norm()).sum();
            e + rx * o
        };
        0.5 * (part(0, self.eta.domain()) + part(2 * n1, self.xi.domain()))
    }

    pub fn tail_bound(&self) -> f64 {
        0.5 * (self.eta.tail_bound() + self.xi.tail_bound())
    }

    /// Re-expands on another set of disks or at another order.
    pub fn refit(&self, domains: Domains1D, order: usize, samples: usize) -> Result<Pair1D> {
        Ok(Pair1D {
            eta: ParityMap1D::try_from_fn(domains.eta, order, samples, |x| self.eta.eval(x)).stage("refit η")?,
            xi: ParityMap1D::try_from_fn(domains.xi, order, samples, |x| self.xi.eval(x)).stage("refit ξ")?,
            antilinear: self.antilinear,
        })
    }

    pub fn conjugate(&self) -> Pair1D {
        Pair1D { eta: self.eta.conjugate(), xi: self.xi.conjugate(), antilinear: !self.antilinear }
    }
}

fn word_stage(i: usize) -> &'static str {
    const NAMES: [&str; 8] = [
        "word letter 1",
        "word letter 2",
        "word letter 3",
        "word letter 4",
        "word letter 5",
        "word letter 6",
        "word letter 7",
        "word letter 8",
    ];
    NAMES.get(i).copied().unwrap_or("word letter >8")
}

/// Residuals of the almost-commuting conditions at 0.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AcDefect {
    /// `(η∘ξ)⁽ⁿ⁾(0) − (ξ∘η)⁽ⁿ⁾(0)` for `n = 0, 1, 2`.
    pub commutation: [C64; 3],
    /// `ξ(0) − 1`.
    pub normalization: C64,
    pub eta_dd0: C64,
    pub xi_dd0: C64,
}

impl AcDefect {
    pub fn max_commutation(&self) -> f64 {
        self.commutation.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.max_commutation().max(self.normalization.norm())
    }

    /// Both second derivatives have positive real part. For complex
    /// rotation numbers this is a diagnostic, not a membership test.
    pub fn convex(&self) -> bool {
        self.eta_dd0.re > 0.0 && self.xi_dd0.re > 0.0
    }
}

const ETA_XI: [Letter; 2] = [Letter::Xi, Letter::Eta];
const XI_ETA: [Letter; 2] = [Letter::Eta, Letter::Xi];

pub fn ac_defect(z: &Pair1D) -> Result<AcDefect> {
    let zero = c(0.0, 0.0);
    let a = z.word_jet(&ETA_XI, zero)?;
    let b = z.word_jet(&XI_ETA, zero)?;
    Ok(AcDefect {
        commutation: [a.0 - b.0, a.1 - b.1, a.2 - b.2],
        normalization: z.xi.eval(zero).stage("ξ(0)")? - 1.0,
        eta_dd0: z.eta.jet(zero).stage("η″(0)")?.2,
        xi_dd0: z.xi.jet(zero).stage("ξ″(0)")?.2,
    })
}

/// The three conditions solved by Π₂: commutation of order 0 and 2, and
/// `ξ(0) = 1`.
fn pi2_conditions(z: &Pair1D) -> Result<[C64; 3]> {
    let d = ac_defect(z)?;
    Ok([d.commutation[0], d.commutation[2], d.normalization])
}

/// Newton on three complex unknowns with a finite-difference Jacobian.
pub(crate) fn newton3(
    mut cond: impl FnMut([C64; 3]) -> Result<[C64; 3]>,
    tol: f64,
    what: &str,
) -> Result<[C64; 3]> {
    let mut p = [c(0.0, 0.0); 3];
    let mut r = cond(p)?;
    let h = 1e-7;
    for _ in 0..30 {
        let rmax = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if rmax < tol {
            return Ok(p);
        }
        let mut jac = DMatrix::<C64>::zeros(3, 3);
        for k in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[k] += h;
            pm[k] -= h;
            let (rp, rm) = (cond(pp)?, cond(pm)?);
            for i in 0..3 {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let rhs = nalgebra::DVector::from_iterator(3, r.iter().map(|z| -z));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Renorm1DError::Newton(format!("{what}: singular Jacobian")))?;
        for k in 0..3 {
            p[k] += step[k];
        }
        let rnew = cond(p)?;
        let new_max = rnew.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if new_max >= rmax && rmax < 1e3 * tol {
            // At the rounding floor; further steps only shuffle noise.
            return if rmax < tol * 10.0 { Ok(p) } else { Err(stalled(what, rmax)) };
        }
        r = rnew;
    }
    let rmax = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rmax < tol {
        Ok(p)
    } else {
        Err(stalled(what, rmax))
    }
}

fn stalled(what: &str, r: f64) -> Renorm1DError {
    Renorm1DError::Newton(format!("{what}: residual stalled at {r:.3e}"))
}

/// Π₂ tolerance on the three conditions.
pub const PI2_TOL: f64 = 1e-12;

/// Adds `a·x⁴ + b·x⁶` to `η` and `c` to `ξ` so that the order-0 and order-2
/// commutation conditions and `ξ(0) = 1` hold. Returns the pair and
/// `(a, b, c)`.
pub fn project_ac(z: &Pair1D) -> Result<(Pair1D, [C64; 3])> {
    let n = z.order();
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let w2 = AnalyticMap1D::from_poly(z.eta.domain(), n, &[zero, zero, one]);
    let w3 = AnalyticMap1D::from_poly(z.eta.domain(), n, &[zero, zero, zero, one]);
    let xi_unit = AnalyticMap1D::constant(z.xi.domain(), n, one);
    let apply = |p: [C64; 3]| -> Pair1D {
        let mut out = z.clone();
        for k in 0..=n {
            out.eta.even.coeffs[k] += p[0] * w2.coeffs[k] + p[1] * w3.coeffs[k];
            out.xi.even.coeffs[k] += p[2] * xi_unit.coeffs[k];
        }
        out
    };
    let p = newton3(|p| pi2_conditions(&apply(p)), PI2_TOL, "Π₂")?;
    let mut out = apply(p);
    out.eta.even = AnalyticMap1D::new(out.eta.even.coeffs, out.eta.even.domain);
    out.xi.even = AnalyticMap1D::new(out.xi.even.coeffs, out.xi.even.domain);
    Ok((out, p))
}

/// The n-th pre-renormalization `(ζ^{s̄ₙ}, ζ^{t̄ₙ})`, conjugated by
/// `αₙ(z) = ηₙ(0)·z` and fitted on the disks of `ζ`.
#[derive(Clone, Debug)]
pub struct PreRenorm1D {
    pub pair: Pair1D,
    pub alpha: C64,
    pub words: (words::MultiIndex, words::MultiIndex),
}

pub fn prerenorm(z: &Pair1D, n: usize, cfg: &Renorm1DConfig) -> Result<PreRenorm1D> {
    let (s, t) = renorm_words(&cfg.theta, n)?;
    if n == 0 {
        let alpha = c(1.0, 0.0);
        return Ok(PreRenorm1D { pair: z.clone(), alpha, words: (s, t) });
    }
    let ls = words::word_expand(&s);
    let lt = words::word_expand(&t);
    let alpha = z.eval_word(&ls, c(0.0, 0.0))?;
    let m = cfg.samples();
    let d = z.domains();
    let eta = ParityMap1D::try_from_fn(d.eta, cfg.order, m, |x| Ok::<C64, Renorm1DError>(z.eval_word(&ls, alpha * x)? / alpha))?;
    let xi = ParityMap1D::try_from_fn(d.xi, cfg.order, m, |x| Ok::<C64, Renorm1DError>(z.eval_word(&lt, alpha * x)? / alpha))?;
    Ok(PreRenorm1D { pair: Pair1D { eta, xi, antilinear: n % 2 == 1 }, alpha, words: (s, t) })
}

/// Stage-by-stage record of one operator step.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepTrace {
    /// `ξ_k(0)`, the rescaling used to fit the pre-renormalized pair.
    pub l0: C64,
    pub c1: C64,
    pub c2: C64,
    /// `ξ̃(0)` after Π₁, the final rescaling.
    pub l1: C64,
    /// `(a, b, c)` of Π₂.
    pub pi2: [C64; 3],
}

impl StepTrace {
    /// Total linear rescaling of the step.
    pub fn scale(&self) -> C64 {
        self.l0 * self.l1
    }
}

/// Critical points of `ξ∘η` and of `T₁⁻¹∘η∘ξ∘T₁`, the Π₁ translations.
pub fn critical_offsets(z: &Pair1D) -> Result<(C64, C64)> {
    let xe = [Letter::Eta, Letter::Xi];
    let ex = [Letter::Xi, Letter::Eta];
    let c1 = newton_critical(|x| z.word_jet(&xe, x), c(0.0, 0.0), "Π₁: critical point of ξ∘η")?;
    let c2 = newton_critical(|x| z.word_jet(&ex, x + c1), c(0.0, 0.0), "Π₁: critical point of η∘ξ")?;
    Ok((c1, c2))
}

pub(crate) fn newton_critical(
    jet: impl Fn(C64) -> Result<(C64, C64, C64)>,
    guess: C64,
    what: &str,
) -> Result<C64> {
    let mut x = guess;
    for _ in 0..60 {
        let (_, d1, d2) = jet(x)?;
        if d2.norm() < 1e-10 {
            return Err(Renorm1DError::Newton(format!("{what}: degenerate second derivative")));
        }
        let step = d1 / d2;
        x -= step;
        if step.norm() < 1e-16 {
            break;
        }
    }
    let d1 = jet(x)?.1;
    if d1.norm() > 1e-12 {
        return Err(Renorm1DError::Newton(format!("{what}: residual {:.3e}", d1.norm())));
    }
    Ok(x)
}

/// One step `ℛ = Π₂ ∘ (rescale) ∘ Π₁ ∘ pℛᵏ`.
pub fn renorm_step_traced(z: &Pair1D, cfg: &Renorm1DConfig) -> Result<(Pair1D, StepTrace)> {
    let k = cfg.k()?;
    let (s, t) = renorm_words(&cfg.theta, k)?;
    let ls = words::word_expand(&s);
    let lt = words::word_expand(&t);
    let m = cfg.samples();
    let d = cfg.domains;
    let zero = c(0.0, 0.0);

    let l0 = z.eval_word(&lt, zero)?;
    let eta_bar = ParityMap1D::try_from_fn(d.eta, cfg.order, m, |x| Ok::<C64, Renorm1DError>(z.eval_word(&ls, l0 * x)? / l0))?;
    let xi_bar = ParityMap1D::try_from_fn(d.xi, cfg.order, m, |x| Ok::<C64, Renorm1DError>(z.eval_word(&lt, l0 * x)? / l0))?;
    let bar = Pair1D { eta: eta_bar, xi: xi_bar, antilinear: z.antilinear };

    let (c1, c2) = critical_offsets(&bar)?;
    let l1 = bar.xi.eval(c1 + c2).stage("Π₁: ξ̃(0)")? - c1;
    let tilde = if c1 == zero && c2 == zero && l1 == c(1.0, 0.0) {
        bar
    } else {
        let eta = ParityMap1D::try_from_fn(d.eta, cfg.order, m, |x| {
            Ok::<C64, AfuncError>((bar.eta.eval(l1 * x + c1)? - c1 - c2) / l1)
        })
        .stage("Π₁: refit η")?;
        let xi = ParityMap1D::try_from_fn(d.xi, cfg.order, m, |x| {
            Ok::<C64, AfuncError>((bar.xi.eval(l1 * x + c1 + c2)? - c1) / l1)
        })
        .stage("Π₁: refit ξ")?;
        Pair1D { eta, xi, antilinear: bar.antilinear }
    };

    let (out, pi2) = project_ac(&tilde)?;
    Ok((out, StepTrace { l0, c1, c2, l1, pi2 }))
}

pub fn renorm_step(z: &Pair1D, cfg: &Renorm1DConfig) -> Result<Pair1D> {
    renorm_step_traced(z, cfg).map(|(p, _)| p)
}

/// `P_λ(x) = x² + λ/2 − λ²/4`, with the fixed point at `λ/2` of multiplier `λ`.
pub fn quadratic_c(lambda: C64) -> C64 {
    lambda / 2.0 - lambda * lambda / 4.0
}

/// `P^n(x)`.
pub fn quadratic_iterate(cq: C64, x: C64, n: u64) -> C64 {
    let mut z = x;
    for _ in 0..n {
        z = z * z + cq;
    }
    z
}

/// Renormalization of the quadratic polynomial at level `n`:
/// `(P^{q_{n+1}}(l·x)/l, P^{q_n}(l·x)/l)` with `l = P^{q_n}(0)`.
pub fn quadratic_seed(level: usize, cfg: &Renorm1DConfig) -> Result<Pair1D> {
    quadratic_seed_at(cfg.theta.multiplier(), level, cfg)
}

pub fn quadratic_seed_at(lambda: C64, level: usize, cfg: &Renorm1DConfig) -> Result<Pair1D> {
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(Renorm1DError::Invalid(format!("multiplier {lambda} is not on the unit circle")));
    }
    let q = words::convergents(&cfg.theta, level + 2);
    if q.len() < level + 2 {
        return Err(Renorm1DError::Words(WordsError::ShortExpansion { requested: level + 1, available: q.len() }));
    }
    let (qn, qn1) = (q[level].1, q[level + 1].1);
    let cq = quadratic_c(lambda);
    let l = quadratic_iterate(cq, c(0.0, 0.0), qn);
    let m = cfg.samples();
    let d = cfg.domains;
    let fit = |dom: DiskDomain, iters: u64| -> Result<ParityMap1D> {
        let mut p = ParityMap1D::try_from_fn(dom, cfg.order, m, |x| {
            let v = quadratic_iterate(cq, l * x, iters) / l;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Renorm1DError::Invalid(format!("quadratic orbit escaped at x = {x}")))
            }
        })?;
        // Iterates of an even polynomial are even.
        p.odd = AnalyticMap1D::zero(dom, cfg.order);
        Ok(p)
    };
    Ok(Pair1D { eta: fit(d.eta, qn1)?, xi: fit(d.xi, qn)?, antilinear: false })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub iterations: usize,
    /// Coefficient norm of `ℛζ − ζ` for the truncated operator.
    pub residual: f64,
    /// Estimated truncation error of `ℛζ`, reported separately.
    pub tail: f64,
    pub residual_history: Vec<f64>,
}

/// Newton on the even coefficients of `ζ ↦ ℛζ − ζ`, with a central
/// finite-difference Jacobian (step `1e−6`).
pub fn fixed_point(seed: &Pair1D, cfg: &Renorm1DConfig, tol: f64) -> Result<(Pair1D, FixedPointReport)> {
    let d = cfg.domains;
    let n1 = cfg.order + 1;
    let mut z = if seed.order() == cfg.order && seed.domains() == d {
        seed.clone()
    } else {
        seed.refit(d, cfg.order, cfg.samples())?
    };
    // The fixed point is even; Newton runs on [E_η, E_ξ].
    let pack = |p: &Pair1D| -> Vec<C64> {
        let mut v = p.eta.even.coeffs.clone();
        v.extend_from_slice(&p.xi.even.coeffs);
        v
    };
    let unpack = |v: &[C64]| -> Pair1D {
        Pair1D {
            eta: ParityMap1D::from_even(AnalyticMap1D::new(v[..n1].to_vec(), d.eta)),
            xi: ParityMap1D::from_even(AnalyticMap1D::new(v[n1..].to_vec(), d.xi)),
            antilinear: false,
        }
    };
    let f = |v: &[C64]| -> Result<Vec<C64>> {
        let r = renorm_step(&unpack(v), cfg)?;
        Ok(pack(&r).iter().zip(v).map(|(a, b)| a - b).collect())
    };
    let mut v = pack(&z);
    let mut history = Vec::new();
    for it in 0..25 {
        let fv = f(&v)?;
        z = unpack(&v);
        let rz = renorm_step(&z, cfg)?;
        let res = rz.coeff_distance(&z);
        history.push(res);
        if res < tol {
            let tail = rz.tail_bound();
            return Ok((z, FixedPointReport { iterations: it, residual: res, tail, residual_history: history }));
        }
        if history.len() >= 4 && res > 0.5 * history[history.len() - 4] && res < 1e3 * tol {
            break;
        }
        let jac = fd_jacobian(&v, |w| {
            let r = renorm_step(&unpack(w), cfg)?;
            Ok::<_, Renorm1DError>(pack(&r))
        })?;
        let dim = v.len();
        let a = jac - DMatrix::<C64>::identity(dim, dim);
        let rhs = nalgebra::DVector::from_iterator(dim, fv.iter().map(|z| -z));
        let step = a.lu().solve(&rhs).ok_or_else(|| Renorm1DError::Newton("fixed point: singular system".into()))?;
        for (vi, si) in v.iter_mut().zip(step.iter()) {
            *vi += si;
        }
    }
    let res = *history.last().unwrap_or(&f64::INFINITY);
    Err(Renorm1DError::Newton(format!("fixed point: residual stalled at {res:.3e} (history {history:?})")))
}

/// Step for central differences in coefficient coordinates.
pub const FD_STEP: f64 = 1e-6;

/// Retries of a failed column, each with the step divided by 16.
const FD_RETRIES: usize = 3;

/// Central-difference Jacobian of `g` at `v`; columns are computed in
/// parallel. A column whose perturbed evaluation fails is retried with a
/// smaller step: high-order coefficients are amplified wherever a solver
/// evaluates a series near the edge of its disk.
pub fn fd_jacobian<E: Send>(
    v: &[C64],
    g: impl Fn(&[C64]) -> std::result::Result<Vec<C64>, E> + Sync,
) -> std::result::Result<DMatrix<C64>, E> {
    use rayon::prelude::*;
    let dim = v.len();
    let column = |k: usize, h: f64| -> std::result::Result<Vec<C64>, E> {
        let mut vp = v.to_vec();
        let mut vm = v.to_vec();
        vp[k] += h;
        vm[k] -= h;
        let (gp, gm) = (g(&vp)?, g(&vm)?);
        Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let cols: Vec<std::result::Result<Vec<C64>, E>> = (0..dim)
        .into_par_iter()
        .map(|k| {
            let mut h = FD_STEP;
            let mut out = column(k, h);
            for _ in 0..FD_RETRIES {
                if out.is_ok() {
                    break;
                }
                h /= 16.0;
                out = column(k, h);
            }
            out
        })
        .collect();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for (k, col) in cols.into_iter().enumerate() {
        for (i, x) in col?.into_iter().enumerate().take(dim) {
            out[(i, k)] = x;
        }
    }
    Ok(out)
}

pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let ev = m
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Renorm1DError::Newton("Schur decomposition failed".into()))?;
    let mut v: Vec<C64> = ev.iter().copied().collect();
    v.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Eigen {
    pub value: C64,
    /// Distance to the nearest eigenvalue at the finer order, if computed.
    pub drift: Option<f64>,
    pub trusted: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub order: usize,
    pub dimension: usize,
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Eigen>,
    pub kappa: C64,
    pub comparison_order: Option<usize>,
    pub warnings: Vec<String>,
}

/// Eigenvalues below this modulus are not resolved by the truncation.
pub const SPECTRUM_FLOOR: f64 = 1e-3;

impl SpectrumReport {
    pub fn trusted(&self) -> impl Iterator<Item = &Eigen> {
        self.eigenvalues.iter().filter(|e| e.trusted)
    }

    pub fn trusted_expanding(&self) -> usize {
        self.trusted().filter(|e| e.value.norm() > 1.0).count()
    }

    /// Flags each eigenvalue by its distance to the spectrum at a finer
    /// order: trusted when above the floor and within `rel` relative drift.
    pub fn resolve(&mut self, finer: &[C64], finer_order: usize, rel: f64) {
        self.comparison_order = Some(finer_order);
        for e in self.eigenvalues.iter_mut() {
            let drift = finer.iter().map(|f| (f - e.value).norm()).fold(f64::INFINITY, f64::min);
            e.drift = Some(drift);
            e.trusted = e.value.norm() >= SPECTRUM_FLOOR && drift <= rel * e.value.norm();
        }
    }
}

pub fn spectrum_from(eigs: Vec<C64>, order: usize, dimension: usize) -> SpectrumReport {
    let kappa = eigs.first().copied().unwrap_or(c(0.0, 0.0));
    SpectrumReport {
        order,
        dimension,
        eigenvalues: eigs.into_iter().map(|value| Eigen { value, drift: None, trusted: false }).collect(),
        kappa,
        comparison_order: None,
        warnings: Vec::new(),
    }
}

/// Jacobian of `ℛ` at `ζ*` over all coefficients (even and odd parts of
/// both maps). The image of `ℛ` lies in the almost-commuting class, so the
/// directions normal to it contribute zero eigenvalues.
pub fn jacobian_matrix(zstar: &Pair1D, cfg: &Renorm1DConfig) -> Result<DMatrix<C64>> {
    let d = cfg.domains;
    let v = zstar.to_vec();
    fd_jacobian(&v, |w| Ok(renorm_step(&Pair1D::from_vec(w, d), cfg)?.to_vec()))
}

/// Eigenvalues of the Jacobian at order `cfg.order`; when `finer` is given,
/// each eigenvalue is flagged by its stability against that spectrum.
pub fn jacobian_spectrum(zstar: &Pair1D, cfg: &Renorm1DConfig) -> Result<SpectrumReport> {
    let jac = jacobian_matrix(zstar, cfg)?;
    let dim = jac.nrows();
    let eigs = eigenvalues(&jac)?;
    let mut rep = spectrum_from(eigs, cfg.order, dim);
    if !jac.iter().all(|x| x.is_finite()) {
        rep.warnings.push("non-finite Jacobian entries".into());
    }
    Ok(rep)
}

/// Fixed point and spectrum at `order` and `order + extra`, with the
/// coarse spectrum flagged against the fine one.
pub fn resolved_spectrum(
    seed: &Pair1D,
    cfg: &Renorm1DConfig,
    extra: usize,
    tol: f64,
) -> Result<(Pair1D, SpectrumReport, SpectrumReport)> {
    let (zc, _) = fixed_point(seed, cfg, tol)?;
    let fine_cfg = Renorm1DConfig { order: cfg.order + extra, ..cfg.clone() };
    let (zf, _) = fixed_point(&zc, &fine_cfg, tol)?;
    let mut coarse = jacobian_spectrum(&zc, cfg)?;
    let mut fine = jacobian_spectrum(&zf, &fine_cfg)?;
    let fine_vals: Vec<C64> = fine.eigenvalues.iter().map(|e| e.value).collect();
    let coarse_vals: Vec<C64> = coarse.eigenvalues.iter().map(|e| e.value).collect();
    coarse.resolve(&fine_vals, fine_cfg.order, RESOLUTION_REL);
    fine.resolve(&coarse_vals, cfg.order, RESOLUTION_REL);
    Ok((zc, coarse, fine))
}

/// Relative drift under `N → N+8` below which an eigenvalue is trusted.
pub const RESOLUTION_REL: f64 = 1e-3;

/// Golden-mean fixed point from the quadratic seed at level 16, i.e. eight
/// applications of the two-level operator.
pub fn golden_fixed_point(cfg: &Renorm1DConfig, tol: f64) -> Result<(Pair1D, FixedPointReport)> {
    let seed = quadratic_seed(16, cfg)?;
    fixed_point(&seed, cfg, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_polynomial_values() {
        assert!((quadratic_c(c(1.0, 0.0)) - c(0.25, 0.0)).norm() < 1e-16);
        let lam = RotationNumber::golden().multiplier();
        let cq = quadratic_c(lam);
        // Fixed point λ/2 with multiplier λ.
        let p = lam / 2.0;
        assert!((p * p + cq - p).norm() < 1e-15);
    }

    #[test]
    fn seed_commutes_and_is_normalized() {
        let cfg = Renorm1DConfig::with_order(40);
        let seed = quadratic_seed(8, &cfg).unwrap();
        let d = ac_defect(&seed).unwrap();
        assert!(d.max_commutation() < 1e-9, "{d:?}");
        assert!(d.normalization.norm() < 1e-12);
    }

    #[test]
    fn projection_fixes_commuting_pairs() {
        let cfg = Renorm1DConfig::with_order(40);
        let seed = quadratic_seed(8, &cfg).unwrap();
        let (out, p) = project_ac(&seed).unwrap();
        assert!(p.iter().all(|z| z.norm() < 1e-9), "{p:?}");
        assert!(out.distance(&seed).unwrap() < 1e-9);
    }

    #[test]
    fn projection_recovers_constant_shift() {
        let cfg = Renorm1DConfig::with_order(40);
        let mut z = quadratic_seed(8, &cfg).unwrap();
        z.xi.even.coeffs[0] += 1e-4;
        let (_, p) = project_ac(&z).unwrap();
        assert!((p[2] + 1e-4).norm() < 1e-8, "{p:?}");
    }

    #[test]
    fn seed_renormalizes_to_next_seed() {
        let cfg = Renorm1DConfig::with_order(40);
        let s8 = quadratic_seed(8, &cfg).unwrap();
        let s10 = quadratic_seed(10, &cfg).unwrap();
        let r = renorm_step(&s8, &cfg).unwrap();
        assert!(r.distance(&s10).unwrap() < 1e-8);
    }
}
