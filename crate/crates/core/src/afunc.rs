//! Truncated power series on disks and bidisks.
//!
//! Coefficients are stored in the normalized variable `u = (z − c)/r`, so a
//! series converging on its domain has coefficients that decay
//! geometrically regardless of where the disk sits. All fitting goes through
//! samples on the boundary circle and an FFT.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Relative margin used by every range check.
pub const DOMAIN_MARGIN: f64 = 0.02;

#[derive(Debug, Error, Clone)]
pub enum AfuncError {
    #[error("{context}: point {point} escapes {domain}")]
    DomainEscape { point: C64, domain: DiskDomain, context: String },
    #[error("{0}: no convergence (residual {1:.3e})")]
    NoConvergence(String, f64),
    #[error("{0}: degenerate (value {1:.3e})")]
    Degenerate(String, f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, AfuncError>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskDomain {
    pub center: C64,
    pub radius: f64,
}

impl fmt::Display for DiskDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D({}, {})", self.center, self.radius)
    }
}

impl DiskDomain {
    pub fn new(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(AfuncError::Invalid(format!("disk radius {radius}")));
        }
        Ok(DiskDomain { center, radius })
    }

    pub fn centered(radius: f64) -> Self {
        DiskDomain { center: C64::new(0.0, 0.0), radius }
    }

    pub fn to_local(&self, z: C64) -> C64 {
        (z - self.center) / self.radius
    }

    pub fn from_local(&self, u: C64) -> C64 {
        self.center + u * self.radius
    }

    pub fn contains(&self, z: C64, margin: f64) -> bool {
        (z - self.center).norm() <= self.radius * (1.0 + margin)
    }

    pub fn contains_disk(&self, other: &DiskDomain) -> bool {
        (other.center - self.center).norm() + other.radius <= self.radius
    }

    /// `M` equally spaced boundary points.
    pub fn boundary(&self, m: usize) -> Vec<C64> {
        (0..m).map(|j| self.from_local(C64::from_polar(1.0, TAU * j as f64 / m as f64))).collect()
    }

    /// The image `α·D`.
    pub fn scaled(&self, alpha: C64) -> DiskDomain {
        DiskDomain { center: self.center * alpha, radius: self.radius * alpha.norm() }
    }

    fn check(&self, z: C64, context: &str) -> Result<()> {
        if self.contains(z, DOMAIN_MARGIN) && z.is_finite() {
            Ok(())
        } else {
            Err(AfuncError::DomainEscape { point: z, domain: *self, context: context.to_string() })
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT, `X_k = Σ x_j e^{-2πijk/M}`.
fn fft_forward(buf: &mut [C64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// Coefficients `0..=order` of a series from its values at `e^{2πij/M}`.
pub fn fit_circle(mut samples: Vec<C64>, order: usize) -> Vec<C64> {
    let m = samples.len();
    fft_forward(&mut samples);
    let scale = 1.0 / m as f64;
    samples.truncate(order + 1);
    for c in samples.iter_mut() {
        *c *= scale;
    }
    samples.resize(order + 1, C64::new(0.0, 0.0));
    samples
}

/// Heuristic truncation error: a geometric fit to the last quartile of the
/// coefficient moduli, summed over the missing tail.
pub fn tail_estimate(abs: &[f64]) -> f64 {
    let n = abs.len();
    if n < 8 {
        return abs.last().copied().unwrap_or(0.0);
    }
    let q = (n / 4).max(2);
    let hi = abs[n - 1].max(abs[n - 2]).max(1e-300);
    let lo = abs[n - 1 - q].max(abs[n - 2 - q]).max(1e-300);
    let ratio = (hi / lo).powf(1.0 / q as f64);
    if ratio < 0.98 {
        hi * ratio / (1.0 - ratio)
    } else {
        abs[n - q..].iter().sum()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `Σ|c_k|` over the normalized disk, plus the tail.
    pub l1: f64,
    /// Maximum over boundary samples, plus the tail.
    pub sampled: f64,
}

impl NormEstimate {
    pub fn value(&self) -> f64 {
        self.l1.max(self.sampled)
    }
}

/// Number of boundary samples used by sup-norm estimates.
pub const NORM_SAMPLES: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMap1D {
    pub coeffs: Vec<C64>,
    pub domain: DiskDomain,
    pub tail_bound: f64,
}

fn horner(c: &[C64], u: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &ck| acc * u + ck)
}

/// Value and first two `u`-derivatives.
fn horner2(c: &[C64], u: C64) -> (C64, C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let (mut p, mut d1, mut d2) = (zero, zero, zero);
    for &ck in c.iter().rev() {
        d2 = d2 * u + d1 * 2.0;
        d1 = d1 * u + p;
        p = p * u + ck;
    }
    (p, d1, d2)
}

fn binomial_shift(poly: &[C64], center: C64, radius: f64, order: usize) -> Vec<C64> {
    // p(c + r u) expanded in u by repeated Horner on polynomials.
    let mut out = vec![C64::new(0.0, 0.0); poly.len().max(1)];
    for &a in poly.iter().rev() {
        let mut next = vec![C64::new(0.0, 0.0); out.len() + 1];
        for (k, &o) in out.iter().enumerate() {
            next[k] += o * center;
            next[k + 1] += o * radius;
        }
        next[0] += a;
        out = next;
    }
    out.resize(order + 1, C64::new(0.0, 0.0));
    out
}

impl AnalyticMap1D {
    pub fn new(coeffs: Vec<C64>, domain: DiskDomain) -> Self {
        let abs: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
        let tail_bound = tail_estimate(&abs);
        AnalyticMap1D { coeffs, domain, tail_bound }
    }

    pub fn zero(domain: DiskDomain, order: usize) -> Self {
        AnalyticMap1D { coeffs: vec![C64::new(0.0, 0.0); order + 1], domain, tail_bound: 0.0 }
    }

    pub fn constant(domain: DiskDomain, order: usize, value: C64) -> Self {
        let mut f = Self::zero(domain, order);
        f.coeffs[0] = value;
        f
    }

    /// A polynomial given by its coefficients in `z`.
    pub fn from_poly(domain: DiskDomain, order: usize, poly: &[C64]) -> Self {
        if poly.len() > order + 1 && poly[order + 1..].iter().any(|c| c.norm() > 0.0) {
            let c = binomial_shift(poly, domain.center, domain.radius, poly.len() - 1);
            return Self::new(c[..=order].to_vec(), domain);
        }
        AnalyticMap1D { coeffs: binomial_shift(poly, domain.center, domain.radius, order), domain, tail_bound: 0.0 }
    }

    pub fn identity(domain: DiskDomain, order: usize) -> Self {
        Self::from_poly(domain, order, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// Fits `f` from `m` samples on the boundary circle.
    pub fn from_fn(domain: DiskDomain, order: usize, m: usize, f: impl Fn(C64) -> C64) -> Self {
        let samples = domain.boundary(m).into_iter().map(f).collect();
        Self::new(fit_circle(samples, order), domain)
    }

    pub fn try_from_fn<E>(
        domain: DiskDomain,
        order: usize,
        m: usize,
        f: impl Fn(C64) -> std::result::Result<C64, E>,
    ) -> std::result::Result<Self, E> {
        let samples = domain.boundary(m).into_iter().map(f).collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(Self::new(fit_circle(samples, order), domain))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval_local(&self, u: C64) -> C64 {
        horner(&self.coeffs, u)
    }

    pub fn eval_unchecked(&self, z: C64) -> C64 {
        self.eval_local(self.domain.to_local(z))
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        self.domain.check(z, "evaluate")?;
        Ok(self.eval_unchecked(z))
    }

    /// `(f, f′, f″)` with derivatives in `z`.
    pub fn jet_unchecked(&self, z: C64) -> (C64, C64, C64) {
        let r = self.domain.radius;
        let (p, d1, d2) = horner2(&self.coeffs, self.domain.to_local(z));
        (p, d1 / r, d2 / (r * r))
    }

    pub fn derivative(&self) -> Self {
        let r = self.domain.radius;
        let n = self.order();
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        for k in 1..=n {
            c[k - 1] = self.coeffs[k] * (k as f64 / r);
        }
        AnalyticMap1D { coeffs: c, domain: self.domain, tail_bound: self.tail_bound * (n + 1) as f64 / r }
    }

    /// `f∘g` on the domain of `g`. The range of `g` is checked on the
    /// boundary circle, which bounds it by the maximum principle. The tail
    /// rule is `tail(f) + sup|f′|·tail(g)` to first order.
    pub fn compose(&self, g: &AnalyticMap1D) -> Result<Self> {
        let m = (2 * (g.order() + 1)).next_power_of_two().max(64);
        let pts = g.domain.boundary(m);
        let mut vals = Vec::with_capacity(m);
        for &z in &pts {
            let w = g.eval_unchecked(z);
            self.domain.check(w, "compose: range of inner map")?;
            vals.push(self.eval_unchecked(w));
        }
        let dsup = self.derivative().sup_sampled();
        let mut out = Self::new(fit_circle(vals, g.order()), g.domain);
        out.tail_bound = out.tail_bound.max(self.tail_bound + dsup * g.tail_bound);
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.domain != other.domain {
            return Err(AfuncError::Invalid("series on different domains".into()));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = C64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|k| op(*self.coeffs.get(k).unwrap_or(&z), *other.coeffs.get(k).unwrap_or(&z)))
            .collect();
        Ok(AnalyticMap1D { coeffs, domain: self.domain, tail_bound: self.tail_bound + other.tail_bound })
    }

    pub fn scale(&self, s: C64) -> Self {
        AnalyticMap1D {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
            domain: self.domain,
            tail_bound: self.tail_bound * s.norm(),
        }
    }

    pub fn sup_sampled(&self) -> f64 {
        self.domain
            .boundary(NORM_SAMPLES)
            .into_iter()
            .map(|z| self.eval_unchecked(z).norm())
            .fold(0.0, f64::max)
    }

    pub fn norm_estimate(&self) -> NormEstimate {
        let l1: f64 = self.coeffs.iter().map(|c| c.norm()).sum();
        NormEstimate { l1: l1 + self.tail_bound, sampled: self.sup_sampled() + self.tail_bound }
    }

    pub fn uniform_norm(&self) -> f64 {
        self.norm_estimate().value()
    }

    /// Newton on `f′` from `guess`.
    pub fn critical_point(&self, guess: C64) -> Result<C64> {
        let mut z = guess;
        for _ in 0..80 {
            let (_, d1, d2) = self.jet_unchecked(z);
            if d2.norm() < 1e-10 {
                return Err(AfuncError::Degenerate("critical point: f″ vanishes".into(), d2.norm()));
            }
            let step = d1 / d2;
            z -= step;
            if !z.is_finite() {
                break;
            }
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        let (_, d1, _) = self.jet_unchecked(z);
        if !(d1.norm() < 1e-12) {
            return Err(AfuncError::NoConvergence("critical point".into(), d1.norm()));
        }
        self.domain.check(z, "critical point")?;
        Ok(z)
    }

    /// Series of the inverse branch of `f` through `f(at)`, on a disk around
    /// `f(at)` small enough that `f` is univalent on the preimage.
    pub fn local_inverse(&self, at: C64) -> Result<Self> {
        self.domain.check(at, "local inverse base point")?;
        let (w0, d1, _) = self.jet_unchecked(at);
        if d1.norm() < 1e-10 {
            return Err(AfuncError::Degenerate("local inverse: f′ vanishes".into(), d1.norm()));
        }
        let rho0 = 0.5 * (self.domain.radius - (at - self.domain.center).norm()).max(0.0);
        if rho0 <= 0.0 {
            return Err(AfuncError::Invalid("local inverse base point on the boundary".into()));
        }
        let probe = DiskDomain { center: at, radius: rho0 };
        let m2 = probe
            .boundary(64)
            .into_iter()
            .map(|z| self.jet_unchecked(z).2.norm())
            .fold(self.jet_unchecked(at).2.norm(), f64::max);
        let rho = if m2 > 0.0 { rho0.min(d1.norm() / (2.0 * m2)) } else { rho0 };
        let out_domain = DiskDomain { center: w0, radius: 0.25 * d1.norm() * rho };
        let m = (2 * (self.order() + 1)).next_power_of_two().max(64);
        let mut vals = Vec::with_capacity(m);
        for w in out_domain.boundary(m) {
            let mut z = at + (w - w0) / d1;
            let mut ok = false;
            for _ in 0..60 {
                let (f, fp, _) = self.jet_unchecked(z);
                let step = (f - w) / fp;
                z -= step;
                if step.norm() < 1e-15 * (1.0 + z.norm()) {
                    ok = true;
                    break;
                }
            }
            if !ok || (z - at).norm() > rho * 1.0001 {
                return Err(AfuncError::NoConvergence("local inverse".into(), (z - at).norm()));
            }
            vals.push(z);
        }
        Ok(Self::new(fit_circle(vals, self.order()), out_domain))
    }

    /// `α⁻¹ f(α z)` on `α⁻¹·D`.
    pub fn rescale_conjugate(&self, alpha: C64) -> Result<Self> {
        if alpha.norm() == 0.0 || !alpha.is_finite() {
            return Err(AfuncError::Invalid("rescaling by zero".into()));
        }
        let phase = alpha / alpha.norm();
        let domain = DiskDomain { center: self.domain.center / alpha, radius: self.domain.radius / alpha.norm() };
        let mut p = C64::new(1.0, 0.0) / alpha;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            coeffs.push(c * p);
            p *= phase;
        }
        Ok(AnalyticMap1D { coeffs, domain, tail_bound: self.tail_bound / alpha.norm() })
    }

    /// Re-expands on another disk by sampling. The new disk must lie in the
    /// old one.
    pub fn restrict(&self, domain: DiskDomain, order: usize) -> Result<Self> {
        if !self.domain.contains_disk(&DiskDomain { center: domain.center, radius: domain.radius / (1.0 + DOMAIN_MARGIN) }) {
            return Err(AfuncError::DomainEscape {
                point: domain.center,
                domain: self.domain,
                context: format!("restrict to {domain}"),
            });
        }
        let m = (2 * (order + 1)).next_power_of_two().max(64);
        Ok(Self::from_fn(domain, order, m, |z| self.eval_unchecked(z)))
    }
}

/// A map written as `f(x) = E(x²) + x·O(x²)`, with `E` and `O` expanded on
/// a disk in the `w = x²` plane. Near a quadratic critical point at 0 this
/// converges far better than a plain expansion in `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityMap1D {
    pub even: AnalyticMap1D,
    pub odd: AnalyticMap1D,
}

/// `(f, f′, f″)` of `E(x²) + x O(x²)` from the jets of `E` and `O` in `w`.
fn parity_jet(x: C64, e: (C64, C64, C64), o: (C64, C64, C64)) -> (C64, C64, C64) {
    let w = x * x;
    let f = e.0 + x * o.0;
    let d1 = x * e.1 * 2.0 + o.0 + w * o.1 * 2.0;
    let d2 = e.1 * 2.0 + w * e.2 * 4.0 + x * o.1 * 6.0 + x * w * o.2 * 4.0;
    (f, d1, d2)
}

/// Splits `f(±√w)` into even and odd parts.
fn parity_split(w: C64, vp: C64, vm: C64) -> Result<(C64, C64)> {
    let x = w.sqrt();
    if x.norm() < 1e-12 {
        return Err(AfuncError::Degenerate("parity fit: sample at w = 0".into(), x.norm()));
    }
    Ok(((vp + vm) * 0.5, (vp - vm) / (x * 2.0)))
}

impl ParityMap1D {
    pub fn domain(&self) -> DiskDomain {
        self.even.domain
    }

    pub fn order(&self) -> usize {
        self.even.order()
    }

    pub fn from_even(even: AnalyticMap1D) -> Self {
        let odd = AnalyticMap1D::zero(even.domain, even.order());
        ParityMap1D { even, odd }
    }

    pub fn try_from_fn<E: From<AfuncError>>(
        wdomain: DiskDomain,
        order: usize,
        m: usize,
        f: impl Fn(C64) -> std::result::Result<C64, E>,
    ) -> std::result::Result<Self, E> {
        let mut ev = Vec::with_capacity(m);
        let mut od = Vec::with_capacity(m);
        for w in wdomain.boundary(m) {
            let x = w.sqrt();
            let (e, o) = parity_split(w, f(x)?, f(-x)?)?;
            ev.push(e);
            od.push(o);
        }
        Ok(ParityMap1D {
            even: AnalyticMap1D::new(fit_circle(ev, order), wdomain),
            odd: AnalyticMap1D::new(fit_circle(od, order), wdomain),
        })
    }

    pub fn from_fn(wdomain: DiskDomain, order: usize, m: usize, f: impl Fn(C64) -> C64) -> Result<Self> {
        Self::try_from_fn(wdomain, order, m, |x| Ok::<C64, AfuncError>(f(x)))
    }

    pub fn contains(&self, x: C64) -> bool {
        self.domain().contains(x * x, DOMAIN_MARGIN)
    }

    pub fn eval_unchecked(&self, x: C64) -> C64 {
        let w = x * x;
        self.even.eval_unchecked(w) + x * self.odd.eval_unchecked(w)
    }

    pub fn eval(&self, x: C64) -> Result<C64> {
        self.domain().check(x * x, "evaluate (w = x²)")?;
        Ok(self.eval_unchecked(x))
    }

    pub fn jet_unchecked(&self, x: C64) -> (C64, C64, C64) {
        let w = x * x;
        parity_jet(x, self.even.jet_unchecked(w), self.odd.jet_unchecked(w))
    }

    pub fn jet(&self, x: C64) -> Result<(C64, C64, C64)> {
        self.domain().check(x * x, "evaluate (w = x²)")?;
        Ok(self.jet_unchecked(x))
    }

    pub fn is_even(&self) -> bool {
        self.odd.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn tail_bound(&self) -> f64 {
        let rx = (self.domain().center.norm() + self.domain().radius).sqrt();
        self.even.tail_bound + rx * self.odd.tail_bound
    }

    /// Sup over the boundary `x = ±√w`, `|w − c| = r`.
    pub fn sup_sampled(&self) -> f64 {
        let mut best: f64 = 0.0;
        for w in self.domain().boundary(NORM_SAMPLES / 2) {
            let x = w.sqrt();
            best = best.max(self.eval_unchecked(x).norm()).max(self.eval_unchecked(-x).norm());
        }
        best
    }

    pub fn norm_estimate(&self) -> NormEstimate {
        let rx = (self.domain().center.norm() + self.domain().radius).sqrt();
        let l1e: f64 = self.even.coeffs.iter().map(|c| c.norm()).sum();
        let l1o: f64 = self.odd.coeffs.iter().map(|c| c.norm()).sum();
        let tail = self.tail_bound();
        NormEstimate { l1: l1e + rx * l1o + tail, sampled: self.sup_sampled() + tail }
    }

    pub fn uniform_norm(&self) -> f64 {
        self.norm_estimate().value()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(ParityMap1D { even: self.even.sub(&other.even)?, odd: self.odd.sub(&other.odd)? })
    }

    /// Newton on `f′` from `guess`, using the parity jet.
    pub fn critical_point(&self, guess: C64) -> Result<C64> {
        let mut x = guess;
        for _ in 0..80 {
            let (_, d1, d2) = self.jet_unchecked(x);
            if d2.norm() < 1e-10 {
                return Err(AfuncError::Degenerate("critical point: f″ vanishes".into(), d2.norm()));
            }
            let step = d1 / d2;
            x -= step;
            if step.norm() < 1e-16 || !x.is_finite() {
                break;
            }
        }
        let (_, d1, _) = self.jet_unchecked(x);
        if !(d1.norm() < 1e-12) {
            return Err(AfuncError::NoConvergence("critical point".into(), d1.norm()));
        }
        self.domain().check(x * x, "critical point")?;
        Ok(x)
    }

    /// Solves `f(x) = target` by Newton from `guess`.
    pub fn solve(&self, target: C64, guess: C64) -> Result<C64> {
        let mut x = guess;
        for _ in 0..60 {
            let (f, d1, _) = self.jet_unchecked(x);
            let step = (f - target) / d1;
            x -= step;
            if !x.is_finite() {
                break;
            }
            if step.norm() < 1e-15 * (1.0 + x.norm()) {
                self.domain().check(x * x, "inverse branch")?;
                return Ok(x);
            }
        }
        Err(AfuncError::NoConvergence("inverse branch".into(), (self.eval_unchecked(x) - target).norm()))
    }

    /// Coefficients `[E₀…E_N, O₀…O_N]`.
    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = self.even.coeffs.clone();
        v.extend_from_slice(&self.odd.coeffs);
        v
    }

    pub fn from_vec(v: &[C64], wdomain: DiskDomain) -> Self {
        let n = v.len() / 2;
        ParityMap1D {
            even: AnalyticMap1D::new(v[..n].to_vec(), wdomain),
            odd: AnalyticMap1D::new(v[n..].to_vec(), wdomain),
        }
    }

    /// Complex conjugate map `x ↦ conj(f(conj x))` on the conjugate disk.
    pub fn conjugate(&self) -> Self {
        let conj = |f: &AnalyticMap1D| AnalyticMap1D {
            coeffs: f.coeffs.iter().map(|c| c.conj()).collect(),
            domain: DiskDomain { center: f.domain.center.conj(), radius: f.domain.radius },
            tail_bound: f.tail_bound,
        };
        ParityMap1D { even: conj(&self.even), odd: conj(&self.odd) }
    }
}

/// Jet of a function of two variables: value and all partials up to order 2.
#[derive(Clone, Copy, Debug, Default)]
pub struct Jet2 {
    pub f: C64,
    pub fx: C64,
    pub fy: C64,
    pub fxx: C64,
    pub fxy: C64,
    pub fyy: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMap2D {
    /// Row-major grid `c[i·(ny+1) + j]` of `u^i v^j`.
    pub coeffs: Vec<C64>,
    pub nx: usize,
    pub ny: usize,
    pub dx: DiskDomain,
    pub dy: DiskDomain,
    pub tail_bound: f64,
}

/// Sample angles in `y` are offset by half a step, so that no sample sits
/// on the positive real direction of the `y`-disk.
fn y_angle(j: usize, my: usize) -> f64 {
    (TAU * j as f64 + PI) / my as f64
}

/// Fits a coefficient grid from values `vals[a·my + b]` at
/// `(e^{2πia/mx}, e^{i(2πb+π)/my})`.
fn fit_grid(mut vals: Vec<C64>, mx: usize, my: usize, nx: usize, ny: usize) -> Vec<C64> {
    // Transform along x for every column b.
    let mut col = vec![C64::new(0.0, 0.0); mx];
    let mut partial = vec![C64::new(0.0, 0.0); (nx + 1) * my];
    for b in 0..my {
        for a in 0..mx {
            col[a] = vals[a * my + b];
        }
        fft_forward(&mut col);
        for i in 0..=nx.min(mx - 1) {
            partial[i * my + b] = col[i];
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); (nx + 1) * (ny + 1)];
    let scale = 1.0 / (mx * my) as f64;
    for i in 0..=nx {
        let row = &mut partial[i * my..(i + 1) * my];
        fft_forward(row);
        for j in 0..=ny.min(my - 1) {
            let phase = C64::from_polar(1.0, -PI * j as f64 / my as f64);
            out[i * (ny + 1) + j] = row[j] * phase * scale;
        }
    }
    vals.clear();
    out
}

fn tail_estimate_2d(c: &[C64], nx: usize, ny: usize) -> f64 {
    let rows: Vec<f64> = (0..=nx).map(|i| (0..=ny).map(|j| c[i * (ny + 1) + j].norm()).sum()).collect();
    let cols: Vec<f64> = (0..=ny).map(|j| (0..=nx).map(|i| c[i * (ny + 1) + j].norm()).sum()).collect();
    tail_estimate(&rows) + tail_estimate(&cols)
}

impl AnalyticMap2D {
    pub fn new(coeffs: Vec<C64>, nx: usize, ny: usize, dx: DiskDomain, dy: DiskDomain) -> Self {
        let tail_bound = tail_estimate_2d(&coeffs, nx, ny);
        AnalyticMap2D { coeffs, nx, ny, dx, dy, tail_bound }
    }

    pub fn zero(dx: DiskDomain, dy: DiskDomain, nx: usize, ny: usize) -> Self {
        AnalyticMap2D { coeffs: vec![C64::new(0.0, 0.0); (nx + 1) * (ny + 1)], nx, ny, dx, dy, tail_bound: 0.0 }
    }

    /// A map independent of `y`.
    pub fn from_1d(f: &AnalyticMap1D, dy: DiskDomain, ny: usize) -> Self {
        let nx = f.order();
        let mut out = Self::zero(f.domain, dy, nx, ny);
        for i in 0..=nx {
            out.coeffs[i * (ny + 1)] = f.coeffs[i];
        }
        out.tail_bound = f.tail_bound;
        out
    }

    pub fn sample_points(dx: &DiskDomain, dy: &DiskDomain, mx: usize, my: usize) -> (Vec<C64>, Vec<C64>) {
        let xs = dx.boundary(mx);
        let ys = (0..my).map(|j| dy.from_local(C64::from_polar(1.0, y_angle(j, my)))).collect();
        (xs, ys)
    }

    pub fn try_from_fn<E>(
        dx: DiskDomain,
        dy: DiskDomain,
        (nx, ny): (usize, usize),
        (mx, my): (usize, usize),
        mut f: impl FnMut(C64, C64) -> std::result::Result<C64, E>,
    ) -> std::result::Result<Self, E> {
        let (xs, ys) = Self::sample_points(&dx, &dy, mx, my);
        let mut vals = Vec::with_capacity(mx * my);
        for &x in &xs {
            for &y in &ys {
                vals.push(f(x, y)?);
            }
        }
        Ok(Self::new(fit_grid(vals, mx, my, nx, ny), nx, ny, dx, dy))
    }

    /// Fits from precomputed grid values in the layout of [`sample_points`].
    pub fn from_grid(vals: Vec<C64>, dx: DiskDomain, dy: DiskDomain, (nx, ny): (usize, usize), (mx, my): (usize, usize)) -> Self {
        Self::new(fit_grid(vals, mx, my, nx, ny), nx, ny, dx, dy)
    }

    fn row(&self, i: usize) -> &[C64] {
        &self.coeffs[i * (self.ny + 1)..(i + 1) * (self.ny + 1)]
    }

    pub fn eval_local(&self, u: C64, v: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in (0..=self.nx).rev() {
            acc = acc * u + horner(self.row(i), v);
        }
        acc
    }

    pub fn eval_unchecked(&self, x: C64, y: C64) -> C64 {
        self.eval_local(self.dx.to_local(x), self.dy.to_local(y))
    }

    pub fn eval(&self, x: C64, y: C64) -> Result<C64> {
        self.dx.check(x, "evaluate (x)")?;
        self.dy.check(y, "evaluate (y)")?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Value and partials up to second order, in the original variables.
    pub fn jet_unchecked(&self, x: C64, y: C64) -> Jet2 {
        let u = self.dx.to_local(x);
        let v = self.dy.to_local(y);
        let zero = C64::new(0.0, 0.0);
        let (mut p, mut pu, mut puu) = (zero, zero, zero);
        let (mut q, mut qu) = (zero, zero);
        let mut s = zero;
        for i in (0..=self.nx).rev() {
            let (r0, r1, r2) = horner2(self.row(i), v);
            puu = puu * u + pu * 2.0;
            pu = pu * u + p;
            p = p * u + r0;
            qu = qu * u + q;
            q = q * u + r1;
            s = s * u + r2;
        }
        let (rx, ry) = (self.dx.radius, self.dy.radius);
        Jet2 { f: p, fx: pu / rx, fy: q / ry, fxx: puu / (rx * rx), fxy: qu / (rx * ry), fyy: s / (ry * ry) }
    }

    /// The `y = y₀` slice as a one-variable series.
    pub fn slice(&self, y0: C64) -> AnalyticMap1D {
        let v = self.dy.to_local(y0);
        let coeffs = (0..=self.nx).map(|i| horner(self.row(i), v)).collect();
        AnalyticMap1D::new(coeffs, self.dx)
    }

    pub fn zip(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.dx != other.dx || self.dy != other.dy || self.nx != other.nx || self.ny != other.ny {
            return Err(AfuncError::Invalid("2D series with different layouts".into()));
        }
        Ok(AnalyticMap2D {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect(),
            nx: self.nx,
            ny: self.ny,
            dx: self.dx,
            dy: self.dy,
            tail_bound: self.tail_bound + other.tail_bound,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    /// Samples on the distinguished boundary (torus), which bounds the sup
    /// over the bidisk.
    pub fn sup_sampled(&self) -> f64 {
        let (mx, my) = (64, 16);
        let (xs, ys) = Self::sample_points(&self.dx, &self.dy, mx, my);
        let mut best: f64 = 0.0;
        for &x in &xs {
            for &y in &ys {
                best = best.max(self.eval_unchecked(x, y).norm());
            }
        }
        best
    }

    pub fn norm_estimate(&self) -> NormEstimate {
        let l1: f64 = self.coeffs.iter().map(|c| c.norm()).sum();
        NormEstimate { l1: l1 + self.tail_bound, sampled: self.sup_sampled() + self.tail_bound }
    }

    pub fn uniform_norm(&self) -> f64 {
        self.norm_estimate().value()
    }

    /// `f(g₁, g₂)` on the bidisk of `g₁`, `g₂`.
    pub fn compose(&self, g1: &AnalyticMap2D, g2: &AnalyticMap2D) -> Result<Self> {
        let mx = (2 * (g1.nx + 1)).next_power_of_two().max(32);
        let my = (2 * (g1.ny + 1)).next_power_of_two().max(8);
        Self::try_from_fn(g1.dx, g1.dy, (g1.nx, g1.ny), (mx, my), |x, y| {
            let a = g1.eval_unchecked(x, y);
            let b = g2.eval_unchecked(x, y);
            self.eval(a, b)
        })
    }

    pub fn partial_x(&self) -> Self {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = Self::zero(self.dx, self.dy, nx, ny);
        for i in 1..=nx {
            for j in 0..=ny {
                out.coeffs[(i - 1) * (ny + 1) + j] = self.coeffs[i * (ny + 1) + j] * (i as f64 / self.dx.radius);
            }
        }
        out.tail_bound = self.tail_bound * (nx + 1) as f64 / self.dx.radius;
        out
    }

    pub fn partial_y(&self) -> Self {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = Self::zero(self.dx, self.dy, nx, ny);
        for i in 0..=nx {
            for j in 1..=ny {
                out.coeffs[i * (ny + 1) + j - 1] = self.coeffs[i * (ny + 1) + j] * (j as f64 / self.dy.radius);
            }
        }
        out.tail_bound = self.tail_bound * (ny + 1) as f64 / self.dy.radius;
        out
    }
}

/// `f(x,y) = E(x², y) + x·O(x², y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityMap2D {
    pub even: AnalyticMap2D,
    pub odd: AnalyticMap2D,
}

impl ParityMap2D {
    pub fn wdomain(&self) -> DiskDomain {
        self.even.dx
    }

    pub fn ydomain(&self) -> DiskDomain {
        self.even.dy
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.even.nx, self.even.ny)
    }

    pub fn from_1d(f: &ParityMap1D, dy: DiskDomain, ny: usize) -> Self {
        ParityMap2D { even: AnalyticMap2D::from_1d(&f.even, dy, ny), odd: AnalyticMap2D::from_1d(&f.odd, dy, ny) }
    }

    /// Fits from values on `x = ±√w` over the `(w, y)` sample torus.
    pub fn try_from_fn<E: From<AfuncError>>(
        wdomain: DiskDomain,
        ydomain: DiskDomain,
        orders: (usize, usize),
        samples: (usize, usize),
        mut f: impl FnMut(C64, C64) -> std::result::Result<C64, E>,
    ) -> std::result::Result<Self, E> {
        let (mx, my) = samples;
        let (ws, ys) = AnalyticMap2D::sample_points(&wdomain, &ydomain, mx, my);
        let mut ev = Vec::with_capacity(mx * my);
        let mut od = Vec::with_capacity(mx * my);
        for &w in &ws {
            let x = w.sqrt();
            for &y in &ys {
                let (e, o) = parity_split(w, f(x, y)?, f(-x, y)?)?;
                ev.push(e);
                od.push(o);
            }
        }
        Ok(ParityMap2D {
            even: AnalyticMap2D::from_grid(ev, wdomain, ydomain, orders, samples),
            odd: AnalyticMap2D::from_grid(od, wdomain, ydomain, orders, samples),
        })
    }

    /// Builds from values already computed at the sample torus, laid out as
    /// `[sign][a][b]` with sign 0 for `+√w`.
    pub fn from_signed_grid(
        vals: &[C64],
        wdomain: DiskDomain,
        ydomain: DiskDomain,
        orders: (usize, usize),
        samples: (usize, usize),
    ) -> Result<Self> {
        let (mx, my) = samples;
        let ws = wdomain.boundary(mx);
        let mut ev = Vec::with_capacity(mx * my);
        let mut od = Vec::with_capacity(mx * my);
        for (a, &w) in ws.iter().enumerate() {
            for b in 0..my {
                let (e, o) = parity_split(w, vals[a * my + b], vals[mx * my + a * my + b])?;
                ev.push(e);
                od.push(o);
            }
        }
        Ok(ParityMap2D {
            even: AnalyticMap2D::from_grid(ev, wdomain, ydomain, orders, samples),
            odd: AnalyticMap2D::from_grid(od, wdomain, ydomain, orders, samples),
        })
    }

    /// Sample points `(x, y)` in the `[sign][a][b]` layout.
    pub fn signed_sample_points(wdomain: &DiskDomain, ydomain: &DiskDomain, samples: (usize, usize)) -> Vec<(C64, C64)> {
        let (mx, my) = samples;
        let (ws, ys) = AnalyticMap2D::sample_points(wdomain, ydomain, mx, my);
        let mut out = Vec::with_capacity(2 * mx * my);
        for sign in [1.0, -1.0] {
            for &w in &ws {
                let x = w.sqrt() * sign;
                for &y in &ys {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn contains(&self, x: C64, y: C64) -> bool {
        self.wdomain().contains(x * x, DOMAIN_MARGIN) && self.ydomain().contains(y, DOMAIN_MARGIN)
    }

    pub fn eval_unchecked(&self, x: C64, y: C64) -> C64 {
        let w = x * x;
        self.even.eval_unchecked(w, y) + x * self.odd.eval_unchecked(w, y)
    }

    pub fn eval(&self, x: C64, y: C64) -> Result<C64> {
        self.wdomain().check(x * x, "evaluate (w = x²)")?;
        self.ydomain().check(y, "evaluate (y)")?;
        Ok(self.eval_unchecked(x, y))
    }

    pub fn jet_unchecked(&self, x: C64, y: C64) -> Jet2 {
        let w = x * x;
        let e = self.even.jet_unchecked(w, y);
        let o = self.odd.jet_unchecked(w, y);
        let (f, fx, fxx) = parity_jet(x, (e.f, e.fx, e.fxx), (o.f, o.fx, o.fxx));
        Jet2 {
            f,
            fx,
            fxx,
            fy: e.fy + x * o.fy,
            fxy: x * e.fxy * 2.0 + o.fy + w * o.fxy * 2.0,
            fyy: e.fyy + x * o.fyy,
        }
    }

    pub fn jet(&self, x: C64, y: C64) -> Result<Jet2> {
        self.wdomain().check(x * x, "evaluate (w = x²)")?;
        self.ydomain().check(y, "evaluate (y)")?;
        Ok(self.jet_unchecked(x, y))
    }

    pub fn slice(&self, y0: C64) -> ParityMap1D {
        ParityMap1D { even: self.even.slice(y0), odd: self.odd.slice(y0) }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(ParityMap2D { even: self.even.sub(&other.even)?, odd: self.odd.sub(&other.odd)? })
    }

    pub fn tail_bound(&self) -> f64 {
        let rx = (self.wdomain().center.norm() + self.wdomain().radius).sqrt();
        self.even.tail_bound + rx * self.odd.tail_bound
    }

    pub fn sup_sampled(&self) -> f64 {
        let (mx, my) = (64, 16);
        let mut best: f64 = 0.0;
        for (x, y) in Self::signed_sample_points(&self.wdomain(), &self.ydomain(), (mx, my)) {
            best = best.max(self.eval_unchecked(x, y).norm());
        }
        best
    }

    pub fn norm_estimate(&self) -> NormEstimate {
        let rx = (self.wdomain().center.norm() + self.wdomain().radius).sqrt();
        let l1e: f64 = self.even.coeffs.iter().map(|c| c.norm()).sum();
        let l1o: f64 = self.odd.coeffs.iter().map(|c| c.norm()).sum();
        let tail = self.tail_bound();
        NormEstimate { l1: l1e + rx * l1o + tail, sampled: self.sup_sampled() + tail }
    }

    pub fn uniform_norm(&self) -> f64 {
        self.norm_estimate().value()
    }

    /// `sup |f(x,y) − f(x,0)|`, sampled on the distinguished boundary where
    /// the maximum is attained.
    pub fn y_variation(&self) -> f64 {
        let zero = C64::new(0.0, 0.0);
        let mut best: f64 = 0.0;
        for (x, y) in Self::signed_sample_points(&self.wdomain(), &self.ydomain(), (64, 16)) {
            best = best.max((self.eval_unchecked(x, y) - self.eval_unchecked(x, zero)).norm());
        }
        best
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = self.even.coeffs.clone();
        v.extend_from_slice(&self.odd.coeffs);
        v
    }

    pub fn from_vec(v: &[C64], wdomain: DiskDomain, ydomain: DiskDomain, orders: (usize, usize)) -> Self {
        let n = v.len() / 2;
        ParityMap2D {
            even: AnalyticMap2D::new(v[..n].to_vec(), orders.0, orders.1, wdomain, ydomain),
            odd: AnalyticMap2D::new(v[n..].to_vec(), orders.0, orders.1, wdomain, ydomain),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluation_examples() {
        let d = DiskDomain::centered(2.0);
        let id = AnalyticMap1D::identity(d, 8);
        assert!((id.eval(c(0.3, 0.0)).unwrap() - c(0.3, 0.0)).norm() < 1e-15);
        let p = AnalyticMap1D::from_poly(d, 8, &[c(0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((p.eval(c(0.0, 0.0)).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
        let sq = AnalyticMap1D::from_poly(d, 8, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((sq.eval(c(1.0, 1.0)).unwrap() - c(0.0, 2.0)).norm() < 1e-14);
        assert!(matches!(sq.eval(c(3.0, 0.0)), Err(AfuncError::DomainEscape { .. })));
    }

    #[test]
    fn compose_examples() {
        let d = DiskDomain::new(c(0.1, 0.2), 1.0).unwrap();
        let big = DiskDomain::centered(3.0);
        let sq = AnalyticMap1D::from_poly(big, 12, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let shift = AnalyticMap1D::from_poly(d, 12, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let h = sq.compose(&shift).unwrap();
        let expect = AnalyticMap1D::from_poly(d, 12, &[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(h.sub(&expect).unwrap().coeffs.iter().all(|x| x.norm() < 1e-14));
        let id_big = AnalyticMap1D::identity(big, 12);
        let id = AnalyticMap1D::identity(d, 12);
        let g = id_big.compose(&id).unwrap();
        assert!(g.sub(&id).unwrap().coeffs.iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn derivative_examples() {
        let d = DiskDomain::new(c(0.2, -0.1), 1.0).unwrap();
        let sq = AnalyticMap1D::from_poly(d, 10, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let ds = sq.derivative();
        let two_z = AnalyticMap1D::from_poly(d, 10, &[c(0.0, 0.0), c(2.0, 0.0)]);
        assert!(ds.sub(&two_z).unwrap().coeffs.iter().all(|x| x.norm() < 1e-14));
        let k = AnalyticMap1D::constant(d, 10, c(3.0, 1.0)).derivative();
        assert!(k.coeffs.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn critical_point_examples() {
        let d = DiskDomain::centered(1.0);
        let f = AnalyticMap1D::from_poly(d, 6, &[c(0.09, 0.0), c(-0.6, 0.0), c(1.0, 0.0)]);
        assert!((f.critical_point(c(0.0, 0.0)).unwrap() - c(0.3, 0.0)).norm() < 1e-12);
        let g = AnalyticMap1D::from_poly(d, 6, &[c(0.0, 0.0), c(-0.04, 0.0), c(0.0, 0.0), c(1.0 / 3.0, 0.0)]);
        assert!((g.critical_point(c(0.1, 0.0)).unwrap() - c(0.2, 0.0)).norm() < 1e-12);
        let cube = AnalyticMap1D::from_poly(d, 6, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(cube.critical_point(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn local_inverse_examples() {
        let d = DiskDomain::centered(1.0);
        let f = AnalyticMap1D::from_poly(d, 30, &[c(0.0, 0.0), c(2.0, 0.0)]);
        let g = f.local_inverse(c(0.0, 0.0)).unwrap();
        let half = AnalyticMap1D::from_poly(g.domain, 30, &[c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(g.sub(&half).unwrap().coeffs.iter().all(|x| x.norm() < 1e-13));
        let q = AnalyticMap1D::from_poly(d, 40, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let inv = q.local_inverse(c(0.0, 0.0)).unwrap();
        // Lagrange inversion: z − z² + 2z³ − 5z⁴ + 14z⁵ (Catalan numbers).
        let r = inv.domain.radius;
        let expect = [0.0, 1.0, -1.0, 2.0, -5.0, 14.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((inv.coeffs[k] / r.powi(k as i32) - c(*e, 0.0)).norm() < 1e-9, "k = {k}");
        }
        assert!(AnalyticMap1D::constant(d, 4, c(1.0, 0.0)).local_inverse(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn norm_examples() {
        let d = DiskDomain::centered(1.0);
        let two = AnalyticMap1D::constant(d, 5, c(2.0, 0.0));
        assert!((two.uniform_norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rescale_examples() {
        let d = DiskDomain::new(c(0.3, 0.1), 1.0).unwrap();
        let id = AnalyticMap1D::identity(d, 6);
        let r = id.rescale_conjugate(c(0.0, 2.0)).unwrap();
        let z = c(0.1, 0.05);
        assert!((r.eval(z).unwrap() - z).norm() < 1e-14);
        let sq = AnalyticMap1D::from_poly(d, 6, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let r = sq.rescale_conjugate(c(2.0, 0.0)).unwrap();
        assert!((r.eval(z).unwrap() - z * z * 2.0).norm() < 1e-14);
        assert!(sq.rescale_conjugate(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn parity_jet_matches_differences() {
        let wd = DiskDomain::new(c(0.5, 0.1), 0.6).unwrap();
        let f = |x: C64| (x * 0.7).exp() + x * x * 0.3;
        let p = ParityMap1D::from_fn(wd, 30, 64, f).unwrap();
        let x = c(0.6, 0.3);
        let (v, d1, d2) = p.jet(x).unwrap();
        let h = 1e-4;
        let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let fd2 = (f(x + h) - f(x) * 2.0 + f(x - h)) / (h * h);
        assert!((v - f(x)).norm() < 1e-12);
        assert!((d1 - fd1).norm() < 1e-7);
        assert!((d2 - fd2).norm() < 1e-5);
    }

    #[test]
    fn grid_fit_reproduces_polynomial() {
        let wd = DiskDomain::new(c(0.5, 0.1), 0.6).unwrap();
        let yd = DiskDomain::centered(1.2);
        let f = |x: C64, y: C64| x * x + x * y * 0.3 + y * y * y * 0.01 + c(0.2, 0.0);
        let p = ParityMap2D::try_from_fn(wd, yd, (10, 4), (32, 16), |x, y| Ok::<_, AfuncError>(f(x, y))).unwrap();
        for (x, y) in [(c(0.7, 0.1), c(0.3, -0.2)), (c(-0.6, -0.2), c(-1.0, 0.1))] {
            assert!((p.eval(x, y).unwrap() - f(x, y)).norm() < 1e-13);
            let j = p.jet_unchecked(x, y);
            assert!((j.fx - (x * 2.0 + y * 0.3)).norm() < 1e-12);
            assert!((j.fy - (x * 0.3 + y * y * 0.03)).norm() < 1e-12);
            assert!((j.fxx - c(2.0, 0.0)).norm() < 1e-11);
            assert!((j.fxy - c(0.3, 0.0)).norm() < 1e-12);
            assert!((j.fyy - y * 0.06).norm() < 1e-12);
        }
        let s = p.slice(c(0.0, 0.0));
        assert!((s.eval(c(0.7, 0.0)).unwrap() - f(c(0.7, 0.0), c(0.0, 0.0))).norm() < 1e-13);
    }
}
