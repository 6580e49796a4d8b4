//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 6 and 9 are known not to hold for this implementation (see the
//! README); they still run at their stated thresholds and print FAIL. Any
//! other failure makes the target exit nonzero.

use num_complex::Complex64 as C64;
use siegel_renorm::curve::{self, Golden, RenormalizedSeed};
use siegel_renorm::henon::{self, HenonMap};
use siegel_renorm::renorm1d::{self, Renorm1DConfig};
use siegel_renorm::renorm2d::{self, Renorm2DConfig};
use siegel_renorm::words::{self, Letter, MultiIndex, Relation, RotationNumber};
use std::time::{Duration, Instant};

const KNOWN_UNMET: [usize; 2] = [6, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn error(e: impl std::fmt::Display) -> Outcome {
    outcome(false, format!("error: {e}"))
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn golden_lambda() -> C64 {
    RotationNumber::golden().multiplier()
}

fn main() {
    let criteria: Vec<(usize, u64, fn() -> Outcome)> = vec![
        (1, 5, word_algebra),
        (2, 10, partition_exactness),
        (3, 300, fixed_point_1d),
        (4, 600, hypothesis_h),
        (5, 900, consistency_1d_2d),
        (6, 600, slice_decay),
        (7, 120, commuting_projections),
        (8, 600, invariant_curve),
        (9, 600, non_smoothness),
        (10, 300, cone_fields),
        (11, 300, degenerate_limit),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut unexpected = Vec::new();
    for (id, limit, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let mut o = run();
        let elapsed = t.elapsed();
        if elapsed > Duration::from_secs(limit) {
            o.pass = false;
            o.detail.push_str(&format!("; runtime {:.1}s exceeds {limit}s", elapsed.as_secs_f64()));
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {verdict} ({:.1}s) {}", elapsed.as_secs_f64(), o.detail);
        if !o.pass && !KNOWN_UNMET.contains(&id) {
            unexpected.push(id);
        }
        if o.pass && KNOWN_UNMET.contains(&id) {
            println!("note: criterion {id} passed although it was expected to fail");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

/// Every admissible `s̄` of at most 12 letters against each of its
/// predecessors `t̄` with `|s̄| + |t̄| ≤ 12`.
fn word_algebra() -> Outcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    for len in 1..=12usize {
        for bits in 0..(1u32 << len) {
            let letters: Vec<Letter> =
                (0..len).map(|i| if bits >> i & 1 == 0 { Letter::Eta } else { Letter::Xi }).collect();
            let s = MultiIndex::from_letters(&letters);
            if words::word_expand(&s) != letters || !s.is_admissible() {
                failures.push(format!("canonical form of {letters:?}"));
                continue;
            }
            for t in s.predecessors() {
                if s.len() + t.len() > 12 {
                    continue;
                }
                cases += 1;
                let ok = (|| {
                    if words::compare(&s, &t) != Relation::Succeeds {
                        return false;
                    }
                    let Ok(q) = words::subtract(&s, &t) else { return false };
                    // ζ^s = ζ^q ∘ ζ^t: t is applied first.
                    let (ws, wt, wq) = (words::word_expand(&s), words::word_expand(&t), words::word_expand(&q));
                    let joined: Vec<Letter> = wt.iter().chain(&wq).copied().collect();
                    // Second route: t is a proper prefix of s in application order.
                    joined == ws && wt.len() < ws.len() && ws[..wt.len()] == wt[..]
                })();
                if !ok {
                    failures.push(format!("{s} vs {t}"));
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{cases} comparable pairs, {} failures {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()))
}

fn partition_exactness() -> Outcome {
    let theta = RotationNumber::golden();
    let q = words::convergents(&theta, 14);
    let mut failures = Vec::new();
    for n in 0..=12 {
        let p = match curve::partition1d(&theta, n) {
            Ok(p) => p,
            Err(e) => return error(e),
        };
        let check = p.check();
        if !check.ok() {
            failures.push(format!("n={n}: {:?}", check.failures));
        }
        // Independent route: sorted cells abut exactly and their lengths
        // add up to the support.
        let mut iv: Vec<_> = p.cells.iter().map(|c| c.interval).collect();
        iv.sort_by(|a, b| a.lo.cmp(&b.lo));
        let abut = iv.windows(2).all(|w| w[0].hi == w[1].lo);
        let ends = iv.first().map(|i| i.lo) == Some(p.support.lo) && iv.last().map(|i| i.hi) == Some(p.support.hi);
        let total = iv.iter().fold(Golden::ZERO, |acc, i| acc + i.len());
        let positive = iv.iter().all(|i| i.len() > Golden::ZERO);
        let count = (q[n].1 + q[n + 1].1) as usize;
        if !(abut && ends && positive && total == p.support.len() && p.cells.len() == count) {
            failures.push(format!("n={n}: abut {abut}, ends {ends}, cells {} vs {count}", p.cells.len()));
        }
    }
    outcome(failures.is_empty(), format!("levels 0..=12, {} failures {:?}", failures.len(), failures))
}

fn fixed_point_1d() -> Outcome {
    let cfg = Renorm1DConfig::with_order(40);
    let (z, rep) = match renorm1d::golden_fixed_point(&cfg, 1e-13) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let rz = match renorm1d::renorm_step(&z, &cfg) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let residual = rz.coeff_distance(&z);
    // ℛⁿ of the quadratic polynomial is its renormalization at level 2n.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in 3..=10 {
        match renorm1d::quadratic_seed(2 * n, &cfg).and_then(|s| s.distance(&z)) {
            Ok(d) => {
                xs.push(n as f64);
                ys.push(d.ln());
            }
            Err(e) => return error(e),
        }
    }
    let (slope, r2) = linear_fit(&xs, &ys);
    let pass = residual < 1e-11 && slope < 0.0 && r2 > 0.99;
    outcome(
        pass,
        format!(
            "residual {residual:.2e} (tail {:.1e}), convergence rate {:.4} per step, R² {r2:.5}",
            rep.tail,
            slope.exp()
        ),
    )
}

fn hypothesis_h() -> Outcome {
    let cfg = Renorm1DConfig::with_order(40);
    let seed = match renorm1d::quadratic_seed(16, &cfg) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let (_, coarse, fine) = match renorm1d::resolved_spectrum(&seed, &cfg, 8, 1e-13) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let expanding: Vec<C64> = coarse.trusted().filter(|e| e.value.norm() > 1.0).map(|e| e.value).collect();
    let kappa40 = coarse.kappa;
    let kappa48 = fine.kappa;
    let rel = (kappa40 - kappa48).norm() / kappa48.norm();
    let pass = expanding.len() == 1 && rel < 5e-4;
    outcome(
        pass,
        format!(
            "{} trusted expanding eigenvalue(s), κ₄₀ = {:.6}, κ₄₈ = {:.6}, relative drift {rel:.1e}",
            expanding.len(),
            kappa40,
            kappa48
        ),
    )
}

fn consistency_1d_2d() -> Outcome {
    // Fixed-point distance at w-order 40: at 32 the tail estimate alone is 1e-7.
    let cfg = Renorm2DConfig::with_orders(40, 6);
    let (z, _) = match renorm1d::golden_fixed_point(&cfg.one_d(), 1e-13) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let iota = renorm2d::embed(&z, cfg.domains.y, cfg.orders.1);
    let steps = 3;
    let dist = match renorm2d::renorm2d_iterate(&iota, steps, &cfg, None).and_then(|(s, _)| s.distance(&iota)) {
        Ok(d) => d,
        Err(e) => return error(e),
    };
    // Spectra at orders where the finite-difference Jacobian of the 2D
    // operator fits the time budget.
    let small = Renorm2DConfig::with_orders(24, 3);
    let seed = match renorm1d::quadratic_seed(16, &small.one_d()) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let (zs, one_d, _) = match renorm1d::resolved_spectrum(&seed, &small.one_d(), 8, 1e-13) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let two_d = match renorm2d::jacobian_spectrum_2d(&renorm2d::embed(&zs, small.domains.y, small.orders.1), &small) {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    let vals2: Vec<C64> = two_d.eigenvalues.iter().map(|e| e.value).collect();
    let vals1: Vec<C64> = one_d.eigenvalues.iter().map(|e| e.value).collect();
    let m = renorm2d::match_spectra(&vals2, &vals1, 1e-4, renorm1d::SPECTRUM_FLOOR);
    let trusted: Vec<C64> = one_d.trusted().map(|e| e.value).collect();
    let trusted_missing = m.missing.iter().filter(|e| trusted.contains(e)).count();
    let worst_match = m.matched.iter().map(|t| t.2).fold(0.0, f64::max);
    let rest = m.largest_unmatched();
    let pass = dist < 1e-8 && trusted_missing == 0 && !trusted.is_empty() && rest < 0.1;
    outcome(
        pass,
        format!(
            "‖ℛ^{steps}ι(ζ*) − ι(ζ*)‖ = {dist:.2e}; {} trusted 1D eigenvalues, {} matched (worst {worst_match:.1e}), {trusted_missing} trusted missing; largest other 2D eigenvalue {rest:.3e} (dimension {})",
            trusted.len(),
            m.matched.len(),
            two_d.dimension
        ),
    )
}

fn slice_decay() -> Outcome {
    let cfg = Renorm2DConfig::default();
    let theta = RotationNumber::golden();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for mu in [1e-2, 1e-3, 1e-4] {
        let run = || -> Result<(f64, f64), String> {
            let h = HenonMap::semi_siegel(golden_lambda(), c(mu, 0.0)).map_err(|e| e.to_string())?;
            let seed = henon::seed_pair(&h, &theta, 6, &cfg).map_err(|e| e.to_string())?;
            let out = renorm2d::renorm2d_step(&seed.pair, &cfg).map_err(|e| e.to_string())?;
            let d = out.slice_distance().map_err(|e| e.to_string())?;
            Ok((seed.delta, d))
        };
        match run() {
            Ok((delta, d)) => {
                rows.push(format!("μ={mu:.0e}: δ={delta:.2e} dist={d:.2e}"));
                xs.push(delta.ln());
                ys.push(d.ln());
            }
            Err(e) => errors.push(format!("μ={mu:.0e}: {e}")),
        }
    }
    let slope = if xs.len() >= 2 { linear_fit(&xs, &ys).0 } else { f64::NAN };
    let pass = errors.is_empty() && slope >= 1.8;
    outcome(pass, format!("slope {slope:.3}; {}; errors {errors:?}", rows.join(", ")))
}

fn commuting_projections() -> Outcome {
    let cfg = Renorm2DConfig::with_orders(40, 6);
    let theta = RotationNumber::golden();
    let mut worst_t2: f64 = 0.0;
    let mut worst_pi2: f64 = 0.0;
    let mut rows = Vec::new();
    for mu in [1e-3, 1e-4] {
        let run = || -> Result<(f64, f64), String> {
            let h = HenonMap::semi_siegel(golden_lambda(), c(mu, 0.0)).map_err(|e| e.to_string())?;
            let seed = henon::seed_pair(&h, &theta, 6, &cfg).map_err(|e| e.to_string())?;
            let (_, tr) = renorm2d::renorm2d_step_traced(&seed.pair, &cfg).map_err(|e| e.to_string())?;
            Ok((tr.c2.norm(), tr.pi2.iter().map(|z| z.norm()).fold(0.0, f64::max)))
        };
        match run() {
            Ok((t2, pi2)) => {
                worst_t2 = worst_t2.max(t2);
                worst_pi2 = worst_pi2.max(pi2);
                rows.push(format!("μ={mu:.0e}: ‖T₂−Id‖={t2:.1e} Π₂={pi2:.1e}"));
            }
            Err(e) => return error(e),
        }
    }
    outcome(worst_t2 < 1e-9 && worst_pi2 < 1e-9, rows.join(", "))
}

fn golden_seed(mu: f64, depth: usize, cfg: &Renorm2DConfig) -> Result<(HenonMap, RenormalizedSeed), String> {
    let h = HenonMap::semi_siegel(golden_lambda(), c(mu, 0.0)).map_err(|e| e.to_string())?;
    let rs = RenormalizedSeed::new(&h, 6, depth, cfg).map_err(|e| e.to_string())?;
    Ok((h, rs))
}

fn invariant_curve() -> Outcome {
    let cfg = Renorm2DConfig::default();
    let (h, rs) = match golden_seed(1e-3, 6, &cfg) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let mut defects = Vec::new();
    let mut last = None;
    for depth in 3..=6 {
        match curve::invariant_curve(&h, &rs, depth, &cfg) {
            Ok(cv) => {
                defects.push(cv.defect);
                last = Some(cv);
            }
            Err(e) => return error(e),
        }
    }
    let cv = last.expect("depth 6 ran");
    let decreasing = defects.windows(2).all(|w| w[1] < w[0]);
    let pass = cv.closed && cv.simple && cv.defect < cv.max_cell_diameter && decreasing;
    let shown: Vec<String> = defects.iter().map(|d| format!("{d:.2e}")).collect();
    outcome(
        pass,
        format!(
            "depth 6: {} points, closed {}, simple {} (separation {:.1e}), defect {:.2e} vs cell diameter {:.2e}; defects 3..6 [{}]",
            cv.points.len(),
            cv.closed,
            cv.simple,
            cv.min_separation,
            cv.defect,
            cv.max_cell_diameter,
            shown.join(", ")
        ),
    )
}

fn non_smoothness() -> Outcome {
    let cfg = Renorm2DConfig::default();
    let (h, rs) = match golden_seed(1e-3, 6, &cfg) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let cv = match curve::invariant_curve(&h, &rs, 6, &cfg) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let rep = match curve::smoothness_diagnostic(&h, &cv, &RotationNumber::golden(), 4..=9) {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    let rows: Vec<String> = rep.rows.iter().map(|r| format!("n={} r={:.2} ratio={:.3}", r.n, r.r, r.ratio)).collect();
    let pass = rep.log_band < 1.5 && rep.max_ratio < 0.2;
    outcome(pass, format!("log band {:.3}, max ratio {:.3}; {}", rep.log_band, rep.max_ratio, rows.join(", ")))
}

fn cone_fields() -> Outcome {
    let cfg = Renorm2DConfig::default();
    let h = match HenonMap::semi_siegel(golden_lambda(), c(1e-3, 0.0)) {
        Ok(h) => h,
        Err(e) => return error(e),
    };
    let opts = curve::HyperbolicityOptions { samples: 1000, directions: 32, rho: 0.5, ..Default::default() };
    let mut reports = Vec::new();
    for n in [6, 7] {
        match curve::henon_cone_check(&h, &cfg.theta, n, &cfg.domains, &opts) {
            Ok(r) => reports.push(r),
            Err(e) => return error(e),
        }
    }
    let violations: usize = reports.iter().map(|r| r.report.violations).sum();
    let growing = reports[1].report.min_expansion > reports[0].report.min_expansion;
    let samples_ok = reports.iter().all(|r| r.report.samples >= 1000 && r.report.directions == 32);
    let rows: Vec<String> = reports
        .iter()
        .map(|r| {
            format!("n={}: {} samples, {} violations, min expansion {:.2e}", r.level, r.report.samples, r.report.violations, r.report.min_expansion)
        })
        .collect();
    outcome(violations == 0 && growing && samples_ok, rows.join(", "))
}

/// `φ(λs) = P(φ(s))` for `P(z) = z² + c` with fixed point `z₀ = λ/2`,
/// solved coefficientwise: `(λⁿ − λ)φₙ = Σ_{k=1}^{n−1} φₖφₙ₋ₖ`.
struct Schroeder {
    lambda: C64,
    c: C64,
    coeffs: Vec<C64>,
}

impl Schroeder {
    fn new(lambda: C64, order: usize) -> Self {
        let mut coeffs = vec![c(0.0, 0.0); order + 1];
        coeffs[0] = lambda / 2.0;
        coeffs[1] = c(1.0, 0.0);
        for n in 2..=order {
            let s: C64 = (1..n).map(|k| coeffs[k] * coeffs[n - k]).sum();
            coeffs[n] = s / (lambda.powu(n as u32) - lambda);
        }
        Schroeder { lambda, c: lambda / 2.0 - lambda * lambda / 4.0, coeffs }
    }

    fn eval(&self, s: C64) -> C64 {
        self.coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * s + a)
    }

    fn residual(&self, r: f64) -> f64 {
        (0..256)
            .map(|k| {
                let s = C64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.5) / 256.0);
                let phi = self.eval(s);
                (phi * phi + self.c - self.eval(self.lambda * s)).norm()
            })
            .fold(0.0, f64::max)
    }

    fn radius(&self) -> f64 {
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..40 {
            let r = 0.5 * (lo + hi);
            if self.residual(r) < 1e-6 {
                lo = r;
            } else {
                hi = r;
            }
        }
        lo
    }
}

fn brute_hausdorff(a: &[(C64, C64)], b: &[(C64, C64)]) -> f64 {
    let dist = |p: &(C64, C64), q: &(C64, C64)| ((p.0 - q.0).norm_sqr() + (p.1 - q.1).norm_sqr()).sqrt();
    let directed = |a: &[(C64, C64)], b: &[(C64, C64)]| {
        a.iter().map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

fn degenerate_limit() -> Outcome {
    let lambda = golden_lambda();
    let h = match HenonMap::semi_siegel(lambda, c(0.0, 0.0)) {
        Ok(h) => h,
        Err(e) => return error(e),
    };
    let count = 512;
    let cloud = match henon::boundary_points(&h, count, 200) {
        Ok(c) => c,
        Err(e) => return error(e),
    };
    let oracle = Schroeder::new(lambda, 200);
    let r = oracle.radius();
    let reference: Vec<(C64, C64)> = (0..count)
        .map(|k| (oracle.eval(C64::from_polar(r, std::f64::consts::TAU * k as f64 / count as f64)), c(0.0, 0.0)))
        .collect();
    let cloud_gap = brute_hausdorff(&cloud.points, &reference);

    let cfg = Renorm2DConfig::with_orders(40, 6);
    let level = 6;
    let seed = match henon::seed_pair(&h, &cfg.theta, level, &cfg) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let slice_gap = match renorm1d::quadratic_seed(level, &cfg.one_d()).and_then(|q| renorm2d::slice(&seed.pair).distance(&q)) {
        Ok(d) => d,
        Err(e) => return error(e),
    };
    let pass = cloud_gap < 1e-3 && slice_gap < 1e-10;
    outcome(
        pass,
        format!(
            "boundary cloud Hausdorff {cloud_gap:.2e} (radii {:.6} vs {r:.6}), seed slice distance {slice_gap:.2e}",
            cloud.radius
        ),
    )
}

/// Least-squares line `y ≈ a + b·x`; returns `(b, R²)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    (b, if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) })
}
