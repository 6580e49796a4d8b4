use num_complex::Complex64 as C64;
use num_rational::Ratio;
use proptest::prelude::*;
use siegel_renorm::afunc::{AnalyticMap1D, DiskDomain};
use siegel_renorm::cli::RunConfig;
use siegel_renorm::curve::{self, Golden, Interval};
use siegel_renorm::henon::HenonMap;
use siegel_renorm::renorm1d::{self, Renorm1DConfig};
use siegel_renorm::renorm2d;
use siegel_renorm::words::{self, Letter, MultiIndex};

fn complex(range: f64) -> impl Strategy<Value = C64> {
    (-range..range, -range..range).prop_map(|(re, im)| C64::new(re, im))
}

fn letters(max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { Letter::Eta } else { Letter::Xi }), 1..=max)
}

fn small_golden() -> impl Strategy<Value = Golden> {
    (-1000i64..1000, -1000i64..1000).prop_map(|(u, v)| Golden::new(u, v))
}

proptest! {
    #[test]
    fn gauss_step_reconstructs_floats(x in 0.001f64..0.999) {
        let (d, r) = words::gauss_step(&x).unwrap();
        prop_assert!((1.0 / (d as f64 + r) - x).abs() <= 1e-14);
    }

    #[test]
    fn gauss_step_reconstructs_rationals(q in 2i64..10_000, p in 1i64..10_000) {
        prop_assume!(p < q);
        let x = Ratio::new(p, q);
        let (d, r) = words::gauss_step(&x).unwrap();
        prop_assert_eq!((Ratio::from_integer(d as i64) + r).recip(), x);
    }

    #[test]
    fn subtraction_splits_words(ls in letters(24)) {
        let s = MultiIndex::from_letters(&ls);
        prop_assert_eq!(words::word_expand(&s), ls);
        for t in s.predecessors() {
            let q = words::subtract(&s, &t).unwrap();
            let mut joined = words::word_expand(&t);
            joined.extend(words::word_expand(&q));
            prop_assert_eq!(joined, words::word_expand(&s));
        }
    }

    #[test]
    fn golden_sign_matches_floats(u in -1_000_000i64..1_000_000, v in -1_000_000i64..1_000_000) {
        let g = Golden::new(u, v);
        let x = g.value();
        if x.abs() > 1e-6 {
            prop_assert_eq!(g.signum(), if x > 0.0 { 1 } else { -1 });
        }
        prop_assert_eq!(g.signum() == 0, u == 0 && v == 0);
    }

    #[test]
    fn golden_ring_identities(x in small_golden(), y in small_golden(), z in small_golden()) {
        prop_assert_eq!((x * y) * z, x * (y * z));
        prop_assert_eq!(x * (y + z), x * y + x * z);
        prop_assert_eq!(x - x, Golden::ZERO);
        prop_assert_eq!(Golden::THETA * Golden::THETA, Golden::ONE - Golden::THETA);
    }

    #[test]
    fn cut_points_tile_and_gaps_are_found(cuts in prop::collection::btree_set((-50i64..50, -50i64..50), 2..12), drop in 0usize..11) {
        let mut pts: Vec<Golden> = cuts.into_iter().map(|(u, v)| Golden::new(u, v)).collect();
        pts.sort();
        pts.dedup();
        prop_assume!(pts.len() >= 3);
        let ivs: Vec<Interval> = pts.windows(2).map(|w| Interval::between(w[0], w[1])).collect();
        let support = Interval::between(pts[0], *pts.last().unwrap());
        prop_assert!(curve::check_tiling(&ivs, support).ok());
        let mut holed = ivs.clone();
        holed.remove(drop % ivs.len());
        prop_assert!(!curve::check_tiling(&holed, support).covering);
    }

    #[test]
    fn diagonal_jacobians_keep_cones_iff_vertical_dominates(a in complex(10.0), d in complex(10.0), rho in 0.05f64..2.0) {
        prop_assume!(a.norm() > 1e-3 && d.norm() > 1e-3);
        prop_assume!((a.norm() / d.norm() - 1.0).abs() > 1e-6);
        let z = C64::new(0.0, 0.0);
        let jac = [[a, z], [z, d]];
        let rep = curve::cone_report(&[(z, z)], &[(jac, a * d)], rho, 16);
        prop_assert_eq!(rep.violations == 0, d.norm() < a.norm());
    }

    #[test]
    fn run_config_round_trips(mu in complex(0.1), level in 2usize..12, depth in 1usize..8, order in 8usize..64, seed in 0u64..1000) {
        let mut cfg = RunConfig::default();
        cfg.mu = mu;
        cfg.level = level;
        cfg.depth = depth;
        cfg.orders = (order, 6);
        cfg.cone.seed = seed;
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn henon_sign_of_a_is_a_conjugacy(c in complex(0.5), a in complex(0.5), x in complex(0.5), y in complex(0.5)) {
        let (hp, hm) = (HenonMap::new(c, a), HenonMap::new(c, -a));
        let (mut p, mut q) = ((x, y), (x, -y));
        for _ in 0..8 {
            p = hp.apply(p);
            q = hm.apply(q);
            let scale = 1.0 + p.0.norm() + p.1.norm();
            prop_assert!((p.0 - q.0).norm() <= 1e-12 * scale && (p.1 + q.1).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn henon_jacobian_determinant_is_constant(c in complex(1.0), a in complex(1.0), x in complex(2.0), y in complex(2.0)) {
        let h = HenonMap::new(c, a);
        let [[p, q], [r, s]] = h.jacobian((x, y));
        let det = p * s - q * r;
        prop_assert!((det + a * a).norm() <= 1e-12 * (1.0 + (x * a).norm()));
    }

    #[test]
    fn series_norm_is_subadditive_and_homogeneous(
        f in prop::collection::vec(complex(1.0), 1..12),
        g in prop::collection::vec(complex(1.0), 1..12),
        s in complex(3.0),
    ) {
        let d = DiskDomain::new(C64::new(0.2, -0.1), 0.8).unwrap();
        let (f, g) = (AnalyticMap1D::from_poly(d, 16, &f), AnalyticMap1D::from_poly(d, 16, &g));
        let sum = f.add(&g).unwrap();
        prop_assert!(sum.uniform_norm() <= f.uniform_norm() + g.uniform_norm() + 1e-10);
        prop_assert!((f.scale(s).uniform_norm() - s.norm() * f.uniform_norm()).abs() <= 1e-10 * (1.0 + s.norm() * f.uniform_norm()));
    }

    #[test]
    fn composition_matches_nested_evaluation(
        f in prop::collection::vec(complex(1.0), 1..8),
        g in prop::collection::vec(complex(0.2), 1..5),
        r in 0.0f64..0.95,
        t in 0.0f64..6.28,
    ) {
        let outer = AnalyticMap1D::from_poly(DiskDomain::centered(2.0), 20, &f);
        let d = DiskDomain::centered(1.0);
        let inner = AnalyticMap1D::from_poly(d, 20, &g);
        let fg = outer.compose(&inner).unwrap();
        let z = C64::from_polar(r, t);
        let direct = outer.eval(inner.eval(z).unwrap()).unwrap();
        prop_assert!((fg.eval(z).unwrap() - direct).norm() <= 1e-10 * (1.0 + direct.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn embedding_preserves_distances(l1 in 3usize..8, l2 in 3usize..8, ny in 1usize..4) {
        prop_assume!(l1 != l2);
        let cfg = Renorm1DConfig::with_order(24);
        let y = DiskDomain::centered(1.2);
        let z1 = renorm1d::quadratic_seed(2 * l1, &cfg).unwrap();
        let z2 = renorm1d::quadratic_seed(2 * l2, &cfg).unwrap();
        let (e1, e2) = (renorm2d::embed(&z1, y, ny), renorm2d::embed(&z2, y, ny));
        prop_assert!((e1.distance(&e2).unwrap() - z1.distance(&z2).unwrap()).abs() < 1e-12);
        prop_assert!((e1.coeff_distance(&e2) - z1.coeff_distance(&z2)).abs() < 1e-12);
    }
}
