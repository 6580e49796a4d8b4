use num_complex::Complex64 as C64;
use siegel_renorm::curve::{self, Microscope, RenormalizedSeed};
use siegel_renorm::henon::HenonMap;
use siegel_renorm::renorm1d;
use siegel_renorm::renorm2d::{self, Pair2D, Renorm2DConfig, StepTrace2D};
use siegel_renorm::words::{Letter, RotationNumber};

/// `ι(ζ*)` and its renormalizations.
fn fixed_point_tower(cfg: &Renorm2DConfig, steps: usize) -> (Vec<Pair2D>, Vec<StepTrace2D>) {
    let (z, _) = renorm1d::golden_fixed_point(&cfg.one_d(), 1e-13).unwrap();
    let mut pairs = vec![renorm2d::embed(&z, cfg.domains.y, cfg.orders.1)];
    let mut traces = Vec::new();
    for _ in 0..steps {
        let (next, tr) = renorm2d::renorm2d_step_traced(pairs.last().unwrap(), cfg).unwrap();
        pairs.push(next);
        traces.push(tr);
    }
    (pairs, traces)
}

#[test]
fn microscope_maps_are_words_of_the_base_pair() {
    let cfg = Renorm2DConfig::with_orders(40, 6);
    let (pairs, traces) = fixed_point_tower(&cfg, 3);
    let refs: Vec<&Pair2D> = pairs.iter().take(3).collect();
    let scope = Microscope::new(&refs, &traces, &cfg).unwrap();
    for depth in 1..=3 {
        let cells = curve::micro_cells(&scope.words, depth).unwrap();
        for cell in cells.iter().step_by((cells.len() / 20).max(1)).take(20) {
            let p = scope.base_point(cell.base);
            let lhs = scope.phi(&cell.chain, p).unwrap();
            let rhs = pairs[0].eval_word(&scope.word_of(&cell.chain), scope.chart_chain(depth, p).unwrap()).unwrap();
            let err = (lhs.0 - rhs.0).norm().max((lhs.1 - rhs.1).norm());
            assert!(err < 1e-9, "depth {depth}, chain {:?}: {err:.2e}", cell.chain);
        }
    }
}

#[test]
fn microscope_contracts_geometrically() {
    let cfg = Renorm2DConfig::default();
    let (pairs, traces) = fixed_point_tower(&cfg, 4);
    let refs: Vec<&Pair2D> = pairs.iter().take(4).collect();
    let scope = Microscope::new(&refs, &traces, &cfg).unwrap();
    let p = scope.base_point(Letter::Eta);
    let norms: Vec<f64> =
        (1..=4).map(|j| scope.phi_derivative_norm(&vec![(Letter::Eta, 0); j], p).unwrap()).collect();
    for w in norms.windows(2) {
        assert!(w[1] < 0.8 * w[0], "‖DΦʲ‖ = {norms:?}");
    }
    let diameters: Vec<f64> = (1..=4).map(|d| curve::partition2d(&scope, d).unwrap().max_diameter()).collect();
    for w in diameters.windows(2) {
        assert!(w[1] < 0.8 * w[0], "cell diameters {diameters:?}");
    }
}

#[test]
fn curve_has_a_point_in_every_cell() {
    let cfg = Renorm2DConfig::default();
    let theta = RotationNumber::golden();
    let h = HenonMap::semi_siegel(theta.multiplier(), C64::new(1e-3, 0.0)).unwrap();
    let rs = RenormalizedSeed::new(&h, 6, 3, &cfg).unwrap();
    let cv = curve::invariant_curve(&h, &rs, 3, &cfg).unwrap();
    assert!(cv.tiles_circle);
    assert_eq!(cv.points.len(), cv.cells.len());
    assert!(cv.cells.iter().all(|(lo, hi)| lo < hi));
    assert!(cv.defect < cv.max_cell_diameter);
}
