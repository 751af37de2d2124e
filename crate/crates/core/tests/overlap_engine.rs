use deltaoverlap::overlap_engine::{
    check_factor_bounds, overlap, overlap_direct, overlap_product, overlap_trace_series, product_tail_bound, Method,
};
use deltaoverlap::{DeltaModel, Error, ModeSpectrum};

fn model(alpha: f64, length: f64) -> DeltaModel {
    DeltaModel::new(alpha, length, 1.0).unwrap()
}

#[test]
fn strong_repulsion_leaves_the_ground_state_unchanged() {
    let m = model(1e6, 50.0);
    let n = m.default_particles().unwrap();
    assert!(overlap_direct(&m, n).unwrap().log_overlap_sq.abs() < 1e-4);
    assert!(overlap_trace_series(&m, n, 8 * n, 80).unwrap().log_overlap_sq.abs() < 1e-4);
}

#[test]
fn product_route_stays_within_its_tail() {
    for alpha in [0.05, -0.05] {
        for length in [25.0, 50.0, 100.0, 200.0] {
            let m = model(alpha, length);
            let n = m.default_particles().unwrap();
            let direct = overlap_direct(&m, n).unwrap();
            let product = overlap_product(&m, n, 4 * n).unwrap();
            assert!(
                (direct.log_overlap_sq - product.log_overlap_sq).abs() <= product.tail_bound + 1e-6,
                "alpha {alpha}, L {length}"
            );
            assert!(direct.log_overlap_sq <= 1e-9);
        }
    }
}

#[test]
fn neumann_box_routes_agree() {
    let m = model(0.0, 100.0);
    let n = m.default_particles().unwrap();
    let direct = overlap(&m, Method::Direct, n, 4).unwrap();
    let product = overlap(&m, Method::Product, n, 4).unwrap();
    assert_eq!((product.n, product.k), (n, 4 * n));
    assert!((direct.log_overlap_sq - product.log_overlap_sq).abs() <= product.tail_bound + 1e-6);
}

#[test]
fn tail_bound_halves_when_the_truncation_gap_doubles() {
    for alpha in [0.05, -0.05, 0.0] {
        let m = model(alpha, 100.0);
        let n = m.default_particles().unwrap();
        let s = ModeSpectrum::solve(&m.system, 9 * n).unwrap();
        for gap in [n, 2 * n, 4 * n] {
            let ratio = product_tail_bound(&s, n, n + gap) / product_tail_bound(&s, n, n + 2 * gap);
            assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "alpha {alpha}, K - N = {gap}: {ratio}");
        }
    }
}

#[test]
fn factor_bound_holds_away_from_the_bound_state() {
    for alpha in [0.02, -0.02, 0.2, -0.2, 2.0, 0.0] {
        let m = model(alpha, 100.0);
        let n = m.default_particles().unwrap();
        let s = ModeSpectrum::solve(&m.system, 10 * n).unwrap();
        let report = check_factor_bounds(&s, n, 10 * n).unwrap();
        assert!(report.holds(), "alpha {alpha}: {report:?}");
        assert_eq!(report.first_row, if alpha < 0.0 { 2 } else { 1 });
    }
}

#[test]
fn trace_route_converges_in_the_truncation() {
    let m = model(0.05, 50.0);
    let n = m.default_particles().unwrap();
    let direct = overlap_direct(&m, n).unwrap().log_overlap_sq;
    let errors: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&mult| (overlap_trace_series(&m, n, mult * n, 80).unwrap().log_overlap_sq - direct).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0] / 4.0), "{errors:?}");
    assert!(errors[2] < 1e-4);
}

#[test]
fn first_trace_term_bounds_the_series() {
    let m = model(-0.2, 50.0);
    let n = m.default_particles().unwrap();
    let one = overlap_trace_series(&m, n, 8 * n, 1).unwrap().log_overlap_sq;
    let full = overlap_trace_series(&m, n, 8 * n, 80).unwrap().log_overlap_sq;
    assert!(one >= full && full < 0.0);
}

#[test]
fn empty_and_single_particle_cases() {
    let m = model(0.3, 20.0);
    assert_eq!(overlap_product(&m, 0, 10).unwrap().log_overlap_sq, 0.0);
    let s = ModeSpectrum::solve(&m.system, 1).unwrap();
    let entry = s.overlap_entry(1, 1).unwrap();
    let single = overlap_direct(&m, 1).unwrap().log_overlap_sq;
    assert!((single - 2.0 * entry.abs().ln()).abs() < 1e-14);
}

#[test]
fn truncation_must_exceed_the_particle_number() {
    let m = model(0.3, 20.0);
    assert!(matches!(overlap_product(&m, 5, 5), Err(Error::Precondition(_))));
    assert!(matches!(overlap_trace_series(&m, 5, 3, 10), Err(Error::Precondition(_))));
}
