use deltaoverlap::asymptotics::{
    appendix_ladder, fit_exponent, gamma, parse_lengths, records_from_values, stage_slopes, sweep, zeta,
    AppendixSettings, Schedule, SweepSettings,
};
use deltaoverlap::overlap_engine::Method;
use deltaoverlap::Error;

#[test]
fn repulsive_exponents_coincide() {
    let z = zeta(1.0, 0.02).unwrap();
    let expected = (1.0f64 / (0.08 * std::f64::consts::PI)).atan().powi(2) / std::f64::consts::PI.powi(2);
    assert!((z - expected).abs() < 1e-15);
    assert!((z - 0.1777).abs() < 1e-4);
    for alpha in [0.0, 1e-3, 0.02, 0.5, 7.0] {
        assert_eq!(zeta(1.0, alpha).unwrap(), gamma(1.0, alpha).unwrap());
    }
}

#[test]
fn attractive_exponent_exceeds_the_old_bound() {
    let (z, g) = (zeta(1.0, -0.02).unwrap(), gamma(1.0, -0.02).unwrap());
    assert!((z - 0.3345).abs() < 1e-4 && (g - 0.1777).abs() < 1e-4);
    assert!(z > g);
}

#[test]
fn estimators_are_exact_on_synthetic_lines() {
    let lengths = parse_lengths("100:3200:2").unwrap();
    assert_eq!(lengths, vec![100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0]);
    let points: Vec<(f64, usize, f64)> = lengths.iter().map(|&l| (l, 10, -0.25 * l.ln() + 3.0)).collect();
    let records = records_from_values(&points, Method::Direct).unwrap();
    assert!(records[0].local_slope.is_none());
    for r in &records[1..] {
        assert!((r.local_slope.unwrap() + 0.25).abs() < 1e-14);
    }
    let report = fit_exponent(&records, 1.0, 0.0).unwrap();
    assert!((report.fitted_slope_ls + 0.25).abs() < 1e-14);
    assert!((report.fitted_slope_diff + 0.25).abs() < 1e-14);
    assert!((report.intercept_ls - 3.0).abs() < 1e-12);
    assert!(report.residuals.iter().all(|r| r.abs() < 1e-12));
}

#[test]
fn least_squares_tolerates_bounded_oscillation() {
    let lengths = parse_lengths("100:3200:2").unwrap();
    let points: Vec<(f64, usize, f64)> = lengths
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, 10, -0.25 * l.ln() + 0.1 * if i % 2 == 0 { 1.0 } else { -1.0 }))
        .collect();
    let records = records_from_values(&points, Method::Direct).unwrap();
    let report = fit_exponent(&records, 1.0, 0.0).unwrap();
    let range = 3200f64.ln() - 100f64.ln();
    assert!((report.fitted_slope_ls + 0.25).abs() <= 0.1 / range);
}

#[test]
fn fit_needs_three_records() {
    let records = records_from_values(&[(10.0, 3, -1.0), (20.0, 6, -1.2)], Method::Direct).unwrap();
    assert!(matches!(fit_exponent(&records, 1.0, 0.0), Err(Error::Precondition(_))));
}

#[test]
fn engine_slope_tracks_the_exponent() {
    let lengths = parse_lengths("100:3200:2").unwrap();
    let records = sweep(1.0, 0.02, &lengths, &SweepSettings::default()).unwrap();
    let report = fit_exponent(&records, 1.0, 0.02).unwrap();
    assert!(report.relative_error() <= 0.15, "{report:?}");

    let neumann = sweep(1.0, 0.0, &lengths, &SweepSettings::default()).unwrap();
    let slopes: Vec<f64> = neumann.iter().filter_map(|r| r.local_slope).collect();
    assert!((slopes.last().unwrap() + 0.25).abs() < (slopes[0] + 0.25).abs());
}

#[test]
fn sweep_routes_agree() {
    let lengths = [50.0, 100.0, 200.0];
    let direct = sweep(1.0, 0.2, &lengths, &SweepSettings::default()).unwrap();
    let product = sweep(
        1.0,
        0.2,
        &lengths,
        &SweepSettings {
            method: Method::Product,
            ..SweepSettings::default()
        },
    )
    .unwrap();
    for (d, p) in direct.iter().zip(&product) {
        assert_eq!(d.n, p.n);
        assert!((d.log_overlap_sq - p.log_overlap_sq).abs() <= 0.01 + 1e-6);
    }
}

#[test]
fn shifted_schedule_converges_to_the_same_ratio() {
    let lengths = parse_lengths("100:3200:2").unwrap();
    let base = sweep(1.0, 0.02, &lengths, &SweepSettings::default()).unwrap();
    let shifted = sweep(
        1.0,
        0.02,
        &lengths,
        &SweepSettings {
            schedule: Schedule::Offset(5),
            ..SweepSettings::default()
        },
    )
    .unwrap();
    let gaps: Vec<f64> = base.iter().zip(&shifted).map(|(a, b)| (a.ratio - b.ratio).abs()).collect();
    assert!(shifted.iter().zip(&base).all(|(s, b)| s.n == b.n + 5));
    assert!(gaps.last().unwrap() < &gaps[0], "{gaps:?}");
    // O(1/ln L): gap·ln L stays bounded
    let scaled: Vec<f64> = gaps.iter().zip(&lengths).map(|(g, l)| g * l.ln()).collect();
    assert!(scaled.iter().all(|s| *s < 1.0), "{scaled:?}");
}

#[test]
fn appendix_stages_are_bounded_apart() {
    let lengths = [100.0, 400.0, 1600.0];
    for alpha in [0.02, -0.02] {
        let ladder = appendix_ladder(1.0, alpha, &lengths, &AppendixSettings::default()).unwrap();
        let slopes = stage_slopes(&ladder).unwrap();
        assert!(slopes.difference_slopes.iter().all(|s| s.abs() < 0.05), "{slopes:?}");
        let z = zeta(1.0, alpha).unwrap();
        assert!((slopes.exact_slope + z).abs() <= 0.15 * z);
        for d in &ladder {
            assert!(d.bare_integral_minus_log_length().abs() < 3.0);
            assert_eq!(d.k, 20 * d.n);
        }
    }
}

#[test]
fn appendix_requires_three_particles() {
    assert!(appendix_ladder(1.0, 0.02, &[5.0], &AppendixSettings::default()).is_err());
}
