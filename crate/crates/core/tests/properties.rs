use proptest::prelude::*;

use deltaoverlap::asymptotics::{fit_line, gamma, zeta};
use deltaoverlap::cli::emit::{format_float, to_json_compact, to_json_pretty};
use deltaoverlap::delta_model::phase_shift;
use deltaoverlap::linalg::ln_abs_1p;
use deltaoverlap::overlap_engine::overlap_direct;
use deltaoverlap::product::product_overlap;
use deltaoverlap::rank1_lab::{generate_pair, log_gram_overlap};
use deltaoverlap::{DeltaBox, DeltaModel, ModeSpectrum};

fn coupling() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.01f64..5.0, -5.0f64..-0.01]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_shift_lies_in_the_open_interval(k in 1e-6f64..1e4, alpha in coupling()) {
        let d = phase_shift(k, alpha).unwrap();
        prop_assert!(d > 0.0 && d < std::f64::consts::PI);
        if alpha > 0.0 {
            prop_assert!(d <= std::f64::consts::FRAC_PI_2);
        } else if alpha < 0.0 {
            prop_assert!(d >= std::f64::consts::FRAC_PI_2);
        }
    }

    #[test]
    fn zeta_dominates_gamma(energy in 0.01f64..100.0, alpha in coupling()) {
        let (z, g) = (zeta(energy, alpha).unwrap(), gamma(energy, alpha).unwrap());
        prop_assert!(z >= g);
        if alpha >= 0.0 {
            prop_assert_eq!(z, g);
        }
    }

    #[test]
    fn product_matches_gram(dim in 2usize..16, seed in 0u64..10_000) {
        let pair = generate_pair(dim, seed).unwrap();
        let spectra = pair.eigen().unwrap().spectra().unwrap();
        for n in 1..dim {
            let gram = log_gram_overlap(&pair, n).unwrap();
            let product = product_overlap(&spectra, n).unwrap().ln();
            prop_assert!((gram - product).abs() <= 1e-9 * gram.abs().max(1.0));
        }
    }

    #[test]
    fn levels_interlace_and_solve_their_equation(alpha in coupling(), length in 5.0f64..500.0) {
        prop_assume!(alpha >= 0.0 || 4.0 * std::f64::consts::PI * -alpha * length > 1.1);
        let s = ModeSpectrum::solve(&DeltaBox::new(alpha, length).unwrap(), 300).unwrap();
        prop_assert!(s.is_interlaced());
        for n in 1..=300 {
            prop_assert!(s.residual(n).abs() < 1e-13 * n as f64 * std::f64::consts::PI);
        }
    }

    #[test]
    fn overlap_never_exceeds_one(alpha in coupling(), length in 10.0f64..150.0, energy in 0.2f64..4.0) {
        prop_assume!(alpha >= 0.0 || 4.0 * std::f64::consts::PI * -alpha * length > 1.1);
        let model = DeltaModel::new(alpha, length, energy).unwrap();
        prop_assume!(model.default_particles().is_ok());
        let n = model.default_particles().unwrap();
        prop_assert!(overlap_direct(&model, n).unwrap().log_overlap_sq <= 1e-9);
    }

    #[test]
    fn emitted_floats_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        let value = serde_json::json!({"x": x, "xs": [x, -x]});
        for text in [to_json_pretty(&value), to_json_compact(&value)] {
            let back: serde_json::Value = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &value);
        }
    }

    #[test]
    fn ln_abs_1p_matches_the_naive_form(x in -0.9f64..10.0) {
        let naive = (1.0 + x).abs().ln();
        prop_assert!((ln_abs_1p(x) - naive).abs() <= 1e-15 * naive.abs().max(1.0) + 1e-16);
    }

    #[test]
    fn line_fit_recovers_random_lines(slope in -3.0f64..3.0, intercept in -10.0f64..10.0) {
        let xs: Vec<f64> = (0..7).map(|i| 4.0 + 0.7 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + intercept).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-12);
        prop_assert!((fit.intercept - intercept).abs() < 1e-11);
    }
}
