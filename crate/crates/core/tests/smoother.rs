use approx::assert_abs_diff_eq;
use ndarray::{Array1, Array2};
use proptest::prelude::*;

use l2boost::diagnostics::{conditional_bias, conditional_variance, GridFunction};
use l2boost::smoother::{
    boosted_weight_path, default_eval_grid, higher_order_fit, smoother_matrix_with_floor, Stability,
};
use l2boost::{fit_boosted, nw_weights, predict, smoother_matrix, FitConfig, KernelSpec, Sample};

/// Gaussian weights with the kernel cut off beyond 8 bandwidths.
fn gaussian_oracle(design: &[f64], x: f64, h: f64) -> Vec<f64> {
    let k: Vec<f64> = design
        .iter()
        .map(|&xi| {
            let u = (xi - x) / h;
            if u.abs() > 8.0 { 0.0 } else { (-0.5 * u * u).exp() }
        })
        .collect();
    let total: f64 = k.iter().sum();
    k.into_iter().map(|v| v / total).collect()
}

fn design_strategy(sizes: &'static [usize]) -> impl Strategy<Value = Vec<f64>> {
    prop::sample::select(sizes).prop_flat_map(|n| prop::collection::vec(0.0f64..1.0, n))
}

fn h_strategy() -> impl Strategy<Value = f64> {
    prop::sample::select(l2boost::selection::log_grid(0.02, 0.3, 12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn weight_rows_sum_to_one(design in design_strategy(&[10, 50, 200]), h in h_strategy(), r in 0usize..=6) {
        let grid = default_eval_grid();
        for profile in boosted_weight_path(&design, &grid, h, &KernelSpec::gaussian(), r).unwrap() {
            for (row, flagged) in profile.weights().rows().into_iter().zip(profile.flags()) {
                if !flagged {
                    prop_assert!((row.sum() - 1.0).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn three_paths_agree(
        design in design_strategy(&[2, 5, 17, 40]),
        seed in any::<u64>(),
        h in h_strategy(),
        r in 0usize..=6,
    ) {
        let n = design.len();
        let y: Vec<f64> = (0..n).map(|i| ((seed >> (i % 60)) & 0xff) as f64 / 64.0 - 2.0).collect();
        let sample = Sample::new(design.clone(), y.clone()).unwrap();
        let fit = fit_boosted(&sample, &FitConfig::new(h, r, KernelSpec::gaussian()).unwrap()).unwrap();
        let path = boosted_weight_path(&design, &design, h, &KernelSpec::gaussian(), r).unwrap();
        let via_weights = predict(&path[r], &y).unwrap();

        let mut s = Array2::zeros((n, n));
        for i in 0..n {
            for (j, w) in gaussian_oracle(&design, design[i], h).into_iter().enumerate() {
                s[[i, j]] = w;
            }
        }
        let eye = Array2::<f64>::eye(n);
        let mut power = eye.clone();
        for _ in 0..=r {
            power = power.dot(&(&eye - &s));
        }
        let via_hat = (&eye - &power).dot(&Array1::from(y));
        for i in 0..n {
            let a = fit.final_fit()[i];
            let scale = a.abs().max(1.0);
            prop_assert!((a - via_weights[i]).abs() <= 1e-9 * scale);
            prop_assert!((a - via_hat[i]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn predictions_are_linear(
        design in design_strategy(&[5, 30]),
        h in h_strategy(),
        r in 0usize..=4,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let n = design.len();
        let y1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let y2: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).cos() + 0.5).collect();
        let combo: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| a * p + b * q).collect();
        let profile = &boosted_weight_path(&design, &default_eval_grid(), h, &KernelSpec::gaussian(), r).unwrap()[r];
        let (p1, p2, pc) = (predict(profile, &y1).unwrap(), predict(profile, &y2).unwrap(), predict(profile, &combo).unwrap());
        for k in 0..pc.len() {
            if pc[k].is_finite() {
                prop_assert!((pc[k] - (a * p1[k] + b * p2[k])).abs() <= 1e-10 * (1.0 + pc[k].abs()));
            }
        }
    }

    #[test]
    fn boosting_telescopes(design in design_strategy(&[6, 25]), h in h_strategy(), r in 1usize..=5) {
        let n = design.len();
        let y: Vec<f64> = design.iter().map(|x| (7.0 * x).sin() + x).collect();
        let fit = fit_boosted(&Sample::new(design.clone(), y.clone()).unwrap(), &FitConfig::new(h, r, KernelSpec::gaussian()).unwrap()).unwrap();
        let grid = default_eval_grid();
        let pred = fit.predict_at(&grid).unwrap();
        for k in 1..=r {
            let resid = fit.residuals().row(k - 1).to_vec();
            for (g, &x) in grid.iter().enumerate() {
                if pred.flags()[g] {
                    continue;
                }
                let w = gaussian_oracle(&design, x, h);
                let smooth: f64 = w.iter().zip(&resid).map(|(a, b)| a * b).sum();
                let step = pred.iterate(k)[g] - pred.iterate(k - 1)[g];
                prop_assert!((step - smooth).abs() <= 1e-10, "x {} h {} k {} step {} smooth {}", x, h, k, step, smooth);
            }
            for i in 0..n {
                let e = fit.residuals()[[k, i]];
                prop_assert_eq!(e, y[i] - fit.fitted()[[k, i]]);
            }
        }
    }

    #[test]
    fn constant_truth_has_zero_bias(design in design_strategy(&[3, 40]), h in h_strategy(), r in 0usize..=6, c in -5.0f64..5.0) {
        let path = boosted_weight_path(&design, &default_eval_grid(), h, &KernelSpec::gaussian(), r).unwrap();
        for profile in &path {
            let bias = conditional_bias(profile, |_| c).unwrap();
            for (v, ok) in bias.values().iter().zip(bias.valid()) {
                if *ok {
                    prop_assert!(v.abs() <= 1e-12);
                }
            }
            let var = conditional_variance(profile, |_| 0.25).unwrap();
            prop_assert!(var.values().iter().zip(var.valid()).all(|(v, ok)| !ok || *v >= 0.0));
        }
    }

    #[test]
    fn grid_function_csv_round_trip(values in prop::collection::vec(-1e3f64..1e3, 3..40), mask_bits in any::<u64>()) {
        let n = values.len();
        let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let valid: Vec<bool> = (0..n).map(|i| (mask_bits >> (i % 64)) & 1 == 1 || i == 0).collect();
        let f = GridFunction::with_mask(grid, values, valid).unwrap();
        let mut first = Vec::new();
        f.write_csv(&mut first).unwrap();
        let back = GridFunction::read_csv(first.as_slice()).unwrap();
        prop_assert_eq!(back.valid(), f.valid());
        let mut second = Vec::new();
        back.write_csv(&mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}

#[test]
fn hand_weights() {
    let w = nw_weights(&[0.2, 0.5, 0.8], 0.5, 0.3, &KernelSpec::gaussian(), 0.0).unwrap();
    let w = w.weights().unwrap();
    let e = std::f64::consts::E;
    let (side, mid) = (1.0 / (2.0 + e.sqrt()), e.sqrt() / (2.0 + e.sqrt()));
    assert_abs_diff_eq!(w[0], side, epsilon = 1e-15);
    assert_abs_diff_eq!(w[1], mid, epsilon = 1e-15);
    assert_abs_diff_eq!(w[2], side, epsilon = 1e-15);
}

#[test]
fn two_point_smoother_has_dominant_diagonal() {
    for h in [0.01, 0.1, 1.0, 10.0] {
        let s = smoother_matrix(&[0.3, 0.6], h, &KernelSpec::gaussian()).unwrap();
        let m = s.matrix();
        for i in 0..2 {
            assert_abs_diff_eq!(m.row(i).sum(), 1.0, epsilon = 1e-12);
            assert!(m[[i, i]] >= m[[i, 1 - i]]);
        }
    }
}

#[test]
fn isolated_points_are_flagged_not_nan() {
    let s = smoother_matrix_with_floor(&[0.1, 0.9], 0.05, &KernelSpec::epanechnikov(), 0.0).unwrap();
    assert!(s.flags().iter().all(|f| !f));
    let fit = fit_boosted(
        &Sample::new(vec![0.1, 0.9], vec![1.0, 2.0]).unwrap(),
        &FitConfig::new(0.05, 2, KernelSpec::epanechnikov()).unwrap(),
    )
    .unwrap();
    let pred = fit.predict_at(&[0.1, 0.5, 0.9]).unwrap();
    assert_eq!(pred.flags(), &[false, true, false]);
    assert!(pred.iterate(2)[1].is_nan());
    assert_eq!(pred.iterate(2)[0], 1.0);
}

#[test]
fn higher_order_fit_reduces_to_nadaraya_watson_at_r_zero() {
    let x = vec![0.1, 0.35, 0.4, 0.7, 0.95];
    let y = vec![1.0, -0.5, 0.25, 2.0, 0.0];
    let sample = Sample::new(x.clone(), y.clone()).unwrap();
    let grid = [0.0, 0.3, 0.6, 1.0];
    let fit = higher_order_fit(&sample, 0.2, &KernelSpec::gaussian(), 0, &grid).unwrap();
    for (k, &g) in grid.iter().enumerate() {
        let w = gaussian_oracle(&x, g, 0.2);
        let nw: f64 = w.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(fit.values[k], nw, epsilon = 1e-12);
        assert_eq!(fit.flags[k], Stability::Stable);
    }
}

#[test]
fn higher_order_fit_r_one_matches_hand_mixture() {
    let x = vec![0.2, 0.45, 0.5, 0.8];
    let y = vec![0.3, 1.0, -1.0, 0.5];
    let sample = Sample::new(x.clone(), y.clone()).unwrap();
    let h = 0.15;
    let phi = |u: f64, s: f64| (-0.5 * (u / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
    let k1 = |u: f64| 2.0 * phi(u, 1.0) - phi(u, 2f64.sqrt());
    for g in [0.1, 0.33, 0.5, 0.9] {
        let w: Vec<f64> = x.iter().map(|&xi| k1((xi - g) / h) / h).collect();
        let want = w.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        let got = higher_order_fit(&sample, h, &KernelSpec::gaussian(), 1, &[g]).unwrap();
        assert_abs_diff_eq!(got.values[0], want, epsilon = 1e-12);
        assert_abs_diff_eq!(got.denominators[0], w.iter().sum::<f64>(), epsilon = 1e-12);
    }
}

#[test]
fn higher_order_fit_keeps_constants_and_flags_bad_denominators() {
    let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.618).fract()).collect();
    let sample = Sample::new(x, vec![1.5; 30]).unwrap();
    let grid = default_eval_grid();
    let mut any_flag = false;
    for r in 0..=6 {
        let fit = higher_order_fit(&sample, 0.02, &KernelSpec::gaussian(), r, &grid).unwrap();
        for k in 0..grid.len() {
            match fit.flags[k] {
                Stability::ZeroDenominator => assert!(fit.values[k].is_nan()),
                _ => assert_abs_diff_eq!(fit.values[k], 1.5, epsilon = 1e-9),
            }
            let flagged_by_sign = fit.denominators[k] <= 0.0;
            assert!(!flagged_by_sign || fit.flags[k].is_flagged());
            any_flag |= fit.flags[k].is_flagged();
        }
    }
    assert!(any_flag, "sparse design with tiny h should produce unstable points");
}
