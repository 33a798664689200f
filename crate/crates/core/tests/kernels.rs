use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use l2boost::kernels::KernelForm;
use l2boost::{convolve, higher_order_kernel, kernel_moment, BaseKernel, KernelSpec};

fn pairs(k: &KernelSpec) -> Vec<(f64, f64)> {
    k.mixture_terms()
        .unwrap()
        .iter()
        .map(|t| (t.coef, t.scale()))
        .collect()
}

/// `int a(t) b(u - t) dt` by a fine midpoint rule.
fn quadrature_convolution(a: &KernelSpec, b: &KernelSpec, u: f64) -> f64 {
    let radius = a.support_radius();
    let steps = 40_000;
    let dt = 2.0 * radius / steps as f64;
    (0..steps)
        .map(|i| {
            let t = -radius + (i as f64 + 0.5) * dt;
            a.eval(t) * b.eval(u - t)
        })
        .sum::<f64>()
        * dt
}

#[test]
fn twicing_coefficients_for_r_two() {
    let k = higher_order_kernel(&KernelSpec::gaussian(), 2).unwrap();
    let got = pairs(&k);
    let want = [(4.0, 1.0), (-6.0, 2f64.sqrt()), (4.0, 3f64.sqrt()), (-1.0, 2.0)];
    assert_eq!(got.len(), want.len());
    for ((c, s), (wc, ws)) in got.iter().zip(want) {
        assert_abs_diff_eq!(*c, wc, epsilon = 1e-12);
        assert_abs_diff_eq!(*s, ws, epsilon = 1e-12);
    }
}

#[test]
fn mixture_self_convolution_expands_bilinearly() {
    let k = KernelSpec::mixture(&[(2.0, 1.0), (-1.0, 2f64.sqrt())]).unwrap();
    let c = convolve(&k, &k).unwrap();
    let want = [(4.0, 2f64.sqrt()), (-4.0, 3f64.sqrt()), (1.0, 2.0)];
    for ((c, s), (wc, ws)) in pairs(&c).iter().zip(want) {
        assert_abs_diff_eq!(*c, wc, epsilon = 1e-12);
        assert_abs_diff_eq!(*s, ws, epsilon = 1e-12);
    }
    for u in [-3.0, -0.7, 0.0, 0.4, 2.5] {
        assert_abs_diff_eq!(c.eval(u), quadrature_convolution(&k, &k, u), epsilon = 1e-9);
    }
}

#[test]
fn epanechnikov_convolution_is_a_unit_mass_table() {
    let e = KernelSpec::epanechnikov();
    let c = convolve(&e, &e).unwrap();
    let KernelForm::Tabulated(t) = c.form() else { panic!("expected a table") };
    assert_abs_diff_eq!(t.half_width(), 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(t.integral(), 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(c.eval(0.3), quadrature_convolution(&e, &e, 0.3), epsilon = 1e-5);
}

#[test]
fn twicing_recursion_doubles_the_order() {
    // K(r) = 1 - (1 - K)^(*2^r): moments vanish through 2^(r+1) - 1
    for r in 0..=3u32 {
        let k = higher_order_kernel(&KernelSpec::gaussian(), r as usize).unwrap();
        let order = 2u32.pow(r + 1);
        for p in 1..order {
            assert_abs_diff_eq!(kernel_moment(&k, p), 0.0, epsilon = 1e-6);
        }
        assert!(kernel_moment(&k, order).abs() > 0.5, "r = {r}");
    }
}

#[test]
fn higher_order_kernels_have_unit_mass_and_symmetry() {
    for base in [KernelSpec::gaussian(), KernelSpec::epanechnikov()] {
        for r in 0..=3 {
            let k = higher_order_kernel(&base, r).unwrap();
            let radius = k.support_radius();
            let steps = 5 * 4096;
            let du = 2.0 * radius / steps as f64;
            let mass: f64 = (0..=steps)
                .map(|i| {
                    let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                    w * k.eval(-radius + i as f64 * du)
                })
                .sum::<f64>()
                * du;
            assert!((mass - 1.0).abs() <= 1e-6, "{} r = {r}: mass {mass}", base.base());
            for i in 0..200 {
                let u = radius * i as f64 / 200.0;
                assert_abs_diff_eq!(k.eval(u), k.eval(-u), epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn r_six_gaussian_kernel_is_finite_and_peaked() {
    let k = higher_order_kernel(&KernelSpec::gaussian(), 6).unwrap();
    let peak = k.eval(0.0);
    assert!(peak.is_finite() && peak > k.eval(0.5));
    assert!(k.eval(40.0).abs() < 1e-6);
}

fn mixture_strategy() -> impl Strategy<Value = KernelSpec> {
    prop::collection::vec((-2.0f64..2.0, 0.3f64..2.0), 1..4).prop_map(|mut terms| {
        let total: f64 = terms.iter().map(|t| t.0).sum();
        terms.push((1.0 - total, 0.7));
        KernelSpec::mixture(&terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_commutes(a in mixture_strategy(), b in mixture_strategy(), u in -4.0f64..4.0) {
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        prop_assert!((ab.eval(u) - ba.eval(u)).abs() <= 1e-10);
    }

    #[test]
    fn table_convolution_commutes(u in -2.0f64..2.0) {
        let e = KernelSpec::epanechnikov();
        let t = KernelSpec::from_table(BaseKernel::Epanechnikov, e.tabulate(2048));
        let a = convolve(&t, &t).unwrap();
        let b = convolve(&e, &e).unwrap();
        prop_assert!((a.eval(u) - b.eval(u)).abs() <= 1e-5);
    }

    #[test]
    fn closed_form_matches_quadrature(a in mixture_strategy(), b in mixture_strategy(), u in -3.0f64..3.0) {
        let closed = convolve(&a, &b).unwrap().eval(u);
        prop_assert!((closed - quadrature_convolution(&a, &b, u)).abs() <= 1e-5);
    }
}
