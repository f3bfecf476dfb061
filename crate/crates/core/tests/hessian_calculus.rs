use num_rational::Ratio;
use pme_lab::hessian_calculus::*;
use pme_lab::polynomial::LocalPolynomial;
use pme_lab::PmeParams;
use proptest::prelude::*;

fn params(m: f64, alpha: f64) -> PmeParams {
    PmeParams::planar(m, alpha).unwrap()
}

#[test]
fn linear_case_jet_is_exact_in_rationals() {
    let p = linear_case_polynomial(Ratio::<i64>::from(1));
    let j = jet_from_polynomial(&p, [Ratio::from(0), Ratio::from(0)]);
    let q = |n: i64| Ratio::from(n);
    assert_eq!((j.w, j.w1, j.w22, j.w122, j.w1111, j.w1122), (q(1), q(1), q(-2), q(2), q(-24), q(-8)));
    assert_eq!((j.w111, j.w112, j.w11, j.w12, j.w2), (q(0), q(0), q(0), q(0), q(0)));
}

#[test]
fn zero_polynomial_gives_zero_jet() {
    let j = jet_from_polynomial(&LocalPolynomial::<f64>::zero(), [0.3, -1.2]);
    assert_eq!(j, Jet4::default());
}

#[test]
fn scaled_case_jet() {
    let j = case_jet(&params(2.0, 0.75), 2.0).unwrap();
    let s = 0.75f64.sqrt();
    assert_eq!(j.w, 1.0);
    assert!((j.w22 + 8.0).abs() < 1e-15);
    assert!((j.w122 - 4.0 * s).abs() < 1e-14);
    assert!((j.w1 - 0.75 * s / 0.5).abs() < 1e-14);
    assert!((j.w1111 + 0.5).abs() < 1e-15);
    assert!((j.w1122 + 4.0).abs() < 1e-15);
}

#[test]
fn rate_anchors() {
    let r = |alpha: f64, a: f64| eval_w11_rate(&case_jet(&params(2.0, alpha), a).unwrap(), &params(2.0, alpha)).unwrap();
    assert!((r(1.0, 9.0) - 4.0).abs() < 1e-12);
    assert!((r(0.25, 1.0) - 2.0).abs() < 1e-12);
    assert!((r(0.0, 3.0) - 124.0 * std::f64::consts::E).abs() < 1e-10);
    for (alpha, m) in [(0.0, 2.0), (0.3, 3.0), (1.0, 1.5)] {
        assert_eq!(eval_w11_rate(&Jet4::constant(1.0), &params(m, alpha)).unwrap(), 0.0);
    }
}

#[test]
fn lhs_anchors_and_selection() {
    assert!((breaking_lhs(&params(2.0, 0.25), 1.0f64).unwrap() - 2.0).abs() < 1e-12);
    assert!((breaking_lhs(&params(2.0, 0.75), 2.0f64).unwrap() - 0.4453125).abs() < 1e-12);
    assert_eq!(breaking_lhs(&params(5.0, 1.0), 8.0).unwrap(), 0.0);
    assert_eq!(select_breaking_parameter(&params(2.0, 1.0)).unwrap(), 9.0);
    assert_eq!(select_breaking_parameter(&params(2.0, 0.0)).unwrap(), 3.0);
    assert_eq!(select_breaking_parameter(&params(2.0, 0.25)).unwrap(), 1.0);
    assert!(breaking_lhs(&params(2.0, 0.5), 1.0).is_err());
    assert!(select_breaking_parameter(&params(2.0, 0.5)).is_err());
}

#[test]
fn nonpositive_value_is_a_domain_error() {
    let mut j = Jet4::constant(0.0);
    j.w1 = 1.0;
    assert!(eval_w11_rate(&j, &params(2.0, 0.5)).is_err());
    assert!(eval_w11_rate(&j, &params(2.0, 0.0)).is_ok());
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.01f64..0.49, 0.51f64..0.99, Just(1.0)]
}

proptest! {
    #[test]
    fn lhs_agrees_with_rate(m in 1.05f64..5.0, alpha in alpha_strategy(), param in 0.3f64..12.0) {
        let p = params(m, alpha);
        let lhs = breaking_lhs(&p, param).unwrap();
        let rate = eval_w11_rate(&case_jet(&p, param).unwrap(), &p).unwrap();
        let factor = if alpha == 0.0 { std::f64::consts::E } else { 1.0 };
        prop_assert!((rate - factor * lhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "{} vs {}", rate, lhs);
    }

    #[test]
    fn threshold_at_eight_for_alpha_one(m in 1.01f64..10.0, a in -20.0f64..20.0) {
        let p = params(m, 1.0);
        prop_assert_eq!(breaking_lhs(&p, 8.0).unwrap(), 0.0);
        // Affine in a with slope 4(m-1).
        let l = breaking_lhs(&p, a).unwrap();
        prop_assert!((l - 4.0 * (m - 1.0) * (a - 8.0)).abs() <= 1e-12 * (1.0 + l.abs()));
    }

    #[test]
    fn selected_parameter_is_minimal(m in 1.1f64..4.0, alpha in alpha_strategy()) {
        let p = params(m, alpha);
        let k = select_breaking_parameter(&p).unwrap();
        prop_assert!(breaking_lhs(&p, k).unwrap() > 0.0);
        if k > 1.0 {
            prop_assert!(breaking_lhs(&p, k - 1.0).unwrap() <= 0.0);
        }
    }
}

/// `w_t` at a point, from `v = w^(1/alpha)` (or `e^w`) and the exact jet of `w`.
fn w_rate(w: &LocalPolynomial<f64>, x: f64, y: f64, m: f64, alpha: f64) -> f64 {
    let [w0, w1, w2, w11, _, w22] = w.second_jet(x, y);
    let (f, f1, f2) = if alpha == 0.0 {
        let e = w0.exp();
        (e, e, e)
    } else {
        let p = 1.0 / alpha;
        (w0.powf(p), p * w0.powf(p - 1.0), p * (p - 1.0) * w0.powf(p - 2.0))
    };
    let v = f;
    let grad = [f1 * w1, f1 * w2];
    let lap = f1 * (w11 + w22) + f2 * (w1 * w1 + w2 * w2);
    let vt = (m - 1.0) * v * lap + grad[0] * grad[0] + grad[1] * grad[1];
    if alpha == 0.0 {
        vt / v
    } else {
        alpha * v.powf(alpha - 1.0) * vt
    }
}

#[test]
fn rate_matches_differenced_evolution() {
    let w = LocalPolynomial::from_terms(&[
        ((0, 0), 1.3),
        ((1, 0), 0.4),
        ((0, 1), -0.3),
        ((2, 0), -0.5),
        ((1, 1), 0.2),
        ((0, 2), -0.7),
        ((3, 0), 0.15),
        ((2, 1), -0.1),
        ((1, 2), 0.25),
        ((0, 3), 0.05),
        ((4, 0), -0.2),
        ((3, 1), 0.07),
        ((2, 2), -0.3),
        ((1, 3), 0.04),
        ((0, 4), -0.1),
    ]);
    let pt = [0.11, -0.07];
    let jet = jet_from_polynomial(&w, pt);
    for (m, alpha) in [(2.0f64, 0.0f64), (2.0, 0.25), (3.0, 0.5), (1.5, 0.75), (2.0, 1.0)] {
        let want = eval_w11_rate(&jet, &params(m, alpha)).unwrap();
        let g = |dx: f64| w_rate(&w, pt[0] + dx, pt[1], m, alpha);
        let diff = |h: f64| (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h);
        let (e1, e2) = ((diff(2e-2) - want).abs(), (diff(1e-2) - want).abs());
        assert!(e2 < 1e-6 * (1.0 + want.abs()), "alpha {alpha}: {want} vs {}", diff(1e-2));
        // Fourth-order stencil: halving h cuts the error by about 16.
        assert!(e2 < e1 / 8.0 || e2 < 1e-9, "alpha {alpha}: {e1:e} {e2:e}");
    }
}
