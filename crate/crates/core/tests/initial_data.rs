use pme_lab::concavity_monitor::Sym2;
use pme_lab::hessian_calculus::case_jet;
use pme_lab::initial_data::*;
use pme_lab::PmeParams;

fn planar(alpha: f64) -> PmeParams {
    PmeParams::planar(2.0, alpha).unwrap()
}

fn interior(d: &InitialDatum) -> &InteriorConstruction {
    match &d.source {
        DatumSource::Interior(c) => c,
        other => panic!("unexpected source {other:?}"),
    }
}

#[test]
fn interior_data_certify_for_every_regime() {
    for alpha in [0.0, 0.25, 0.75, 1.0] {
        let d = build_interior_datum(&planar(alpha)).unwrap();
        let c = interior(&d);
        assert!(c.certificate.passes(alpha), "{alpha} {:?}", c.certificate);
        assert!(c.profile_certificate.is_concave_nonincreasing(1e-12));
        println!("alpha {alpha}: param {} local rho {} rho {} A {}", c.param, c.local_rho, c.rho, c.amplitude);
    }
}

#[test]
fn origin_hessian_is_the_case_hessian() {
    let d = build_interior_datum(&planar(0.25)).unwrap();
    let h = d.power_hessian(0.0, 0.0).unwrap();
    assert!(h.a11.abs() < 1e-12 && h.a12.abs() < 1e-12 && (h.a22 + 2.0).abs() < 1e-12, "{h:?}");
    let r = verify_alpha_concavity(&d, 201, 201);
    assert!(r.is_concave(), "{r:?}");
}

#[test]
fn jet_near_origin_matches_polynomial() {
    for alpha in [0.0, 0.25, 1.0] {
        let p = planar(alpha);
        let d = build_interior_datum(&p).unwrap();
        let c = interior(&d);
        let jet = case_jet(&p, c.param).unwrap();
        let w0 = c.w_at_origin();
        let expected = if alpha == 0.0 { 1.0 + c.profile.cap } else { 1.0 };
        assert!((w0 - expected).abs() < 1e-14, "{alpha} {w0}");
        // On B_{rho/4} the cap is constant, so w~ - w~(0) = Q - Q(0) exactly.
        let q = c.rho / 5.0;
        for (x, y) in [(q, 0.0), (0.0, q), (0.6 * q, -0.7 * q)] {
            let w = c.w_tilde(x, y).unwrap();
            let lhs = w.v - w0;
            let rhs = c.polynomial.eval(x, y) - jet.w;
            assert!((lhs - rhs).abs() < 1e-14, "{alpha}");
            let qh = Sym2::new(c.polynomial.partial_at(2, 0, x, y), c.polynomial.partial_at(1, 1, x, y), c.polynomial.partial_at(0, 2, x, y));
            assert!((w.hess.a11 - qh.a11).abs() < 1e-12 && (w.hess.a22 - qh.a22).abs() < 1e-12);
        }
    }
}

#[test]
fn boundary_annulus_is_linear_in_distance() {
    for alpha in [0.25, 0.75] {
        let d = build_interior_datum(&planar(alpha)).unwrap();
        let c = interior(&d);
        let slope = c.amplitude.powf(1.0 / alpha);
        for k in 0..20 {
            let r = c.rho * (0.76 + 0.2 * k as f64 / 19.0);
            let th = 0.3 * k as f64;
            let (x, y) = (r * th.cos(), r * th.sin());
            let v = d.pressure(x, y);
            assert!((v - slope * (c.rho - r)).abs() <= 1e-12 * slope * c.rho, "{alpha} {v}");
            let g = d.derivatives(x, y).unwrap().grad_norm();
            assert!((g - slope).abs() < 1e-9 * slope);
        }
        assert_eq!(d.pressure(c.rho * 1.0001, 0.0), 0.0);
    }
}

#[test]
fn control_datum_certifies() {
    let d = build_control_datum(2.0, 1.0).unwrap();
    assert!(interior(&d).certificate.passes(0.5));
}

#[test]
fn boundary_data_certify() {
    for alpha in [0.0, 0.25, 0.4] {
        let d = build_boundary_datum(alpha).unwrap();
        let DatumSource::Boundary(b) = &d.source else { panic!() };
        let c = &b.certificate;
        assert!(c.passes(), "{alpha} {c:?}");
        assert!(c.slopes[1] < 0.5 * (c.slopes[0] + c.slopes[2]));
        let r = verify_alpha_concavity(&d, 161, 121);
        assert!(r.is_concave(), "{alpha} {r:?}");
        println!("alpha {alpha}: p {} x0 {} extent {} slopes {:?}", b.exponent, b.shift, b.x_extent, c.slopes);
    }
}

#[test]
fn document_round_trip() {
    let d = build_interior_datum(&planar(1.0)).unwrap();
    let doc = d.to_document(9).unwrap();
    let back = InitialDatum::from_document(&serde_json::from_str(&doc.to_string()).unwrap()).unwrap();
    assert_eq!(back, d);
    assert!(InitialDatum::from_document(&serde_json::json!({"format": "x"})).is_err());
}

#[test]
fn report_examples() {
    let unit = Rect::new(-1.0, 1.0, -1.0, 1.0);
    let cap = InitialDatum::new(planar(1.0), unit, DatumSource::Cap { center: [0.0, 0.0], semi_axes: [1.0, 1.0], amplitude: 1.0, tilt: 0.0 });
    let r = verify_alpha_concavity(&cap, 101, 101);
    assert!(r.max_lambda1 <= 0.0 && r.max_lambda1 > -0.1);
    let gauss = InitialDatum::new(planar(0.0), unit, DatumSource::Gaussian { center: [0.0, 0.0], width: 1.0, height: 1.0 });
    let r = verify_alpha_concavity(&gauss, 51, 51);
    assert!((r.max_lambda1 + 2.0).abs() < 1e-12);
}

#[test]
fn report_never_decreases_when_refined() {
    let d = build_interior_datum(&planar(0.25)).unwrap();
    let coarse = verify_alpha_concavity(&d, 21, 21);
    let fine = coarse.clone().merge(&verify_alpha_concavity(&d, 40, 40));
    assert!(fine.max_lambda1 >= coarse.max_lambda1 && fine.max_scaled_lambda1 >= coarse.max_scaled_lambda1);
    assert_eq!(fine.samples, coarse.samples + verify_alpha_concavity(&d, 40, 40).samples);
}
