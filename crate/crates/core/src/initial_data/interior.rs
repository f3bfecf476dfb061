use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::{Cutoff, ProfileCertificate, RadialProfile};
use super::sources::{DatumSource, PointDerivatives, Rect};
use super::InitialDatum;
use crate::concavity_monitor::Sym2;
use crate::error::{PmeError, Result};
use crate::hessian_calculus::{breaking_case, case_polynomial, linear_case_polynomial, select_breaking_parameter, BreakingCase};
use crate::params::PmeParams;
use crate::polynomial::LocalPolynomial;
use crate::scalar::Dual2;

const LOCAL_RADII: usize = 1000;
const LOCAL_ANGLES: usize = 1000;
const CERT_RADII: usize = 400;
const CERT_ANGLES: usize = 720;
const MAX_HALVINGS: usize = 40;
/// Relative slack for eigenvalues that should vanish.
pub const CONCAVITY_TOL: f64 = 1e-8;

/// A breaking polynomial together with a radius on which the local conditions hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalW {
    pub case: BreakingCase,
    pub param: f64,
    pub polynomial: LocalPolynomial<f64>,
    pub rho: f64,
}

fn hessian_of(p: &LocalPolynomial<f64>, x: f64, y: f64) -> Sym2 {
    let j = p.second_jet(x, y);
    Sym2::new(j[3], j[4], j[5])
}

fn polar_points(rho: f64, nr: usize, nth: usize) -> impl ParallelIterator<Item = (f64, f64, f64)> {
    (1..=nr).into_par_iter().flat_map_iter(move |i| {
        let r = rho * i as f64 / nr as f64;
        (0..nth).map(move |j| {
            let th = std::f64::consts::TAU * j as f64 / nth as f64;
            (r, r * th.cos(), r * th.sin())
        })
    })
}

/// The three conditions for breaking on the closed punctured ball.
fn local_conditions_hold(p: &LocalPolynomial<f64>, rho: f64) -> bool {
    let h0 = hessian_of(p, 0.0, 0.0);
    let at_origin = p.eval(0.0, 0.0) > 0.0 && h0.a11 == 0.0 && h0.a12 == 0.0 && h0.a22 < 0.0;
    at_origin
        && polar_points(rho, LOCAL_RADII, LOCAL_ANGLES).all(|(_, x, y)| {
            let j = p.second_jet(x, y);
            let h = Sym2::new(j[3], j[4], j[5]);
            h.det() > 0.0 && h.a11 < 0.0 && j[0] > 0.0
        })
}

fn local_radius(p: &LocalPolynomial<f64>) -> Result<f64> {
    let mut rho = 0.5;
    for _ in 0..MAX_HALVINGS {
        if local_conditions_hold(p, rho) {
            return Ok(rho);
        }
        rho *= 0.5;
    }
    Err(PmeError::Construction("local conditions do not certify on any tested radius".into()))
}

/// The breaking polynomial for `params.alpha`, its parameter, and a certified radius.
pub fn build_local_w(params: &PmeParams) -> Result<LocalW> {
    params.validate()?;
    let case = breaking_case(params.alpha)?;
    let param = select_breaking_parameter(params)?;
    let polynomial = case_polynomial(params, param)?;
    let rho = local_radius(&polynomial)?;
    Ok(LocalW { case, param, polynomial, rho })
}

/// `w~ = A F + psi (Q - shift)` on `B_rho`, with `v0 = w~^(1/alpha)` or `exp(w~)`.
///
/// For alpha > 0 the amplitude is `1/c` and the shift 1, so that `w~ = Q` on
/// `B_{rho/4}` and `w~ = F/c` near the boundary. For alpha = 0 the cap is added
/// to `Q` with no cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteriorConstruction {
    pub params: PmeParams,
    /// `None` for the alpha = 1/2 control datum.
    pub case: Option<BreakingCase>,
    pub param: f64,
    pub polynomial: LocalPolynomial<f64>,
    pub local_rho: f64,
    pub rho: f64,
    pub amplitude: f64,
    pub shift: f64,
    pub profile: RadialProfile,
    pub cutoff: Option<Cutoff>,
    pub profile_certificate: ProfileCertificate,
    pub cutoff_bound: Option<f64>,
    pub certificate: InteriorCertificate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InteriorCertificate {
    pub samples: usize,
    /// Largest `lambda1(D^2 w~) / |D^2 w~|` over the sample.
    pub max_scaled_lambda1: f64,
    /// Largest `lambda1(D^2 w~)` over samples with `|x| >= rho_test`.
    pub max_lambda1_outside: f64,
    pub rho_test: f64,
    pub min_w: f64,
    pub halvings: usize,
}

impl InteriorCertificate {
    pub fn passes(&self, alpha: f64) -> bool {
        self.max_scaled_lambda1 <= CONCAVITY_TOL && self.max_lambda1_outside < 0.0 && (alpha == 0.0 || self.min_w > 0.0)
    }
}

fn radial_derivatives(f: Dual2, x: f64, y: f64) -> (f64, [f64; 2], Sym2) {
    let r = x.hypot(y);
    if r == 0.0 || (f.d == 0.0 && f.dd == 0.0) {
        return (f.v, [0.0, 0.0], Sym2::diag(f.dd, f.dd));
    }
    let u = [x / r, y / r];
    let radial = Sym2::outer(u);
    let tangential = Sym2::diag(1.0, 1.0).add(&radial.scale(-1.0));
    (f.v, [f.d * u[0], f.d * u[1]], radial.scale(f.dd).add(&tangential.scale(f.d / r)))
}

impl InteriorConstruction {
    fn assemble(params: PmeParams, case: Option<BreakingCase>, param: f64, polynomial: LocalPolynomial<f64>, local_rho: f64) -> Result<Self> {
        let mut rho = local_rho;
        for halvings in 0..MAX_HALVINGS {
            let c = Self::at_radius(params, case, param, polynomial.clone(), local_rho, rho, halvings);
            if c.certificate.passes(params.alpha) {
                return Ok(c);
            }
            rho *= 0.5;
        }
        Err(PmeError::Construction(format!("interior datum for alpha = {} does not certify", params.alpha)))
    }

    fn at_radius(
        params: PmeParams,
        case: Option<BreakingCase>,
        param: f64,
        polynomial: LocalPolynomial<f64>,
        local_rho: f64,
        rho: f64,
        halvings: usize,
    ) -> Self {
        let profile = RadialProfile::new(params.alpha, rho);
        let (amplitude, shift, cutoff) = if params.alpha == 0.0 { (1.0, 0.0, None) } else { (1.0 / profile.cap, 1.0, Some(Cutoff { rho })) };
        let mut c = InteriorConstruction {
            params,
            case,
            param,
            polynomial,
            local_rho,
            rho,
            amplitude,
            shift,
            profile_certificate: profile.certify(20_000, 1e-9),
            cutoff_bound: cutoff.map(|c| c.derivative_bound(20_000)),
            profile,
            cutoff,
            certificate: InteriorCertificate::default(),
        };
        // A coarse scan rejects most radii before the dense one runs.
        c.certificate = c.certify(CERT_RADII / 8, CERT_ANGLES / 8);
        if c.certificate.passes(params.alpha) {
            c.certificate = c.certify(CERT_RADII, CERT_ANGLES);
        }
        c.certificate.halvings = halvings;
        c
    }

    /// Dense polar scan of `D^2 w~` and `w~` on the open ball.
    pub fn certify(&self, nr: usize, nth: usize) -> InteriorCertificate {
        let rho_test = self.rho / 16.0;
        let top = self.rho * (1.0 - 1e-9);
        let (scaled, outside, min_w) = polar_points(top, nr, nth)
            .map(|(r, x, y)| {
                let w = self.w_tilde(x, y).expect("inside the ball");
                let l1 = w.hess.lambda1();
                let out = if r >= rho_test { l1 } else { f64::NEG_INFINITY };
                (l1 / w.hess.max_abs(), out, w.v)
            })
            .reduce(|| (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.min(b.2)));
        InteriorCertificate { samples: nr * nth, max_scaled_lambda1: scaled, max_lambda1_outside: outside, rho_test, min_w, halvings: 0 }
    }

    /// `w~` with gradient and Hessian, for `|x| < rho`.
    pub fn w_tilde(&self, x: f64, y: f64) -> Option<PointDerivatives> {
        let r = x.hypot(y);
        if r >= self.rho {
            return None;
        }
        let (f, fg, fh) = radial_derivatives(self.profile.eval(r), x, y);
        let (psi, pg, ph) = match &self.cutoff {
            Some(c) => radial_derivatives(c.eval(r), x, y),
            None => (1.0, [0.0, 0.0], Sym2::default()),
        };
        let a = self.amplitude;
        let mut v = a * f;
        let mut grad = [a * fg[0], a * fg[1]];
        let mut hess = fh.scale(a);
        if psi != 0.0 {
            let j = self.polynomial.second_jet(x, y);
            let q = j[0] - self.shift;
            let qg = [j[1], j[2]];
            let qh = Sym2::new(j[3], j[4], j[5]);
            v += psi * q;
            grad = [grad[0] + psi * qg[0] + q * pg[0], grad[1] + psi * qg[1] + q * pg[1]];
            let cross = Sym2::new(2.0 * pg[0] * qg[0], pg[0] * qg[1] + pg[1] * qg[0], 2.0 * pg[1] * qg[1]);
            hess = hess.add(&qh.scale(psi)).add(&ph.scale(q)).add(&cross);
        }
        Some(PointDerivatives { v, grad, hess })
    }

    pub fn pressure(&self, x: f64, y: f64) -> f64 {
        match self.w_tilde(x, y) {
            None => 0.0,
            Some(w) if self.params.alpha == 0.0 => w.v.exp(),
            Some(w) => w.v.max(0.0).powf(1.0 / self.params.alpha),
        }
    }

    pub fn derivatives(&self, x: f64, y: f64) -> Option<PointDerivatives> {
        let Some(w) = self.w_tilde(x, y) else {
            return Some(PointDerivatives::zero());
        };
        let gg = Sym2::outer(w.grad);
        if self.params.alpha == 0.0 {
            let v = w.v.exp();
            return Some(PointDerivatives { v, grad: [v * w.grad[0], v * w.grad[1]], hess: w.hess.add(&gg).scale(v) });
        }
        if w.v <= 0.0 {
            return Some(PointDerivatives::zero());
        }
        let p = 1.0 / self.params.alpha;
        let d1 = p * w.v.powf(p - 1.0);
        let d2 = p * (p - 1.0) * w.v.powf(p - 2.0);
        Some(PointDerivatives { v: w.v.powf(p), grad: [d1 * w.grad[0], d1 * w.grad[1]], hess: w.hess.scale(d1).add(&gg.scale(d2)) })
    }

    /// `D^2(v0^alpha)` (or `D^2 log v0`), which is exactly `D^2 w~`.
    pub fn power_hessian(&self, x: f64, y: f64) -> Option<Sym2> {
        self.w_tilde(x, y).filter(|w| self.params.alpha == 0.0 || w.v > 0.0).map(|w| w.hess)
    }

    /// `w~(0)`; equals 1 for alpha > 0 and `c + 1` for alpha = 0.
    pub fn w_at_origin(&self) -> f64 {
        self.w_tilde(0.0, 0.0).expect("origin is inside").v
    }

    pub fn support(&self) -> Rect {
        Rect::new(-self.rho, self.rho, -self.rho, self.rho)
    }
}

fn into_datum(c: InteriorConstruction) -> InitialDatum {
    let support = c.support();
    InitialDatum::new(c.params, support, DatumSource::Interior(Box::new(c)))
}

/// The interior breaking datum for `params.alpha` (not 1/2).
pub fn build_interior_datum(params: &PmeParams) -> Result<InitialDatum> {
    let local = build_local_w(params)?;
    Ok(into_datum(InteriorConstruction::assemble(*params, Some(local.case), local.param, local.polynomial, local.rho)?))
}

/// The same assembly for alpha = 1/2, built on the linear-case polynomial with parameter `a`.
pub fn build_control_datum(m: f64, a: f64) -> Result<InitialDatum> {
    let params = PmeParams::planar(m, 0.5)?;
    let polynomial = linear_case_polynomial(a);
    let local_rho = local_radius(&polynomial)?;
    Ok(into_datum(InteriorConstruction::assemble(params, None, a, polynomial, local_rho)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_hessian_of_quadratic() {
        let (v, g, h) = radial_derivatives(Dual2::var(0.5) * Dual2::var(0.5), 0.3, 0.4);
        assert!((v - 0.25).abs() < 1e-15);
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        assert!((h.a11 - 2.0).abs() < 1e-14 && h.a12.abs() < 1e-14 && (h.a22 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn local_w_anchors() {
        let lw = build_local_w(&PmeParams::planar(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(lw.param, 9.0);
        assert_eq!(hessian_of(&lw.polynomial, 0.0, 0.0), Sym2::diag(0.0, -2.0));
        assert!(build_local_w(&PmeParams::planar(2.0, 0.5).unwrap()).is_err());
    }

    #[test]
    fn determinant_leading_terms() {
        let lw = build_local_w(&PmeParams::planar(2.0, 0.25).unwrap()).unwrap();
        let e = 1e-4;
        let d = |x: f64, y: f64| hessian_of(&lw.polynomial, x, y).det();
        assert!((d(e, 0.0) / (e * e) - 24.0).abs() < 1e-2);
        assert!((d(0.0, e) / (e * e) - 4.0).abs() < 1e-2);
        let lw = build_local_w(&PmeParams::planar(2.0, 0.75).unwrap()).unwrap();
        assert_eq!(lw.param, 2.0);
        let d = |x: f64, y: f64| hessian_of(&lw.polynomial, x, y).det();
        assert!((d(e, 0.0) / (e * e) - 2.0).abs() < 1e-2);
        assert!((d(0.0, e) / (e * e) - 4.0).abs() < 1e-2);
    }
}
