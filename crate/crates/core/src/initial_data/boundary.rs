use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sources::{DatumSource, PointDerivatives, Rect};
use super::InitialDatum;
use crate::concavity_monitor::Sym2;
use crate::error::{PmeError, Result};
use crate::params::PmeParams;
use crate::scalar::Dual2;

const KAPPA: f64 = 100.0;
const HEIGHT: f64 = 0.75;
const SLOPE_MARGIN: f64 = 1e-3;
const CONCAVITY_TOL: f64 = 1e-8;
/// Offset of the outer measurement lines `x = -L, 0, L` on the flat bottom.
pub const DEFECT_HALF_SPAN: f64 = 0.8;

/// `v0 = D(x, y) (x + x0)^p` on `Omega = {D > 0}`, where
/// `D = 1 - E(x) - (y/H - 1)^2` and `E(x) = kappa zeta(|x| - 1)`, `zeta(s) = s exp(-1/s)`.
///
/// `E` vanishes on `[-1, 1]`, so the bottom of `Omega` contains the segment
/// `[-1, 1] x {0}` and `dv0/dy(x, 0) = (2/H)(x + x0)^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConstruction {
    pub alpha: f64,
    pub kappa: f64,
    pub height: f64,
    pub exponent: f64,
    pub shift: f64,
    /// Half-width of `Omega`.
    pub x_extent: f64,
    pub certificate: BoundaryCertificate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCertificate {
    pub flat_segment: bool,
    pub convex_domain: bool,
    /// Largest `lambda1(v D^2 v - (1-alpha) grad v grad v^T)` relative to the local scale.
    pub max_scaled_lambda1: f64,
    pub concavity_samples: usize,
    pub min_boundary_gradient: f64,
    pub min_slope: f64,
    /// Smallest second difference of the bottom slope divided by `h^2`.
    pub min_slope_curvature: f64,
    /// `(S_-, S_0, S_+)` at `x = -L, 0, L`.
    pub slopes: [f64; 3],
    /// `(S_- + S_+)/2 - S_0`.
    pub midpoint_margin: f64,
    pub failing: Option<String>,
}

impl BoundaryCertificate {
    pub fn passes(&self) -> bool {
        self.failing.is_none()
    }
}

fn zeta(s: Dual2) -> Dual2 {
    if s.v <= 0.0 {
        Dual2::cst(0.0)
    } else {
        s * (-s.recip()).exp()
    }
}

impl BoundaryConstruction {
    pub fn new(alpha: f64, kappa: f64, height: f64, exponent: f64, shift: f64) -> Self {
        let (mut lo, mut hi) = (1.0, 2.0);
        while kappa * zeta(Dual2::cst(hi - 1.0)).v < 1.0 {
            hi += 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if kappa * zeta(Dual2::cst(mid - 1.0)).v < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut c = BoundaryConstruction { alpha, kappa, height, exponent, shift, x_extent: hi, certificate: BoundaryCertificate::default() };
        c.certificate = c.certify();
        c
    }

    /// `(E, E', E'')` at `x`.
    fn shaping(&self, x: f64) -> Dual2 {
        let z = zeta(Dual2::var(x.abs() - 1.0));
        Dual2 { v: self.kappa * z.v, d: self.kappa * z.d * x.signum(), dd: self.kappa * z.dd }
    }

    fn defining(&self, x: f64, y: f64) -> PointDerivatives {
        let e = self.shaping(x);
        let h = self.height;
        let z = y / h - 1.0;
        PointDerivatives { v: 1.0 - e.v - z * z, grad: [-e.d, -2.0 * z / h], hess: Sym2::diag(-e.dd, -2.0 / (h * h)) }
    }

    pub fn inside(&self, x: f64, y: f64) -> bool {
        x.abs() < self.x_extent && self.defining(x, y).v > 0.0
    }

    pub fn pressure(&self, x: f64, y: f64) -> f64 {
        if x.abs() >= self.x_extent {
            return 0.0;
        }
        let d = self.defining(x, y).v;
        if d > 0.0 {
            d * (x + self.shift).powf(self.exponent)
        } else {
            0.0
        }
    }

    pub fn derivatives(&self, x: f64, y: f64) -> Option<PointDerivatives> {
        if !self.inside(x, y) {
            return Some(PointDerivatives::zero());
        }
        let d = self.defining(x, y);
        let g = Dual2::var(x + self.shift).powf(self.exponent);
        let grad = [d.grad[0] * g.v + d.v * g.d, d.grad[1] * g.v];
        let hess = Sym2::new(d.hess.a11 * g.v + 2.0 * d.grad[0] * g.d + d.v * g.dd, d.grad[1] * g.d, d.hess.a22 * g.v);
        Some(PointDerivatives { v: d.v * g.v, grad, hess })
    }

    /// `dv0/dy` on the flat bottom.
    pub fn bottom_slope(&self, x: f64) -> f64 {
        2.0 / self.height * (x + self.shift).powf(self.exponent)
    }

    pub fn support(&self) -> Rect {
        Rect::new(-self.x_extent, self.x_extent, 0.0, 2.0 * self.height)
    }

    /// Point of the boundary on the ray from `(0, H)` in direction `theta`.
    pub fn boundary_point(&self, theta: f64) -> [f64; 2] {
        let (c, s) = (theta.cos(), theta.sin());
        let at = |t: f64| [t * c, self.height + t * s];
        let (mut lo, mut hi) = (0.0, self.x_extent.hypot(self.height) * 1.01);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let p = at(mid);
            if self.inside(p[0], p[1]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(lo)
    }

    fn certify(&self) -> BoundaryCertificate {
        let mut cert = BoundaryCertificate::default();
        let n = 2000;
        let xs: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        cert.flat_segment = xs.iter().all(|&x| self.defining(x, 0.0).v == 0.0);
        cert.convex_domain = (0..=n).all(|i| {
            let x = self.x_extent * i as f64 / n as f64;
            let e = self.shaping(x);
            e.d >= 0.0 && e.dd >= 0.0
        });

        let grid = 300;
        let b = self.support();
        let (worst, count) = (0..=grid)
            .into_par_iter()
            .map(|j| {
                let y = b.y0 + b.height() * j as f64 / grid as f64;
                let mut worst = f64::NEG_INFINITY;
                let mut count = 0usize;
                for i in 0..=grid {
                    let x = b.x0 + b.width() * i as f64 / grid as f64;
                    if !self.inside(x, y) {
                        continue;
                    }
                    let d = self.derivatives(x, y).expect("analytic");
                    let mat = d.concavity_matrix(self.alpha);
                    let scale = d.v * d.hess.max_abs() + d.grad[0].powi(2) + d.grad[1].powi(2);
                    worst = worst.max(mat.lambda1() / scale);
                    count += 1;
                }
                (worst, count)
            })
            .reduce(|| (f64::NEG_INFINITY, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
        cert.max_scaled_lambda1 = worst;
        cert.concavity_samples = count;

        cert.min_boundary_gradient = (0..4000)
            .into_par_iter()
            .map(|k| {
                let p = self.boundary_point(std::f64::consts::TAU * k as f64 / 4000.0);
                let d = self.defining(p[0], p[1]);
                d.grad_norm() * (p[0] + self.shift).powf(self.exponent)
            })
            .reduce(|| f64::INFINITY, f64::min);

        let h = xs[1] - xs[0];
        let s: Vec<f64> = xs.iter().map(|&x| self.bottom_slope(x)).collect();
        cert.min_slope = s.iter().copied().fold(f64::INFINITY, f64::min);
        cert.min_slope_curvature = s.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]) / (h * h)).fold(f64::INFINITY, f64::min);
        cert.slopes = [self.bottom_slope(-DEFECT_HALF_SPAN), self.bottom_slope(0.0), self.bottom_slope(DEFECT_HALF_SPAN)];
        cert.midpoint_margin = 0.5 * (cert.slopes[0] + cert.slopes[2]) - cert.slopes[1];

        cert.failing = if !cert.flat_segment {
            Some("flat segment".into())
        } else if !cert.convex_domain {
            Some("convex domain".into())
        } else if cert.max_scaled_lambda1 > CONCAVITY_TOL {
            Some(format!("alpha-concavity (scaled lambda1 {:e})", cert.max_scaled_lambda1))
        } else if cert.min_boundary_gradient <= 0.0 {
            Some("nonvanishing boundary gradient".into())
        } else if cert.min_slope <= 0.0 || cert.min_slope_curvature < SLOPE_MARGIN || cert.midpoint_margin <= 0.0 {
            Some("positive strongly convex bottom slope".into())
        } else {
            None
        };
        cert
    }
}

/// Searches a small family of exponents and shifts for the datum with the
/// largest midpoint margin relative to the fastest slope that passes every check.
pub fn build_boundary_datum(alpha: f64) -> Result<InitialDatum> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(PmeError::InvalidParameter(format!("boundary datum needs alpha in [0, 1/2), got {alpha}")));
    }
    let params = PmeParams::planar(2.0, alpha)?;
    let top = if alpha == 0.0 { 3.0 } else { ((1.0 - alpha) / alpha).min(3.0) };
    let extent = BoundaryConstruction::new(alpha, KAPPA, HEIGHT, 2.0, 2.0).x_extent;
    let mut best: Option<(f64, BoundaryConstruction)> = None;
    let mut last_failure = String::from("no candidate exponent above 1");
    for f in [1.0, 0.8, 0.6] {
        let p = top * f;
        if p <= 1.0 {
            continue;
        }
        for dx in [0.05, 0.1, 0.25, 0.5] {
            let c = BoundaryConstruction::new(alpha, KAPPA, HEIGHT, p, extent + dx);
            match &c.certificate.failing {
                Some(why) => last_failure = why.clone(),
                None => {
                    let score = c.certificate.midpoint_margin / c.certificate.slopes[2];
                    if best.as_ref().is_none_or(|(s, _)| score > *s) {
                        best = Some((score, c));
                    }
                }
            }
        }
    }
    let (_, c) = best.ok_or_else(|| PmeError::Construction(format!("boundary datum search failed: {last_failure}")))?;
    Ok(InitialDatum::new(params, c.support(), DatumSource::Boundary(c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extent_solves_shaping_equation() {
        let c = BoundaryConstruction::new(0.25, KAPPA, HEIGHT, 2.0, 2.0);
        let x = c.x_extent;
        assert!((KAPPA * (x - 1.0) * (-1.0 / (x - 1.0)).exp() - 1.0).abs() < 1e-12);
        assert_eq!(c.pressure(0.0, 0.0), 0.0);
        assert!(c.pressure(0.0, 0.1) > 0.0);
    }

    #[test]
    fn boundary_points_lie_on_zero_set() {
        let c = BoundaryConstruction::new(0.25, KAPPA, HEIGHT, 2.0, 2.0);
        for k in 0..17 {
            let p = c.boundary_point(0.37 * k as f64);
            assert!(c.defining(p[0], p[1]).v.abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_large_alpha() {
        assert!(build_boundary_datum(0.5).is_err());
        assert!(build_boundary_datum(0.75).is_err());
    }
}
