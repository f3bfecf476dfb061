use serde::{Deserialize, Serialize};

use super::{BoundaryConstruction, InteriorConstruction};
use crate::analytic::BarenblattParams;
use crate::concavity_monitor::Sym2;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn centered(c: [f64; 2], half_width: f64, half_height: f64) -> Self {
        Rect::new(c[0] - half_width, c[0] + half_width, c[1] - half_height, c[1] + half_height)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(self.x0.min(o.x0), self.x1.max(o.x1), self.y0.min(o.y0), self.y1.max(o.y1))
    }

    pub fn padded(&self, pad: f64) -> Rect {
        Rect::new(self.x0 - pad, self.x1 + pad, self.y0 - pad, self.y1 + pad)
    }
}

/// Value, gradient and Hessian of a pressure field at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointDerivatives {
    pub v: f64,
    pub grad: [f64; 2],
    pub hess: Sym2,
}

impl PointDerivatives {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add(&self, o: &Self) -> Self {
        PointDerivatives { v: self.v + o.v, grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]], hess: self.hess.add(&o.hess) }
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad[0].hypot(self.grad[1])
    }

    /// `v D^2 v - (1 - alpha) grad v (x) grad v`.
    pub fn concavity_matrix(&self, alpha: f64) -> Sym2 {
        self.hess.scale(self.v).add(&Sym2::outer(self.grad).scale(alpha - 1.0))
    }

    /// `D^2(v^alpha)`, or `D^2 log v` when alpha = 0. Requires `v > 0`.
    pub fn power_hessian(&self, alpha: f64) -> Sym2 {
        let v = self.v;
        if alpha == 0.0 {
            self.hess.scale(1.0 / v).add(&Sym2::outer(self.grad).scale(-1.0 / (v * v)))
        } else {
            let a = alpha * v.powf(alpha - 2.0);
            self.hess.scale(a * v).add(&Sym2::outer(self.grad).scale(a * (alpha - 1.0)))
        }
    }
}

/// The formula behind an [`InitialDatum`](super::InitialDatum).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumSource {
    Zero,
    Interior(Box<InteriorConstruction>),
    Boundary(BoundaryConstruction),
    /// Barenblatt pressure at time `t`.
    Barenblatt { params: BarenblattParams, t: f64 },
    /// `c (c t - x)_+`
    TravelingWave { speed: f64, t: f64 },
    /// `amplitude (1 - X^2 - Y^2)_+ (1 + tilt X)` in coordinates scaled by the semi-axes.
    Cap { center: [f64; 2], semi_axes: [f64; 2], amplitude: f64, tilt: f64 },
    /// `height exp(-|x - c|^2 / width^2)`; not compactly supported.
    Gaussian { center: [f64; 2], width: f64, height: f64 },
    /// `height exp(1 - 1/(1 - |x - c|^2/radius^2))` inside the ball, 0 outside.
    Bump { center: [f64; 2], radius: f64, height: f64 },
    Sum(Vec<DatumSource>),
}

impl DatumSource {
    pub fn pressure(&self, x: f64, y: f64) -> f64 {
        match self {
            DatumSource::Zero => 0.0,
            DatumSource::Interior(c) => c.pressure(x, y),
            DatumSource::Boundary(b) => b.pressure(x, y),
            DatumSource::Barenblatt { params, t } => params.eval(&[x, y], *t).unwrap_or(0.0),
            DatumSource::TravelingWave { speed, t } => speed * (speed * t - x).max(0.0),
            DatumSource::Sum(parts) => parts.iter().map(|p| p.pressure(x, y)).sum(),
            _ => self.derivatives(x, y).map_or(0.0, |d| d.v),
        }
    }

    pub fn derivatives(&self, x: f64, y: f64) -> Option<PointDerivatives> {
        let zero = Some(PointDerivatives::zero());
        match self {
            DatumSource::Zero => zero,
            DatumSource::Interior(c) => c.derivatives(x, y),
            DatumSource::Boundary(b) => b.derivatives(x, y),
            DatumSource::Barenblatt { params, t } => {
                let v = params.eval(&[x, y], *t).ok()?;
                if v <= 0.0 {
                    return zero;
                }
                let n = params.n as f64;
                let s = -2.0 * t.powf(-params.beta * (params.m - 1.0)) * (params.beta / (2.0 * n)) * t.powf(-2.0 * params.beta / n);
                Some(PointDerivatives { v, grad: [s * x, s * y], hess: Sym2::diag(s, s) })
            }
            DatumSource::TravelingWave { speed, t } => {
                let v = speed * (speed * t - x);
                if v <= 0.0 {
                    return zero;
                }
                Some(PointDerivatives { v, grad: [-speed, 0.0], hess: Sym2::default() })
            }
            DatumSource::Cap { center, semi_axes, amplitude, tilt } => {
                let (a, b) = (semi_axes[0], semi_axes[1]);
                let (xx, yy) = ((x - center[0]) / a, (y - center[1]) / b);
                let q = 1.0 - xx * xx - yy * yy;
                if q <= 0.0 {
                    return zero;
                }
                let g = 1.0 + tilt * xx;
                let (qx, qy) = (-2.0 * xx / a, -2.0 * yy / b);
                let gx = tilt / a;
                let v = amplitude * q * g;
                let grad = [amplitude * (qx * g + q * gx), amplitude * qy * g];
                let hess = Sym2::new(
                    amplitude * (-2.0 / (a * a) * g + 2.0 * qx * gx),
                    amplitude * qy * gx,
                    amplitude * (-2.0 / (b * b) * g),
                );
                Some(PointDerivatives { v, grad, hess })
            }
            DatumSource::Gaussian { center, width, height } => {
                let d = [x - center[0], y - center[1]];
                let w2 = width * width;
                let v = height * (-(d[0] * d[0] + d[1] * d[1]) / w2).exp();
                let k = -2.0 / w2;
                let grad = [k * d[0] * v, k * d[1] * v];
                let hess = Sym2::diag(k * v, k * v).add(&Sym2::outer(d).scale(k * k * v));
                Some(PointDerivatives { v, grad, hess })
            }
            DatumSource::Bump { center, radius, height } => {
                let d = [x - center[0], y - center[1]];
                let r2 = radius * radius;
                let s = (d[0] * d[0] + d[1] * d[1]) / r2;
                if s >= 1.0 {
                    return zero;
                }
                let om = 1.0 - s;
                let phi = height * (1.0 - 1.0 / om).exp();
                let p1 = -phi / (om * om);
                let p2 = phi * (2.0 * s - 1.0) / om.powi(4);
                let gs = [2.0 * d[0] / r2, 2.0 * d[1] / r2];
                let hess = Sym2::outer(gs).scale(p2).add(&Sym2::diag(2.0 / r2, 2.0 / r2).scale(p1));
                Some(PointDerivatives { v: phi, grad: [p1 * gs[0], p1 * gs[1]], hess })
            }
            DatumSource::Sum(parts) => parts.iter().try_fold(PointDerivatives::zero(), |acc, p| p.derivatives(x, y).map(|d| acc.add(&d))),
        }
    }

    /// Exact `D^2(v^alpha)` where the construction tracks it directly.
    pub fn power_hessian(&self, x: f64, y: f64, alpha: f64) -> Option<Sym2> {
        match self {
            DatumSource::Interior(c) if c.params.alpha == alpha => c.power_hessian(x, y),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(src: &DatumSource, x: f64, y: f64) {
        let d = src.derivatives(x, y).unwrap();
        let h = 1e-4;
        let f = |a: f64, b: f64| src.pressure(a, b);
        let gx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let gy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let hxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let hyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let hxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        assert!((d.v - f(x, y)).abs() < 1e-14);
        assert!((d.grad[0] - gx).abs() < 1e-6 && (d.grad[1] - gy).abs() < 1e-6, "{src:?}");
        assert!((d.hess.a11 - hxx).abs() < 1e-4 && (d.hess.a22 - hyy).abs() < 1e-4 && (d.hess.a12 - hxy).abs() < 1e-4, "{src:?} {d:?}");
    }

    #[test]
    fn derivatives_match_differences() {
        let bp = BarenblattParams::new(0.25, 2.0, 2).unwrap();
        let srcs = [
            DatumSource::Barenblatt { params: bp, t: 0.25 },
            DatumSource::TravelingWave { speed: 1.3, t: 0.2 },
            DatumSource::Cap { center: [0.1, -0.2], semi_axes: [1.0, 0.7], amplitude: 1.5, tilt: 0.4 },
            DatumSource::Gaussian { center: [0.0, 0.3], width: 0.8, height: 2.0 },
            DatumSource::Bump { center: [0.2, 0.0], radius: 0.9, height: 0.3 },
        ];
        for s in &srcs {
            fd_check(s, 0.13, -0.07);
        }
        fd_check(&DatumSource::Sum(srcs.to_vec()), 0.13, -0.07);
    }

    #[test]
    fn gaussian_log_hessian() {
        let g = DatumSource::Gaussian { center: [0.0, 0.0], width: 1.0, height: 1.0 };
        let h = g.derivatives(0.3, 0.4).unwrap().power_hessian(0.0);
        assert!((h.a11 + 2.0).abs() < 1e-13 && (h.a22 + 2.0).abs() < 1e-13 && h.a12.abs() < 1e-13);
    }

    #[test]
    fn quadratic_cap_matrix() {
        let c = DatumSource::Cap { center: [0.0, 0.0], semi_axes: [1.0, 1.0], amplitude: 1.0, tilt: 0.0 };
        let d = c.derivatives(0.0, 0.0).unwrap();
        assert_eq!(d.power_hessian(1.0), Sym2::diag(-2.0, -2.0));
        let d = c.derivatives(0.6, 0.0).unwrap();
        assert!((d.concavity_matrix(1.0).lambda1() + 2.0 * d.v).abs() < 1e-15);
    }
}
