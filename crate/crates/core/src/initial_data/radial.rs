use serde::{Deserialize, Serialize};

use crate::scalar::Dual2;

/// Closed form used on the outer part of the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapRegime {
    /// `(rho - r)^alpha`
    Power,
    /// `rho^2 - r^2`, for alpha = 1
    Quadratic,
    /// `log(rho - r)`, for alpha = 0
    Logarithmic,
}

/// Radial cap `f` on `[0, rho)`: constant on `[0, rho/4]`, a quintic on
/// `[rho/4, rho/2]` joining with matching value, slope and curvature, and the
/// closed form on `[rho/2, rho)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub rho: f64,
    pub alpha: f64,
    pub regime: CapRegime,
    pub cap: f64,
    /// Coefficients in powers of `r - rho/4` on the joining segment.
    pub joining: [f64; 6],
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *xc = det(m) / d;
    }
    x
}

impl RadialProfile {
    pub fn new(alpha: f64, rho: f64) -> Self {
        let (regime, cap) = if alpha == 1.0 {
            (CapRegime::Quadratic, 7.0 * rho * rho / 8.0)
        } else if alpha == 0.0 {
            (CapRegime::Logarithmic, (rho / 2.0).ln() + 0.25)
        } else {
            (CapRegime::Power, (1.0 + alpha / 4.0) * (rho / 2.0).powf(alpha))
        };
        let mut p = RadialProfile { rho, alpha, regime, cap, joining: [0.0; 6] };
        let o = p.outer(Dual2::var(rho / 2.0));
        let l = rho / 4.0;
        let c = solve3(
            [[l.powi(3), l.powi(4), l.powi(5)], [3.0 * l * l, 4.0 * l.powi(3), 5.0 * l.powi(4)], [6.0 * l, 12.0 * l * l, 20.0 * l.powi(3)]],
            [o.v - cap, o.d, o.dd],
        );
        p.joining = [cap, 0.0, 0.0, c[0], c[1], c[2]];
        p
    }

    pub fn outer(&self, r: Dual2) -> Dual2 {
        let rho = Dual2::cst(self.rho);
        match self.regime {
            CapRegime::Power => (rho - r).powf(self.alpha),
            CapRegime::Quadratic => rho * rho - r * r,
            CapRegime::Logarithmic => (rho - r).ln(),
        }
    }

    /// `(f, f', f'')` at radius `r < rho`.
    pub fn eval(&self, r: f64) -> Dual2 {
        let q = self.rho / 4.0;
        if r <= q {
            Dual2::cst(self.cap)
        } else if r < 2.0 * q {
            let t = r - q;
            let c = &self.joining;
            let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
            for k in (0..6).rev() {
                dd = dd * t + 2.0 * d;
                d = d * t + v;
                v = v * t + c[k];
            }
            Dual2 { v, d, dd }
        } else {
            self.outer(Dual2::var(r))
        }
    }

    /// Dense-sample check of monotonicity and concavity on `[0, rho(1-eps)]`.
    pub fn certify(&self, samples: usize, eps: f64) -> ProfileCertificate {
        let mut cert = ProfileCertificate { max_slope: f64::NEG_INFINITY, max_curvature: f64::NEG_INFINITY, outer_bound: 0.0, samples };
        let top = self.rho * (1.0 - eps);
        for k in 0..=samples {
            let r = top * k as f64 / samples as f64;
            let f = self.eval(r);
            cert.max_slope = cert.max_slope.max(f.d);
            cert.max_curvature = cert.max_curvature.max(f.dd);
            if r >= self.rho / 2.0 {
                cert.outer_bound = cert.outer_bound.max(-1.0 / f.d).max(-1.0 / f.dd);
            }
        }
        cert
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCertificate {
    pub max_slope: f64,
    pub max_curvature: f64,
    /// `C` with `f' <= -1/C` and `f'' <= -1/C` on the outer segment.
    pub outer_bound: f64,
    pub samples: usize,
}

impl ProfileCertificate {
    pub fn is_concave_nonincreasing(&self, tol: f64) -> bool {
        self.max_slope <= tol && self.max_curvature <= tol
    }
}

/// Smooth radial cutoff, 1 on `[0, rho/2]`, 0 beyond `3 rho/4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub rho: f64,
}

fn flat(z: Dual2) -> Dual2 {
    if z.v <= 0.0 {
        Dual2::cst(0.0)
    } else {
        (-z.recip()).exp()
    }
}

impl Cutoff {
    pub fn eval(&self, r: f64) -> Dual2 {
        let s = (Dual2::var(r) - Dual2::cst(self.rho / 2.0)) * (4.0 / self.rho);
        if s.v <= 0.0 {
            return Dual2::cst(1.0);
        }
        if s.v >= 1.0 {
            return Dual2::cst(0.0);
        }
        let g0 = flat(s);
        let g1 = flat(Dual2::cst(1.0) - s);
        Dual2::cst(1.0) - g0 / (g0 + g1)
    }

    /// Sampled bound on `|D psi| + |D^2 psi|` in the plane.
    pub fn derivative_bound(&self, samples: usize) -> f64 {
        let mut c: f64 = 0.0;
        for k in 0..=samples {
            let r = self.rho * (0.5 + 0.25 * k as f64 / samples as f64);
            let p = self.eval(r);
            c = c.max(p.d.abs() + p.dd.abs().max((p.d / r).abs()));
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps() {
        let p = RadialProfile::new(0.25, 1.0);
        assert!((p.cap - 1.0625 * 0.5f64.powf(0.25)).abs() < 1e-15);
        let q = RadialProfile::new(1.0, 1.0);
        assert_eq!(q.cap, 0.875);
        assert!((q.eval(0.5).v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn joining_segment_is_c2() {
        for &al in &[0.0, 0.1, 0.25, 0.4, 0.5, 0.75, 0.9, 1.0] {
            let p = RadialProfile::new(al, 0.8);
            let e = 1e-12;
            let left = p.eval(0.4 - e);
            let right = p.outer(Dual2::var(0.4));
            assert!((left.v - right.v).abs() < 1e-9 && (left.d - right.d).abs() < 1e-8 && (left.dd - right.dd).abs() < 1e-6, "{al}");
            let inner = p.eval(0.2 + e);
            assert!((inner.v - p.cap).abs() < 1e-9 && inner.d.abs() < 1e-9);
        }
    }

    #[test]
    fn concave_and_decreasing() {
        for &al in &[0.0, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0] {
            let c = RadialProfile::new(al, 0.3).certify(20_000, 1e-6);
            assert!(c.is_concave_nonincreasing(1e-12), "{al} {c:?}");
            assert!(c.outer_bound.is_finite() && c.outer_bound > 0.0);
        }
    }

    #[test]
    fn cutoff_limits() {
        let c = Cutoff { rho: 1.0 };
        assert_eq!(c.eval(0.3).v, 1.0);
        assert_eq!(c.eval(0.8).v, 0.0);
        let m = c.eval(0.625);
        assert!((m.v - 0.5).abs() < 1e-14 && m.d < 0.0);
        assert!(c.derivative_bound(2000).is_finite());
    }
}
