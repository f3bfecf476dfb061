use serde::{Deserialize, Serialize};

use super::residual::{SpaceTimeField, SpaceTimeJet};
use crate::error::{PmeError, Result};

/// Barenblatt pressure `t^{-beta(m-1)} (A - beta/(2n) t^{-2 beta/n} |x|^2)_+`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarenblattParams {
    pub amplitude: f64,
    pub m: f64,
    pub n: usize,
    pub beta: f64,
}

/// `beta = n / (n (m - 1) + 2)`.
pub fn beta(m: f64, n: usize) -> f64 {
    let n = n as f64;
    n / (n * (m - 1.0) + 2.0)
}

/// Residual of `beta (m-1) + 2 beta / n = 1`.
pub fn beta_identity_defect(m: f64, n: usize) -> f64 {
    let b = beta(m, n);
    b * (m - 1.0) + 2.0 * b / n as f64 - 1.0
}

impl BarenblattParams {
    pub fn new(amplitude: f64, m: f64, n: usize) -> Result<Self> {
        if !(amplitude > 0.0) || !(m > 1.0) || n == 0 {
            return Err(PmeError::InvalidParameter(format!("Barenblatt needs A > 0, m > 1, n >= 1 (A={amplitude}, m={m}, n={n})")));
        }
        let p = BarenblattParams { amplitude, m, n, beta: beta(m, n) };
        p.check_identity()?;
        Ok(p)
    }

    /// Verifies the exponent identity for the stored `beta`.
    pub fn check_identity(&self) -> Result<()> {
        let d = self.beta * (self.m - 1.0) + 2.0 * self.beta / self.n as f64 - 1.0;
        if d.abs() > 8.0 * f64::EPSILON {
            return Err(PmeError::InvalidParameter(format!("beta identity violated by {d:e}")));
        }
        Ok(())
    }

    fn k(&self) -> f64 {
        self.beta / (2.0 * self.n as f64)
    }

    /// Support radius `(2 n A / beta)^{1/2} t^{beta/n}`.
    pub fn radius(&self, t: f64) -> f64 {
        (self.amplitude / self.k()).sqrt() * t.powf(self.beta / self.n as f64)
    }

    /// Limit of `|grad b|` at the free boundary: `(beta/n) R(t) / t`.
    pub fn boundary_slope(&self, t: f64) -> f64 {
        self.beta / self.n as f64 * self.radius(t) / t
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(PmeError::Domain(format!("Barenblatt needs t > 0, got {t}")));
        }
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let inner = self.amplitude - self.k() * t.powf(-2.0 * self.beta / self.n as f64) * r2;
        Ok(if inner > 0.0 { t.powf(-self.beta * (self.m - 1.0)) * inner } else { 0.0 })
    }

    /// Exact planar mass of the density `((m-1) v / m)^{1/(m-1)}`; time independent.
    pub fn mass_2d(&self) -> f64 {
        let q = 1.0 / (self.m - 1.0);
        let c = ((self.m - 1.0) / self.m).powf(q);
        c * std::f64::consts::PI * self.amplitude.powf(q + 1.0) / (self.k() * (q + 1.0))
    }
}

pub fn barenblatt_eval(x: &[f64], t: f64, bp: &BarenblattParams) -> Result<f64> {
    bp.eval(x, t)
}

/// Parameters whose support at `t0` has radius `r` and boundary slope `s`.
pub fn barenblatt_match(s: f64, r: f64, m: f64, n: usize) -> Result<(BarenblattParams, f64)> {
    if !(s > 0.0 && r > 0.0) {
        return Err(PmeError::InvalidParameter(format!("slope and radius must be positive ({s}, {r})")));
    }
    let b = beta(m, n);
    let nf = n as f64;
    let t0 = b * r / (s * nf);
    let amplitude = b / (2.0 * nf) * t0.powf(-2.0 * b / nf) * r * r;
    Ok((BarenblattParams::new(amplitude, m, n)?, t0))
}

impl SpaceTimeField for BarenblattParams {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64], t: f64) -> f64 {
        self.eval(x, t).unwrap_or(0.0)
    }
    fn jet(&self, x: &[f64], t: f64) -> Option<SpaceTimeJet> {
        let v = self.eval(x, t).ok()?;
        if v <= 0.0 {
            return None;
        }
        let nf = self.n as f64;
        let e1 = -self.beta * (self.m - 1.0);
        let e2 = -2.0 * self.beta / nf;
        let k = self.k();
        let r2: f64 = x.iter().map(|c| c * c).sum();
        // v = A t^{e1} - k r^2 t^{e1+e2}
        let vt = self.amplitude * e1 * t.powf(e1 - 1.0) - k * r2 * (e1 + e2) * t.powf(e1 + e2 - 1.0);
        let g = -2.0 * k * t.powf(e1 + e2);
        Some(SpaceTimeJet { v, vt, grad: x.iter().map(|c| g * c).collect(), laplacian: g * nf })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        let b = BarenblattParams::new(1.0, 2.0, 2).unwrap();
        assert_eq!(b.eval(&[0.0, 0.0], 1.0).unwrap(), 1.0);
        let b = BarenblattParams::new(0.25, 2.0, 2).unwrap();
        assert!((b.eval(&[0.0, 0.0], 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(b.eval(&[3.0, 0.0], 0.25).unwrap(), 0.0);
        assert!(b.eval(&[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn matching_examples() {
        let (b, t0) = barenblatt_match(1.0, 1.0, 2.0, 2).unwrap();
        assert!((t0 - 0.25).abs() < 1e-15 && (b.amplitude - 0.25).abs() < 1e-15);
        let (b, t0) = barenblatt_match(2.0, 1.0, 2.0, 2).unwrap();
        assert!((t0 - 0.125).abs() < 1e-15);
        assert!((b.amplitude - 0.125f64.powf(-0.5) / 8.0).abs() < 1e-14);
        let (b, t0) = barenblatt_match(1.0, 1.0, 2.0, 1).unwrap();
        assert!((b.beta - 1.0 / 3.0).abs() < 1e-15 && (t0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.amplitude - (1.0 / 3.0f64).powf(-2.0 / 3.0) / 6.0).abs() < 1e-14);
    }

    #[test]
    fn radius_formula_for_quarter_amplitude() {
        let b = BarenblattParams::new(0.25, 2.0, 2).unwrap();
        assert!((b.radius(0.25) - 1.0).abs() < 1e-14);
        assert!((b.radius(1.0) - 2f64.sqrt()).abs() < 1e-14);
    }
}
