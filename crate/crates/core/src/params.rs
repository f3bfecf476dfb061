use serde::{Deserialize, Serialize};

use crate::error::{PmeError, Result};

/// Exponent `m`, dimension `n` and concavity index `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmeParams {
    pub m: f64,
    pub n: usize,
    pub alpha: f64,
}

impl PmeParams {
    pub fn new(m: f64, n: usize, alpha: f64) -> Result<Self> {
        let p = PmeParams { m, n, alpha };
        p.validate()?;
        Ok(p)
    }

    /// Planar parameters, the setting of every concavity experiment.
    pub fn planar(m: f64, alpha: f64) -> Result<Self> {
        Self::new(m, 2, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0) || !self.m.is_finite() {
            return Err(PmeError::InvalidParameter(format!("m must be > 1, got {}", self.m)));
        }
        if !(1..=2).contains(&self.n) {
            return Err(PmeError::InvalidParameter(format!("n must be 1 or 2, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(PmeError::InvalidParameter(format!("alpha must lie in [0,1], got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn is_half(&self) -> bool {
        self.alpha == 0.5
    }

    /// Density from pressure: u = ((m-1) v / m)^(1/(m-1)).
    pub fn density(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else {
            ((self.m - 1.0) * v / self.m).powf(1.0 / (self.m - 1.0))
        }
    }

    /// Pressure from density: v = m/(m-1) u^(m-1).
    pub fn pressure(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            self.m / (self.m - 1.0) * u.powf(self.m - 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(PmeParams::new(1.0, 2, 0.3).is_err());
        assert!(PmeParams::new(2.0, 3, 0.3).is_err());
        assert!(PmeParams::new(2.0, 2, 1.2).is_err());
        assert!(PmeParams::new(2.0, 2, 0.5).is_ok());
    }

    #[test]
    fn density_pressure_roundtrip() {
        let p = PmeParams::new(3.0, 2, 0.0).unwrap();
        let u = 0.37;
        assert!((p.density(p.pressure(u)) - u).abs() < 1e-15);
    }
}
