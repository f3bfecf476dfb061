use serde::{Deserialize, Serialize};

use super::residual::{SpaceTimeField, SpaceTimeJet};

/// Planar front `c (c t - x1)_+`, exact for every `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravelingWave {
    pub speed: f64,
}

pub fn traveling_wave_eval(x: &[f64], t: f64, c: f64) -> f64 {
    (c * (c * t - x[0])).max(0.0)
}

impl TravelingWave {
    pub fn front(&self, t: f64) -> f64 {
        self.speed * t
    }
}

impl SpaceTimeField for TravelingWave {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64], t: f64) -> f64 {
        traveling_wave_eval(x, t, self.speed)
    }
    fn jet(&self, x: &[f64], t: f64) -> Option<SpaceTimeJet> {
        let v = self.value(x, t);
        if v <= 0.0 {
            return None;
        }
        let c = self.speed;
        let mut grad = vec![0.0; x.len()];
        grad[0] = -c;
        Some(SpaceTimeJet { v, vt: c * c, grad, laplacian: 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(traveling_wave_eval(&[-1.0, 0.3], 0.0, 1.0), 1.0);
        assert_eq!(traveling_wave_eval(&[2.0, 0.0], 1.0, 1.5), 0.0);
    }
}
