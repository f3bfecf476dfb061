use serde::{Deserialize, Serialize};

use super::stepper::neumaier;
use super::{MassLedger, SolverConfig, NEGATIVE_TOL};
use crate::error::{PmeError, Result};

/// Cells `[i dr, (i+1) dr]`, `i < cells`, in `n`-dimensional radial symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub cells: usize,
    pub dr: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(cells: usize, r_max: f64, n: usize) -> Result<Self> {
        if cells < super::MIN_NODES || !(r_max > 0.0) || n == 0 {
            return Err(PmeError::InvalidParameter(format!("bad radial grid: {cells} cells on [0, {r_max}] in dimension {n}")));
        }
        Ok(RadialGrid { cells, dr: r_max / cells as f64, n })
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    pub fn face(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    /// Exact shell volume per unit solid angle, `(r_+^n - r_-^n)/n`.
    pub fn volume(&self, i: usize) -> f64 {
        let n = self.n as i32;
        (self.face(i + 1).powi(n) - self.face(i).powi(n)) / self.n as f64
    }

    pub fn area(&self, i: usize) -> f64 {
        self.face(i).powi(self.n as i32 - 1)
    }
}

#[derive(Clone, Debug)]
pub struct RadialTrajectory {
    pub grid: RadialGrid,
    pub m: f64,
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
    /// Mass per unit solid angle.
    pub mass: MassLedger,
    pub steps: usize,
}

impl RadialTrajectory {
    pub fn pressure(&self, k: usize) -> Vec<f64> {
        self.densities[k].iter().map(|u| self.m / (self.m - 1.0) * u.max(0.0).powf(self.m - 1.0)).collect()
    }
}

/// Finite volumes for `u_t = r^(1-n) (r^(n-1) (u^m)_r)_r` with zero density
/// beyond the last cell.
pub fn evolve_radial(pressure: impl Fn(f64) -> f64, m: f64, grid: &RadialGrid, t_final: f64, cfg: &SolverConfig) -> Result<RadialTrajectory> {
    cfg.validate()?;
    if !(m > 1.0) {
        return Err(PmeError::InvalidParameter(format!("m must exceed 1, got {m}")));
    }
    if !(t_final > 0.0) {
        return Err(PmeError::InvalidParameter("final time must be positive".into()));
    }
    let outputs = cfg.output.times(t_final)?;
    let g = *grid;
    let nc = g.cells;
    let mut u: Vec<f64> = (0..nc).map(|i| ((m - 1.0) / m * pressure(g.center(i)).max(0.0)).powf(1.0 / (m - 1.0))).collect();
    let vol: Vec<f64> = (0..nc).map(|i| g.volume(i)).collect();
    let coef: Vec<f64> = (0..=nc).map(|i| g.area(i) / g.dr).collect();
    let worst = (0..nc).map(|i| (coef[i] + coef[i + 1]) / vol[i]).fold(0.0f64, f64::max);
    let mass_of = |u: &[f64]| neumaier(u.iter().zip(&vol).map(|(a, b)| a * b));
    let initial = mass_of(&u);
    let mut mass = MassLedger { initial, samples: vec![(0.0, initial)], max_drift: 0.0 };
    let mut times = vec![0.0];
    let mut densities = vec![u.clone()];
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut p = vec![0.0; nc + 1];
    for &target in &outputs {
        while t < target {
            let rate = u.iter().fold(0.0f64, |a, &x| a.max(x.powf(m - 1.0)));
            let mut dt = if rate > 0.0 { cfg.sigma / (worst * m * rate) } else { f64::INFINITY };
            dt = dt.min(target - t);
            if t + dt >= target - 1e-12 * target {
                dt = target - t;
            }
            for i in 0..nc {
                p[i] = if m == 2.0 { u[i] * u[i] } else { u[i].powf(m) };
            }
            p[nc] = 0.0;
            let mut flux_in = 0.0;
            for i in 0..nc {
                let flux_out = coef[i + 1] * (p[i + 1] - p[i]);
                u[i] += dt * (flux_out - flux_in) / vol[i];
                flux_in = flux_out;
                if !(u[i] >= -NEGATIVE_TOL) {
                    return Err(PmeError::Instability(format!("radial density {} at r = {}", u[i], g.center(i))));
                }
            }
            t += dt;
            steps += 1;
            if cfg.mass_every_step {
                let mm = mass_of(&u);
                mass.samples.push((t, mm));
                mass.max_drift = mass.max_drift.max((mm - initial).abs());
            }
        }
        t = target;
        if !cfg.mass_every_step {
            let mm = mass_of(&u);
            mass.samples.push((t, mm));
            mass.max_drift = mass.max_drift.max((mm - initial).abs());
        }
        times.push(t);
        densities.push(u.clone());
    }
    Ok(RadialTrajectory { grid: g, m, times, densities, mass, steps })
}
