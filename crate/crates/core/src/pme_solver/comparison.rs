use serde::{Deserialize, Serialize};

use super::{Grid2D, SolverConfig, Stepper};
use crate::error::{PmeError, Result};
use crate::initial_data::InitialDatum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `min (u_B - u_A)` over every node and every step, `t = 0` included.
    pub min_gap: f64,
    pub time_of_min: f64,
    pub location: [f64; 2],
    pub steps: usize,
    pub tolerance: f64,
    pub passes: bool,
}

/// Evolves both data with a common time step and tracks the smallest density gap.
pub fn comparison_check(a: &InitialDatum, b: &InitialDatum, grid: &Grid2D, t_final: f64, cfg: &SolverConfig, tol: f64) -> Result<ComparisonReport> {
    if a.params != b.params {
        return Err(PmeError::InvalidParameter("compared data must share parameters".into()));
    }
    let mut sa = Stepper::new(a, grid, cfg)?;
    let mut sb = Stepper::new(b, grid, cfg)?;
    let gap = |sa: &Stepper, sb: &Stepper| {
        let (ba, da, bb, db) = (sa.base(), sa.increment(), sb.base(), sb.increment());
        (0..ba.len())
            .map(|k| ((bb[k] - ba[k]) + (db[k] - da[k]), k))
            .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc })
    };
    let (mut min_gap, mut node) = gap(&sa, &sb);
    let mut time_of_min = 0.0;
    while sa.t < t_final {
        let mut dt = sa.stable_dt().min(sb.stable_dt()).min(t_final - sa.t);
        if sa.t + dt >= t_final - 1e-12 * t_final {
            dt = t_final - sa.t;
        }
        sa.step(dt)?;
        sb.step(dt)?;
        let (g, k) = gap(&sa, &sb);
        if g < min_gap {
            min_gap = g;
            node = k;
            time_of_min = sa.t;
        }
    }
    let (x, y) = grid.point(node);
    Ok(ComparisonReport { min_gap, time_of_min, location: [x, y], steps: sa.steps, tolerance: tol, passes: min_gap >= -tol })
}
