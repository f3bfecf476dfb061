use rayon::prelude::*;

use super::{BaseLaplacian, BoundaryCondition, Grid2D, SolverConfig, NEGATIVE_TOL};
use crate::error::{PmeError, Result};
use crate::initial_data::InitialDatum;

/// Compensated sum.
pub(crate) fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

/// `(u0 + d)^m - u0^m` without cancellation when `d` is small against `u0`.
#[inline]
pub(crate) fn power_increment(u0: f64, p0: f64, d: f64, m: f64) -> f64 {
    if m == 2.0 {
        let u = (u0 + d).max(0.0);
        return if u > 0.0 { d * (2.0 * u0 + d) } else { -p0 };
    }
    if u0 > 0.0 {
        let r = d / u0;
        // Large ratios gain nothing and can turn an underflowed p0 into 0 * inf.
        if r > -0.5 && r < 1.0 {
            return p0 * (m * r.ln_1p()).exp_m1();
        }
    }
    (u0 + d).max(0.0).powf(m) - p0
}

/// Explicit Euler state in increment form: `u = u0 + delta`, with
/// `delta' = L0 + Δ_h(u^m - u0^m)` and `L0` the base Laplacian of `u0^m`.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub grid: Grid2D,
    pub m: f64,
    pub sigma: f64,
    pub boundary: BoundaryCondition,
    pub t: f64,
    pub steps: usize,
    base: Vec<f64>,
    base_power: Vec<f64>,
    base_lap: Vec<f64>,
    delta: Vec<f64>,
    next: Vec<f64>,
    dp: Vec<f64>,
    max_rate: f64,
    base_mass: f64,
    /// Nodes where the closed-form base Laplacian was used.
    pub analytic_nodes: usize,
}

/// Borrowed view of the current state.
pub struct StepperState<'a> {
    pub t: f64,
    pub base: &'a [f64],
    pub increment: &'a [f64],
}

impl Stepper {
    pub fn new(datum: &InitialDatum, grid: &Grid2D, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let params = datum.params;
        let m = params.m;
        let n = grid.len();
        let base: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let (x, y) = grid.point(k);
                params.density(datum.pressure(x, y).max(0.0))
            })
            .collect();
        if base.iter().any(|u| !u.is_finite()) {
            return Err(PmeError::Domain("initial datum is not finite on the grid".into()));
        }
        let base_power: Vec<f64> = base.iter().map(|u| u.powf(m)).collect();
        let h2 = grid.h * grid.h;
        let k_const = ((m - 1.0) / m).powf(m / (m - 1.0));
        let q = m / (m - 1.0);
        let base_lap: Vec<(f64, bool)> = (0..n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % grid.nx, k / grid.nx);
                if grid.is_boundary(i, j) {
                    return (0.0, false);
                }
                if cfg.base_laplacian == BaseLaplacian::Analytic {
                    let all_positive = [k, k - 1, k + 1, k - grid.nx, k + grid.nx].iter().all(|&s| base[s] > 0.0);
                    let (x, y) = grid.point(k);
                    if let Some(d) = datum.derivatives(x, y).filter(|d| all_positive && d.v > 0.0) {
                        let g2 = d.grad[0] * d.grad[0] + d.grad[1] * d.grad[1];
                        let lap = d.hess.trace();
                        let val = k_const * (q * d.v.powf(q - 1.0) * lap + q * (q - 1.0) * d.v.powf(q - 2.0) * g2);
                        return (val, true);
                    }
                }
                let s = base_power[k - 1] + base_power[k + 1] + base_power[k - grid.nx] + base_power[k + grid.nx] - 4.0 * base_power[k];
                (s / h2, false)
            })
            .collect();
        let analytic_nodes = base_lap.iter().filter(|p| p.1).count();
        let base_lap: Vec<f64> = base_lap.into_iter().map(|p| p.0).collect();
        let max_rate = base.iter().fold(0.0f64, |acc, &u| acc.max(u.powf(m - 1.0)));
        let base_mass = neumaier(base.iter().copied()) * h2;
        Ok(Stepper {
            grid: *grid,
            m,
            sigma: cfg.sigma,
            boundary: cfg.boundary,
            t: 0.0,
            steps: 0,
            delta: vec![0.0; n],
            next: vec![0.0; n],
            dp: vec![0.0; n],
            base,
            base_power,
            base_lap,
            max_rate,
            base_mass,
            analytic_nodes,
        })
    }

    /// `sigma h^2 / (4 m max u^(m-1))`, infinite for a vanishing field.
    pub fn stable_dt(&self) -> f64 {
        if self.max_rate > 0.0 {
            self.sigma * self.grid.h * self.grid.h / (4.0 * self.m * self.max_rate)
        } else {
            f64::INFINITY
        }
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        let g = self.grid;
        let (nx, m) = (g.nx, self.m);
        let (base, base_power, delta) = (&self.base, &self.base_power, &self.delta);
        self.dp.par_iter_mut().enumerate().for_each(|(k, out)| *out = power_increment(base[k], base_power[k], delta[k], m));
        let lam = dt / (g.h * g.h);
        let (dp, base_lap) = (&self.dp, &self.base_lap);
        let t_new = self.t + dt;
        let boundary = self.boundary;
        let params_density = |v: f64| ((m - 1.0) / m * v).powf(1.0 / (m - 1.0));
        let (rate, bad) = self
            .next
            .par_chunks_mut(nx)
            .enumerate()
            .map(|(j, row)| {
                let mut rate = 0.0f64;
                let mut bad = None;
                for (i, out) in row.iter_mut().enumerate() {
                    let k = j * nx + i;
                    let d = if g.is_boundary(i, j) {
                        match boundary {
                            BoundaryCondition::ZeroDirichlet => delta[k],
                            BoundaryCondition::Prescribed(ex) => {
                                let (x, y) = g.point(k);
                                params_density(ex.pressure(x, y, t_new).max(0.0)) - base[k]
                            }
                        }
                    } else {
                        let lap = dp[k - 1] + dp[k + 1] + dp[k - nx] + dp[k + nx] - 4.0 * dp[k];
                        delta[k] + dt * base_lap[k] + lam * lap
                    };
                    *out = d;
                    let u = base[k] + d;
                    if !(u >= -NEGATIVE_TOL) && bad.is_none() {
                        bad = Some((k, u));
                    }
                    rate = rate.max(u.max(0.0).powf(m - 1.0));
                }
                (rate, bad)
            })
            .reduce(|| (0.0, None), |a, b| (a.0.max(b.0), a.1.or(b.1)));
        if let Some((k, u)) = bad {
            let (x, y) = g.point(k);
            return Err(PmeError::Instability(format!("density {u:e} at ({x}, {y}) after step {} (t = {t_new:e})", self.steps + 1)));
        }
        std::mem::swap(&mut self.delta, &mut self.next);
        self.max_rate = rate;
        self.t = t_new;
        self.steps += 1;
        Ok(())
    }

    pub fn state(&self) -> StepperState<'_> {
        StepperState { t: self.t, base: &self.base, increment: &self.delta }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn increment(&self) -> &[f64] {
        &self.delta
    }

    pub fn density(&self) -> Vec<f64> {
        self.base.iter().zip(&self.delta).map(|(u, d)| u + d).collect()
    }

    /// `sum u h^2`, compensated.
    pub fn mass(&self) -> f64 {
        self.base_mass + neumaier(self.delta.iter().copied()) * self.grid.h * self.grid.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increment_matches_direct_power() {
        for &(u0, d, m) in &[(0.5f64, 1e-9, 2.0), (0.3, -0.1, 3.0), (0.0, 0.2, 1.5), (0.4, -0.39, 2.5)] {
            let want = (u0 + d).powf(m) - u0.powf(m);
            let got = power_increment(u0, u0.powf(m), d, m);
            // The direct difference is only accurate to rounding of `u^m`.
            let tol = 1e-14 * want.abs() + 4.0 * f64::EPSILON * (u0 + d).powf(m);
            assert!((got - want).abs() <= tol, "{u0} {d} {m}");
        }
    }

    #[test]
    fn increment_survives_underflowed_base() {
        let u0 = 1e-200f64;
        for m in [1.2, 3.0] {
            let got = power_increment(u0, u0.powf(m), 0.1, m);
            assert!((got - 0.1f64.powf(m)).abs() <= 1e-15, "{m}: {got}");
        }
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(neumaier(v.into_iter()), 2e-16);
    }
}
