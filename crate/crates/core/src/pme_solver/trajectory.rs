use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::stepper::Stepper;
use super::{Grid2D, SolverConfig};
use crate::error::{PmeError, Result};
use crate::initial_data::InitialDatum;

const BINARY_MAGIC: &[u8; 8] = b"PMELAB01";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// Density minus the initial density, node by node.
    pub increment: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MassLedger {
    pub initial: f64,
    /// `(t, sum u h^2)` at every recorded instant.
    pub samples: Vec<(f64, f64)>,
    /// Largest `|mass - initial|` over the samples.
    pub max_drift: f64,
}

impl MassLedger {
    fn record(&mut self, t: f64, mass: f64) {
        self.samples.push((t, mass));
        self.max_drift = self.max_drift.max((mass - self.initial).abs());
    }

    pub fn relative_drift(&self) -> f64 {
        if self.initial > 0.0 {
            self.max_drift / self.initial
        } else {
            self.max_drift
        }
    }
}

/// Output of [`evolve`]: the initial density and increments at the output times.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub datum: InitialDatum,
    pub grid: Grid2D,
    pub m: f64,
    pub config: SolverConfig,
    pub eps_pos: f64,
    pub base: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub mass: MassLedger,
    pub steps: usize,
    pub analytic_nodes: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn density(&self, k: usize) -> Vec<f64> {
        self.base.iter().zip(&self.snapshots[k].increment).map(|(u, d)| (u + d).max(0.0)).collect()
    }

    pub fn pressure_of_density(&self, u: f64) -> f64 {
        self.m / (self.m - 1.0) * u.max(0.0).powf(self.m - 1.0)
    }

    pub fn pressure(&self, k: usize) -> Vec<f64> {
        self.density(k).into_iter().map(|u| self.pressure_of_density(u)).collect()
    }

    pub fn pressure_at(&self, k: usize, node: usize) -> f64 {
        self.pressure_of_density(self.base[node] + self.snapshots[k].increment[node])
    }

    pub fn is_positive(&self, k: usize, node: usize) -> bool {
        self.pressure_at(k, node) > self.eps_pos
    }

    /// `x,y,v` rows for snapshot `k`.
    pub fn write_csv<W: Write>(&self, k: usize, mut w: W) -> Result<()> {
        writeln!(w, "x,y,v")?;
        for (node, v) in self.pressure(k).into_iter().enumerate() {
            let (x, y) = self.grid.point(node);
            writeln!(w, "{x},{y},{v}")?;
        }
        Ok(())
    }

    /// Little-endian dump: magic, grid, then `(t, pressure field)` per snapshot.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        for v in [self.grid.nx as u64, self.grid.ny as u64, self.snapshots.len() as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in [self.grid.h, self.grid.x0, self.grid.y0, self.m] {
            w.write_all(&v.to_le_bytes())?;
        }
        for k in 0..self.snapshots.len() {
            w.write_all(&self.snapshots[k].t.to_le_bytes())?;
            for v in self.pressure(k) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Grid, exponent and `(t, pressure)` fields read back from [`Trajectory::write_binary`].
pub fn read_binary<R: Read>(mut r: R) -> Result<(Grid2D, f64, Vec<(f64, Vec<f64>)>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(PmeError::Config("not a trajectory file".into()));
    }
    let mut b = [0u8; 8];
    let mut next_u = |r: &mut R| -> Result<u64> {
        r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    };
    let (nx, ny, count) = (next_u(&mut r)? as usize, next_u(&mut r)? as usize, next_u(&mut r)? as usize);
    let next_f = |r: &mut R| -> Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let (h, x0, y0, m) = (next_f(&mut r)?, next_f(&mut r)?, next_f(&mut r)?, next_f(&mut r)?);
    let grid = Grid2D::new(nx, ny, h, x0, y0)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let t = next_f(&mut r)?;
        let field = (0..nx * ny).map(|_| next_f(&mut r)).collect::<Result<Vec<_>>>()?;
        out.push((t, field));
    }
    Ok((grid, m, out))
}

pub const MAX_STEPS: usize = 50_000_000;

/// Evolves the datum's density to `t_final`, storing the configured outputs.
pub fn evolve(datum: &InitialDatum, grid: &Grid2D, t_final: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(PmeError::InvalidParameter(format!("final time must be positive, got {t_final}")));
    }
    let outputs = cfg.output.times(t_final)?;
    let mut st = Stepper::new(datum, grid, cfg)?;
    let max_v0 = st.base().iter().fold(0.0f64, |a, &u| a.max(datum.params.pressure(u)));
    let eps_pos = cfg.eps_pos.unwrap_or(1e-8 * max_v0);
    let initial = st.mass();
    let mut mass = MassLedger { initial, ..Default::default() };
    mass.record(0.0, initial);
    let mut snapshots = vec![Snapshot { t: 0.0, increment: vec![0.0; grid.len()] }];
    for &target in &outputs {
        while st.t < target {
            let mut dt = st.stable_dt().min(target - st.t);
            if st.t + dt >= target - 1e-12 * target {
                dt = target - st.t;
            }
            if st.t + dt == st.t {
                return Err(PmeError::Instability(format!("time step underflow at t = {}", st.t)));
            }
            st.step(dt)?;
            if st.steps > MAX_STEPS {
                return Err(PmeError::Instability(format!("step budget of {MAX_STEPS} exhausted at t = {}", st.t)));
            }
            if cfg.mass_every_step {
                mass.record(st.t, st.mass());
            }
        }
        st.t = target;
        if !cfg.mass_every_step {
            mass.record(target, st.mass());
        }
        snapshots.push(Snapshot { t: target, increment: st.increment().to_vec() });
    }
    Ok(Trajectory {
        datum: datum.clone(),
        grid: *grid,
        m: datum.params.m,
        config: cfg.clone(),
        eps_pos,
        base: st.base().to_vec(),
        snapshots,
        mass,
        steps: st.steps,
        analytic_nodes: st.analytic_nodes,
    })
}
