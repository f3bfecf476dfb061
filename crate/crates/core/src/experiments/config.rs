use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PmeError, Result};
use crate::params::PmeParams;
use crate::pme_solver::{SolverConfig, MAX_SIGMA, MIN_NODES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ValidateBarenblatt,
    SolveGraveleau,
    InteriorBreaking,
    BoundaryBreaking,
    BoundaryVelocity,
    ComparisonTest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::ValidateBarenblatt,
        ExperimentKind::SolveGraveleau,
        ExperimentKind::InteriorBreaking,
        ExperimentKind::BoundaryBreaking,
        ExperimentKind::BoundaryVelocity,
        ExperimentKind::ComparisonTest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ValidateBarenblatt => "validate-barenblatt",
            ExperimentKind::SolveGraveleau => "solve-graveleau",
            ExperimentKind::InteriorBreaking => "interior-breaking",
            ExperimentKind::BoundaryBreaking => "boundary-breaking",
            ExperimentKind::BoundaryVelocity => "boundary-velocity",
            ExperimentKind::ComparisonTest => "comparison-test",
        }
    }

    /// Acceptance criteria decided by this experiment.
    pub fn criteria(&self) -> &'static [u8] {
        match self {
            ExperimentKind::ValidateBarenblatt => &[1, 2, 3],
            ExperimentKind::SolveGraveleau => &[4],
            ExperimentKind::InteriorBreaking => &[5, 6, 10],
            ExperimentKind::BoundaryBreaking => &[8],
            ExperimentKind::BoundaryVelocity => &[7],
            ExperimentKind::ComparisonTest => &[9],
        }
    }

    /// `(finest node count, refinement levels)` used when the config leaves them out.
    fn default_grid(&self) -> (usize, usize) {
        match self {
            ExperimentKind::ValidateBarenblatt => (257, 4),
            ExperimentKind::SolveGraveleau => (0, 1),
            ExperimentKind::InteriorBreaking => (241, 2),
            ExperimentKind::BoundaryBreaking => (321, 1),
            ExperimentKind::BoundaryVelocity => (201, 2),
            ExperimentKind::ComparisonTest => (33, 1),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = PmeError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| PmeError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Node counts of a refinement ladder: the finest grid has `nodes` nodes per
/// side and each coarser level halves the spacing count.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: Option<usize>,
    pub levels: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub sigma: f64,
    pub eps_pos: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSettings { sigma: d.sigma, eps_pos: d.eps_pos }
    }
}

impl SolverSettings {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { sigma: self.sigma, eps_pos: self.eps_pos, ..SolverConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarenblattConfig {
    pub amplitude: f64,
    pub t0: f64,
    /// Half side of the square computational box.
    pub half_width: f64,
    pub outputs: usize,
    /// Random `(m, n)` pairs for the exponent identity.
    pub identity_samples: usize,
    /// Replaces the derived exponent in the oracle; a negative control.
    pub beta: Option<f64>,
}

impl Default for BarenblattConfig {
    fn default() -> Self {
        BarenblattConfig { amplitude: 0.25, t0: 0.25, half_width: 1.5, outputs: 16, identity_samples: 20, beta: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraveleauConfig {
    pub tol: f64,
    pub residual_samples: usize,
    /// Profile cache: read if present, written otherwise.
    pub profile: Option<PathBuf>,
}

impl Default for GraveleauConfig {
    fn default() -> Self {
        GraveleauConfig { tol: 1e-8, residual_samples: 100, profile: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteriorConfig {
    /// Final time in units of `(rho/4)^2 / v0(0)`.
    pub horizon: f64,
    pub outputs: usize,
    /// Random exponents for the threshold check at `a = 8`.
    pub threshold_samples: usize,
}

impl Default for InteriorConfig {
    fn default() -> Self {
        InteriorConfig { horizon: 0.01, outputs: 200, threshold_samples: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    /// Final time in units of `1 / S_+`, the inverse of the fastest measured bottom slope.
    pub horizon: f64,
    pub outputs: usize,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig { horizon: 0.6, outputs: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VelocityConfig {
    pub outputs: usize,
    /// Semi-axes of the elliptic cap datum.
    pub semi_axes: [f64; 2],
    pub tilt: f64,
}

impl Default for VelocityConfig {
    fn default() -> Self {
        VelocityConfig { outputs: 20, semi_axes: [1.0, 0.6], tilt: 0.3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonConfig {
    pub pairs: usize,
    /// Exponents are drawn uniformly from this range.
    pub m_range: [f64; 2],
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig { pairs: 100, m_range: [1.2, 3.0] }
    }
}

fn default_params() -> PmeParams {
    PmeParams { m: 2.0, n: 2, alpha: 0.25 }
}

fn default_out() -> PathBuf {
    PathBuf::from("pme-lab-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_params")]
    pub params: PmeParams,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub barenblatt: BarenblattConfig,
    #[serde(default)]
    pub graveleau: GraveleauConfig,
    #[serde(default)]
    pub interior: InteriorConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub velocity: VelocityConfig,
    #[serde(default)]
    pub comparison: ComparisonConfig,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            params: default_params(),
            grid: GridConfig::default(),
            solver: SolverSettings::default(),
            out_dir: default_out(),
            seed: 0,
            barenblatt: BarenblattConfig::default(),
            graveleau: GraveleauConfig::default(),
            interior: InteriorConfig::default(),
            boundary: BoundaryConfig::default(),
            velocity: VelocityConfig::default(),
            comparison: ComparisonConfig::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| PmeError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| PmeError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| PmeError::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Node counts from coarsest to finest.
    pub fn ladder(&self) -> Vec<usize> {
        let (n, l) = self.experiment.default_grid();
        let nodes = self.grid.nodes.unwrap_or(n);
        let levels = self.grid.levels.unwrap_or(l);
        (0..levels).rev().map(|k| ((nodes - 1) >> k) + 1).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let s = &self.solver;
        if !(s.sigma > 0.0 && s.sigma <= MAX_SIGMA) {
            return Err(PmeError::Config(format!("solver.sigma must lie in (0, {MAX_SIGMA}]")));
        }
        if s.eps_pos.is_some_and(|e| !(e >= 0.0)) {
            return Err(PmeError::Config("solver.eps_pos must be nonnegative".into()));
        }
        let levels = self.grid.levels.unwrap_or(self.experiment.default_grid().1);
        if levels == 0 || levels > 8 {
            return Err(PmeError::Config("grid.levels must lie in 1..=8".into()));
        }
        if self.experiment != ExperimentKind::SolveGraveleau {
            let nodes = self.grid.nodes.unwrap_or(self.experiment.default_grid().0);
            if nodes < MIN_NODES {
                return Err(PmeError::Config(format!("grid.nodes must be at least {MIN_NODES}")));
            }
            if !(nodes - 1).is_multiple_of(1 << (levels - 1)) {
                return Err(PmeError::Config(format!("grid.nodes - 1 = {} must be divisible by 2^(levels-1)", nodes.saturating_sub(1))));
            }
            if self.ladder()[0] < MIN_NODES {
                return Err(PmeError::Config(format!("coarsest grid has fewer than {MIN_NODES} nodes")));
            }
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(PmeError::Config(format!("{name} must be positive and finite")))
            }
        };
        let p = &self.params;
        match self.experiment {
            ExperimentKind::ValidateBarenblatt => {
                let b = &self.barenblatt;
                positive("barenblatt.amplitude", b.amplitude)?;
                positive("barenblatt.t0", b.t0)?;
                positive("barenblatt.half_width", b.half_width)?;
                if b.outputs == 0 || b.identity_samples == 0 {
                    return Err(PmeError::Config("barenblatt.outputs and identity_samples must be positive".into()));
                }
                if p.n != 2 {
                    return Err(PmeError::Config("validate-barenblatt runs on a planar grid (n = 2)".into()));
                }
                if let Some(beta) = b.beta {
                    positive("barenblatt.beta", beta)?;
                }
            }
            ExperimentKind::SolveGraveleau => {
                positive("graveleau.tol", self.graveleau.tol)?;
                if p.n < 2 {
                    return Err(PmeError::Config("focusing solutions need n >= 2".into()));
                }
            }
            ExperimentKind::InteriorBreaking => {
                positive("interior.horizon", self.interior.horizon)?;
                if self.interior.outputs < 8 {
                    return Err(PmeError::Config("interior.outputs must be at least 8".into()));
                }
            }
            ExperimentKind::BoundaryBreaking => {
                positive("boundary.horizon", self.boundary.horizon)?;
                if !(0.0..0.5).contains(&p.alpha) {
                    return Err(PmeError::Config(format!("boundary breaking needs alpha in [0, 1/2), got {}", p.alpha)));
                }
                if p.m != 2.0 {
                    return Err(PmeError::Config("the boundary datum is built for m = 2".into()));
                }
                if self.boundary.outputs < 4 {
                    return Err(PmeError::Config("boundary.outputs must be at least 4".into()));
                }
            }
            ExperimentKind::BoundaryVelocity => {
                let v = &self.velocity;
                positive("velocity.semi_axes", v.semi_axes[0].min(v.semi_axes[1]))?;
                if !(v.tilt.abs() < 1.0) {
                    return Err(PmeError::Config("velocity.tilt must lie in (-1, 1)".into()));
                }
                if v.outputs < 5 {
                    return Err(PmeError::Config("velocity.outputs must be at least 5".into()));
                }
            }
            ExperimentKind::ComparisonTest => {
                let c = &self.comparison;
                if c.pairs == 0 || !(c.m_range[0] > 1.0 && c.m_range[1] >= c.m_range[0]) {
                    return Err(PmeError::Config("comparison needs pairs > 0 and 1 < m_lo <= m_hi".into()));
                }
            }
        }
        Ok(())
    }
}
