//! Initial pressure data: the local breaking polynomials, the cut-off interior
//! datum, the boundary-breaking datum, and a few simple fields used as test
//! data by the solver and the experiments.

mod boundary;
mod concavity;
mod interior;
mod radial;
mod sources;

pub use boundary::{build_boundary_datum, DEFECT_HALF_SPAN, BoundaryConstruction, BoundaryCertificate};
pub use concavity::{verify_alpha_concavity, verify_alpha_concavity_at, ConcavityReport};
pub use interior::{build_control_datum, build_interior_datum, build_local_w, InteriorConstruction, LocalW};
pub use radial::{CapRegime, Cutoff, ProfileCertificate, RadialProfile};
pub use sources::{DatumSource, PointDerivatives, Rect};

use serde::{Deserialize, Serialize};

use crate::concavity_monitor::Sym2;
use crate::error::{PmeError, Result};
use crate::params::PmeParams;

pub const DOCUMENT_FORMAT: &str = "pme-lab/initial-datum";
pub const DOCUMENT_VERSION: u32 = 1;

/// A nonnegative pressure field on a rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    pub params: PmeParams,
    /// Box containing the closure of the positivity set.
    pub support: Rect,
    /// Suggested number of grid nodes across the longer side of the padded box.
    pub grid_hint: usize,
    pub source: DatumSource,
}

impl InitialDatum {
    pub fn new(params: PmeParams, support: Rect, source: DatumSource) -> Self {
        InitialDatum { params, support, grid_hint: 257, source }
    }

    pub fn zero(params: PmeParams, support: Rect) -> Self {
        Self::new(params, support, DatumSource::Zero)
    }

    pub fn pressure(&self, x: f64, y: f64) -> f64 {
        self.source.pressure(x, y)
    }

    /// Analytic value, gradient and Hessian where the source provides them.
    pub fn derivatives(&self, x: f64, y: f64) -> Option<PointDerivatives> {
        self.source.derivatives(x, y)
    }

    /// `D^2(v^alpha)` for alpha > 0, `D^2 log v` for alpha = 0, at a positive point.
    pub fn power_hessian(&self, x: f64, y: f64) -> Option<Sym2> {
        if let Some(h) = self.source.power_hessian(x, y, self.params.alpha) {
            return Some(h);
        }
        self.derivatives(x, y).filter(|d| d.v > 0.0).map(|d| d.power_hessian(self.params.alpha))
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.params.density(self.pressure(x, y))
    }

    pub fn with_params(mut self, params: PmeParams) -> Self {
        self.params = params;
        self
    }

    /// Self-describing document with the construction and a sample grid.
    pub fn to_document(&self, samples: usize) -> Result<serde_json::Value> {
        if samples < 2 {
            return Err(PmeError::InvalidParameter("need at least 2 samples per side".into()));
        }
        let r = self.support;
        let xs: Vec<f64> = (0..samples).map(|i| r.x0 + (r.x1 - r.x0) * i as f64 / (samples - 1) as f64).collect();
        let ys: Vec<f64> = (0..samples).map(|j| r.y0 + (r.y1 - r.y0) * j as f64 / (samples - 1) as f64).collect();
        let values: Vec<f64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).map(|(x, y)| self.pressure(x, y)).collect();
        Ok(serde_json::json!({
            "format": DOCUMENT_FORMAT,
            "version": DOCUMENT_VERSION,
            "datum": self,
            "samples": { "nx": samples, "ny": samples, "x": xs, "y": ys, "pressure": values },
        }))
    }

    pub fn from_document(doc: &serde_json::Value) -> Result<Self> {
        if doc.get("format").and_then(|f| f.as_str()) != Some(DOCUMENT_FORMAT) {
            return Err(PmeError::Config("not an initial-datum document".into()));
        }
        if doc.get("version").and_then(|v| v.as_u64()) != Some(u64::from(DOCUMENT_VERSION)) {
            return Err(PmeError::Config("unsupported initial-datum document version".into()));
        }
        let datum = doc.get("datum").ok_or_else(|| PmeError::Config("missing datum".into()))?;
        Ok(serde_json::from_value(datum.clone())?)
    }
}
