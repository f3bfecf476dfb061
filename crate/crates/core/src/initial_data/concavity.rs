use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sources::PointDerivatives;
use super::InitialDatum;
use crate::concavity_monitor::Sym2;

/// Relative slack below which a positive eigenvalue counts as zero.
pub const REPORT_TOL: f64 = 1e-8;

/// Worst point of the alpha-concavity matrix over a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub alpha: f64,
    /// Largest `lambda1` of `v D^2 v - (1-alpha) grad v grad v^T`, or of `D^2 log v` for alpha = 0.
    pub max_lambda1: f64,
    pub location: [f64; 2],
    /// `max_lambda1` divided by the local scale at its location.
    pub scaled_at_max: f64,
    /// Largest `lambda1 / scale` anywhere in the sample.
    pub max_scaled_lambda1: f64,
    pub samples: usize,
}

impl ConcavityReport {
    pub fn empty(alpha: f64) -> Self {
        ConcavityReport {
            alpha,
            max_lambda1: f64::NEG_INFINITY,
            location: [f64::NAN, f64::NAN],
            scaled_at_max: f64::NEG_INFINITY,
            max_scaled_lambda1: f64::NEG_INFINITY,
            samples: 0,
        }
    }

    /// Nonpositive up to the relative tolerance at every sample.
    pub fn is_concave(&self) -> bool {
        self.max_scaled_lambda1 <= REPORT_TOL
    }

    /// Combined report over both samples.
    pub fn merge(mut self, o: &ConcavityReport) -> Self {
        if o.max_lambda1 > self.max_lambda1 {
            self.max_lambda1 = o.max_lambda1;
            self.location = o.location;
            self.scaled_at_max = o.scaled_at_max;
        }
        self.max_scaled_lambda1 = self.max_scaled_lambda1.max(o.max_scaled_lambda1);
        self.samples += o.samples;
        self
    }

    fn single(alpha: f64, p: [f64; 2], d: &PointDerivatives) -> Self {
        let (l1, scale) = if alpha == 0.0 {
            let h = d.power_hessian(0.0);
            (h.lambda1(), h.max_abs())
        } else {
            let mat = d.concavity_matrix(alpha);
            (mat.lambda1(), d.v * d.hess.max_abs() + d.grad[0].powi(2) + d.grad[1].powi(2))
        };
        let scaled = if scale > 0.0 {
            l1 / scale
        } else if l1 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        ConcavityReport { alpha, max_lambda1: l1, location: p, scaled_at_max: scaled, max_scaled_lambda1: scaled, samples: 1 }
    }
}

/// Fourth-order differences of the pressure, used when the datum has no analytic derivatives.
fn differenced(datum: &InitialDatum, x: f64, y: f64, h: f64) -> Option<PointDerivatives> {
    let f = |i: i32, j: i32| datum.pressure(x + f64::from(i) * h, y + f64::from(j) * h);
    for i in -2..=2 {
        for j in -2..=2 {
            if f(i, j) <= 0.0 {
                return None;
            }
        }
    }
    let c1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    let c2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    let (mut gx, mut gy, mut hxx, mut hyy, mut hxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..5 {
        let o = k as i32 - 2;
        gx += c1[k] * f(o, 0);
        gy += c1[k] * f(0, o);
        hxx += c2[k] * f(o, 0);
        hyy += c2[k] * f(0, o);
        for l in 0..5 {
            hxy += c1[k] * c1[l] * f(o, l as i32 - 2);
        }
    }
    Some(PointDerivatives { v: f(0, 0), grad: [gx / h, gy / h], hess: Sym2::new(hxx / (h * h), hxy / (h * h), hyy / (h * h)) })
}

/// Report over an explicit list of points; points outside the positivity set are skipped.
pub fn verify_alpha_concavity_at(datum: &InitialDatum, points: &[[f64; 2]]) -> ConcavityReport {
    let alpha = datum.params.alpha;
    let h = 1e-3 * datum.support.diameter();
    points
        .par_iter()
        .filter_map(|&p| {
            let d = datum.derivatives(p[0], p[1]).or_else(|| differenced(datum, p[0], p[1], h))?;
            (d.v > 0.0).then(|| ConcavityReport::single(alpha, p, &d))
        })
        .reduce(|| ConcavityReport::empty(alpha), |a, b| a.merge(&b))
}

/// Report over an `nx` by `ny` node grid spanning the datum's support box.
pub fn verify_alpha_concavity(datum: &InitialDatum, nx: usize, ny: usize) -> ConcavityReport {
    let r = datum.support;
    let pts: Vec<[f64; 2]> = (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| {
                [r.x0 + r.width() * i as f64 / (nx.max(2) - 1) as f64, r.y0 + r.height() * j as f64 / (ny.max(2) - 1) as f64]
            })
        })
        .collect();
    verify_alpha_concavity_at(datum, &pts)
}
