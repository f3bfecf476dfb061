use crate::error::{PmeError, Result};

/// Value, time derivative, gradient and Laplacian at one space-time point.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeJet {
    pub v: f64,
    pub vt: f64,
    pub grad: Vec<f64>,
    pub laplacian: f64,
}

/// A pressure field `v(x, t)` on `R^dim`.
pub trait SpaceTimeField {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64], t: f64) -> f64;
    /// Closed-form derivatives where the solution has them.
    fn jet(&self, _x: &[f64], _t: f64) -> Option<SpaceTimeJet> {
        None
    }
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// Fourth-order central difference jet with spacing `h` in space and time.
pub fn finite_difference_jet<F: SpaceTimeField + ?Sized>(f: &F, x: &[f64], t: f64, h: f64) -> Result<SpaceTimeJet> {
    let d = f.dim();
    let v = f.value(x, t);
    let mut grad = vec![0.0; d];
    let mut lap = 0.0;
    let mut y = x.to_vec();
    for k in 0..d {
        let mut g = 0.0;
        let mut s = 0.0;
        for (i, off) in (-2i32..=2).enumerate() {
            y[k] = x[k] + f64::from(off) * h;
            let val = f.value(&y, t);
            if val <= 0.0 {
                return Err(PmeError::Domain(format!("stencil at {x:?} touches the free boundary")));
            }
            g += D1[i] * val;
            s += D2[i] * val;
        }
        y[k] = x[k];
        grad[k] = g / h;
        lap += s / (h * h);
    }
    let mut vt = 0.0;
    for (i, off) in (-2i32..=2).enumerate() {
        let val = f.value(x, t + f64::from(off) * h);
        if val <= 0.0 {
            return Err(PmeError::Domain(format!("time stencil at {x:?} touches the free boundary")));
        }
        vt += D1[i] * val;
    }
    Ok(SpaceTimeJet { v, vt: vt / h, grad, laplacian: lap })
}

/// `v_t - (m-1) v lap v - |grad v|^2`, analytic when available, else by
/// fourth-order differences with spacing `h`.
pub fn pme_residual<F: SpaceTimeField + ?Sized>(f: &F, x: &[f64], t: f64, m: f64, h: f64) -> Result<f64> {
    let j = match f.jet(x, t) {
        Some(j) => j,
        None => {
            if f.value(x, t) == 0.0 && (-2..=2).all(|k| f.value(x, t + f64::from(k) * h) == 0.0) {
                // Inside the vacuum: the zero solution satisfies the equation.
                let all_zero = (0..f.dim()).all(|k| {
                    (-2i32..=2).all(|o| {
                        let mut y = x.to_vec();
                        y[k] += f64::from(o) * h;
                        f.value(&y, t) == 0.0
                    })
                });
                if all_zero {
                    return Ok(0.0);
                }
            }
            finite_difference_jet(f, x, t, h)?
        }
    };
    let g2: f64 = j.grad.iter().map(|g| g * g).sum();
    Ok(j.vt - (m - 1.0) * j.v * j.laplacian - g2)
}

/// Same as [`pme_residual`] but always differencing, ignoring closed forms.
pub fn pme_residual_numeric<F: SpaceTimeField + ?Sized>(f: &F, x: &[f64], t: f64, m: f64, h: f64) -> Result<f64> {
    let j = finite_difference_jet(f, x, t, h)?;
    let g2: f64 = j.grad.iter().map(|g| g * g).sum();
    Ok(j.vt - (m - 1.0) * j.v * j.laplacian - g2)
}
