//! Focusing self-similar solutions `g = r^2 phi(c t r^{-alpha*}) / (-t)`.
//!
//! The profile solves
//! `F - eta F' = (m-1) F [2F + (a^2 - 3a) eta F' + a^2 eta^2 F'']
//!              + (m-1)(n-1) F (2F - a eta F') + (2F - a eta F')^2`
//! with `F(0) = 0`, `F'(0) = -1`, obtained by substituting the ansatz into the
//! radial pressure equation. The exponent `a = alpha*` is found by shooting.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::residual::SpaceTimeField;
use crate::error::{PmeError, Result};
use crate::ode::{Dopri5, Event, OdeOptions};

pub const PROFILE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shot {
    /// The orbit reaches zero with a steep slope: exponent too large.
    Hit,
    /// The orbit turns around at a positive minimum: exponent too small.
    Turn,
}

fn second_derivative(eta: f64, f: f64, g: f64, a: f64, m: f64, n: f64) -> f64 {
    let b = 2.0 * f - a * eta * g;
    let num = f - eta * g - (m - 1.0) * f * (2.0 * f + (a * a - 3.0 * a) * eta * g) - (m - 1.0) * (n - 1.0) * f * b - b * b;
    num / ((m - 1.0) * f * a * a * eta * eta)
}

/// Left minus right side of the profile equation.
pub fn ode_residual(eta: f64, f: f64, g: f64, gg: f64, a: f64, m: f64, n: f64) -> f64 {
    let b = 2.0 * f - a * eta * g;
    f - eta * g
        - (m - 1.0) * f * (2.0 * f + (a * a - 3.0 * a) * eta * g + a * a * eta * eta * gg)
        - (m - 1.0) * (n - 1.0) * f * b
        - b * b
}

fn start_coefficient(a: f64, m: f64, n: f64) -> f64 {
    -(2.0 - a) * ((m - 1.0) * (n - a) + 2.0 - a)
}

const ETA_START: f64 = -1e-6;
const HIT_LEVEL: f64 = 1e-7;
const ETA_LIMIT: f64 = -1e3;

fn shoot(a: f64, m: f64, n: f64) -> Result<Shot> {
    let c2 = start_coefficient(a, m, n);
    let e0 = ETA_START;
    let rhs = move |eta: f64, y: &[f64; 2]| [y[1], second_derivative(eta, y[0], y[1], a, m, n)];
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-15, h_init: 1e-9, max_steps: 400_000 };
    let mut s = Dopri5::new(rhs, e0, [-e0 + c2 * e0 * e0, -1.0 + 2.0 * c2 * e0], opts);
    // Integrating toward negative eta, the slope first turns from negative to
    // positive at the maximum of the profile.
    let passed_max = [Event::new(|_t, y: &[f64; 2]| y[1], 1, true)];
    match s.advance_to(ETA_LIMIT, &passed_max)? {
        Some(_) => {}
        None => return Err(PmeError::Convergence(format!("profile has no maximum for alpha = {a}"))),
    }
    let events = [
        Event::new(|_t, y: &[f64; 2]| y[1], -1, true),
        Event::new(|_t, y: &[f64; 2]| y[0] - HIT_LEVEL, -1, true),
    ];
    match s.advance_to(ETA_LIMIT, &events) {
        Ok(Some(hit)) => Ok(if hit.index == 0 { Shot::Turn } else { Shot::Hit }),
        Ok(None) => Err(PmeError::Convergence(format!("orbit undecided for alpha = {a}"))),
        // The equation degenerates as F -> 0, so a blow-up of the step control
        // there also means the orbit dove into zero.
        Err(_) if s.y[0] < 1e-3 && s.y[1] > 0.0 => Ok(Shot::Hit),
        Err(e) => Err(e),
    }
}

/// Bracket of the exponent separating the two orbit classes (hit versus
/// turnaround), bisected to width `tol`.
///
/// The classification uses a small but finite hit level, which biases the
/// boundary slightly below the exponent of the smooth profile;
/// [`anomalous_exponent`] refines it.
pub fn classification_bracket(m: f64, n: usize, tol: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let mut prev: Option<(f64, Shot)> = None;
    let mut bracket = None;
    for k in 1..50 {
        let a = 1.0 + f64::from(k) / 50.0;
        let s = shoot(a, m, nf)?;
        if let Some((pa, ps)) = prev {
            if ps == Shot::Turn && s == Shot::Hit {
                bracket = Some((pa, a));
                break;
            }
        }
        prev = Some((a, s));
    }
    let (mut lo, mut hi) =
        bracket.ok_or_else(|| PmeError::Convergence(format!("no exponent bracket in (1,2) for m={m}, n={n}")))?;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match shoot(mid, m, nf)? {
            Shot::Hit => hi = mid,
            Shot::Turn => lo = mid,
        }
    }
    Ok((lo, hi))
}

const MATCH_LEVEL: f64 = 0.05;
const SERIES_ORDER: usize = 14;

fn ode_options() -> OdeOptions {
    OdeOptions { rtol: 1e-13, atol: 1e-16, h_init: 1e-10, max_steps: 2_000_000 }
}

fn start_state(a: f64, m: f64, n: f64) -> [f64; 2] {
    let c2 = start_coefficient(a, m, n);
    let e = ETA_START;
    [-e + c2 * e * e, -1.0 + 2.0 * c2 * e]
}

/// Orbit data where it descends through the matching level, the interface
/// position whose series reproduces the value there, and the slope mismatch.
struct Matching {
    eta_m: f64,
    gamma: f64,
    slope_gap: f64,
}

fn matching(a: f64, m: f64, n: f64) -> Result<Matching> {
    let rhs = move |eta: f64, y: &[f64; 2]| [y[1], second_derivative(eta, y[0], y[1], a, m, n)];
    let mut s = Dopri5::new(rhs, ETA_START, start_state(a, m, n), ode_options());
    s.advance_to(ETA_LIMIT, &[Event::new(|_t, y: &[f64; 2]| y[1], 1, true)])?
        .ok_or_else(|| PmeError::Convergence("profile has no maximum".into()))?;
    let hit = s
        .advance_to(ETA_LIMIT, &[Event::new(|_t, y: &[f64; 2]| y[0] - MATCH_LEVEL, -1, true)])?
        .ok_or_else(|| PmeError::Convergence("profile never descends to the matching level".into()))?;
    let (eta_m, f_m, g_m) = (hit.t, hit.y[0], hit.y[1]);
    let series_at = |gamma: f64| poly_eval(&interface_series(a, gamma, m, n, SERIES_ORDER), eta_m - gamma);
    let mut gamma = eta_m - f_m / g_m;
    for _ in 0..60 {
        let v = series_at(gamma)[0] - f_m;
        let dg = 1e-7 * gamma.abs();
        let dv = (series_at(gamma + dg)[0] - series_at(gamma - dg)[0]) / (2.0 * dg);
        let step = v / dv;
        gamma -= step;
        if step.abs() < 1e-15 * gamma.abs() {
            break;
        }
    }
    if !(gamma < eta_m) {
        return Err(PmeError::Convergence(format!("interface {gamma} not below the matching point {eta_m}")));
    }
    Ok(Matching { eta_m, gamma, slope_gap: series_at(gamma)[1] - g_m })
}

/// Exponent for which the orbit leaving the origin joins the analytic
/// interface series: bracketed by orbit classification, then located as the
/// root of the slope mismatch at the matching level. Returns a bracket of
/// width at most `tol`.
pub fn anomalous_exponent(m: f64, n: usize, tol: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let (lo, hi) = classification_bracket(m, n, 1e-9)?;
    let gap = |a: f64| matching(a, m, nf).map(|r| r.slope_gap);
    let mut width = 1e-6;
    let (mut a0, mut a1) = (lo - width, hi + width);
    let (mut g0, mut g1) = (gap(a0)?, gap(a1)?);
    while g0.signum() == g1.signum() {
        width *= 4.0;
        if width > 0.05 {
            return Err(PmeError::Convergence("slope mismatch has no sign change near the classification boundary".into()));
        }
        a0 = lo - width;
        a1 = hi + width;
        g0 = gap(a0)?;
        g1 = gap(a1)?;
    }
    let mut side = 0;
    for _ in 0..200 {
        if (a1 - a0).abs() <= tol {
            break;
        }
        let c = (a0 * g1 - a1 * g0) / (g1 - g0);
        let c = if c.is_finite() && (c - a0) * (c - a1) < 0.0 { c } else { 0.5 * (a0 + a1) };
        let gc = gap(c)?;
        if gc == 0.0 {
            return Ok((c, c));
        }
        if gc.signum() == g1.signum() {
            a1 = c;
            g1 = gc;
            if side == 1 {
                g0 *= 0.5;
            }
            side = 1;
        } else {
            a0 = c;
            g0 = gc;
            if side == -1 {
                g1 *= 0.5;
            }
            side = -1;
        }
        if (g0.abs().min(g1.abs())) < 1e-15 {
            break;
        }
    }
    let (x, y) = if a0 < a1 { (a0, a1) } else { (a1, a0) };
    Ok((x, y))
}

fn poly_mul(a: &[f64], b: &[f64], deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if i + j <= deg {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_der(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

/// Residual coefficients (in powers of `x = eta - gamma`) of a truncated series.
fn series_residual(c: &[f64], a: f64, gamma: f64, m: f64, n: f64, deg: usize) -> Vec<f64> {
    let f = c.to_vec();
    let fp = poly_der(&f);
    let fpp = poly_der(&fp);
    let eta = [gamma, 1.0];
    let eta_fp = poly_mul(&eta, &fp, deg);
    let eta2_fpp = poly_mul(&poly_mul(&eta, &eta, deg), &fpp, deg);
    let mut inner = vec![0.0; deg + 1];
    let mut b = vec![0.0; deg + 1];
    let mut lhs = vec![0.0; deg + 1];
    for k in 0..=deg {
        let fk = f.get(k).copied().unwrap_or(0.0);
        inner[k] = 2.0 * fk + (a * a - 3.0 * a) * eta_fp[k] + a * a * eta2_fpp[k];
        b[k] = 2.0 * fk - a * eta_fp[k];
        lhs[k] = fk - eta_fp[k];
    }
    let t1 = poly_mul(&f, &inner, deg);
    let t2 = poly_mul(&f, &b, deg);
    let t3 = poly_mul(&b, &b, deg);
    (0..=deg).map(|k| lhs[k] - (m - 1.0) * t1[k] - (m - 1.0) * (n - 1.0) * t2[k] - t3[k]).collect()
}

/// Power series of the profile at the interface, `F = sum c_k (eta - gamma)^k`.
fn interface_series(a: f64, gamma: f64, m: f64, n: f64, order: usize) -> Vec<f64> {
    // Lowest order balance gives the Darcy slope F'(gamma) = -1 / (a^2 gamma).
    let mut c = vec![0.0, -1.0 / (a * a * gamma)];
    for k in 2..=order {
        let mut trial = c.clone();
        trial.push(0.0);
        let r0 = series_residual(&trial, a, gamma, m, n, k)[k - 1];
        *trial.last_mut().unwrap() = 1.0;
        let r1 = series_residual(&trial, a, gamma, m, n, k)[k - 1];
        c.push(-r0 / (r1 - r0));
    }
    c
}

fn poly_eval(c: &[f64], x: f64) -> [f64; 3] {
    let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
    for k in (0..c.len()).rev() {
        dd = dd * x + 2.0 * d;
        d = d * x + v;
        v = v * x + c[k];
    }
    [v, d, dd]
}

/// Tabulated profile with value, slope and curvature at every node; evaluated
/// by quintic Hermite interpolation, which keeps the second derivative
/// continuous.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraveleauProfile {
    pub version: u32,
    pub m: f64,
    pub n: usize,
    pub alpha_star: f64,
    /// Half width of the final bisection bracket.
    pub alpha_uncertainty: f64,
    pub gamma: f64,
    pub dphi_at_gamma: f64,
    /// Nodes in increasing order from `gamma` to `0`.
    pub eta: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub ddphi: Vec<f64>,
    /// Switch point between the interface series and the integrated orbit.
    pub eta_match: f64,
    /// Slope mismatch between the two representations at the switch point.
    pub match_slope_gap: f64,
    pub residual_bound: f64,
}

/// Shoots for the exponent, then tabulates the profile on `nodes`
/// Chebyshev points of `[gamma, 0]`.
pub fn graveleau_profile_with(m: f64, n: usize, tol: f64, nodes: usize) -> Result<GraveleauProfile> {
    if !(m > 1.0) || n < 2 || !(tol > 0.0) || nodes < 16 {
        return Err(PmeError::InvalidParameter(format!("Graveleau profile needs m > 1, n >= 2, tol > 0 (m={m}, n={n}, tol={tol})")));
    }
    let nf = n as f64;
    let (lo, hi) = anomalous_exponent(m, n, 1e-14)?;
    let a = 0.5 * (lo + hi);
    let c2 = start_coefficient(a, m, nf);
    let rhs = move |eta: f64, y: &[f64; 2]| [y[1], second_derivative(eta, y[0], y[1], a, m, nf)];
    let opts = ode_options();
    let e0 = ETA_START;
    let y0 = start_state(a, m, nf);
    let Matching { eta_m, gamma, slope_gap } = matching(a, m, nf)?;
    let coeffs = interface_series(a, gamma, m, nf, SERIES_ORDER);
    let match_slope_gap = slope_gap.abs();

    // Chebyshev nodes on [gamma, 0], increasing.
    let eta: Vec<f64> = (0..nodes)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / (nodes - 1) as f64;
            0.5 * gamma * (1.0 + th.cos())
        })
        .map(|e: f64| if e == -0.0 { 0.0 } else { e })
        .collect();
    let mut phi = vec![0.0; nodes];
    let mut dphi = vec![0.0; nodes];
    let mut ddphi = vec![0.0; nodes];
    // Below eta_m the table blends series and orbit with a smooth weight, so a
    // tiny mismatch between the two is not amplified by the node spacing.
    let eta_lo = eta_m - 0.6 * (eta_m - gamma);
    let width = eta_m - eta_lo;
    let mut s = Dopri5::new(rhs, e0, y0, opts);
    for k in (0..nodes).rev() {
        let e = eta[k];
        let vals = if e > e0 {
            [-e + c2 * e * e, -1.0 + 2.0 * c2 * e, 2.0 * c2]
        } else if e >= eta_m {
            s.advance_to(e, &[])?;
            [s.y[0], s.y[1], second_derivative(e, s.y[0], s.y[1], a, m, nf)]
        } else if e > eta_lo {
            s.advance_to(e, &[])?;
            let o = [s.y[0], s.y[1], second_derivative(e, s.y[0], s.y[1], a, m, nf)];
            let q = poly_eval(&coeffs, e - gamma);
            let t = (e - eta_lo) / width;
            let w = [
                t * t * t * (10.0 - 15.0 * t + 6.0 * t * t),
                30.0 * t * t * (1.0 - t) * (1.0 - t) / width,
                60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (width * width),
            ];
            let d = [o[0] - q[0], o[1] - q[1], o[2] - q[2]];
            [
                q[0] + w[0] * d[0],
                q[1] + w[0] * d[1] + w[1] * d[0],
                q[2] + w[0] * d[2] + 2.0 * w[1] * d[1] + w[2] * d[0],
            ]
        } else {
            poly_eval(&coeffs, e - gamma)
        };
        phi[k] = vals[0];
        dphi[k] = vals[1];
        ddphi[k] = vals[2];
    }
    phi[0] = 0.0;
    phi[nodes - 1] = 0.0;
    dphi[nodes - 1] = -1.0;

    let mut p = GraveleauProfile {
        version: PROFILE_FORMAT_VERSION,
        m,
        n,
        alpha_star: a,
        alpha_uncertainty: 0.5 * (hi - lo),
        gamma,
        dphi_at_gamma: coeffs[1],
        eta,
        phi,
        dphi,
        ddphi,
        eta_match: eta_m,
        match_slope_gap,
        residual_bound: f64::INFINITY,
    };
    p.residual_bound = p.max_ode_residual(4);
    if !(p.residual_bound <= tol) {
        return Err(PmeError::Convergence(format!("profile residual {:e} exceeds tolerance {tol:e}", p.residual_bound)));
    }
    Ok(p)
}

/// Profile with the default table size of 10^4 nodes.
pub fn graveleau_profile(m: f64, n: usize, tol: f64) -> Result<GraveleauProfile> {
    graveleau_profile_with(m, n, tol, 10_000)
}

impl GraveleauProfile {
    /// `(phi, phi', phi'')` at `eta`; zero for `eta <= gamma`.
    pub fn eval3(&self, eta: f64) -> [f64; 3] {
        if eta <= self.gamma {
            return [0.0; 3];
        }
        let n = self.eta.len();
        if eta >= 0.0 {
            return [self.phi[n - 1], self.dphi[n - 1], self.ddphi[n - 1]];
        }
        let k = match self.eta.binary_search_by(|e| e.partial_cmp(&eta).unwrap()) {
            Ok(k) => return [self.phi[k], self.dphi[k], self.ddphi[k]],
            Err(k) => k - 1,
        };
        let (x0, x1) = (self.eta[k], self.eta[k + 1]);
        let h = x1 - x0;
        let t = (eta - x0) / h;
        quintic_hermite(
            t,
            h,
            [self.phi[k], self.dphi[k], self.ddphi[k]],
            [self.phi[k + 1], self.dphi[k + 1], self.ddphi[k + 1]],
        )
    }

    pub fn phi(&self, eta: f64) -> f64 {
        self.eval3(eta)[0]
    }

    /// Maximum of the equation residual at the nodes and at `sub` interior
    /// points of every interval.
    pub fn max_ode_residual(&self, sub: usize) -> f64 {
        let (a, m, n) = (self.alpha_star, self.m, self.n as f64);
        let mut worst: f64 = 0.0;
        for k in 0..self.eta.len() - 1 {
            for j in 0..=sub {
                let e = self.eta[k] + (self.eta[k + 1] - self.eta[k]) * j as f64 / (sub + 1) as f64;
                let [f, g, gg] = self.eval3(e);
                let r = ode_residual(e, f, g, gg, a, m, n);
                if r.is_finite() {
                    worst = worst.max(r.abs());
                } else {
                    return f64::INFINITY;
                }
            }
        }
        worst
    }

    /// Checks the endpoint conditions and positivity in between.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let n = self.eta.len();
        let ok = self.alpha_star > 1.0
            && self.alpha_star < 2.0
            && self.gamma < 0.0
            && self.phi[n - 1].abs() <= tol
            && (self.dphi[n - 1] + 1.0).abs() <= tol
            && self.phi[0].abs() <= tol
            && self.dphi_at_gamma > 0.0
            && self.phi[1..n - 1].iter().all(|&p| p > 0.0);
        if ok {
            Ok(())
        } else {
            Err(PmeError::Convergence("profile invariants violated".into()))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: GraveleauProfile = serde_json::from_str(s)?;
        if p.version != PROFILE_FORMAT_VERSION {
            return Err(PmeError::Config(format!("profile format version {} not supported", p.version)));
        }
        Ok(p)
    }
}

/// Quintic Hermite interpolation on `[0, h]` at `t = s / h`, returning the
/// value and first two derivatives with respect to `s`.
fn quintic_hermite(t: f64, h: f64, l: [f64; 3], r: [f64; 3]) -> [f64; 3] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
    let d00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d20 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let d01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let d11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d21 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let s00 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    let s10 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    let s20 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
    let s01 = 60.0 * t - 180.0 * t2 + 120.0 * t3;
    let s11 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    let s21 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);
    let v = h00 * l[0] + h * h10 * l[1] + h * h * h20 * l[2] + h01 * r[0] + h * h11 * r[1] + h * h * h21 * r[2];
    let d = (d00 * l[0] + h * d10 * l[1] + h * h * d20 * l[2] + d01 * r[0] + h * d11 * r[1] + h * h * d21 * r[2]) / h;
    let dd = (s00 * l[0] + h * s10 * l[1] + h * h * s20 * l[2] + s01 * r[0] + h * s11 * r[1] + h * h * s21 * r[2]) / (h * h);
    [v, d, dd]
}

/// `r^2 phi(c t r^{-alpha*}) / (-t)` for `t < 0`.
pub fn graveleau_eval(x: &[f64], t: f64, profile: &GraveleauProfile, c: f64) -> Result<f64> {
    if !(t < 0.0) {
        return Err(PmeError::Domain(format!("focusing solution needs t < 0, got {t}")));
    }
    if !(c > 0.0) {
        return Err(PmeError::InvalidParameter(format!("scale c must be positive, got {c}")));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Ok(0.0);
    }
    let eta = c * t * r2.powf(-0.5 * profile.alpha_star);
    Ok(r2 * profile.phi(eta) / (-t))
}

/// `(c, t0)` such that at `t0` the vacuum ball has radius `r` and the boundary
/// slope is `s`.
pub fn graveleau_match(s: f64, r: f64, profile: &GraveleauProfile) -> Result<(f64, f64)> {
    if !(s > 0.0 && r > 0.0) {
        return Err(PmeError::InvalidParameter(format!("slope and radius must be positive ({s}, {r})")));
    }
    let a = profile.alpha_star;
    let t0 = a * profile.gamma * r * profile.dphi_at_gamma / s;
    let c = profile.gamma * r.powf(a) / t0;
    Ok((c, t0))
}

/// Vacuum radius `(c t / gamma)^{1/alpha*}`.
pub fn interface_radius(profile: &GraveleauProfile, c: f64, t: f64) -> f64 {
    (c * t / profile.gamma).powf(1.0 / profile.alpha_star)
}

/// A focusing solution as a space-time field.
#[derive(Clone, Debug)]
pub struct GraveleauSolution {
    pub profile: Arc<GraveleauProfile>,
    pub c: f64,
}

impl SpaceTimeField for GraveleauSolution {
    fn dim(&self) -> usize {
        self.profile.n
    }
    fn value(&self, x: &[f64], t: f64) -> f64 {
        graveleau_eval(x, t, &self.profile, self.c).unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_series_balances_the_equation() {
        let (a, m, n) = (1.3, 2.0, 2.0);
        let c2 = start_coefficient(a, m, n);
        let e = -1e-3;
        let r = ode_residual(e, -e + c2 * e * e, -1.0 + 2.0 * c2 * e, 2.0 * c2, a, m, n);
        assert!(r.abs() < 1e-7, "{r}");
    }

    #[test]
    fn interface_series_solves_equation() {
        let (a, g, m, n) = (1.17, -0.77, 2.0, 2.0);
        let c = interface_series(a, g, m, n, 10);
        assert!((c[1] + 1.0 / (a * a * g)).abs() < 1e-15);
        let r = series_residual(&c, a, g, m, n, 9);
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |x: f64| [1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5), 1.0 - 6.0 * x * x + 2.5 * x.powi(4), -12.0 * x + 10.0 * x.powi(3)];
        let h = 0.3;
        let v = quintic_hermite(0.4, h, p(0.0), p(h));
        let e = p(0.4 * h);
        for i in 0..3 {
            assert!((v[i] - e[i]).abs() < 1e-12);
        }
    }
}
