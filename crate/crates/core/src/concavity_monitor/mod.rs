//! Measurements on trajectories: Hessians of `v^alpha`, the top eigenvalue at
//! a point over time, free-boundary positions on vertical lines, the
//! three-line convexity defect, and ball-inclusion checks for front speeds.

mod fit;
mod sym2;

pub use fit::{polyfit, PolyFit};
pub use sym2::Sym2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PmeError, Result};
use crate::initial_data::InitialDatum;
use crate::pme_solver::{Grid2D, Trajectory};

const D1: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];

/// Fourth-order Hessian of `f` sampled on the 5x5 node block around `(i, j)`.
pub fn stencil_hessian(f: impl Fn(isize, isize) -> f64, h: f64) -> Sym2 {
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    for a in 0..5 {
        let o = a as isize - 2;
        a11 += D2[a] * f(o, 0);
        a22 += D2[a] * f(0, o);
        for b in 0..5 {
            a12 += D1[a] * D1[b] * f(o, b as isize - 2);
        }
    }
    Sym2::new(a11 / (h * h), a12 / (h * h), a22 / (h * h))
}

/// `v^alpha`, or `log v` for alpha = 0.
pub fn power(v: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        v.ln()
    } else {
        v.powf(alpha)
    }
}

/// Hessian of `v^alpha` for a continuous field by fourth-order differences with spacing `h`.
pub fn power_hessian_of_field(f: impl Fn(f64, f64) -> f64, alpha: f64, point: [f64; 2], h: f64, eps_pos: f64) -> Result<Sym2> {
    let sample = |a: isize, b: isize| f(point[0] + a as f64 * h, point[1] + b as f64 * h);
    for a in -2..=2 {
        for b in -2..=2 {
            if !(sample(a, b) > eps_pos) {
                return Err(PmeError::StencilDegenerate(point[0], point[1]));
            }
        }
    }
    Ok(stencil_hessian(|a, b| power(sample(a, b), alpha), h))
}

fn base_power_hessian(datum: &InitialDatum, alpha: f64, x: f64, y: f64) -> Option<Sym2> {
    if datum.params.alpha == alpha {
        datum.power_hessian(x, y)
    } else {
        datum.derivatives(x, y).filter(|d| d.v > 0.0).map(|d| d.power_hessian(alpha))
    }
}

/// `D^2(v^alpha)` at node `(i, j)` of snapshot `k`.
///
/// When the initial datum has an analytic Hessian there, the result is that
/// Hessian plus differences of `v^alpha - v0^alpha`, which keeps the rounding
/// floor at the size of the increment rather than of `v0`.
pub fn power_hessian(traj: &Trajectory, k: usize, alpha: f64, node: (usize, usize)) -> Result<Sym2> {
    let g = &traj.grid;
    let (i, j) = node;
    let (x, y) = (g.x(i), g.y(j));
    if i < 2 || j < 2 || i + 2 >= g.nx || j + 2 >= g.ny {
        return Err(PmeError::StencilDegenerate(x, y));
    }
    let idx = |a: isize, b: isize| g.index((i as isize + a) as usize, (j as isize + b) as usize);
    let inc = &traj.snapshots[k].increment;
    let m = traj.m;
    for a in -2..=2 {
        for b in -2..=2 {
            if !traj.is_positive(k, idx(a, b)) {
                return Err(PmeError::StencilDegenerate(x, y));
            }
        }
    }
    let base_positive = (-2..=2).all(|a| (-2..=2).all(|b| traj.base[idx(a, b)] > 0.0));
    if base_positive {
        if let Some(h0) = base_power_hessian(&traj.datum, alpha, x, y) {
            let e = alpha * (m - 1.0);
            let diff = |a: isize, b: isize| {
                let s = idx(a, b);
                let l = (inc[s] / traj.base[s]).ln_1p();
                if alpha == 0.0 {
                    (m - 1.0) * l
                } else {
                    power(traj.pressure_of_density(traj.base[s]), alpha) * (e * l).exp_m1()
                }
            };
            return Ok(h0.add(&stencil_hessian(diff, g.h)));
        }
    }
    Ok(stencil_hessian(|a, b| power(traj.pressure_at(k, idx(a, b)), alpha), g.h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda1Series {
    pub point: [f64; 2],
    pub alpha: f64,
    pub times: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    /// End of the initial stretch on which `lambda1` is monotone.
    pub monotone_until: f64,
    /// Right end of the fit window, a quarter of `monotone_until`.
    pub fit_until: f64,
    pub fit_points: usize,
    pub rate: f64,
    pub rate_std_error: f64,
    /// `lambda1 - lambda2` at `t = 0` relative to the largest Hessian entry.
    pub initial_separation: f64,
    pub separation_ok: bool,
}

impl Lambda1Series {
    /// Largest `lambda1` over the monotone window, excluding `t = 0`.
    pub fn max_in_window(&self) -> f64 {
        self.times.iter().zip(&self.lambda1).filter(|(t, _)| **t > 0.0 && **t <= self.monotone_until).map(|(_, l)| *l).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest `lambda1` over the monotone window, excluding `t = 0`.
    pub fn min_in_window(&self) -> f64 {
        self.times.iter().zip(&self.lambda1).filter(|(t, _)| **t > 0.0 && **t <= self.monotone_until).map(|(_, l)| *l).fold(f64::INFINITY, f64::min)
    }
}

pub const SEPARATION_MIN: f64 = 1e-3;

/// `lambda1(D^2 v^alpha)` at the node nearest `point` for every snapshot, with
/// the initial rate fitted on the first quarter of the monotone window.
pub fn lambda1_series(traj: &Trajectory, alpha: f64, point: [f64; 2]) -> Result<Lambda1Series> {
    let node = traj.grid.nearest(point[0], point[1]).ok_or(PmeError::Domain("point outside the grid".into()))?;
    let hs: Vec<Sym2> = (0..traj.len()).into_par_iter().map(|k| power_hessian(traj, k, alpha, node)).collect::<Result<_>>()?;
    let times = traj.times();
    let (lambda1, lambda2): (Vec<f64>, Vec<f64>) = hs.iter().map(|h| h.eigenvalues()).unzip();
    let scale = hs[0].max_abs();
    let initial_separation = if scale > 0.0 { (lambda1[0] - lambda2[0]) / scale } else { 0.0 };
    let mut end = 1.min(times.len() - 1);
    if times.len() > 2 {
        let sign = (lambda1[1] - lambda1[0]).signum();
        end = 1;
        while end + 1 < times.len() && (lambda1[end + 1] - lambda1[end]) * sign >= 0.0 {
            end += 1;
        }
    }
    let monotone_until = times[end];
    let fit_until = 0.25 * monotone_until;
    let mut idx: Vec<usize> = (0..times.len()).filter(|&k| times[k] <= fit_until * (1.0 + 1e-12)).collect();
    if idx.len() < 3 {
        idx = (0..=end.max(1).min(times.len() - 1)).take(3).collect();
    }
    let ts: Vec<f64> = idx.iter().map(|&k| times[k]).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| lambda1[k]).collect();
    let fit = polyfit(&ts, &ys, 1).ok_or(PmeError::Convergence("too few snapshots for a rate fit".into()))?;
    let (x, y) = (traj.grid.x(node.0), traj.grid.y(node.1));
    Ok(Lambda1Series {
        point: [x, y],
        alpha,
        times,
        lambda1,
        lambda2,
        monotone_until,
        fit_until: ts.last().copied().unwrap_or(0.0),
        fit_points: ts.len(),
        rate: fit.coeffs[1],
        rate_std_error: fit.std_errors[1],
        initial_separation,
        separation_ok: initial_separation >= SEPARATION_MIN,
    })
}

/// Walking direction along a scan line, in terms of the line coordinate
/// (`y` on vertical lines, `x` on horizontal ones).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The boundary lies at smaller coordinate than the reference point.
    Decreasing,
    /// The boundary lies at larger coordinate than the reference point.
    Increasing,
}

/// Scan line through the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    /// `x = const`, parametrized by `y`.
    Vertical(f64),
    /// `y = const`, parametrized by `x`.
    Horizontal(f64),
}

impl Line {
    fn nodes(&self, g: &Grid2D) -> usize {
        match self {
            Line::Vertical(_) => g.ny,
            Line::Horizontal(_) => g.nx,
        }
    }

    fn coordinate(&self, g: &Grid2D, j: usize) -> f64 {
        match self {
            Line::Vertical(_) => g.y(j),
            Line::Horizontal(_) => g.x(j),
        }
    }

    /// Fractional node index of the line coordinate `s`.
    fn locate(&self, g: &Grid2D, s: f64) -> f64 {
        match *self {
            Line::Vertical(x) => g.locate(x, s).1,
            Line::Horizontal(y) => g.locate(s, y).0,
        }
    }

    /// Pressure along the line, linearly interpolated across it.
    fn sample(&self, traj: &Trajectory, k: usize) -> Result<Vec<f64>> {
        let g = &traj.grid;
        let (f, across) = match *self {
            Line::Vertical(x) => (g.locate(x, g.y0).0, g.nx),
            Line::Horizontal(y) => (g.locate(g.x0, y).1, g.ny),
        };
        if f < 0.0 || f > (across - 1) as f64 {
            return Err(PmeError::Domain(format!("line {self:?} is outside the grid")));
        }
        let i0 = (f.floor() as usize).min(across - 2);
        let w = f - i0 as f64;
        let at = |i: usize, j: usize| match self {
            Line::Vertical(_) => traj.pressure_at(k, g.index(i, j)),
            Line::Horizontal(_) => traj.pressure_at(k, g.index(j, i)),
        };
        Ok((0..self.nodes(g))
            .map(|j| {
                let a = at(i0, j);
                if w == 0.0 {
                    a
                } else {
                    (1.0 - w) * a + w * at(i0 + 1, j)
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontSeries {
    pub line: Line,
    /// Line coordinate of the interior reference point.
    pub reference: f64,
    pub direction: Direction,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub t_fit: f64,
    /// One-sided derivative of the position at `t = 0`, fitted on `(0, t_fit]`.
    pub slope: f64,
    /// Two standard errors of `slope`.
    pub slope_width: f64,
}

/// Boundary position on `line`, walking from the coordinate `reference` in `direction`.
pub fn front_position(traj: &Trajectory, k: usize, line: Line, reference: f64, direction: Direction) -> Result<f64> {
    let g: &Grid2D = &traj.grid;
    let col = line.sample(traj, k)?;
    let n = col.len() as isize;
    let eps = traj.eps_pos;
    let start = line.locate(g, reference).round();
    if start < 0.0 || start > (n - 1) as f64 || !(col[start as usize] > eps) {
        return Err(PmeError::Domain(format!("reference {reference} on {line:?} is not in the positivity set")));
    }
    let step: isize = if direction == Direction::Decreasing { -1 } else { 1 };
    let mut j = start as isize;
    loop {
        let nj = j + step;
        if nj < 0 || nj >= n {
            return Err(PmeError::Domain(format!("no boundary on {line:?} inside the grid")));
        }
        if !(col[nj as usize] > eps) {
            break;
        }
        j = nj;
    }
    // The explicit scheme leaves a thin precursor ahead of the front; walk back
    // to the first node whose value is resolved by the linear profile behind
    // it, then extrapolate that profile to zero.
    let inward = -step;
    let mut a = j;
    let pos = loop {
        let b = a + inward;
        if b < 0 || b >= n || !(col[b as usize] > eps) {
            let inside = col[j as usize];
            let outside = col[(j + step) as usize];
            break line.coordinate(g, j as usize) + step as f64 * (inside - eps) / (inside - outside) * g.h;
        }
        let (va, vb) = (col[a as usize], col[b as usize]);
        if vb > va && va >= 0.5 * (vb - va) {
            break line.coordinate(g, a as usize) + step as f64 * va / (vb - va) * g.h;
        }
        a = b;
    };
    let mut s = j + 2 * step;
    while s >= 0 && s < n {
        if col[s as usize] > eps {
            return Err(PmeError::AmbiguousFront(format!("second crossing on {line:?} at {}", line.coordinate(g, s as usize))));
        }
        s += step;
    }
    Ok(pos)
}

/// Boundary positions on a line over time, with a fitted initial slope.
pub fn front_series(traj: &Trajectory, line: Line, reference: f64, direction: Direction, t_fit: f64) -> Result<FrontSeries> {
    let times = traj.times();
    let positions: Vec<f64> = (0..traj.len()).into_par_iter().map(|k| front_position(traj, k, line, reference, direction)).collect::<Result<_>>()?;
    let idx: Vec<usize> = (0..times.len()).filter(|&k| times[k] > 0.0 && times[k] <= t_fit * (1.0 + 1e-12)).collect();
    let ts: Vec<f64> = idx.iter().map(|&k| times[k]).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| positions[k]).collect();
    let deg = if ts.len() >= 5 { 2 } else { 1 };
    let fit = polyfit(&ts, &ys, deg).ok_or(PmeError::Convergence("too few snapshots for a slope fit".into()))?;
    Ok(FrontSeries {
        line,
        reference,
        direction,
        times,
        positions,
        t_fit: ts.last().copied().unwrap_or(0.0),
        slope: fit.coeffs[1],
        slope_width: 2.0 * fit.std_errors[1],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSeries {
    pub lines: [f64; 3],
    pub times: Vec<f64>,
    /// Positive values mean the midpoint of the outer two boundary points lies outside the support.
    pub defect: Vec<f64>,
    /// Convex-hull area minus positive area, relative to the hull area.
    pub hull_excess: Vec<f64>,
    pub h: f64,
}

impl DefectSeries {
    /// Largest sampled window `(0, t_end]` on which the defect stays positive and,
    /// from some `t_on` on, at least `threshold`. Returns `(t_on, t_end)`.
    pub fn window(&self, threshold: f64) -> Option<(f64, f64)> {
        let mut t_on = None;
        let mut last = None;
        for (&t, &d) in self.times.iter().zip(&self.defect) {
            if t <= 0.0 {
                continue;
            }
            if d <= 0.0 || (t_on.is_some() && d < threshold) {
                break;
            }
            if d >= threshold {
                t_on.get_or_insert(t);
                last = Some(t);
            }
        }
        t_on.zip(last)
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Area of the convex hull of a point set (monotone chain).
pub fn hull_area(mut pts: Vec<(f64, f64)>) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let n = hull.len();
    0.5 * (0..n).map(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        a.0 * b.1 - a.1 * b.0
    }).sum::<f64>().abs()
}

/// Hull excess of the positive node set, with each node standing for an `h x h` cell.
pub fn hull_excess(traj: &Trajectory, k: usize) -> f64 {
    let g = &traj.grid;
    let half = 0.5 * g.h;
    let mut corners = Vec::new();
    let mut count = 0usize;
    for node in 0..g.len() {
        if traj.is_positive(k, node) {
            count += 1;
            let (x, y) = g.point(node);
            corners.extend([(x - half, y - half), (x + half, y - half), (x - half, y + half), (x + half, y + half)]);
        }
    }
    let hull = hull_area(corners);
    if hull > 0.0 {
        (hull - count as f64 * g.h * g.h) / hull
    } else {
        0.0
    }
}

/// `y(x_mid) - (y(x_left) + y(x_right))/2` (sign flipped for `Increasing`) on three vertical lines.
pub fn convexity_defect(traj: &Trajectory, lines: [f64; 3], y_ref: f64, direction: Direction) -> Result<DefectSeries> {
    let per: Vec<(f64, f64)> = (0..traj.len())
        .into_par_iter()
        .map(|k| {
            let y: Vec<f64> = lines.iter().map(|&x| front_position(traj, k, Line::Vertical(x), y_ref, direction)).collect::<Result<_>>()?;
            let d = y[1] - 0.5 * (y[0] + y[2]);
            let d = if direction == Direction::Decreasing { d } else { -d };
            Ok((d, hull_excess(traj, k)))
        })
        .collect::<Result<_>>()?;
    Ok(DefectSeries { lines, times: traj.times(), defect: per.iter().map(|p| p.0).collect(), hull_excess: per.iter().map(|p| p.1).collect(), h: traj.grid.h })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCondition {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityReport {
    pub s_low: f64,
    pub s_high: f64,
    pub window: f64,
    pub checked_times: usize,
    /// Times at which a node of the growing inner ball was not positive.
    pub inclusion_failures: Vec<f64>,
    /// Times at which a node of the shrinking outer ball was positive.
    pub exclusion_failures: Vec<f64>,
    /// Slack allowed for the grid, in lengths.
    pub grid_tolerance: f64,
    pub passes: bool,
}

fn ball_nodes(g: &Grid2D, c: [f64; 2], r: f64) -> Vec<usize> {
    if r <= 0.0 {
        return Vec::new();
    }
    (0..g.len()).filter(|&k| {
        let (x, y) = g.point(k);
        (x - c[0]).hypot(y - c[1]) <= r
    }).collect()
}

/// Checks `B_{r + S_low t}(p) ⊂ Ω_t` and `B_{R - S_high t}(q) ⊂ Ω_t^c` for every
/// snapshot with `0 < t <= window`, allowing `3 h` for the grid: the explicit
/// scheme keeps a precursor of two to three cells above `eps_pos` ahead of the front.
pub fn velocity_bound_check(traj: &Trajectory, inner: &BallCondition, outer: &BallCondition, s_low: f64, s_high: f64, window: f64) -> Result<VelocityReport> {
    let d = &traj.datum;
    let probe = |c: [f64; 2], r: f64, want_positive: bool| -> bool {
        (0..64).all(|a| {
            (1..=8).all(|b| {
                let th = std::f64::consts::TAU * a as f64 / 64.0;
                let rr = r * b as f64 / 8.0;
                let v = d.pressure(c[0] + rr * th.cos(), c[1] + rr * th.sin());
                // The rim touches the boundary, so only the open ball is probed.
                b == 8 || (v > 0.0) == want_positive
            })
        })
    };
    if !probe(inner.center, inner.radius, true) {
        return Err(PmeError::Hypothesis("interior ball is not inside the initial support".into()));
    }
    if !probe(outer.center, outer.radius, false) {
        return Err(PmeError::Hypothesis("exterior ball meets the initial support".into()));
    }
    let g = &traj.grid;
    let tol = 3.0 * g.h;
    let mut report = VelocityReport {
        s_low,
        s_high,
        window,
        checked_times: 0,
        inclusion_failures: Vec::new(),
        exclusion_failures: Vec::new(),
        grid_tolerance: tol,
        passes: true,
    };
    for k in 0..traj.len() {
        let t = traj.snapshots[k].t;
        if t <= 0.0 || t > window {
            continue;
        }
        report.checked_times += 1;
        if !ball_nodes(g, inner.center, inner.radius + s_low * t - tol).iter().all(|&n| traj.is_positive(k, n)) {
            report.inclusion_failures.push(t);
        }
        if ball_nodes(g, outer.center, outer.radius - s_high * t - tol).iter().any(|&n| traj.is_positive(k, n)) {
            report.exclusion_failures.push(t);
        }
    }
    report.passes = report.checked_times > 0 && report.inclusion_failures.is_empty() && report.exclusion_failures.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_is_exact_on_quartics() {
        let f = |x: f64, y: f64| 1.0 + x - y * y + x * y * y - x.powi(4) - 2.0 * x * x * y * y;
        let (x0, y0, h) = (0.1, -0.2, 0.01);
        let hh = stencil_hessian(|a, b| f(x0 + a as f64 * h, y0 + b as f64 * h), h);
        let want = Sym2::new(-12.0 * x0 * x0 - 4.0 * y0 * y0, 2.0 * y0 - 8.0 * x0 * y0, -2.0 + 2.0 * x0 - 4.0 * x0 * x0);
        assert!((hh.a11 - want.a11).abs() < 1e-9 && (hh.a12 - want.a12).abs() < 1e-9 && (hh.a22 - want.a22).abs() < 1e-9);
    }

    #[test]
    fn field_examples() {
        let h = power_hessian_of_field(|x, y| 1.0 - x * x - y * y, 1.0, [0.0, 0.0], 0.01, 0.0).unwrap();
        assert!((h.a11 + 2.0).abs() < 1e-10 && (h.a22 + 2.0).abs() < 1e-10 && h.a12.abs() < 1e-10);
        let w = |x: f64, y: f64| 0.3 * x - y * y + x * y;
        let h = power_hessian_of_field(|x, y| w(x, y).exp(), 0.0, [0.2, 0.1], 0.01, 0.0).unwrap();
        assert!((h.a11).abs() < 1e-8 && (h.a12 - 1.0).abs() < 1e-8 && (h.a22 + 2.0).abs() < 1e-8);
        assert!(power_hessian_of_field(|x, y| 1.0 - x * x - y * y, 1.0, [0.99, 0.0], 0.01, 0.0).is_err());
    }

    #[test]
    fn hull_of_square() {
        let pts = vec![(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (1.0, 1.0), (0.0, 1.0)];
        assert!((hull_area(pts) - 1.0).abs() < 1e-15);
    }
}
