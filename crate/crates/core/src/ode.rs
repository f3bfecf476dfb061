//! Adaptive Dormand–Prince 5(4) integrator with terminal event location.

use crate::error::{PmeError, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, h_init: 1e-8, max_steps: 2_000_000 }
    }
}

/// Zero crossing of `g(t, y)`. `direction` > 0 only counts upward crossings,
/// < 0 only downward ones, 0 both.
pub struct Event<'a, const N: usize> {
    pub g: Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>,
    pub direction: i8,
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(g: impl Fn(f64, &[f64; N]) -> f64 + 'a, direction: i8, terminal: bool) -> Self {
        Event { g: Box::new(g), direction, terminal }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub t: f64,
    pub y: [f64; N],
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrator state that can be advanced repeatedly toward new targets.
pub struct Dopri5<F, const N: usize> {
    f: F,
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    opts: OdeOptions,
    pub steps: usize,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        Dopri5 { f, t: t0, y: y0, h: opts.h_init.abs(), opts, steps: 0 }
    }

    /// One explicit step of signed size `h` from `(t, y)`; returns the
    /// fifth-order solution and the embedded error estimate.
    fn raw_step(&self, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N]) {
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = (self.f)(t + C[s] * h, &ys);
        }
        let mut y5 = *y;
        let mut err = [0.0; N];
        for s in 0..7 {
            for i in 0..N {
                y5[i] += h * B5[s] * k[s][i];
                err[i] += h * (B5[s] - B4[s]) * k[s][i];
            }
        }
        (y5, err)
    }

    fn err_norm(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            let sc = self.opts.atol + self.opts.rtol * y0[i].abs().max(y1[i].abs());
            s += (err[i] / sc).powi(2);
        }
        (s / N as f64).sqrt()
    }

    /// Integrates toward `target`, stopping early at the first terminal event.
    pub fn advance_to(&mut self, target: f64, events: &[Event<'_, N>]) -> Result<Option<EventHit<N>>> {
        let dir = if target >= self.t { 1.0 } else { -1.0 };
        let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(self.t, &self.y)).collect();
        while (target - self.t) * dir > 0.0 {
            if self.steps >= self.opts.max_steps {
                return Err(PmeError::Convergence(format!("step budget exhausted at t = {}", self.t)));
            }
            let remaining = (target - self.t).abs();
            let mut h = self.h.min(remaining);
            let last = h >= remaining;
            let (y_new, err) = self.raw_step(self.t, &self.y, dir * h);
            let en = self.err_norm(&self.y, &y_new, &err);
            if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                self.h = h * 0.2;
                if self.h < 1e-300 {
                    return Err(PmeError::Convergence(format!("step size underflow at t = {}", self.t)));
                }
                continue;
            }
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            if en > 1.0 {
                self.h = h * factor;
                if self.h < 1e-300 {
                    return Err(PmeError::Convergence(format!("step size underflow at t = {}", self.t)));
                }
                continue;
            }
            self.steps += 1;
            let t_new = if last { target } else { self.t + dir * h };
            for (idx, ev) in events.iter().enumerate() {
                let g1 = (ev.g)(t_new, &y_new);
                let g0 = g_prev[idx];
                let crosses = (g0 < 0.0 && g1 >= 0.0 && ev.direction >= 0) || (g0 > 0.0 && g1 <= 0.0 && ev.direction <= 0);
                if crosses && ev.terminal {
                    let hit = self.locate(idx, ev, g0, g1, t_new - self.t);
                    self.t = hit.t;
                    self.y = hit.y;
                    return Ok(Some(hit));
                }
                g_prev[idx] = g1;
            }
            self.t = t_new;
            self.y = y_new;
            if !last {
                h *= factor;
                self.h = h;
            }
        }
        Ok(None)
    }

    /// Illinois iteration on the step length, each trial being a fresh
    /// fifth-order step from the start of the bracketing step.
    fn locate(&self, index: usize, ev: &Event<'_, N>, g0: f64, g1: f64, span: f64) -> EventHit<N> {
        let (mut a, mut fa) = (0.0, g0);
        let (mut b, mut fb) = (span, g1);
        let mut yb = self.raw_step(self.t, &self.y, span).0;
        let mut side = 0;
        for _ in 0..200 {
            if (b - a).abs() <= 4.0 * f64::EPSILON * (self.t.abs() + span.abs()) {
                break;
            }
            let c = (a * fb - b * fa) / (fb - fa);
            let c = if c.is_finite() && (c - a) * (c - b) < 0.0 { c } else { 0.5 * (a + b) };
            let yc = self.raw_step(self.t, &self.y, c).0;
            let fc = (ev.g)(self.t + c, &yc);
            if fc == 0.0 {
                return EventHit { index, t: self.t + c, y: yc };
            }
            if (fc > 0.0) == (fb > 0.0) {
                b = c;
                fb = fc;
                yb = yc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            } else {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            }
        }
        EventHit { index, t: self.t + b, y: yb }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut s = Dopri5::new(|_t, y: &[f64; 1]| [-y[0]], 0.0, [1.0], OdeOptions::default());
        s.advance_to(2.0, &[]).unwrap();
        assert!((s.y[0] - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let mut s = Dopri5::new(|_t, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], OdeOptions::default());
        s.advance_to(-1.0, &[]).unwrap();
        assert!((s.y[0] - (-1.0f64).sin()).abs() < 1e-11);
    }

    #[test]
    fn event_located_precisely() {
        let mut s = Dopri5::new(|_t, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], OdeOptions::default());
        let ev = [Event::new(|_t, y: &[f64; 2]| y[0], -1, true)];
        let hit = s.advance_to(10.0, &ev).unwrap().unwrap();
        assert!((hit.t - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn event_direction_filter() {
        let mut s = Dopri5::new(|_t, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], OdeOptions::default());
        let ev = [Event::new(|_t, y: &[f64; 2]| y[0], 1, true)];
        let hit = s.advance_to(10.0, &ev).unwrap().unwrap();
        assert!((hit.t - 1.5 * std::f64::consts::PI).abs() < 1e-10);
    }
}
