//! Scalar abstractions shared by the formula-level code.

use num_traits::{Float, FromPrimitive, Num};
use std::fmt::Debug;

/// Floating point type usable by the pointwise formulas (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Small integer in any numeric ring, built from `one()`. Works for rationals too.
pub fn int<T: Num + Copy>(k: i64) -> T {
    let mut acc = T::zero();
    for _ in 0..k.unsigned_abs() {
        acc = acc + T::one();
    }
    if k < 0 {
        T::zero() - acc
    } else {
        acc
    }
}

/// Value with first and second derivative along one variable.
///
/// Used for the radial profiles and the cutoff, where closed-form second
/// derivatives are needed but writing them out by hand is error prone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Dual2 {
    pub fn var(x: f64) -> Self {
        Dual2 { v: x, d: 1.0, dd: 0.0 }
    }
    pub fn cst(x: f64) -> Self {
        Dual2 { v: x, d: 0.0, dd: 0.0 }
    }
    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Dual2 { v: e, d: e * self.d, dd: e * (self.dd + self.d * self.d) }
    }
    pub fn ln(self) -> Self {
        Dual2 { v: self.v.ln(), d: self.d / self.v, dd: self.dd / self.v - self.d * self.d / (self.v * self.v) }
    }
    pub fn powf(self, p: f64) -> Self {
        let a = self.v.powf(p - 2.0);
        let f1 = p * a * self.v;
        let f2 = p * (p - 1.0) * a;
        Dual2 { v: a * self.v * self.v, d: f1 * self.d, dd: f1 * self.dd + f2 * self.d * self.d }
    }
    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        Dual2 { v: r, d: -self.d * r * r, dd: -self.dd * r * r + 2.0 * self.d * self.d * r * r * r }
    }
}

impl std::ops::Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2 { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd }
    }
}
impl std::ops::Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        Dual2 { v: self.v - o.v, d: self.d - o.d, dd: self.dd - o.dd }
    }
}
impl std::ops::Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2 { v: self.v * o.v, d: self.d * o.v + self.v * o.d, dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd }
    }
}
impl std::ops::Div for Dual2 {
    type Output = Dual2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Dual2) -> Dual2 {
        self * o.recip()
    }
}
impl std::ops::Mul<f64> for Dual2 {
    type Output = Dual2;
    fn mul(self, s: f64) -> Dual2 {
        Dual2 { v: self.v * s, d: self.d * s, dd: self.dd * s }
    }
}
impl std::ops::Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self * -1.0
    }
}
