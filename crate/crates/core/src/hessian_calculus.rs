//! Pointwise evolution of `w11` for `w = v^alpha` (or `w = log v`) under the
//! pressure equation, and the closed-form breaking inequalities.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{PmeError, Result};
use crate::params::PmeParams;
use crate::polynomial::LocalPolynomial;
use crate::scalar::{int, Real};

/// Derivatives up to order four that enter the `w11` evolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet4<T> {
    pub w: T,
    pub w1: T,
    pub w2: T,
    pub w11: T,
    pub w12: T,
    pub w22: T,
    pub w111: T,
    pub w112: T,
    pub w122: T,
    pub w222: T,
    pub w1111: T,
    pub w1122: T,
}

impl<T: Num + Copy> Jet4<T> {
    pub fn constant(w: T) -> Self {
        Jet4 {
            w,
            w1: T::zero(),
            w2: T::zero(),
            w11: T::zero(),
            w12: T::zero(),
            w22: T::zero(),
            w111: T::zero(),
            w112: T::zero(),
            w122: T::zero(),
            w222: T::zero(),
            w1111: T::zero(),
            w1122: T::zero(),
        }
    }
}

pub fn jet_from_polynomial<T: Num + Copy>(p: &LocalPolynomial<T>, point: [T; 2]) -> Jet4<T> {
    let d = |i, j| p.partial_at(i, j, point[0], point[1]);
    Jet4 {
        w: d(0, 0),
        w1: d(1, 0),
        w2: d(0, 1),
        w11: d(2, 0),
        w12: d(1, 1),
        w22: d(0, 2),
        w111: d(3, 0),
        w112: d(2, 1),
        w122: d(1, 2),
        w222: d(0, 3),
        w1111: d(4, 0),
        w1122: d(2, 2),
    }
}

/// Which printed polynomial family breaks concavity for a given alpha.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakingCase {
    /// alpha in [0, 1/2) or alpha = 1; parameter `a`.
    Linear,
    /// alpha in (1/2, 1); parameter `b`.
    Scaled,
}

pub fn breaking_case(alpha: f64) -> Result<BreakingCase> {
    if alpha == 0.5 {
        Err(PmeError::InvalidParameter("alpha = 1/2 has no breaking inequality".into()))
    } else if (0.0..0.5).contains(&alpha) || alpha == 1.0 {
        Ok(BreakingCase::Linear)
    } else if alpha > 0.5 && alpha < 1.0 {
        Ok(BreakingCase::Scaled)
    } else {
        Err(PmeError::InvalidParameter(format!("alpha {alpha} outside [0,1]")))
    }
}

/// `1 + a x1 - x2^2 + x1 x2^2 - x1^4 - 2 x1^2 x2^2`.
pub fn linear_case_polynomial<T: Num + Copy>(a: T) -> LocalPolynomial<T> {
    LocalPolynomial::from_terms(&[
        ((0, 0), T::one()),
        ((1, 0), a),
        ((0, 2), int(-1)),
        ((1, 2), T::one()),
        ((4, 0), int(-1)),
        ((2, 2), int(-2)),
    ])
}

/// `1 + alpha s x1 / (b (1-alpha)) - b^2 x2^2 + b s x1 x2^2 - x1^4/(12 b^2) - x1^2 x2^2`
/// with `s = sqrt(3/2 - alpha)`.
pub fn scaled_case_polynomial<T: Real>(alpha: T, b: T) -> LocalPolynomial<T> {
    let one = T::one();
    let s = (T::lit(1.5) - alpha).sqrt();
    LocalPolynomial::from_terms(&[
        ((0, 0), one),
        ((1, 0), alpha * s / (b * (one - alpha))),
        ((0, 2), -b * b),
        ((1, 2), b * s),
        ((4, 0), -one / (T::lit(12.0) * b * b)),
        ((2, 2), -one),
    ])
}

/// The breaking polynomial for `params.alpha` with parameter `a` or `b`.
pub fn case_polynomial(params: &PmeParams, param: f64) -> Result<LocalPolynomial<f64>> {
    Ok(match breaking_case(params.alpha)? {
        BreakingCase::Linear => linear_case_polynomial(param),
        BreakingCase::Scaled => scaled_case_polynomial(params.alpha, param),
    })
}

/// Time derivative of `w11` for `w = v^alpha` (alpha > 0) or `w = log v`
/// (alpha = 0) when `v` solves the pressure equation, summed over k = 1, 2.
pub fn eval_w11_rate<T: Real>(jet: &Jet4<T>, params: &PmeParams) -> Result<T> {
    let j = jet;
    let m1 = T::lit(params.m - 1.0);
    let m = T::lit(params.m);
    let two = T::lit(2.0);
    let four = T::lit(4.0);

    let w_kk = j.w11 + j.w22;
    let w_kk1 = j.w111 + j.w122;
    let w_kk11 = j.w1111 + j.w1122;
    let grad2 = j.w1 * j.w1 + j.w2 * j.w2;
    let wk_wk1 = j.w1 * j.w11 + j.w2 * j.w12;
    let w1k2 = j.w11 * j.w11 + j.w12 * j.w12;
    let wk_wk11 = j.w1 * j.w111 + j.w2 * j.w112;
    let w1s = j.w1 * j.w1;

    if params.alpha == 0.0 {
        let e = j.w.exp();
        let s = m1 * w_kk11
            + two * m1 * j.w1 * w_kk1
            + m1 * w1s * w_kk
            + m1 * j.w11 * w_kk
            + m * w1s * grad2
            + m * j.w11 * grad2
            + four * m * j.w1 * wk_wk1
            + two * m * w1k2
            + two * m * wk_wk11;
        return Ok(e * s);
    }
    if !(j.w > T::zero()) {
        return Err(PmeError::Domain(format!("jet value must be positive, got {:?}", j.w)));
    }
    let p = T::lit(1.0 / params.alpha);
    let kk = T::lit(1.0 + (params.m - 1.0) * (1.0 - params.alpha));
    let one = T::one();
    let pw = |e: T| j.w.powf(e);

    let lead = m1 * pw(p) * w_kk11
        + two * m1 * p * pw(p - one) * j.w1 * w_kk1
        + m1 * p * (p - one) * pw(p - two) * w1s * w_kk
        + m1 * p * pw(p - one) * j.w11 * w_kk;
    let brace = (p - two) * (p - one) * pw(p - T::lit(3.0)) * w1s * grad2
        + (p - one) * pw(p - two) * j.w11 * grad2
        + four * (p - one) * pw(p - two) * j.w1 * wk_wk1
        + two * pw(p - one) * w1k2
        + two * pw(p - one) * wk_wk11;
    Ok(lead + p * kk * brace)
}

/// Closed-form left-hand side of the breaking inequality for the given
/// `a` (linear case) or `b` (scaled case). For alpha = 0 the common factor
/// `e^w` is left out.
pub fn breaking_lhs<T: Real>(params: &PmeParams, param: T) -> Result<T> {
    let case = breaking_case(params.alpha)?;
    let m1 = T::lit(params.m - 1.0);
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let a = param;
    if params.alpha == 0.0 {
        return Ok(-T::lit(32.0) * m1 + four * m1 * a - two * a * a * m1 + T::lit(params.m) * a.powi(4));
    }
    let al = T::lit(params.alpha);
    let kk = T::lit(1.0 + (params.m - 1.0) * (1.0 - params.alpha));
    let p = one / al;
    Ok(match case {
        BreakingCase::Linear => {
            -T::lit(32.0) * m1 + four * m1 * p * a - two * m1 * p * (p - one) * a * a
                + p * (p - two) * (p - one) * kk * a.powi(4)
        }
        BreakingCase::Scaled => {
            let b = param;
            let q = T::lit(1.5) - al;
            -m1 * (two / (b * b) + four) + two * m1 * q / (one - al)
                + (one - two * al) * kk * al * q * q / (b.powi(4) * (one - al).powi(3))
        }
    })
}

/// Smallest positive integer parameter with a positive breaking inequality.
pub fn select_breaking_parameter(params: &PmeParams) -> Result<f64> {
    params.validate()?;
    breaking_case(params.alpha)?;
    for k in 1..=1_000_000u32 {
        let v = f64::from(k);
        if breaking_lhs(params, v)? > 0.0 {
            return Ok(v);
        }
    }
    Err(PmeError::Convergence("no breaking parameter below 10^6".into()))
}

/// Jet of the breaking polynomial at the origin.
pub fn case_jet(params: &PmeParams, param: f64) -> Result<Jet4<f64>> {
    Ok(jet_from_polynomial(&case_polynomial(params, param)?, [0.0, 0.0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64, alpha: f64) -> PmeParams {
        PmeParams::planar(m, alpha).unwrap()
    }

    #[test]
    fn linear_case_table() {
        let j = jet_from_polynomial(&linear_case_polynomial(1.0), [0.0, 0.0]);
        assert_eq!((j.w, j.w1, j.w22, j.w122, j.w1111, j.w1122), (1.0, 1.0, -2.0, 2.0, -24.0, -8.0));
        assert_eq!((j.w111, j.w112, j.w11, j.w12, j.w2), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn scaled_case_table() {
        let j = jet_from_polynomial(&scaled_case_polynomial::<f64>(0.75, 2.0), [0.0, 0.0]);
        let s = 0.75f64.sqrt();
        assert!((j.w22 + 8.0).abs() < 1e-14);
        assert!((j.w122 - 4.0 * s).abs() < 1e-14);
        assert!((j.w1 - 0.75 * s / 0.5).abs() < 1e-14);
        assert!((j.w1111 + 0.5).abs() < 1e-14);
        assert!((j.w1122 + 4.0).abs() < 1e-14);
    }

    #[test]
    fn anchors() {
        assert!((breaking_lhs::<f64>(&p(2.0, 0.25), 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((breaking_lhs::<f64>(&p(2.0, 0.75), 2.0).unwrap() - 0.4453125).abs() < 1e-12);
        assert!(breaking_lhs::<f64>(&p(5.0, 1.0), 8.0).unwrap().abs() < 1e-12);
        assert!((breaking_lhs::<f64>(&p(2.0, 0.0), 3.0).unwrap() - 124.0).abs() < 1e-12);
        assert!(breaking_lhs::<f64>(&p(2.0, 0.5), 1.0).is_err());
    }

    #[test]
    fn selection() {
        assert_eq!(select_breaking_parameter(&p(2.0, 1.0)).unwrap(), 9.0);
        assert_eq!(select_breaking_parameter(&p(2.0, 0.0)).unwrap(), 3.0);
        assert_eq!(select_breaking_parameter(&p(2.0, 0.25)).unwrap(), 1.0);
        assert_eq!(select_breaking_parameter(&p(2.0, 0.75)).unwrap(), 2.0);
    }

    #[test]
    fn rate_on_case_jets() {
        let r = eval_w11_rate(&case_jet(&p(2.0, 1.0), 9.0).unwrap(), &p(2.0, 1.0)).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        let r = eval_w11_rate(&case_jet(&p(2.0, 0.0), 3.0).unwrap(), &p(2.0, 0.0)).unwrap();
        assert!((r - 124.0 * std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn works_in_single_precision() {
        let j = jet_from_polynomial(&linear_case_polynomial(1.0f32), [0.0, 0.0]);
        let r = eval_w11_rate(&j, &p(2.0, 0.25)).unwrap();
        assert!((r - 2.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_nonpositive_value() {
        assert!(eval_w11_rate(&Jet4::constant(0.0), &p(2.0, 0.3)).is_err());
        assert_eq!(eval_w11_rate(&Jet4::constant(0.0), &p(2.0, 0.0)).unwrap(), 0.0);
    }
}
