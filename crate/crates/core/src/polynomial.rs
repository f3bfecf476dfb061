//! Bivariate polynomials of total degree at most four, with exact
//! differentiation and truncated Taylor arithmetic.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::scalar::{int, Real};

pub const MAX_DEGREE: usize = 4;
const LEN: usize = 15;

fn slot(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

fn factorial<T: Num + Copy>(k: usize) -> T {
    (1..=k as i64).fold(T::one(), |acc, q| acc * int::<T>(q))
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, q| acc * (n - q) as i64 / (q + 1) as i64)
}

/// Coefficients of `sum c_ij x1^i x2^j` with `i + j <= 4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalPolynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Num + Copy> LocalPolynomial<T> {
    pub fn zero() -> Self {
        LocalPolynomial { coeffs: vec![T::zero(); LEN] }
    }

    pub fn constant(c: T) -> Self {
        let mut p = Self::zero();
        p.set(0, 0, c);
        p
    }

    /// Builds from `((i, j), c)` terms; repeated monomials add up.
    ///
    /// # Panics
    /// If a term has total degree above four.
    pub fn from_terms(terms: &[((usize, usize), T)]) -> Self {
        let mut p = Self::zero();
        for &((i, j), c) in terms {
            assert!(i + j <= MAX_DEGREE, "monomial x1^{i} x2^{j} exceeds degree 4");
            let s = slot(i, j);
            p.coeffs[s] = p.coeffs[s] + c;
        }
        p
    }

    pub fn coeff(&self, i: usize, j: usize) -> T {
        if i + j > MAX_DEGREE {
            T::zero()
        } else {
            self.coeffs[slot(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: T) {
        self.coeffs[slot(i, j)] = c;
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), T)> + '_ {
        (0..=MAX_DEGREE).flat_map(move |d| (0..=d).map(move |j| ((d - j, j), self.coeff(d - j, j))))
    }

    pub fn eval(&self, x: T, y: T) -> T {
        let mut s = T::zero();
        for ((i, j), c) in self.terms() {
            let mut t = c;
            for _ in 0..i {
                t = t * x;
            }
            for _ in 0..j {
                t = t * y;
            }
            s = s + t;
        }
        s
    }

    /// Exact partial derivative `d^(dx+dy) / dx1^dx dx2^dy`.
    pub fn derivative(&self, dx: usize, dy: usize) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            if i >= dx && j >= dy {
                let f: T = factorial::<T>(i) * factorial::<T>(j);
                let g: T = factorial::<T>(i - dx) * factorial::<T>(j - dy);
                out.set(i - dx, j - dy, c * f / g);
            }
        }
        out
    }

    /// `[p, p_x, p_y, p_xx, p_xy, p_yy]` at a point, without building derivative polynomials.
    pub fn second_jet(&self, x: T, y: T) -> [T; 6] {
        let mut px = [T::one(); MAX_DEGREE + 1];
        let mut py = [T::one(); MAX_DEGREE + 1];
        for k in 1..=MAX_DEGREE {
            px[k] = px[k - 1] * x;
            py[k] = py[k - 1] * y;
        }
        let pw = |p: &[T; MAX_DEGREE + 1], k: usize, d: usize| -> T {
            if k < d {
                T::zero()
            } else {
                let f = (0..d).fold(T::one(), |acc, q| acc * int::<T>((k - q) as i64));
                f * p[k - d]
            }
        };
        let mut out = [T::zero(); 6];
        for ((i, j), c) in self.terms() {
            let orders = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
            for (o, &(dx, dy)) in out.iter_mut().zip(orders.iter()) {
                *o = *o + c * pw(&px, i, dx) * pw(&py, j, dy);
            }
        }
        out
    }

    pub fn partial_at(&self, dx: usize, dy: usize, x: T, y: T) -> T {
        self.derivative(dx, dy).eval(x, y)
    }

    /// Re-expansion around `(x0, y0)`: the result `q` satisfies `q(s, t) = p(x0 + s, y0 + t)`.
    pub fn shifted(&self, x0: T, y0: T) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            for a in 0..=i {
                for b in 0..=j {
                    let mut t = c * int::<T>(binomial(i, a)) * int::<T>(binomial(j, b));
                    for _ in 0..(i - a) {
                        t = t * x0;
                    }
                    for _ in 0..(j - b) {
                        t = t * y0;
                    }
                    let s = slot(a, b);
                    out.coeffs[s] = out.coeffs[s] + t;
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(&a, &b)| a + b).collect();
        LocalPolynomial { coeffs }
    }

    pub fn scale(&self, s: T) -> Self {
        LocalPolynomial { coeffs: self.coeffs.iter().map(|&a| a * s).collect() }
    }

    /// Product with all monomials above degree four dropped.
    pub fn truncated_mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((i, j), a) in self.terms() {
            for ((k, l), b) in o.terms() {
                if i + j + k + l <= MAX_DEGREE {
                    let s = slot(i + k, j + l);
                    out.coeffs[s] = out.coeffs[s] + a * b;
                }
            }
        }
        out
    }

    /// Truncated composition `f(p)` given `f^(k)(p(0))` for `k = 0..=4`.
    pub fn compose(&self, derivs: [T; 5]) -> Self {
        let mut q = self.clone();
        q.set(0, 0, T::zero());
        let mut out = Self::constant(derivs[0]);
        let mut pow = Self::constant(T::one());
        for (k, &dk) in derivs.iter().enumerate().skip(1) {
            pow = pow.truncated_mul(&q);
            out = out.add(&pow.scale(dk / factorial::<T>(k)));
        }
        out
    }
}

impl<T: Real> LocalPolynomial<T> {
    /// Truncated Taylor expansion of `p^e` at the expansion point (needs `p(0) > 0`).
    pub fn powf(&self, e: T) -> Self {
        let c = self.coeff(0, 0);
        let mut d = [T::zero(); 5];
        let mut fall = T::one();
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = fall * c.powf(e - T::lit(k as f64));
            fall = fall * (e - T::lit(k as f64));
        }
        self.compose(d)
    }

    pub fn exp(&self) -> Self {
        let e = self.coeff(0, 0).exp();
        self.compose([e; 5])
    }

    pub fn ln(&self) -> Self {
        let c = self.coeff(0, 0);
        let one = T::one();
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        self.compose([c.ln(), one / c, -one / (c * c), two / (c * c * c), -six / (c * c * c * c)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn second_jet_matches_partials() {
        let p: LocalPolynomial<f64> = LocalPolynomial::from_terms(&[((0, 0), 1.0), ((1, 0), 3.0), ((1, 2), 1.0), ((4, 0), -1.0), ((2, 2), -2.0), ((0, 3), 0.5)]);
        let (x, y) = (0.3, -0.7);
        let j = p.second_jet(x, y);
        let want = [p.eval(x, y), p.partial_at(1, 0, x, y), p.partial_at(0, 1, x, y), p.partial_at(2, 0, x, y), p.partial_at(1, 1, x, y), p.partial_at(0, 2, x, y)];
        for k in 0..6 {
            assert!((j[k] - want[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_reproduces_values() {
        let p: LocalPolynomial<f64> = LocalPolynomial::from_terms(&[((0, 0), 1.0), ((1, 2), 2.0), ((4, 0), -1.0), ((0, 3), 0.5)]);
        let q = p.shifted(0.3, -0.2);
        for &(s, t) in &[(0.0, 0.0), (0.1, 0.4), (-0.7, 0.2)] {
            assert!((q.eval(s, t) - p.eval(0.3 + s, -0.2 + t)).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_derivatives_in_rationals() {
        let p: LocalPolynomial<Q> = LocalPolynomial::from_terms(&[((2, 2), Q::new(-2, 1)), ((1, 2), Q::new(1, 3))]);
        assert_eq!(p.partial_at(2, 2, Q::from(0), Q::from(0)), Q::new(-8, 1));
        assert_eq!(p.partial_at(1, 2, Q::from(0), Q::from(0)), Q::new(2, 3));
        assert_eq!(p.partial_at(1, 2, Q::from(1), Q::from(0)), Q::new(2, 3) - Q::from(8));
    }

    #[test]
    fn powf_composition_matches_direct_expansion() {
        // (1 + x)^3 is a cubic, so truncation is exact.
        let p: LocalPolynomial<f64> = LocalPolynomial::from_terms(&[((0, 0), 1.0), ((1, 0), 1.0)]);
        let q = p.powf(3.0);
        assert!((q.coeff(1, 0) - 3.0).abs() < 1e-14);
        assert!((q.coeff(2, 0) - 3.0).abs() < 1e-14);
        assert!((q.coeff(3, 0) - 1.0).abs() < 1e-14);
        assert!(q.coeff(4, 0).abs() < 1e-14);
    }

    #[test]
    fn exp_of_ln_is_identity() {
        let p: LocalPolynomial<f64> = LocalPolynomial::from_terms(&[((0, 0), 2.0), ((1, 0), 0.3), ((0, 2), -0.7), ((1, 1), 0.2)]);
        let q = p.ln().exp();
        for ((i, j), c) in p.terms() {
            assert!((q.coeff(i, j) - c).abs() < 1e-13, "{i} {j}");
        }
    }
}
