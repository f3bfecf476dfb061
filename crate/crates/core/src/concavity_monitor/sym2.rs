use serde::{Deserialize, Serialize};

/// Symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Sym2 { a11, a12, a22 }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Sym2 { a11: a, a12: 0.0, a22: b }
    }

    /// `u u^T`
    pub fn outer(u: [f64; 2]) -> Self {
        Sym2 { a11: u[0] * u[0], a12: u[0] * u[1], a22: u[1] * u[1] }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym2 { a11: s * self.a11, a12: s * self.a12, a22: s * self.a22 }
    }

    pub fn add(&self, o: &Sym2) -> Self {
        Sym2 { a11: self.a11 + o.a11, a12: self.a12 + o.a12, a22: self.a22 + o.a22 }
    }

    /// Half-width of the spectrum, `sqrt(((a11-a22)/2)^2 + a12^2)`, free of cancellation.
    pub fn half_gap(&self) -> f64 {
        (0.5 * (self.a11 - self.a22)).hypot(self.a12)
    }

    /// `(lambda1, lambda2)` with `lambda1 >= lambda2`.
    ///
    /// The eigenvalue of larger magnitude is formed without cancellation and
    /// the other one recovered from the determinant.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * self.trace();
        let r = self.half_gap();
        if r == 0.0 {
            return (mid, mid);
        }
        if mid >= 0.0 {
            let big = mid + r;
            let small = if big != 0.0 { self.det() / big } else { 0.0 };
            (big, small.min(big))
        } else {
            let big = mid - r;
            let small = self.det() / big;
            (small.max(big), big)
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a22.abs())
    }
}
