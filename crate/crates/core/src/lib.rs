#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod concavity_monitor;
pub mod error;
pub mod experiments;
pub mod hessian_calculus;
pub mod initial_data;
pub mod ode;
pub mod params;
pub mod pme_solver;
pub mod polynomial;
pub mod scalar;

pub use error::{PmeError, Result};
pub use params::PmeParams;

/// Derivative jet in double precision.
pub type Jet = hessian_calculus::Jet4<f64>;
/// Local polynomial in double precision.
pub type Polynomial = polynomial::LocalPolynomial<f64>;
/// Local polynomial with exact rational coefficients.
pub type ExactPolynomial = polynomial::LocalPolynomial<num_rational::Ratio<i64>>;
