mod bivariate;
mod discriminant;
mod parse;
pub mod roots;
mod univariate;

use num_complex::Complex64;

pub use bivariate::{BivariatePolynomial, PolynomialJson};
pub use discriminant::{discriminant_w, discriminant_with, DeterminantMethod};
pub use parse::parse_polynomial;
pub use roots::{roots, Root, RootSet, DEFAULT_TOL};
pub use univariate::UnivariatePolynomial;

use crate::error::Result;

/// Roots of `w -> f(z, w)`.
pub fn fiber_roots(f: &BivariatePolynomial, z: Complex64, tol: f64) -> Result<RootSet> {
    f.fiber_roots(z, tol)
}
