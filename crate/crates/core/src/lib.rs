//! Closed braids of algebraic functions `f(z, w) = 0` along loops in the
//! `z`-plane: braid monodromy by root continuation, quasipositive
//! factorizations for lollipop loops, the labeled graph `B+`, and the
//! converse construction of `(f, loop)` from a quasipositive factorization.

pub mod bplus;
pub mod braid;
pub mod branch;
pub mod error;
pub mod monodromy;
pub mod path;
pub mod poly;
pub mod realization;
pub mod render;

pub use braid::{BraidLetter, BraidWord, Permutation, Positivity, QpFactor, QuasipositiveFactorization, Tristate};
pub use error::{Error, Result};
pub use poly::{BivariatePolynomial, RootSet, UnivariatePolynomial};
