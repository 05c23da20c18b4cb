use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::{self, RootSet};
use super::UnivariatePolynomial;
use crate::error::{Error, Result};

/// `f(z, w) = sum_i c_i(z) w^i` with a nonzero constant leading coefficient
/// `c_n` (no poles) and `n >= 2`.
///
/// Internally the coefficients are stored in ascending powers of `w`; the
/// JSON form lists them in descending order (`coeffs_w_desc`), each one a
/// list of `[re, im]` pairs in ascending powers of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialJson", into = "PolynomialJson")]
pub struct BivariatePolynomial {
    w_coeffs: Vec<UnivariatePolynomial>,
}

#[derive(Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    pub coeffs_w_desc: Vec<Vec<Complex64>>,
}

impl TryFrom<PolynomialJson> for BivariatePolynomial {
    type Error = Error;

    fn try_from(j: PolynomialJson) -> Result<Self> {
        if j.coeffs_w_desc.len() != j.n + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} w-coefficients for n = {}, got {}",
                j.n + 1,
                j.n,
                j.coeffs_w_desc.len()
            )));
        }
        let mut w_coeffs: Vec<UnivariatePolynomial> =
            j.coeffs_w_desc.into_iter().map(UnivariatePolynomial::new).collect();
        w_coeffs.reverse();
        Self::new(w_coeffs)
    }
}

impl From<BivariatePolynomial> for PolynomialJson {
    fn from(f: BivariatePolynomial) -> Self {
        PolynomialJson {
            n: f.degree_w(),
            coeffs_w_desc: f.w_coeffs.iter().rev().map(|p| p.coeffs().to_vec()).collect(),
        }
    }
}

/// Expression text in the syntax accepted by `parse_polynomial` when all
/// coefficients are real; complex ones print as `(a+bi)`.
impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.w_coeffs.iter().enumerate().rev() {
            for (j, a) in c.coeffs().iter().enumerate().rev() {
                if *a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mono = match (i, j) {
                    (0, 0) => String::new(),
                    (i, 0) => power("w", i),
                    (0, j) => power("z", j),
                    (i, j) => format!("{} {}", power("w", i), power("z", j)),
                };
                if a.im == 0.0 {
                    let (neg, mag) = (a.re < 0.0, a.re.abs());
                    match (first, neg) {
                        (true, true) => write!(f, "-")?,
                        (true, false) => {}
                        (false, true) => write!(f, " - ")?,
                        (false, false) => write!(f, " + ")?,
                    }
                    if mono.is_empty() {
                        write!(f, "{mag}")?;
                    } else if mag == 1.0 {
                        write!(f, "{mono}")?;
                    } else {
                        write!(f, "{mag}*{mono}")?;
                    }
                } else {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "({}{:+}i)", a.re, a.im)?;
                    if !mono.is_empty() {
                        write!(f, "*{mono}")?;
                    }
                }
                first = false;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn power(var: &str, k: usize) -> String {
    if k == 1 {
        var.to_string()
    } else {
        format!("{var}^{k}")
    }
}

impl BivariatePolynomial {
    /// `w_coeffs[i]` is the coefficient of `w^i`.
    pub fn new(w_coeffs: Vec<UnivariatePolynomial>) -> Result<Self> {
        let n = w_coeffs.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::InvalidInput(format!("w-degree must be at least 2, got {n}")));
        }
        let lead = &w_coeffs[n];
        if lead.is_zero() {
            return Err(Error::InvalidInput("leading w-coefficient is zero".into()));
        }
        if !lead.is_constant() {
            return Err(Error::InvalidInput(
                "leading w-coefficient must be a nonzero constant (poles are not supported)".into(),
            ));
        }
        Ok(Self { w_coeffs })
    }

    /// From a dense table `table[i][j]` = coefficient of `w^i z^j`.
    pub fn from_table(table: &[Vec<f64>]) -> Result<Self> {
        Self::new(table.iter().map(|row| UnivariatePolynomial::from_real(row)).collect())
    }

    pub fn degree_w(&self) -> usize {
        self.w_coeffs.len() - 1
    }

    pub fn degree_z(&self) -> usize {
        self.w_coeffs.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn w_coeffs(&self) -> &[UnivariatePolynomial] {
        &self.w_coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.w_coeffs[self.degree_w()].coeff(0)
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.w_coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, p| acc * w + p.eval(z))
    }

    /// Coefficients of `w -> f(z, w)` in ascending powers of `w`.
    pub fn fiber_coeffs(&self, z: Complex64) -> Vec<Complex64> {
        self.w_coeffs.iter().map(|p| p.eval(z)).collect()
    }

    pub fn fiber_polynomial(&self, z: Complex64) -> UnivariatePolynomial {
        UnivariatePolynomial::new(self.fiber_coeffs(z))
    }

    /// Roots of `w -> f(z, w)`, `n` counted with multiplicity.
    pub fn fiber_roots(&self, z: Complex64, tol: f64) -> Result<RootSet> {
        roots::roots(&self.fiber_polynomial(z), tol)
    }

    /// Raw fiber roots, optionally continuing from `guesses`.
    pub fn fiber_roots_raw(&self, z: Complex64, guesses: Option<&[Complex64]>, tol: f64) -> Result<Vec<Complex64>> {
        roots::solve(&self.fiber_coeffs(z), guesses, tol)
    }

    pub fn partial_w(&self) -> Vec<UnivariatePolynomial> {
        self.w_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, p)| p.scale(Complex64::new(i as f64, 0.0)))
            .collect()
    }

    pub fn dw(&self, z: Complex64, w: Complex64) -> Complex64 {
        eval_in_w(&self.partial_w(), z, w)
    }

    pub fn dww(&self, z: Complex64, w: Complex64) -> Complex64 {
        let second: Vec<UnivariatePolynomial> = self
            .w_coeffs
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, p)| p.scale(Complex64::new((i * (i - 1)) as f64, 0.0)))
            .collect();
        eval_in_w(&second, z, w)
    }

    pub fn dz(&self, z: Complex64, w: Complex64) -> Complex64 {
        let dz: Vec<UnivariatePolynomial> = self.w_coeffs.iter().map(|p| p.derivative()).collect();
        eval_in_w(&dz, z, w)
    }

    pub fn dwz(&self, z: Complex64, w: Complex64) -> Complex64 {
        let mixed: Vec<UnivariatePolynomial> = self
            .w_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, p)| p.derivative().scale(Complex64::new(i as f64, 0.0)))
            .collect();
        eval_in_w(&mixed, z, w)
    }

    /// Magnitude scales for `dw`, `dz`, `dww` at `(z, w)`: the same sums with
    /// every coefficient and argument replaced by its absolute value.
    pub fn derivative_scales(&self, z: Complex64, w: Complex64) -> (f64, f64, f64) {
        let (az, aw) = (z.norm(), w.norm());
        let (mut sw, mut sz, mut sww) = (0.0, 0.0, 0.0);
        for (i, p) in self.w_coeffs.iter().enumerate() {
            for (j, c) in p.coeffs().iter().enumerate() {
                let m = c.norm();
                if i >= 1 {
                    sw += m * i as f64 * az.powi(j as i32) * aw.powi(i as i32 - 1);
                }
                if i >= 2 {
                    sww += m * (i * (i - 1)) as f64 * az.powi(j as i32) * aw.powi(i as i32 - 2);
                }
                if j >= 1 {
                    sz += m * j as f64 * az.powi(j as i32 - 1) * aw.powi(i as i32);
                }
            }
        }
        (sw, sz, sww)
    }

    /// `f + eps * w`
    pub fn add_w_term(&self, eps: Complex64) -> Self {
        let mut w_coeffs = self.w_coeffs.clone();
        w_coeffs[1] = &w_coeffs[1] + &UnivariatePolynomial::constant(eps);
        Self { w_coeffs }
    }

    /// `f + eps`
    pub fn add_constant(&self, eps: Complex64) -> Self {
        let mut w_coeffs = self.w_coeffs.clone();
        w_coeffs[0] = &w_coeffs[0] + &UnivariatePolynomial::constant(eps);
        Self { w_coeffs }
    }
}

fn eval_in_w(w_coeffs: &[UnivariatePolynomial], z: Complex64, w: Complex64) -> Complex64 {
    w_coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, p| acc * w + p.eval(z))
}
