use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::{self, RootSet};
use crate::error::Result;

/// Polynomial in one complex variable, coefficients in ascending degree.
/// Trailing exact zeros are trimmed, so the last stored coefficient is the
/// leading one (or the list is empty for the zero polynomial).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct UnivariatePolynomial {
    coeffs: Vec<Complex64>,
}

impl From<Vec<Complex64>> for UnivariatePolynomial {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Self::new(coeffs)
    }
}

impl From<UnivariatePolynomial> for Vec<Complex64> {
    fn from(p: UnivariatePolynomial) -> Self {
        p.coeffs
    }
}

impl UnivariatePolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, &r| {
            &acc * &Self::new(vec![-r, Complex64::new(1.0, 0.0)])
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// `sum |c_k| |x|^k`, the magnitude scale that rounding errors in
    /// `eval(x)` are measured against.
    pub fn eval_abs(&self, x: Complex64) -> f64 {
        let r = x.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Zero out coefficients below `rel` times the largest one.
    pub fn trim_relative(&self, rel: f64) -> Self {
        let cut = self.max_abs_coeff() * rel;
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.norm() <= cut { Complex64::new(0.0, 0.0) } else { c })
                .collect(),
        )
    }

    /// Quotient of long division, dropping the remainder. Used only where
    /// the division is known to be exact.
    pub fn div_exact(&self, divisor: &Self) -> Self {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.coeffs.len() < divisor.coeffs.len() {
            return Self::zero();
        }
        let mut rem = self.coeffs.clone();
        let dl = divisor.coeffs.len();
        let lead = divisor.leading();
        let qlen = rem.len() - dl + 1;
        let mut q = vec![Complex64::new(0.0, 0.0); qlen];
        for i in (0..qlen).rev() {
            let c = rem[i + dl - 1] / lead;
            q[i] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
        Self::new(q)
    }

    /// Cauchy root bound: the positive root of
    /// `|a_n| x^n - sum_{k<n} |a_k| x^k`. All roots lie in `|x| <= bound`.
    pub fn cauchy_bound(&self) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 0.0;
        }
        let lead = self.leading().norm();
        let rest: Vec<f64> = self.coeffs[..n].iter().map(|c| c.norm() / lead).collect();
        if rest.iter().all(|&c| c == 0.0) {
            return 0.0;
        }
        let g = |x: f64| -> f64 {
            let tail = rest.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            x.powi(n as i32) - tail
        };
        // g(0) < 0, g increases past its single positive root
        let mut hi = 1.0 + rest.iter().cloned().fold(0.0, f64::max);
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }

    pub fn roots(&self, tol: f64) -> Result<RootSet> {
        roots::roots(self, tol)
    }
}

impl Add for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;

    fn add(self, rhs: Self) -> UnivariatePolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        UnivariatePolynomial::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;

    fn sub(self, rhs: Self) -> UnivariatePolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        UnivariatePolynomial::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;

    fn neg(self) -> UnivariatePolynomial {
        UnivariatePolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;

    fn mul(self, rhs: Self) -> UnivariatePolynomial {
        if self.is_zero() || rhs.is_zero() {
            return UnivariatePolynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UnivariatePolynomial::new(out)
    }
}
