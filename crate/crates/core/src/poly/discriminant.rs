//! Discriminant in `w` of a bivariate polynomial, via the Sylvester matrix of
//! `f` and `df/dw` with polynomial entries.

use num_complex::Complex64;

use super::{BivariatePolynomial, UnivariatePolynomial};
use crate::error::{Error, Result};

/// Sylvester matrices up to this size are expanded exactly (Leibniz over
/// column subsets); larger ones use fraction-free elimination.
const EXPANSION_MAX_SIZE: usize = 9;

/// Fibers whose closest two roots are nearer than this (relative to the
/// root size) at every sample point indicate a repeated factor.
const REPEATED_ROOT_GAP: f64 = 1e-6;

/// Generic sample points for the repeated-factor test.
const SAMPLES: [(f64, f64); 3] = [(0.7213, 0.3358), (-0.5496, 0.6642), (0.1327, -0.9117)];

/// Coefficients smaller than this fraction of the largest are rounding noise.
const NOISE_TRIM: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterminantMethod {
    Expansion,
    Bareiss,
}

/// `Disc_w(f)` normalized so that at every `z`
/// `Disc(z) = f_n^{2n-2} prod_{j<k} (w_j - w_k)^2` over the fiber roots.
/// Its roots are exactly the branch locus `B` (the leading coefficient is a
/// nonzero constant, so there are no pole contributions).
pub fn discriminant_w(f: &BivariatePolynomial) -> Result<UnivariatePolynomial> {
    let n = f.degree_w();
    let method = if 2 * n - 1 <= EXPANSION_MAX_SIZE {
        DeterminantMethod::Expansion
    } else {
        DeterminantMethod::Bareiss
    };
    discriminant_with(f, method)
}

pub fn discriminant_with(f: &BivariatePolynomial, method: DeterminantMethod) -> Result<UnivariatePolynomial> {
    let n = f.degree_w();
    let df = f.partial_w();
    let m = sylvester(f.w_coeffs(), &df);
    let res = match method {
        DeterminantMethod::Expansion => det_expansion(&m),
        DeterminantMethod::Bareiss => det_bareiss(m),
    };
    let sign = if (n * (n - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let disc = res.scale(Complex64::new(sign, 0.0) / f.leading());
    if disc.is_zero() || has_repeated_factor(f) {
        return Err(Error::RepeatedFactor);
    }
    Ok(disc.trim_relative(NOISE_TRIM))
}

/// Sylvester matrix of `a` (degree p) and `b` (degree q) in `w`, both given in
/// ascending powers of `w`; size p + q, coefficients laid out descending.
fn sylvester(a: &[UnivariatePolynomial], b: &[UnivariatePolynomial]) -> Vec<Vec<UnivariatePolynomial>> {
    let p = a.len() - 1;
    let q = b.len() - 1;
    let size = p + q;
    let mut m = vec![vec![UnivariatePolynomial::zero(); size]; size];
    for r in 0..q {
        for (i, c) in a.iter().rev().enumerate() {
            m[r][r + i] = c.clone();
        }
    }
    for r in 0..p {
        for (i, c) in b.iter().rev().enumerate() {
            m[q + r][r + i] = c.clone();
        }
    }
    m
}

/// Leibniz expansion organized as a dynamic program over the set of used
/// columns: row `r` is matched against every free column in turn.
fn det_expansion(m: &[Vec<UnivariatePolynomial>]) -> UnivariatePolynomial {
    let size = m.len();
    let mut dp: Vec<Option<UnivariatePolynomial>> = vec![None; 1 << size];
    dp[0] = Some(UnivariatePolynomial::constant(Complex64::new(1.0, 0.0)));
    for mask in 0..(1usize << size) {
        let Some(acc) = dp[mask].take() else { continue };
        if mask == (1 << size) - 1 {
            dp[mask] = Some(acc);
            break;
        }
        let r = mask.count_ones() as usize;
        for (c, entry) in m[r].iter().enumerate() {
            if mask & (1 << c) != 0 || entry.is_zero() {
                continue;
            }
            let above = (mask >> (c + 1)).count_ones();
            let mut term = &acc * entry;
            if above % 2 == 1 {
                term = -&term;
            }
            let slot = &mut dp[mask | (1 << c)];
            *slot = Some(match slot.take() {
                Some(prev) => &prev + &term,
                None => term,
            });
        }
    }
    dp[(1 << size) - 1].take().unwrap_or_else(UnivariatePolynomial::zero)
}

/// Bareiss fraction-free elimination; every division is exact.
fn det_bareiss(mut m: Vec<Vec<UnivariatePolynomial>>) -> UnivariatePolynomial {
    let size = m.len();
    let mut negate = false;
    let mut prev = UnivariatePolynomial::constant(Complex64::new(1.0, 0.0));
    for k in 0..size - 1 {
        if m[k][k].is_zero() {
            match (k + 1..size).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return UnivariatePolynomial::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev);
            }
            m[i][k] = UnivariatePolynomial::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[size - 1][size - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// A square factor shows up as a double root in every fiber.
fn has_repeated_factor(f: &BivariatePolynomial) -> bool {
    SAMPLES.iter().all(|&(re, im)| {
        let Ok(roots) = f.fiber_roots_raw(Complex64::new(re, im), None, super::DEFAULT_TOL) else {
            return false;
        };
        let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let mut gap = f64::INFINITY;
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                gap = gap.min((roots[i] - roots[j]).norm());
            }
        }
        gap < REPEATED_ROOT_GAP * scale
    })
}
