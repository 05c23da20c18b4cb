//! Aberth–Ehrlich simultaneous iteration with deterministic seeding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::UnivariatePolynomial;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-12;

/// Angular offset of the seed circle, keeps seeds off symmetry axes of
/// real polynomials.
const SEED_PHASE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    /// Largest relative residual `|p(r)| / sum |a_k||r|^k` over the raw roots.
    pub residual: f64,
}

impl RootSet {
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Every root repeated according to its multiplicity.
    pub fn flattened(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

/// All roots of `p`, clustered into distinct roots with multiplicities.
///
/// Roots closer than `sqrt(tol)` times the Cauchy bound are merged into one
/// root (their mean) with the summed multiplicity.
pub fn roots(p: &UnivariatePolynomial, tol: f64) -> Result<RootSet> {
    if p.degree() == 0 {
        return Err(Error::InvalidInput("root finding needs degree >= 1".into()));
    }
    let raw = solve(p.coeffs(), None, tol)?;
    let residual = max_relative_residual(p.coeffs(), &raw);
    let radius = tol.sqrt() * p.cauchy_bound().max(f64::MIN_POSITIVE);
    Ok(RootSet {
        roots: cluster(&raw, radius),
        residual,
    })
}

/// Raw (unclustered) roots of the polynomial with ascending coefficients
/// `coeffs`. With `guesses`, iteration starts there instead of the seed
/// circle; used to continue roots along a path.
pub fn solve(coeffs: &[Complex64], guesses: Option<&[Complex64]>, tol: f64) -> Result<Vec<Complex64>> {
    let p = UnivariatePolynomial::new(coeffs.to_vec());
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidInput("root finding needs degree >= 1".into()));
    }
    // roots at the origin are split off exactly
    let zeros = p.coeffs().iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &p.coeffs()[zeros..];
    let m = n - zeros;
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    if m == 0 {
        return Ok(out);
    }
    let lead = reduced[m];
    let monic: Vec<Complex64> = reduced.iter().map(|&c| c / lead).collect();
    if m == 1 {
        out.push(-monic[0]);
        return Ok(out);
    }

    let mut z: Vec<Complex64> = match guesses {
        Some(g) if g.len() == n => {
            // drop the guesses nearest the origin if roots were split off
            let mut g = g.to_vec();
            g.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            g.split_off(zeros)
        }
        _ => seeds(&monic),
    };
    separate_coincident(&mut z, &monic);

    let eps = f64::EPSILON;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut max_corr: f64 = 0.0;
        for i in 0..m {
            let zi = z[i];
            let (val, der) = eval_with_derivative(&monic, zi);
            let floor = 8.0 * m as f64 * eps * abs_eval(&monic, zi);
            if val.norm() <= floor {
                continue;
            }
            let ratio = val / der;
            let mut sum = Complex64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    sum += 1.0 / (zi - zj);
                }
            }
            let corr = ratio / (1.0 - ratio * sum);
            if !corr.re.is_finite() || !corr.im.is_finite() {
                continue;
            }
            z[i] = zi - corr;
            max_corr = max_corr.max(corr.norm() / (1.0 + zi.norm()));
        }
        if max_corr <= 4.0 * eps {
            converged = true;
            break;
        }
    }
    if z.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::RootsNotConverged {
            degree: n,
            residual: f64::INFINITY,
            best: z,
        });
    }
    let residual = max_relative_residual(&monic, &z);
    if residual > tol || (!converged && residual > tol * 1e-2) {
        return Err(Error::RootsNotConverged {
            degree: n,
            residual,
            best: z,
        });
    }
    out.extend(z);
    Ok(out)
}

fn seeds(monic: &[Complex64]) -> Vec<Complex64> {
    let m = monic.len() - 1;
    let p = UnivariatePolynomial::new(monic.to_vec());
    let radius = p.cauchy_bound().max(1e-300);
    (0..m)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + SEED_PHASE;
            Complex64::from_polar(radius, angle)
        })
        .collect()
}

/// Aberth needs pairwise-distinct starting points.
fn separate_coincident(z: &mut [Complex64], monic: &[Complex64]) {
    let scale = UnivariatePolynomial::new(monic.to_vec()).cauchy_bound().max(1e-300);
    for i in 1..z.len() {
        for j in 0..i {
            if (z[i] - z[j]).norm() <= 1e-12 * scale {
                z[i] += Complex64::from_polar(1e-7 * scale, 0.7 + i as f64);
            }
        }
    }
}

fn eval_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        der = der * x + val;
        val = val * x + c;
    }
    (val, der)
}

fn abs_eval(coeffs: &[Complex64], x: Complex64) -> f64 {
    let r = x.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn max_relative_residual(coeffs: &[Complex64], roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|&r| {
            let (val, _) = eval_with_derivative(coeffs, r);
            let scale = abs_eval(coeffs, r);
            if scale == 0.0 {
                0.0
            } else {
                val.norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Single-linkage clustering of raw roots within `radius`.
pub fn cluster(raw: &[Complex64], radius: f64) -> Vec<Root> {
    let n = raw.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        let mut k = i;
        while g[k] != r {
            let next = g[k];
            g[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in 0..i {
            if (raw[i] - raw[j]).norm() <= radius {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                if a != b {
                    group[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut roots: Vec<Root> = Vec::new();
    let mut members: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &r) in raw.iter().enumerate() {
        let g = find(&mut group, i);
        match members.iter_mut().find(|(id, _)| *id == g) {
            Some((_, v)) => v.push(r),
            None => members.push((g, vec![r])),
        }
    }
    for (_, v) in members {
        let mean = v.iter().sum::<Complex64>() / v.len() as f64;
        roots.push(Root {
            value: mean,
            multiplicity: v.len(),
        });
    }
    // deterministic order: by real part, then imaginary part
    roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    roots
}
