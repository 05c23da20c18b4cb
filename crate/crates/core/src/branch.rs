//! The branch locus `B`, genericity of the curve over it, the `+eps*w`
//! perturbation, and the choice of the rotation `w -> e^{i theta} w`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{discriminant_w, roots, BivariatePolynomial, Root, DEFAULT_TOL};

pub const DEFAULT_BUDGET: f64 = 1e-2;

/// Perturbation trials are `budget * 2^-k` for `k = 0..=MAX_HALVINGS`.
pub const MAX_HALVINGS: u32 = 12;

/// Branch points closer than this fraction of `max(1, diam B)` are rejected.
pub const SEPARATION_FRACTION: f64 = 1e-4;

pub const THETA_GRID: usize = 720;

/// Relative lower bound on `|f_z|` and `|f_ww|` at the double root.
const TANGENCY_FLOOR: f64 = 1e-6;

/// Largest relative move accepted when polishing a branch point.
const POLISH_REACH: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub z: Complex64,
    pub multiplicity: usize,
    /// Distinct roots of the fiber over `z`, with multiplicities.
    pub fiber: Vec<Root>,
    /// Direction (angle) of the ray of `B+` leaving `z`, along which the two
    /// roots merging at `z` have equal rotated real part; set by [`analyze`].
    pub ray: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchData {
    pub points: Vec<BranchPoint>,
    pub generic: bool,
    pub theta: f64,
    /// The `eps` of `f + eps*w` applied by [`perturb_generic`], if any.
    pub epsilon: Option<f64>,
    /// Smallest gap between the rotated real parts over a branch point;
    /// `None` when no branch point has two distinct fiber roots.
    pub margin: Option<f64>,
    pub failures: Vec<String>,
}

impl BranchData {
    pub fn locations(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.z).collect()
    }

    /// Diameter of the bounding box of `B` (0 for fewer than two points).
    pub fn diameter(&self) -> f64 {
        bbox_diameter(self.points.iter().map(|p| p.z))
    }

    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }
}

pub fn bbox_diameter(points: impl IntoIterator<Item = Complex64>) -> f64 {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut any = false;
    for p in points {
        any = true;
        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    if any {
        (hi - lo).norm()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub z: Complex64,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub points: Vec<PointReport>,
    pub separation: Option<String>,
}

impl GenericityReport {
    pub fn is_generic(&self) -> bool {
        self.separation.is_none() && self.points.iter().all(|p| p.failures.is_empty())
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .points
            .iter()
            .flat_map(|p| p.failures.iter().map(move |m| format!("z = {}: {m}", p.z)))
            .collect();
        out.extend(self.separation.clone());
        out
    }
}

/// `B` as the clustered roots of the discriminant, simple points polished
/// by Newton's method on `f = f_w = 0`. Genericity is not checked.
pub fn branch_points(f: &BivariatePolynomial) -> Result<BranchData> {
    let disc = discriminant_w(f)?;
    let mut points = Vec::new();
    if disc.degree() > 0 {
        for r in roots(&disc, DEFAULT_TOL)?.roots {
            let z = if r.multiplicity == 1 { polish(f, r.value) } else { r.value };
            let mut fiber = f.fiber_roots(z, DEFAULT_TOL)?.roots;
            for root in fiber.iter_mut().filter(|r| r.multiplicity == 2) {
                root.value = polish_double(f, z, root.value);
            }
            points.push(BranchPoint {
                z,
                multiplicity: r.multiplicity,
                fiber,
                ray: None,
            });
        }
    }
    points.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    Ok(BranchData {
        points,
        generic: false,
        theta: 0.0,
        epsilon: None,
        margin: None,
        failures: Vec::new(),
    })
}

/// Newton on `(f, f_w)` in `(z, w)` from the closest pair of fiber roots.
fn polish(f: &BivariatePolynomial, z0: Complex64) -> Complex64 {
    let Ok(raw) = f.fiber_roots_raw(z0, None, DEFAULT_TOL) else {
        return z0;
    };
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            let d = (raw[i] - raw[j]).norm();
            if d < best.0 {
                best = (d, 0.5 * (raw[i] + raw[j]));
            }
        }
    }
    let (mut z, mut w) = (z0, best.1);
    let mut converged = false;
    for _ in 0..30 {
        let (a, b) = (f.eval(z, w), f.dw(z, w));
        let (fz, fw, fwz, fww) = (f.dz(z, w), b, f.dwz(z, w), f.dww(z, w));
        let det = fz * fww - fw * fwz;
        if det.norm() == 0.0 {
            return z0;
        }
        let dz = (a * fww - fw * b) / det;
        let dw = (fz * b - fwz * a) / det;
        z -= dz;
        w -= dw;
        if !z.re.is_finite() || !z.im.is_finite() {
            return z0;
        }
        // steps stall at rounding level around 1e-13 for large coefficients
        converged = dz.norm() <= 1e-10 * (1.0 + z.norm()) && dw.norm() <= 1e-10 * (1.0 + w.norm());
        if dz.norm() <= 1e-16 * (1.0 + z.norm()) && dw.norm() <= 1e-16 * (1.0 + w.norm()) {
            break;
        }
    }
    // discriminant roots of high degree can be off by ~1e-4; a converged
    // correction much larger than that has jumped to another point
    if converged && (z - z0).norm() <= POLISH_REACH * (1.0 + z0.norm()) {
        z
    } else {
        z0
    }
}

/// A double root of `f(z, .)` is a simple root of `f_w(z, .)`.
fn polish_double(f: &BivariatePolynomial, z: Complex64, w0: Complex64) -> Complex64 {
    let mut w = w0;
    for _ in 0..8 {
        let d = f.dww(z, w);
        if d.norm() == 0.0 {
            return w0;
        }
        let step = f.dw(z, w) / d;
        w -= step;
        if step.norm() <= 1e-16 * (1.0 + w.norm()) {
            break;
        }
    }
    if (w - w0).norm() <= 1e-4 * (1.0 + w0.norm()) {
        w
    } else {
        w0
    }
}

pub fn check_genericity(f: &BivariatePolynomial, b: &BranchData) -> GenericityReport {
    let n = f.degree_w();
    let mut points = Vec::new();
    for p in &b.points {
        let mut failures = Vec::new();
        if p.multiplicity != 1 {
            failures.push(format!("multiplicity {} in the discriminant", p.multiplicity));
        }
        let doubles: Vec<&Root> = p.fiber.iter().filter(|r| r.multiplicity > 1).collect();
        if p.fiber.len() != n - 1 || doubles.len() != 1 || doubles[0].multiplicity != 2 {
            let mults: Vec<usize> = p.fiber.iter().map(|r| r.multiplicity).collect();
            failures.push(format!(
                "fiber has {} distinct roots with multiplicities {mults:?}, expected {} with one double",
                p.fiber.len(),
                n - 1
            ));
        } else {
            let w = doubles[0].value;
            let (_, sz, sww) = f.derivative_scales(p.z, w);
            if f.dz(p.z, w).norm() <= TANGENCY_FLOOR * sz.max(f64::MIN_POSITIVE) {
                failures.push("f_z vanishes at the double root (singular point)".into());
            }
            if f.dww(p.z, w).norm() <= TANGENCY_FLOOR * sww.max(f64::MIN_POSITIVE) {
                failures.push("f_ww vanishes at the double root (tangent of higher order)".into());
            }
        }
        points.push(PointReport { z: p.z, failures });
    }
    let floor = SEPARATION_FRACTION * b.diameter().max(1.0);
    let mut separation = None;
    'outer: for i in 0..b.points.len() {
        for j in i + 1..b.points.len() {
            let d = (b.points[i].z - b.points[j].z).norm();
            if d < floor {
                separation = Some(format!(
                    "branch points {} and {} are {d:e} apart, below the separation floor {floor:e}",
                    b.points[i].z, b.points[j].z
                ));
                break 'outer;
            }
        }
    }
    GenericityReport { points, separation }
}

/// `f + eps*w` for the smallest `eps = budget * 2^-k` in the first unbroken
/// run of passing trials; `eps = 0` when `f` is already generic.
pub fn perturb_generic(f: &BivariatePolynomial, budget: f64) -> Result<(BivariatePolynomial, f64)> {
    if !(budget > 0.0) {
        return Err(Error::InvalidInput(format!("perturbation budget must be positive, got {budget}")));
    }
    let trial = |g: &BivariatePolynomial| -> std::result::Result<(), String> {
        let b = branch_points(g).map_err(|e| e.to_string())?;
        let report = check_genericity(g, &b);
        if report.is_generic() {
            Ok(())
        } else {
            Err(report.failures().join("; "))
        }
    };
    let mut last_failure = match trial(f) {
        Ok(()) => return Ok((f.clone(), 0.0)),
        Err(e) => e,
    };
    let mut last_failed = f.clone();
    let mut found: Option<(BivariatePolynomial, f64)> = None;
    let mut tried = 0;
    for k in 0..=MAX_HALVINGS {
        let eps = budget * 0.5f64.powi(k as i32);
        let g = f.add_w_term(Complex64::new(eps, 0.0));
        tried += 1;
        match trial(&g) {
            Ok(()) => found = Some((g, eps)),
            Err(e) => {
                if found.is_some() {
                    break;
                }
                last_failure = e;
                last_failed = g;
            }
        }
    }
    if let Some(ok) = found {
        return Ok(ok);
    }
    // below the separation floor the fiber tests are not trustworthy either
    if let Some((a, c, floor)) = branch_points(&last_failed).ok().as_ref().and_then(closest_below_floor) {
        return Err(Error::Degenerate { a, b: c, floor });
    }
    Err(Error::PerturbationExhausted {
        budget,
        tried,
        last_failure,
    })
}

fn closest_below_floor(b: &BranchData) -> Option<(Complex64, Complex64, f64)> {
    let floor = SEPARATION_FRACTION * b.diameter().max(1.0);
    let mut best: Option<(Complex64, Complex64, f64)> = None;
    for i in 0..b.points.len() {
        for j in i + 1..b.points.len() {
            let d = (b.points[i].z - b.points[j].z).norm();
            if d < floor && best.is_none_or(|(x, y, _)| d < (x - y).norm()) {
                best = Some((b.points[i].z, b.points[j].z, floor));
            }
        }
    }
    best
}

/// Smallest gap between the sorted values `Re(e^{i theta} w)` over all
/// branch fibers; infinite when no fiber has two distinct roots.
pub fn rotation_score(b: &BranchData, theta: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, theta);
    let mut score = f64::INFINITY;
    let mut re: Vec<f64> = Vec::new();
    for p in &b.points {
        re.clear();
        re.extend(p.fiber.iter().map(|r| (rot * r.value).re));
        re.sort_by(f64::total_cmp);
        for pair in re.windows(2) {
            score = score.min(pair[1] - pair[0]);
        }
    }
    score
}

/// Grid search over `[0, 2pi)` followed by golden-section refinement; ties
/// go to the smaller angle, and `0` is kept when it reaches half the best.
pub fn select_rotation(b: &BranchData) -> (f64, Option<f64>) {
    let at_zero = rotation_score(b, 0.0);
    if at_zero.is_infinite() {
        return (0.0, None);
    }
    let h = 2.0 * PI / THETA_GRID as f64;
    let mut best = (0.0, at_zero);
    for i in 1..THETA_GRID {
        let theta = i as f64 * h;
        let s = rotation_score(b, theta);
        if s > best.1 {
            best = (theta, s);
        }
    }
    // golden-section on [best - h, best + h]
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut s1, mut s2) = (rotation_score(b, x1), rotation_score(b, x2));
    for _ in 0..60 {
        if s1 >= s2 {
            hi = x2;
            x2 = x1;
            s2 = s1;
            x1 = hi - g * (hi - lo);
            s1 = rotation_score(b, x1);
        } else {
            lo = x1;
            x1 = x2;
            s1 = s2;
            x2 = lo + g * (hi - lo);
            s2 = rotation_score(b, x2);
        }
    }
    let (x, s) = if s1 >= s2 { (x1, s1) } else { (x2, s2) };
    if s > best.1 {
        best = (x.rem_euclid(2.0 * PI), s);
    }
    if at_zero >= 0.5 * best.1 {
        (0.0, Some(at_zero))
    } else {
        (best.0, Some(best.1))
    }
}

/// Perturb to genericity, compute `B` and choose the rotation. With
/// `theta_override` the given angle is used as long as its margin is positive.
pub fn analyze(
    f: &BivariatePolynomial,
    budget: f64,
    theta_override: Option<f64>,
) -> Result<(BivariatePolynomial, BranchData)> {
    let (g, eps) = perturb_generic(f, budget)?;
    let mut b = branch_points(&g)?;
    let report = check_genericity(&g, &b);
    b.failures = report.failures();
    b.generic = report.is_generic();
    if !b.generic {
        return Err(Error::NotGeneric(b.failures.join("; ")));
    }
    b.epsilon = (eps != 0.0).then_some(eps);
    let (theta, margin) = match theta_override {
        Some(t) => {
            let s = rotation_score(&b, t);
            (t.rem_euclid(2.0 * PI), s.is_finite().then_some(s))
        }
        None => select_rotation(&b),
    };
    let scale = 1.0 + b.points.iter().flat_map(|p| p.fiber.iter()).map(|r| r.value.norm()).fold(0.0, f64::max);
    if margin.is_some_and(|m| m <= 1e-9 * scale) {
        return Err(Error::NotGeneric(format!(
            "rotated real parts coincide over a branch point at theta = {theta}"
        )));
    }
    b.theta = theta;
    b.margin = margin;
    for p in &mut b.points {
        p.ray = local_ray(&g, p, theta);
    }
    Ok((g, b))
}

/// Near a simple vertical tangent `(w - w*)^2 ~ c (z - z_j)` with
/// `c = -2 f_z / f_ww`; the merging roots have equal rotated real part
/// where `e^{2i theta} c (z - z_j)` is negative real.
pub fn local_ray(f: &BivariatePolynomial, p: &BranchPoint, theta: f64) -> Option<f64> {
    let double = p.fiber.iter().find(|r| r.multiplicity == 2)?;
    let w = double.value;
    let fww = f.dww(p.z, w);
    if fww.norm() == 0.0 {
        return None;
    }
    let c = -2.0 * f.dz(p.z, w) / fww;
    Some((PI - c.arg() - 2.0 * theta).rem_euclid(2.0 * PI))
}
