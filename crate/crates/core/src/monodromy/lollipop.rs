//! Lollipop loops: from a basepoint, out along an arc to each target branch
//! point, once around a small circle, and back along the same arc. Their
//! braid words come out as products of conjugates of generators.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::track::{clearance_floor, track_roots, Clearance, TrackOptions, Tracking};
use crate::branch::BranchData;
use crate::braid::{BraidLetter, BraidWord, QpFactor, QuasipositiveFactorization};
use crate::error::{Error, Result};
use crate::path::{LoopPath, Segment};
use crate::poly::BivariatePolynomial;

/// How often `qp_factorization` halves the radius when a circle does not
/// see exactly one crossing.
pub const RADIUS_RETRIES: usize = 4;

/// Sticks arriving within this angle of the local ray of `B+` are bent to
/// arrive at `ENTRY_OFFSET` from it instead.
const ENTRY_AVOID: f64 = 0.25;
const ENTRY_OFFSET: f64 = 0.35;

/// A basepoint whose fiber has two rotated real parts closer than this
/// (relative) lies on `B+` and is moved off it.
const BASEPOINT_TIE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorMarker {
    /// Index into the branch points.
    pub target: usize,
    pub out: (f64, f64),
    pub circle: (f64, f64),
    pub back: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lollipop {
    pub basepoint: Complex64,
    pub targets: Vec<usize>,
    pub radius: f64,
    pub path: LoopPath,
    pub markers: Vec<FactorMarker>,
}

/// Largest radius for which the circles around `targets` are pairwise
/// disjoint, miss the other branch points, and leave the basepoint outside.
pub fn max_feasible_radius(branch: &BranchData, targets: &[usize], basepoint: Complex64) -> f64 {
    let mut best = f64::INFINITY;
    for &t in targets {
        let z = branch.points[t].z;
        for (j, p) in branch.points.iter().enumerate() {
            if j != t {
                best = best.min(0.5 * (p.z - z).norm());
            }
        }
        best = best.min((basepoint - z).norm());
    }
    // the basepoint must also keep off the detour circles of other points
    for p in &branch.points {
        best = best.min((basepoint - p.z).norm());
    }
    best
}

pub fn lollipop_loop(branch: &BranchData, targets: &[usize], basepoint: Complex64, radius: f64) -> Result<Lollipop> {
    if targets.is_empty() {
        return Err(Error::InvalidInput("lollipop needs at least one target".into()));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= branch.points.len() {
            return Err(Error::InvalidInput(format!(
                "target index {t} out of range ({} branch points)",
                branch.points.len()
            )));
        }
        if targets[..i].contains(&t) {
            return Err(Error::InvalidInput(format!("target {t} listed twice")));
        }
    }
    let max_feasible = max_feasible_radius(branch, targets, basepoint);
    if !(radius > 0.0) || radius >= max_feasible {
        return Err(Error::InfeasibleRadius { radius, max_feasible });
    }

    let mut segments: Vec<Segment> = Vec::new();
    let mut bounds: Vec<[usize; 4]> = Vec::new();
    for &t in targets {
        let z = branch.points[t].z;
        let mut angle = (basepoint - z).arg();
        if let Some(ray) = branch.points[t].ray {
            // entering the circle on the ray of B+ would put a crossing
            // exactly at the boundary between stick and circle
            let off = (angle - ray + PI).rem_euclid(2.0 * PI) - PI;
            if off.abs() < ENTRY_AVOID {
                angle = ray + if off >= 0.0 { ENTRY_OFFSET } else { -ENTRY_OFFSET };
            }
        }
        let entry = z + Complex64::from_polar(radius, angle);
        let obstacles: Vec<Complex64> = branch
            .points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != t)
            .map(|(_, p)| p.z)
            .collect();
        let out = deflected_segment(basepoint, entry, &obstacles, radius);
        let s0 = segments.len();
        segments.extend_from_slice(&out);
        let s1 = segments.len();
        segments.push(Segment::arc(z, radius, angle, angle + 2.0 * PI));
        let s2 = segments.len();
        segments.extend(out.iter().rev().map(|s| s.reversed()));
        let s3 = segments.len();
        bounds.push([s0, s1, s2, s3]);
    }
    let path = LoopPath::new(segments)?;
    let bp = path.breakpoints();
    let markers = targets
        .iter()
        .zip(&bounds)
        .map(|(&target, b)| FactorMarker {
            target,
            out: (bp[b[0]], bp[b[1]]),
            circle: (bp[b[1]], bp[b[2]]),
            back: (bp[b[2]], bp[b[3]]),
        })
        .collect();
    Ok(Lollipop {
        basepoint,
        targets: targets.to_vec(),
        radius,
        path,
        markers,
    })
}

/// The segment `a -> b` with every obstacle closer than `r` bypassed along
/// the circle of radius `r` around it, on the left of the travel direction.
fn deflected_segment(a: Complex64, b: Complex64, obstacles: &[Complex64], r: f64) -> Vec<Segment> {
    let len = (b - a).norm();
    let d = (b - a) / len;
    let left = Complex64::new(0.0, 1.0) * d;
    let mut hits: Vec<(f64, Complex64, f64)> = Vec::new();
    for &c in obstacles {
        let s = ((c - a) * d.conj()).re;
        let h = ((c - a) * d.conj()).im;
        if h.abs() < r && s > 0.0 && s < len {
            let half = (r * r - h * h).sqrt();
            hits.push((s - half, c, s + half));
        }
    }
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = Vec::new();
    let mut cur = a;
    for (s_in, c, s_out) in hits {
        let p_in = a + d * s_in.max(0.0);
        let p_out = a + d * s_out.min(len);
        if (p_in - cur).norm() > 0.0 {
            out.push(Segment::line(cur, p_in));
        }
        let a1 = (p_in - c).arg();
        let a2 = (p_out - c).arg();
        // clockwise from entry to exit when the left side is the obstacle's
        // far side, counterclockwise otherwise
        let via = (left).arg();
        let cw_sweep = (a1 - a2).rem_euclid(2.0 * PI);
        let passes_cw = (a1 - via).rem_euclid(2.0 * PI) <= cw_sweep;
        let to = if passes_cw {
            a1 - cw_sweep
        } else {
            a1 + (a2 - a1).rem_euclid(2.0 * PI)
        };
        out.push(Segment::arc(c, r, a1, to));
        cur = out.last().unwrap().end();
    }
    if (b - cur).norm() > 0.0 {
        out.push(Segment::line(cur, b));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpResult {
    pub factorization: QuasipositiveFactorization,
    /// The loop actually used (its radius may have been reduced).
    pub lollipop: Lollipop,
    pub tracking: Tracking,
    pub word: BraidWord,
}

/// Reads the factorization off a lollipop loop: the conjugator of each
/// factor is the word along the outgoing arc and the generator is the one
/// crossing on the circle. A circle that does not see exactly one crossing
/// triggers a rebuild with half the radius, as long as the smaller loop keeps
/// clear of `B`; after that a circle word of the form `u x u^-1` is accepted
/// with `u` moved into the conjugator.
pub fn qp_factorization(f: &BivariatePolynomial, branch: &BranchData, lollipop: &Lollipop) -> Result<QpResult> {
    qp_factorization_with(f, branch, lollipop, &TrackOptions::default())
}

pub fn qp_factorization_with(
    f: &BivariatePolynomial,
    branch: &BranchData,
    lollipop: &Lollipop,
    opts: &TrackOptions,
) -> Result<QpResult> {
    let n = f.degree_w();
    let mut current = lollipop.clone();
    if on_bplus(f, branch, current.basepoint)? {
        current = nudge_basepoint(f, branch, &current)?;
    }
    let mut retries = 0;
    'attempt: loop {
        let tracking = track_roots(f, branch, &current.path, opts)?;
        let mut factors = Vec::new();
        for m in &current.markers {
            let letters_in = |range: (f64, f64)| -> Vec<BraidLetter> {
                tracking
                    .events
                    .iter()
                    .filter(|e| e.t >= range.0 && e.t < range.1)
                    .map(|e| e.letter())
                    .collect()
            };
            let out = BraidWord::new(n, letters_in(m.out))?;
            let circle = letters_in(m.circle);
            let back = BraidWord::new(n, letters_in(m.back))?;
            if circle.len() != 1 && retries < RADIUS_RETRIES {
                let smaller = lollipop_loop(branch, &current.targets, current.basepoint, current.radius / 2.0)?;
                if keeps_clearance(branch, &smaller.path, opts) {
                    retries += 1;
                    current = smaller;
                    continue 'attempt;
                }
            }
            let Some((u, generator)) = conjugate_of_letter(&BraidWord::new(n, circle.clone())?) else {
                return Err(Error::CircleEventCount {
                    target: m.target,
                    count: circle.len(),
                });
            };
            if generator.sign() != 1 {
                return Err(Error::NegativeCircleSign { target: m.target });
            }
            if !back.freely_equal(&out.inverse()) {
                return Err(Error::ArcMismatch {
                    target: m.target,
                    out: out.to_string(),
                    back: back.to_string(),
                });
            }
            factors.push(QpFactor {
                conjugator: out.concat(&u).free_reduce(),
                k: generator.index(),
            });
        }
        let factorization = QuasipositiveFactorization::new(n, factors)?;
        let word = tracking.word(n);
        return Ok(QpResult {
            factorization,
            lollipop: current,
            tracking,
            word,
        });
    }
}

fn keeps_clearance(branch: &BranchData, path: &LoopPath, opts: &TrackOptions) -> bool {
    let floor = match opts.clearance {
        Clearance::Auto => clearance_floor(branch, path),
        Clearance::Floor(x) => x,
        Clearance::Unchecked => return true,
    };
    branch.points.iter().all(|p| path.distance_to(p.z) >= floor)
}

/// Splits a word that freely reduces to `u x u^-1` for a single letter `x`.
/// An edge of `B+` passing very close to a target leaves such a pair of
/// cancelling crossings on its circle.
fn conjugate_of_letter(w: &BraidWord) -> Option<(BraidWord, BraidLetter)> {
    let r = w.free_reduce();
    let l = r.letters();
    if l.len().is_multiple_of(2) {
        return None;
    }
    let m = l.len() / 2;
    let u = BraidWord::new(r.strands(), l[..m].to_vec()).ok()?;
    let tail = BraidWord::new(r.strands(), l[m + 1..].to_vec()).ok()?;
    (tail == u.inverse()).then_some((u, l[m]))
}

fn on_bplus(f: &BivariatePolynomial, branch: &BranchData, z: Complex64) -> Result<bool> {
    Ok(real_part_gap(f, branch, z)? < BASEPOINT_TIE)
}

/// Smallest gap between rotated real parts of the fiber over `z`, relative
/// to the size of the roots.
fn real_part_gap(f: &BivariatePolynomial, branch: &BranchData, z: Complex64) -> Result<f64> {
    let roots = f.fiber_roots_raw(z, None, crate::poly::DEFAULT_TOL)?;
    let rot = branch.rotation();
    let scale = 1.0 + roots.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let mut re: Vec<f64> = roots.iter().map(|&w| (rot * w).re).collect();
    re.sort_by(f64::total_cmp);
    Ok(re.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min) / scale)
}

/// Moves the basepoint a short distance off `B+`, keeping the circles feasible.
fn nudge_basepoint(f: &BivariatePolynomial, branch: &BranchData, lp: &Lollipop) -> Result<Lollipop> {
    let step = 0.25 * lp.radius;
    for k in 0..8 {
        let dir = Complex64::from_polar(1.0, PI / 2.0 + PI * k as f64 / 4.0);
        let candidate = lp.basepoint + dir * step;
        if real_part_gap(f, branch, candidate)? < 1e3 * BASEPOINT_TIE {
            continue;
        }
        if let Ok(moved) = lollipop_loop(branch, &lp.targets, candidate, lp.radius) {
            return Ok(moved);
        }
    }
    Err(Error::InvalidInput(format!(
        "basepoint {} lies on B+ and no nearby replacement works",
        lp.basepoint
    )))
}
