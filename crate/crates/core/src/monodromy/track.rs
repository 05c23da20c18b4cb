//! Continuation of the fiber roots along a path and detection of the
//! moments where two of them swap places in the order by real part.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branch::{bbox_diameter, BranchData};
use crate::braid::{BraidLetter, BraidWord};
use crate::error::{Error, Result};
use crate::path::LoopPath;
use crate::poly::{roots, BivariatePolynomial, DEFAULT_TOL};

/// Smallest admissible continuation step, in units of the path parameter.
const MIN_STEP: f64 = 1e-12;

/// Below this step the double-crossing guard stops refining.
const GUARD_MIN_STEP: f64 = 1e-7;

/// Clearance floor as a fraction of the bounding-box diameter of `B` and the path.
pub const CLEARANCE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clearance {
    /// `CLEARANCE_FRACTION` of the bounding-box diameter of `B` and the path.
    Auto,
    Floor(f64),
    Unchecked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    /// Initial and largest step, as a fraction of the path length.
    pub max_step: f64,
    /// Width of the parameter interval an event is localized to.
    pub event_tol: f64,
    pub root_tol: f64,
    pub clearance: Clearance,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            max_step: 1.0 / 256.0,
            event_tol: 1e-10,
            root_tol: DEFAULT_TOL,
            clearance: Clearance::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub t: f64,
    /// Lower of the two adjacent positions (1-based) in the order by real part.
    pub k: usize,
    pub sign: i8,
    /// Track ids of the roots at positions `k` and `k + 1` just before the event.
    pub root_pair: (usize, usize),
    /// The two roots (unrotated) at the event.
    pub roots: (Complex64, Complex64),
}

impl CrossingEvent {
    pub fn letter(&self) -> BraidLetter {
        if self.sign > 0 {
            BraidLetter::positive(self.k)
        } else {
            BraidLetter::negative(self.k)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tracking {
    pub events: Vec<CrossingEvent>,
    /// Roots at the start of the path, indexed by track id (ids follow the
    /// initial order by rotated real part).
    pub start: Vec<Complex64>,
    /// Where each track ends.
    pub end: Vec<Complex64>,
    pub steps: usize,
}

impl Tracking {
    pub fn word(&self, strands: usize) -> BraidWord {
        let letters = self.events.iter().map(|e| e.letter()).collect();
        BraidWord::new(strands, letters).expect("event positions are within range")
    }

    /// For a closed path: `map[i]` = the track id whose start root is where
    /// track `i` ends.
    pub fn end_map(&self) -> Vec<usize> {
        self.end
            .iter()
            .map(|e| {
                (0..self.start.len())
                    .min_by(|&a, &b| (self.start[a] - e).norm().total_cmp(&(self.start[b] - e).norm()))
                    .unwrap()
            })
            .collect()
    }
}

/// Follows the `n` roots of `w -> f(path(t), w)` from `t = 0` to `t = 1`
/// and records every transposition of adjacent roots in the order by
/// `Re(e^{i theta} w)`.
pub fn track_roots(f: &BivariatePolynomial, branch: &BranchData, path: &LoopPath, opts: &TrackOptions) -> Result<Tracking> {
    check_clearance(branch, path, opts.clearance)?;
    let tracker = Tracker {
        f,
        rot: branch.rotation(),
        path,
        opts,
    };
    tracker.run()
}

/// The braid word of the closed path: the events' letters in order.
pub fn braid_along(f: &BivariatePolynomial, branch: &BranchData, path: &LoopPath) -> Result<BraidWord> {
    braid_along_with(f, branch, path, &TrackOptions::default())
}

pub fn braid_along_with(
    f: &BivariatePolynomial,
    branch: &BranchData,
    path: &LoopPath,
    opts: &TrackOptions,
) -> Result<BraidWord> {
    if !path.is_closed() {
        return Err(Error::InvalidInput("braid_along needs a closed path".into()));
    }
    Ok(track_roots(f, branch, path, opts)?.word(f.degree_w()))
}

pub fn clearance_floor(branch: &BranchData, path: &LoopPath) -> f64 {
    let (lo, hi) = path.bbox();
    let pts = branch.locations().into_iter().chain([lo, hi]);
    CLEARANCE_FRACTION * bbox_diameter(pts)
}

fn check_clearance(branch: &BranchData, path: &LoopPath, clearance: Clearance) -> Result<()> {
    let floor = match clearance {
        Clearance::Unchecked => return Ok(()),
        Clearance::Floor(x) => x,
        Clearance::Auto => clearance_floor(branch, path),
    };
    for p in &branch.points {
        let d = path.distance_to(p.z);
        if d < floor || d == 0.0 {
            return Err(Error::ClearanceViolation {
                point: p.z,
                distance: d,
                floor,
            });
        }
    }
    Ok(())
}

enum StepFailure {
    Solve,
    Ambiguous,
    TooFar,
}

struct Tracker<'a> {
    f: &'a BivariatePolynomial,
    rot: Complex64,
    path: &'a LoopPath,
    opts: &'a TrackOptions,
}

impl Tracker<'_> {
    fn solve(&self, t: f64, guesses: Option<&[Complex64]>) -> Option<Vec<Complex64>> {
        let z = self.path.point(t);
        roots::solve(&self.f.fiber_coeffs(z), guesses, self.opts.root_tol).ok()
    }

    /// One continuation step from `(t0, old)` to `t1`: the new roots in
    /// track order and the largest displacement.
    fn step(&self, old: &[Complex64], t1: f64) -> std::result::Result<(Vec<Complex64>, f64), StepFailure> {
        let new = self.solve(t1, Some(old)).ok_or(StepFailure::Solve)?;
        let n = old.len();
        let mut assigned = vec![usize::MAX; n];
        let mut used = vec![false; n];
        let mut max_disp: f64 = 0.0;
        for i in 0..n {
            let j = (0..n)
                .min_by(|&a, &b| (new[a] - old[i]).norm().total_cmp(&(new[b] - old[i]).norm()))
                .unwrap();
            if used[j] {
                return Err(StepFailure::Ambiguous);
            }
            used[j] = true;
            assigned[i] = j;
            max_disp = max_disp.max((new[j] - old[i]).norm());
        }
        let gap = min_gap(old).min(min_gap(&new));
        if max_disp >= gap / 3.0 {
            return Err(StepFailure::TooFar);
        }
        Ok((assigned.iter().map(|&j| new[j]).collect(), max_disp))
    }

    /// Adaptive continuation from `t0` to `t1` without event detection.
    fn advance(&self, t0: f64, start: &[Complex64], t1: f64) -> Result<Vec<Complex64>> {
        let mut t = t0;
        let mut cur = start.to_vec();
        let mut h = t1 - t0;
        while t < t1 {
            let next = (t + h).min(t1);
            match self.step(&cur, next) {
                Ok((new, _)) => {
                    cur = new;
                    t = next;
                    h *= 2.0;
                }
                Err(e) => {
                    h *= 0.5;
                    if h < MIN_STEP {
                        return Err(underflow(e, t));
                    }
                }
            }
        }
        Ok(cur)
    }

    fn rotated_re(&self, w: Complex64) -> f64 {
        (self.rot * w).re
    }

    /// Track ids sorted by rotated real part, ties by rotated imaginary part.
    fn order(&self, roots: &[Complex64]) -> Vec<usize> {
        let u: Vec<Complex64> = roots.iter().map(|&w| self.rot * w).collect();
        let mut ids: Vec<usize> = (0..roots.len()).collect();
        ids.sort_by(|&a, &b| u[a].re.total_cmp(&u[b].re).then(u[a].im.total_cmp(&u[b].im)));
        ids
    }

    fn run(&self) -> Result<Tracking> {
        let initial = self.solve(0.0, None).ok_or_else(|| Error::InvalidInput("cannot solve the fiber at the start point".into()))?;
        let mut roots = initial.clone();
        let order0 = self.order(&roots);
        roots = order0.iter().map(|&i| initial[i]).collect();
        let start = roots.clone();

        let mut events = Vec::new();
        let mut t = 0.0;
        let mut h = self.opts.max_step;
        let mut steps = 0;
        let mut order = self.order(&roots);
        while t < 1.0 {
            let t1 = (t + h).min(1.0);
            let attempt = self.step(&roots, t1).and_then(|(new, disp)| {
                if h > GUARD_MIN_STEP && self.may_cross_twice(&roots, &new, disp) {
                    Err(StepFailure::TooFar)
                } else {
                    Ok(new)
                }
            });
            match attempt {
                Ok(mut new) => {
                    if t1 >= 1.0 && self.path.is_closed() {
                        // the end fiber is the start fiber: reuse the exact
                        // start values so ties in the order break the same way
                        if let Some(snapped) = snap(&new, &start) {
                            new = snapped;
                        }
                    }
                    let new_order = self.order(&new);
                    if new_order != order {
                        self.resolve(t, &roots, t1, &new, &mut events)?;
                    }
                    roots = new;
                    order = new_order;
                    t = t1;
                    steps += 1;
                    h = (h * 2.0).min(self.opts.max_step);
                }
                Err(e) => {
                    h *= 0.5;
                    if h < MIN_STEP {
                        return Err(underflow(e, t));
                    }
                }
            }
        }
        Ok(Tracking {
            events,
            start,
            end: roots,
            steps,
        })
    }

    /// A pair whose real parts keep their order over the step but stay
    /// within reach of each other could have crossed and crossed back.
    fn may_cross_twice(&self, old: &[Complex64], new: &[Complex64], disp: f64) -> bool {
        let n = old.len();
        for i in 0..n {
            for j in i + 1..n {
                let d0 = self.rotated_re(old[i]) - self.rotated_re(old[j]);
                let d1 = self.rotated_re(new[i]) - self.rotated_re(new[j]);
                if d0 * d1 > 0.0 && d0.abs() + d1.abs() < 3.0 * disp {
                    return true;
                }
            }
        }
        false
    }

    /// Localizes the order changes between `(ta, ra)` and `(tb, rb)` by
    /// bisection, appending events in parameter order.
    fn resolve(&self, ta: f64, ra: &[Complex64], tb: f64, rb: &[Complex64], out: &mut Vec<CrossingEvent>) -> Result<()> {
        let oa = self.order(ra);
        let ob = self.order(rb);
        if oa == ob {
            return Ok(());
        }
        if tb - ta <= self.opts.event_tol {
            return self.emit(ta, ra, tb, rb, &oa, &ob, out);
        }
        let tm = 0.5 * (ta + tb);
        let rm = self.advance(ta, ra, tm)?;
        self.resolve(ta, ra, tm, &rm, out)?;
        self.resolve(tm, &rm, tb, rb, out)
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &self,
        ta: f64,
        ra: &[Complex64],
        tb: f64,
        rb: &[Complex64],
        oa: &[usize],
        ob: &[usize],
        out: &mut Vec<CrossingEvent>,
    ) -> Result<()> {
        let n = oa.len();
        let mut p = 0;
        let mut swaps = Vec::new();
        while p < n {
            if oa[p] == ob[p] {
                p += 1;
            } else if p + 1 < n && oa[p] == ob[p + 1] && oa[p + 1] == ob[p] {
                swaps.push(p);
                p += 2;
            } else {
                return Err(Error::SimultaneousCrossing { t: ta });
            }
        }
        let t = 0.5 * (ta + tb);
        for p in swaps {
            let (lo, hi) = (oa[p], oa[p + 1]);
            let wl = 0.5 * (ra[lo] + rb[lo]);
            let wh = 0.5 * (ra[hi] + rb[hi]);
            let di = (self.rot * wh).im - (self.rot * wl).im;
            if di == 0.0 {
                return Err(Error::SimultaneousCrossing { t });
            }
            out.push(CrossingEvent {
                t,
                k: p + 1,
                sign: if di > 0.0 { 1 } else { -1 },
                root_pair: (lo, hi),
                roots: (wl, wh),
            });
        }
        Ok(())
    }
}

fn underflow(e: StepFailure, t: f64) -> Error {
    match e {
        StepFailure::Ambiguous => Error::MatchingAmbiguity { t },
        StepFailure::Solve | StepFailure::TooFar => Error::StepUnderflow { t },
    }
}

/// `targets` rearranged to follow `roots` by nearest neighbor, if bijective.
fn snap(roots: &[Complex64], targets: &[Complex64]) -> Option<Vec<Complex64>> {
    let mut used = vec![false; targets.len()];
    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        let j = (0..targets.len()).min_by(|&a, &b| (targets[a] - r).norm().total_cmp(&(targets[b] - r).norm()))?;
        if used[j] {
            return None;
        }
        used[j] = true;
        out.push(targets[j]);
    }
    Some(out)
}

fn min_gap(roots: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            gap = gap.min((roots[i] - roots[j]).norm());
        }
    }
    gap
}
