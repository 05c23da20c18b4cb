//! Sampled picture of `B+`: the curves where two fiber roots have equal
//! rotated real part, labeled by the generator they contribute and
//! co-oriented by the direction of positive crossing.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::BranchData;
use crate::braid::{BraidLetter, BraidWord};
use crate::error::{Error, Result};
use crate::monodromy::{track_roots, Clearance, TrackOptions};
use crate::path::{chords_cross, LoopPath};
use crate::poly::BivariatePolynomial;

/// Cells with more than two crossings of one label are split 2x2 at most
/// this many times before being flagged.
pub const MAX_SUBDIVISION: usize = 3;

/// The sampling lattice is shifted by these fractions of a cell so that
/// grid lines avoid the symmetry axes of typical inputs.
const LATTICE_SHIFT: (f64, f64) = (std::f64::consts::PI / 1000.0, std::f64::consts::E / 1000.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("empty region [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    fn intersects_chord(&self, p: Complex64, q: Complex64) -> bool {
        if self.contains(p) || self.contains(q) {
            return true;
        }
        let c = [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ];
        (0..4).any(|i| chords_cross(p, q, c[i], c[(i + 1) % 4]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPlusEdge {
    /// Generator index `k`: crossing in the co-oriented direction reads `s_k`.
    pub label: usize,
    pub points: Vec<Complex64>,
    /// Per polyline segment, the unit co-orientation (always the left normal
    /// of the segment's direction).
    pub normals: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPlusGraph {
    /// The sampled rectangle (the requested region shifted by the lattice offset).
    pub region: Region,
    pub resolution: usize,
    pub edges: Vec<BPlusEdge>,
    pub branch_points: Vec<Complex64>,
    /// Cells left unresolved after subdivision; junctions of `B+` show up here.
    pub flagged: Vec<Region>,
    /// Cells around branch points, where no edges are drawn.
    pub excluded: Vec<Region>,
}

impl BPlusGraph {
    pub fn cell_size(&self) -> (f64, f64) {
        (
            self.region.width() / self.resolution as f64,
            self.region.height() / self.resolution as f64,
        )
    }

    /// Centers of flagged cells: candidate junction points.
    pub fn junctions(&self) -> Vec<Complex64> {
        self.flagged
            .iter()
            .map(|r| Complex64::new(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct EdgeEvent {
    point: Complex64,
    /// Position along the edge, in `[0, 1]`.
    s: f64,
    label: usize,
    sign: i8,
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    a: Complex64,
    b: Complex64,
    label: usize,
}

struct Sampler<'a> {
    f: &'a BivariatePolynomial,
    branch: &'a BranchData,
    opts: TrackOptions,
}

impl Sampler<'_> {
    /// Crossings met going from `a` to `b` (a canonical `+x` or `+y` edge).
    fn edge(&self, a: Complex64, b: Complex64) -> Option<Vec<EdgeEvent>> {
        let path = LoopPath::polyline(&[a, b], false).ok()?;
        let tracking = track_roots(self.f, self.branch, &path, &self.opts).ok()?;
        Some(
            tracking
                .events
                .iter()
                .map(|e| EdgeEvent {
                    point: a + (b - a) * e.t,
                    s: e.t,
                    label: e.k,
                    sign: e.sign,
                })
                .collect(),
        )
    }

    /// Segments inside the cell `[x0, x1] x [y0, y1]` from the events on its
    /// four sides (bottom, top, left, right), subdividing when needed.
    fn cell(&self, rect: Region, sides: [&[EdgeEvent]; 4], depth: usize, segs: &mut Vec<Seg>, flagged: &mut Vec<Region>) {
        let dirs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
        ];
        let mut by_label: Vec<(usize, Vec<(EdgeEvent, Complex64)>)> = Vec::new();
        for (side, events) in sides.iter().enumerate() {
            for e in events.iter() {
                match by_label.iter_mut().find(|(l, _)| *l == e.label) {
                    Some((_, v)) => v.push((*e, dirs[side])),
                    None => by_label.push((e.label, vec![(*e, dirs[side])])),
                }
            }
        }
        by_label.sort_by_key(|(l, _)| *l);
        let mut found = Vec::new();
        let mut resolved = true;
        for (label, events) in &by_label {
            if events.len() != 2 {
                resolved = false;
                break;
            }
            let (p, q) = (events[0].0.point, events[1].0.point);
            if p == q {
                resolved = false;
                break;
            }
            let left = Complex64::new(0.0, 1.0) * (q - p);
            let votes: Vec<f64> = events
                .iter()
                .map(|(e, d)| e.sign as f64 * (d * left.conj()).re)
                .collect();
            if votes[0] * votes[1] <= 0.0 {
                resolved = false;
                break;
            }
            let (a, b) = if votes[0] > 0.0 { (p, q) } else { (q, p) };
            found.push(Seg { a, b, label: *label });
        }
        if resolved {
            segs.extend(found);
            return;
        }
        if depth >= MAX_SUBDIVISION {
            flagged.push(rect);
            return;
        }
        self.subdivide(rect, sides, depth, segs, flagged);
    }

    fn subdivide(&self, rect: Region, sides: [&[EdgeEvent]; 4], depth: usize, segs: &mut Vec<Seg>, flagged: &mut Vec<Region>) {
        let xm = 0.5 * (rect.x0 + rect.x1);
        let ym = 0.5 * (rect.y0 + rect.y1);
        let c = |x: f64, y: f64| Complex64::new(x, y);
        // halves of the parent sides, positions rescaled to the half edge
        let split = |events: &[EdgeEvent]| -> (Vec<EdgeEvent>, Vec<EdgeEvent>) {
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for e in events {
                if e.s < 0.5 {
                    lo.push(EdgeEvent { s: 2.0 * e.s, ..*e });
                } else {
                    hi.push(EdgeEvent {
                        s: 2.0 * e.s - 1.0,
                        ..*e
                    });
                }
            }
            (lo, hi)
        };
        let (bottom_l, bottom_r) = split(sides[0]);
        let (top_l, top_r) = split(sides[1]);
        let (left_b, left_t) = split(sides[2]);
        let (right_b, right_t) = split(sides[3]);
        let interior = [
            (c(rect.x0, ym), c(xm, ym)),
            (c(xm, ym), c(rect.x1, ym)),
            (c(xm, rect.y0), c(xm, ym)),
            (c(xm, ym), c(xm, rect.y1)),
        ];
        let mut inner: Vec<Vec<EdgeEvent>> = Vec::with_capacity(4);
        for (a, b) in interior {
            match self.edge(a, b) {
                Some(ev) => inner.push(ev),
                None => {
                    flagged.push(rect);
                    return;
                }
            }
        }
        let (mid_l, mid_r, mid_b, mid_t) = (&inner[0], &inner[1], &inner[2], &inner[3]);
        let quads: [(Region, [&[EdgeEvent]; 4]); 4] = [
            (
                Region { x0: rect.x0, y0: rect.y0, x1: xm, y1: ym },
                [&bottom_l, mid_l, &left_b, mid_b],
            ),
            (
                Region { x0: xm, y0: rect.y0, x1: rect.x1, y1: ym },
                [&bottom_r, mid_r, mid_b, &right_b],
            ),
            (
                Region { x0: rect.x0, y0: ym, x1: xm, y1: rect.y1 },
                [mid_l, &top_l, &left_t, mid_t],
            ),
            (
                Region { x0: xm, y0: ym, x1: rect.x1, y1: rect.y1 },
                [mid_r, &top_r, mid_t, &right_t],
            ),
        ];
        for (r, s) in quads {
            self.cell(r, s, depth + 1, segs, flagged);
        }
    }
}

/// Samples `B+` over `region` on a `resolution x resolution` grid.
pub fn sample_bplus(f: &BivariatePolynomial, branch: &BranchData, region: Region, resolution: usize) -> Result<BPlusGraph> {
    if resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    let nx = resolution;
    let hx = region.width() / nx as f64;
    let hy = region.height() / nx as f64;
    let ox = region.x0 + LATTICE_SHIFT.0 * hx;
    let oy = region.y0 + LATTICE_SHIFT.1 * hy;
    let grid = Region {
        x0: ox,
        y0: oy,
        x1: ox + nx as f64 * hx,
        y1: oy + nx as f64 * hy,
    };
    let vertex = |i: usize, j: usize| Complex64::new(ox + i as f64 * hx, oy + j as f64 * hy);
    let cell_rect = |i: usize, j: usize| Region {
        x0: ox + i as f64 * hx,
        y0: oy + j as f64 * hy,
        x1: ox + (i + 1) as f64 * hx,
        y1: oy + (j + 1) as f64 * hy,
    };

    // cells within one cell of a branch point are excluded
    let mut excluded = vec![false; nx * nx];
    for p in &branch.points {
        let ci = ((p.z.re - ox) / hx).floor() as i64;
        let cj = ((p.z.im - oy) / hy).floor() as i64;
        for di in -1..=1 {
            for dj in -1..=1 {
                let (i, j) = (ci + di, cj + dj);
                if i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < nx {
                    excluded[i as usize * nx + j as usize] = true;
                }
            }
        }
    }
    let is_excluded = |i: i64, j: i64| -> bool {
        i < 0 || j < 0 || i as usize >= nx || j as usize >= nx || excluded[i as usize * nx + j as usize]
    };

    let sampler = Sampler {
        f,
        branch,
        opts: TrackOptions {
            max_step: 1.0,
            clearance: Clearance::Unchecked,
            ..TrackOptions::default()
        },
    };

    // horizontal edge (i, j): vertex(i, j) -> vertex(i + 1, j), index i * (nx + 1) + j
    // vertical edge (i, j): vertex(i, j) -> vertex(i, j + 1), index i * nx + j
    let horizontal: Vec<Option<Vec<EdgeEvent>>> = (0..nx * (nx + 1))
        .into_par_iter()
        .map(|idx| {
            let (i, j) = ((idx / (nx + 1)) as i64, (idx % (nx + 1)) as i64);
            if is_excluded(i, j) && is_excluded(i, j - 1) {
                return Some(Vec::new());
            }
            sampler.edge(vertex(i as usize, j as usize), vertex(i as usize + 1, j as usize))
        })
        .collect();
    let vertical: Vec<Option<Vec<EdgeEvent>>> = ((0..(nx + 1) * nx).into_par_iter())
        .map(|idx| {
            let (i, j) = ((idx / nx) as i64, (idx % nx) as i64);
            if is_excluded(i, j) && is_excluded(i - 1, j) {
                return Some(Vec::new());
            }
            sampler.edge(vertex(i as usize, j as usize), vertex(i as usize, j as usize + 1))
        })
        .collect();

    let per_cell: Vec<(Vec<Seg>, Vec<Region>)> = (0..nx * nx)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nx, idx % nx);
            let mut segs = Vec::new();
            let mut flagged = Vec::new();
            if excluded[idx] {
                return (segs, flagged);
            }
            let sides = [
                &horizontal[i * (nx + 1) + j],
                &horizontal[i * (nx + 1) + j + 1],
                &vertical[i * nx + j],
                &vertical[(i + 1) * nx + j],
            ];
            if sides.iter().any(|s| s.is_none()) {
                flagged.push(cell_rect(i, j));
                return (segs, flagged);
            }
            let sides = sides.map(|s| s.as_deref().unwrap());
            sampler.cell(cell_rect(i, j), sides, 0, &mut segs, &mut flagged);
            (segs, flagged)
        })
        .collect();

    let mut segs = Vec::new();
    let mut flagged = Vec::new();
    for (s, fl) in per_cell {
        segs.extend(s);
        flagged.extend(fl);
    }
    let excluded_rects = (0..nx * nx).filter(|&idx| excluded[idx]).map(|idx| cell_rect(idx / nx, idx % nx)).collect();
    Ok(BPlusGraph {
        region: grid,
        resolution,
        edges: chain(segs),
        branch_points: branch.locations(),
        flagged,
        excluded: excluded_rects,
    })
}

fn key(z: Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

/// Joins segments of equal label sharing endpoints into polylines.
fn chain(segs: Vec<Seg>) -> Vec<BPlusEdge> {
    let mut starts: HashMap<((u64, u64), usize), Vec<usize>> = HashMap::new();
    let mut ends: HashMap<((u64, u64), usize), usize> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        starts.entry((key(s.a), s.label)).or_default().push(i);
        ends.insert((key(s.b), s.label), i);
    }
    let mut used = vec![false; segs.len()];
    let mut edges = Vec::new();
    for first in 0..segs.len() {
        if used[first] {
            continue;
        }
        // walk back to the start of the chain
        let mut head = first;
        let mut guard = 0;
        while let Some(&prev) = ends.get(&(key(segs[head].a), segs[head].label)) {
            if used[prev] || prev == first || guard > segs.len() {
                break;
            }
            head = prev;
            guard += 1;
        }
        let label = segs[head].label;
        let mut points = vec![segs[head].a];
        let mut cur = head;
        loop {
            used[cur] = true;
            points.push(segs[cur].b);
            let next = starts
                .get(&(key(segs[cur].b), label))
                .and_then(|v| v.iter().copied().find(|&j| !used[j]));
            match next {
                Some(j) => cur = j,
                None => break,
            }
        }
        let normals = points
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                Complex64::new(0.0, 1.0) * d / d.norm()
            })
            .collect();
        edges.push(BPlusEdge { label, points, normals });
    }
    edges
}

/// Reads the braid word of a loop from its crossings with the sampled
/// graph, in the order met along the loop.
pub fn crossings_of(graph: &BPlusGraph, path: &LoopPath, strands: usize) -> Result<BraidWord> {
    let (hx, hy) = graph.cell_size();
    let chord = 0.25 * hx.min(hy);
    let pts: Vec<Complex64> = path.sample(chord).into_iter().map(|(_, p)| p).collect();
    for &p in &pts {
        if !graph.region.contains(p) {
            return Err(Error::InvalidInput(format!("loop leaves the sampled region at {p}")));
        }
    }
    let bad: Vec<&Region> = graph.flagged.iter().chain(&graph.excluded).collect();
    for w in pts.windows(2) {
        if let Some(r) = bad.iter().find(|r| r.intersects_chord(w[0], w[1])) {
            return Err(Error::GraphUnreliable {
                point: Complex64::new(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)),
            });
        }
    }

    // bucket graph segments by grid cell
    let cell_of = |z: Complex64| -> (i64, i64) {
        (
            ((z.re - graph.region.x0) / hx).floor() as i64,
            ((z.im - graph.region.y0) / hy).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64), Vec<(usize, usize)>> = HashMap::new();
    for (ei, e) in graph.edges.iter().enumerate() {
        for si in 0..e.points.len() - 1 {
            let (a, b) = (e.points[si], e.points[si + 1]);
            let (ca, cb) = (cell_of(a), cell_of(b));
            for i in ca.0.min(cb.0)..=ca.0.max(cb.0) {
                for j in ca.1.min(cb.1)..=ca.1.max(cb.1) {
                    buckets.entry((i, j)).or_default().push((ei, si));
                }
            }
        }
    }

    let mut letters = Vec::new();
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (cp, cq) = (cell_of(p), cell_of(q));
        let mut cands: Vec<(usize, usize)> = Vec::new();
        for i in cp.0.min(cq.0) - 1..=cp.0.max(cq.0) + 1 {
            for j in cp.1.min(cq.1) - 1..=cp.1.max(cq.1) + 1 {
                if let Some(v) = buckets.get(&(i, j)) {
                    cands.extend(v.iter().copied());
                }
            }
        }
        cands.sort_unstable();
        cands.dedup();
        let mut hits: Vec<(f64, BraidLetter)> = Vec::new();
        for (ei, si) in cands {
            let e = &graph.edges[ei];
            let (a, b) = (e.points[si], e.points[si + 1]);
            if let Some(s) = half_open_intersection(p, q, a, b) {
                let dir = q - p;
                let dot = (dir * e.normals[si].conj()).re;
                let letter = if dot > 0.0 {
                    BraidLetter::positive(e.label)
                } else {
                    BraidLetter::negative(e.label)
                };
                hits.push((s, letter));
            }
        }
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        letters.extend(hits.into_iter().map(|(_, l)| l));
    }
    BraidWord::new(strands, letters)
}

/// Parameter `s in [0, 1)` on `[p, q)` where it meets `[a, b)`, if it does.
fn half_open_intersection(p: Complex64, q: Complex64, a: Complex64, b: Complex64) -> Option<f64> {
    let r = q - p;
    let d = b - a;
    let denom = r.re * d.im - r.im * d.re;
    if denom == 0.0 {
        return None;
    }
    let ap = a - p;
    let s = (ap.re * d.im - ap.im * d.re) / denom;
    let u = (ap.re * r.im - ap.im * r.re) / denom;
    ((0.0..1.0).contains(&s) && (0.0..1.0).contains(&u)).then_some(s)
}
