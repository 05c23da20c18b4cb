//! Paths in the `z`-plane built from line segments and circular arcs,
//! parametrized by normalized arc length `t in [0, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for endpoint matching between consecutive primitives.
const JOIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Segment {
    #[serde(rename = "seg")]
    Line { a: Complex64, b: Complex64 },
    /// Counterclockwise when `to > from`; `|to - from|` may exceed `2pi`.
    #[serde(rename = "arc")]
    Arc {
        center: Complex64,
        radius: f64,
        from: f64,
        to: f64,
    },
}

impl Segment {
    pub fn line(a: Complex64, b: Complex64) -> Self {
        Segment::Line { a, b }
    }

    pub fn arc(center: Complex64, radius: f64, from: f64, to: f64) -> Self {
        Segment::Arc {
            center,
            radius,
            from,
            to,
        }
    }

    /// Point at local parameter `s in [0, 1]`.
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { a, b } => a + (b - a) * s,
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => center + Complex64::from_polar(radius, from + (to - from) * s),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    /// Unit direction of travel at local parameter `s`.
    pub fn direction(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { a, b } => (b - a) / (b - a).norm(),
            Segment::Arc { from, to, .. } => {
                let phi = from + (to - from) * s;
                Complex64::new(0.0, (to - from).signum()) * Complex64::from_polar(1.0, phi)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { a, b } => (b - a).norm(),
            Segment::Arc { radius, from, to, .. } => radius * (to - from).abs(),
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Line { a, b } => Segment::Line { a: b, b: a },
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => Segment::Arc {
                center,
                radius,
                from: to,
                to: from,
            },
        }
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        match *self {
            Segment::Line { a, b } => {
                let d = b - a;
                let len2 = d.norm_sqr();
                let s = if len2 == 0.0 {
                    0.0
                } else {
                    (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0)
                };
                (a + d * s - p).norm()
            }
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let v = p - center;
                let sweep = (to - from).abs();
                let lo = from.min(to);
                let inside = sweep >= 2.0 * PI || (v.arg() - lo).rem_euclid(2.0 * PI) <= sweep;
                if inside {
                    (v.norm() - radius).abs()
                } else {
                    (self.start() - p).norm().min((self.end() - p).norm())
                }
            }
        }
    }

    /// Points along the primitive with chords no longer than `max_chord`
    /// (at least two points, endpoints included).
    pub fn sample(&self, max_chord: f64) -> Vec<Complex64> {
        let pieces = match self {
            Segment::Line { .. } => 1,
            Segment::Arc { .. } => ((self.length() / max_chord).ceil() as usize).clamp(1, 1 << 20),
        };
        (0..=pieces).map(|i| self.point(i as f64 / pieces as f64)).collect()
    }

    /// Continuous change of `arg(z - p)` along the primitive.
    pub fn swept_angle(&self, p: Complex64) -> f64 {
        match *self {
            Segment::Line { a, b } => ((b - p) / (a - p)).arg(),
            Segment::Arc { radius, from, to, .. } => {
                // chords are homotopic to the arc pieces in C - {p} once
                // their sagitta is below half the distance from p
                let dist = self.distance_to(p).max(f64::MIN_POSITIVE);
                let sweep = (to - from).abs();
                let mut pieces = (sweep / (PI / 8.0)).ceil().max(1.0) as usize;
                loop {
                    let half = sweep / pieces as f64 / 2.0;
                    if radius * (1.0 - half.cos()) < 0.5 * dist || pieces >= 1 << 24 {
                        break;
                    }
                    pieces *= 2;
                }
                let mut total = 0.0;
                let mut prev = self.start() - p;
                for i in 1..=pieces {
                    let cur = self.point(i as f64 / pieces as f64) - p;
                    total += (cur / prev).arg();
                    prev = cur;
                }
                total
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopJson", into = "LoopJson")]
pub struct LoopPath {
    segments: Vec<Segment>,
    /// Cumulative lengths, `cum[i]` = length before segment `i`; `cum[len]` = total.
    cum: Vec<f64>,
    closed: bool,
}

#[derive(Serialize, Deserialize)]
pub struct LoopJson {
    pub segments: Vec<Segment>,
}

impl TryFrom<LoopJson> for LoopPath {
    type Error = Error;

    fn try_from(j: LoopJson) -> Result<Self> {
        LoopPath::new(j.segments)
    }
}

impl From<LoopPath> for LoopJson {
    fn from(p: LoopPath) -> Self {
        LoopJson { segments: p.segments }
    }
}

impl LoopPath {
    /// Validates that consecutive primitives join up (to a relative
    /// tolerance, after which the joints are snapped exactly), that radii
    /// are positive, and that every primitive has positive length.
    pub fn new(mut segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("path has no segments".into()));
        }
        let mut scale: f64 = 0.0;
        for s in &segments {
            if let Segment::Arc { radius, from, to, .. } = *s {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidInput(format!("arc radius must be positive, got {radius}")));
                }
                if !from.is_finite() || !to.is_finite() {
                    return Err(Error::InvalidInput("arc angles must be finite".into()));
                }
            }
            let (a, b) = (s.start(), s.end());
            if !a.re.is_finite() || !a.im.is_finite() || !b.re.is_finite() || !b.im.is_finite() {
                return Err(Error::InvalidInput("path coordinates must be finite".into()));
            }
            scale = scale.max(a.norm()).max(b.norm()).max(s.length());
        }
        let tol = JOIN_TOL * scale.max(1.0);
        for (i, s) in segments.iter().enumerate() {
            if !(s.length() > 0.0) {
                return Err(Error::InvalidInput(format!("segment {i} has zero length")));
            }
        }
        for i in 1..segments.len() {
            let (prev_end, start) = (segments[i - 1].end(), segments[i].start());
            if (prev_end - start).norm() > tol {
                return Err(Error::InvalidInput(format!(
                    "segment {i} starts at {start} but the previous one ends at {prev_end}"
                )));
            }
            if let Segment::Line { a, .. } = &mut segments[i] {
                *a = prev_end;
            }
        }
        let closed = (segments[segments.len() - 1].end() - segments[0].start()).norm() <= tol;
        if closed {
            let first = segments[0].start();
            let last = segments.len() - 1;
            if let Segment::Line { b, .. } = &mut segments[last] {
                *b = first;
            }
        }
        let mut cum = Vec::with_capacity(segments.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for s in &segments {
            acc += s.length();
            cum.push(acc);
        }
        Ok(Self { segments, cum, closed })
    }

    /// Circle of the given radius starting and ending at its rightmost
    /// point (`angle0 = 0`), once around.
    pub fn circle(center: Complex64, radius: f64, ccw: bool) -> Result<Self> {
        Self::circle_from(center, radius, 0.0, ccw)
    }

    pub fn circle_from(center: Complex64, radius: f64, angle0: f64, ccw: bool) -> Result<Self> {
        let to = if ccw { angle0 + 2.0 * PI } else { angle0 - 2.0 * PI };
        Self::new(vec![Segment::arc(center, radius, angle0, to)])
    }

    /// Polyline through `points`, closed back to the first point if `close`.
    pub fn polyline(points: &[Complex64], close: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("polyline needs at least two points".into()));
        }
        let mut segs: Vec<Segment> = points.windows(2).map(|w| Segment::line(w[0], w[1])).collect();
        if close && points[0] != points[points.len() - 1] {
            segs.push(Segment::line(points[points.len() - 1], points[0]));
        }
        Self::new(segs)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.cum[self.segments.len()]
    }

    pub fn start(&self) -> Complex64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex64 {
        self.segments[self.segments.len() - 1].end()
    }

    /// Segment index and local parameter for global `t`.
    fn locate(&self, t: f64) -> (usize, f64) {
        let target = t.clamp(0.0, 1.0) * self.length();
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&target)) {
            Ok(i) => i.min(self.segments.len() - 1),
            Err(i) => (i - 1).min(self.segments.len() - 1),
        };
        let len = self.segments[i].length();
        (i, ((target - self.cum[i]) / len).clamp(0.0, 1.0))
    }

    pub fn point(&self, t: f64) -> Complex64 {
        if t >= 1.0 {
            return self.end();
        }
        let (i, s) = self.locate(t);
        self.segments[i].point(s)
    }

    pub fn direction(&self, t: f64) -> Complex64 {
        let (i, s) = self.locate(t);
        self.segments[i].direction(s)
    }

    /// Global parameter range `[t0, t1]` of segment `i`.
    pub fn segment_range(&self, i: usize) -> (f64, f64) {
        let total = self.length();
        (self.cum[i] / total, self.cum[i + 1] / total)
    }

    /// Parameters where primitives meet (segment boundaries), ascending,
    /// including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let total = self.length();
        self.cum.iter().map(|c| c / total).collect()
    }

    pub fn reversed(&self) -> Self {
        let segs = self.segments.iter().rev().map(|s| s.reversed()).collect();
        Self::new(segs).expect("reversal preserves validity")
    }

    /// `self` followed by `other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &LoopPath) -> Result<Self> {
        let mut segs = self.segments.clone();
        segs.extend_from_slice(&other.segments);
        Self::new(segs)
    }

    pub fn concat_all(parts: &[LoopPath]) -> Result<Self> {
        let segs: Vec<Segment> = parts.iter().flat_map(|p| p.segments.iter().copied()).collect();
        Self::new(segs)
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.segments.iter().map(|s| s.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// Winding number about `p` as a real number (an integer up to rounding
    /// for closed paths not through `p`).
    pub fn winding(&self, p: Complex64) -> f64 {
        self.segments.iter().map(|s| s.swept_angle(p)).sum::<f64>() / (2.0 * PI)
    }

    pub fn winding_number(&self, p: Complex64) -> i64 {
        self.winding(p).round() as i64
    }

    /// Points along the path with chords at most `max_chord` (arcs are
    /// subdivided, lines kept whole), with their global parameters.
    pub fn sample(&self, max_chord: f64) -> Vec<(f64, Complex64)> {
        let mut out = vec![(0.0, self.start())];
        for (i, s) in self.segments.iter().enumerate() {
            let (t0, t1) = self.segment_range(i);
            let pts = s.sample(max_chord);
            let m = pts.len() - 1;
            for (k, p) in pts.into_iter().enumerate().skip(1) {
                out.push((t0 + (t1 - t0) * k as f64 / m as f64, p));
            }
        }
        out
    }

    /// Axis-aligned bounding box `(min, max)` of a fine sampling.
    pub fn bbox(&self) -> (Complex64, Complex64) {
        let pts = self.sample(self.length() / 512.0);
        let mut lo = pts[0].1;
        let mut hi = pts[0].1;
        for (_, p) in pts {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        (lo, hi)
    }

    /// Whether the (closed) path is embedded, judged on a sampled polyline:
    /// no two non-adjacent chords intersect.
    pub fn is_simple(&self) -> bool {
        let pts: Vec<Complex64> = self.sample(self.length() / 1024.0).into_iter().map(|(_, p)| p).collect();
        let m = pts.len() - 1;
        for i in 0..m {
            for j in i + 2..m {
                if self.closed && i == 0 && j == m - 1 {
                    continue;
                }
                if chords_cross(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                    return false;
                }
            }
        }
        true
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper or touching intersection of closed segments `[p, q]` and `[r, s]`.
pub fn chords_cross(p: Complex64, q: Complex64, r: Complex64, s: Complex64) -> bool {
    let d1 = cross(q - p, r - p);
    let d2 = cross(q - p, s - p);
    let d3 = cross(s - r, p - r);
    let d4 = cross(s - r, q - r);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Complex64, b: Complex64, c: Complex64, d: f64| {
        d == 0.0 && c.re >= a.re.min(b.re) && c.re <= a.re.max(b.re) && c.im >= a.im.min(b.im) && c.im <= a.im.max(b.im)
    };
    on(p, q, r, d1) || on(p, q, s, d2) || on(r, s, p, d3) || on(r, s, q, d4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_parametrization() {
        let l = LoopPath::circle(c(0.0, 0.0), 1.0, true).unwrap();
        assert!(l.is_closed());
        assert!((l.length() - 2.0 * PI).abs() < 1e-12);
        assert!((l.point(0.25) - c(0.0, 1.0)).norm() < 1e-12);
        assert!((l.direction(0.0) - c(0.0, 1.0)).norm() < 1e-12);
        let cw = LoopPath::circle(c(0.0, 0.0), 1.0, false).unwrap();
        assert!((cw.point(0.25) - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn winding_numbers() {
        let l = LoopPath::circle(c(0.0, 0.0), 1.0, true).unwrap();
        assert_eq!(l.winding_number(c(0.0, 0.0)), 1);
        assert_eq!(l.winding_number(c(0.999, 0.0)), 1);
        assert_eq!(l.winding_number(c(1.001, 0.0)), 0);
        assert_eq!(l.reversed().winding_number(c(0.3, 0.2)), -1);
        let sq = LoopPath::polyline(&[c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)], true).unwrap();
        assert_eq!(sq.winding_number(c(0.0, 0.0)), 1);
        assert_eq!(sq.winding_number(c(3.0, 0.0)), 0);
        // three turns
        let triple = LoopPath::new(vec![Segment::arc(c(0.0, 1.0), 0.3, -PI / 2.0, -PI / 2.0 + 6.0 * PI)]).unwrap();
        assert_eq!(triple.winding_number(c(0.0, 1.0)), 3);
        assert_eq!(triple.winding_number(c(0.0, 0.0)), 0);
    }

    #[test]
    fn distance_to_arc() {
        let half = Segment::arc(c(0.0, 0.0), 1.0, 0.0, PI);
        assert!((half.distance_to(c(0.0, 2.0)) - 1.0).abs() < 1e-12);
        assert!((half.distance_to(c(0.0, -2.0)) - 5f64.sqrt()).abs() < 1e-12);
        let cw = Segment::arc(c(0.0, 0.0), 1.0, PI, 0.0);
        assert!((cw.distance_to(c(0.0, 2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_gaps_and_degenerate_pieces() {
        assert!(LoopPath::new(vec![Segment::line(c(0.0, 0.0), c(1.0, 0.0)), Segment::line(c(1.5, 0.0), c(2.0, 0.0))])
            .is_err());
        assert!(LoopPath::new(vec![Segment::line(c(0.0, 0.0), c(0.0, 0.0))]).is_err());
        assert!(LoopPath::new(vec![Segment::arc(c(0.0, 0.0), -1.0, 0.0, 1.0)]).is_err());
        assert!(LoopPath::new(vec![]).is_err());
    }

    #[test]
    fn concat_and_reverse() {
        let a = LoopPath::polyline(&[c(0.0, 0.0), c(1.0, 0.0)], false).unwrap();
        let b = LoopPath::polyline(&[c(1.0, 0.0), c(0.0, 0.0)], false).unwrap();
        let ab = a.concat(&b).unwrap();
        assert!(ab.is_closed());
        assert!(!a.is_closed());
        assert!((ab.point(0.25) - c(0.5, 0.0)).norm() < 1e-12);
        let r = ab.reversed();
        assert!((r.point(0.25) - c(0.5, 0.0)).norm() < 1e-12);
        assert!(a.concat(&a).is_err());
    }

    #[test]
    fn simplicity() {
        assert!(LoopPath::circle(c(0.0, 0.0), 1.0, true).unwrap().is_simple());
        let eight = LoopPath::polyline(&[c(0.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(-1.0, 1.0), c(-1.0, -1.0)], true)
            .unwrap();
        assert!(!eight.is_simple());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"segments":[{"kind":"arc","center":[0.0,1.0],"radius":0.5,"from":0.0,"to":3.0},{"kind":"seg","a":[-0.4949962483002227,1.0705600040299337],"b":[0.5,1.0]}]}"#;
        let l: LoopPath = serde_json::from_str(text).unwrap();
        assert_eq!(l.segments().len(), 2);
        assert!(l.is_closed());
        let back: LoopPath = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
        assert_eq!(back, l);
        assert!(serde_json::from_str::<LoopPath>(r#"{"segments":[{"kind":"seg","a":[0,0],"b":[1,0]},{"kind":"seg","a":[2,0],"b":[3,0]}]}"#).is_err());
    }
}
