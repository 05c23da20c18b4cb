//! SVG pictures: the `z`-plane with `B`, `B+` and a loop, and braid
//! diagrams. Output is deterministic: elements come in input order and
//! every coordinate is printed with six decimals.
//!
//! Braid diagrams read left to right with position 1 at the top. In a
//! positive letter `s_k` the strand entering at position `k + 1` passes over
//! the one entering at `k`; negative letters are drawn the other way round.

use std::fmt::Write;

use num_complex::Complex64;

use crate::bplus::{BPlusGraph, Region};
use crate::braid::BraidWord;
use crate::branch::BranchData;
use crate::error::{Error, Result};
use crate::path::LoopPath;

/// Edge colors, cycled by generator index.
pub const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

const PLANE_WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const LEGEND_WIDTH: f64 = 120.0;

fn color(label: usize) -> &'static str {
    PALETTE[(label.max(1) - 1) % PALETTE.len()]
}

struct View {
    region: Region,
    scale: f64,
}

impl View {
    fn x(&self, z: Complex64) -> f64 {
        MARGIN + (z.re - self.region.x0) * self.scale
    }

    fn y(&self, z: Complex64) -> f64 {
        MARGIN + (self.region.y1 - z.im) * self.scale
    }

    fn point(&self, z: Complex64) -> String {
        format!("{:.6},{:.6}", self.x(z), self.y(z))
    }

    /// Screen direction of a plane vector (the y axis flips).
    fn dir(&self, v: Complex64) -> Complex64 {
        let d = Complex64::new(v.re, -v.im);
        d / d.norm()
    }
}

/// Small filled triangle at `(x, y)` pointing along the screen direction `d`.
fn arrowhead(out: &mut String, x: f64, y: f64, d: Complex64, size: f64, fill: &str) {
    let tip = Complex64::new(x, y) + d * size;
    let side = Complex64::new(-d.im, d.re) * (0.5 * size);
    let a = Complex64::new(x, y) + side;
    let b = Complex64::new(x, y) - side;
    let _ = writeln!(
        out,
        r#"<polygon points="{:.6},{:.6} {:.6},{:.6} {:.6},{:.6}" fill="{fill}"/>"#,
        tip.re, tip.im, a.re, a.im, b.re, b.im
    );
}

/// The region with `B+`, its branch points, and optionally a loop.
pub fn render_plane_svg(graph: &BPlusGraph, path: Option<&LoopPath>, branch: &BranchData) -> Result<String> {
    let region = graph.region;
    if !(region.width() > 0.0 && region.height() > 0.0) {
        return Err(Error::InvalidInput("cannot render an empty region".into()));
    }
    let scale = PLANE_WIDTH / region.width();
    let view = View { region, scale };
    let width = PLANE_WIDTH + 2.0 * MARGIN + LEGEND_WIDTH;
    let height = region.height() * scale + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.6}" height="{height:.6}" viewBox="0 0 {width:.6} {height:.6}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.6}" height="{height:.6}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN:.6}" y="{MARGIN:.6}" width="{:.6}" height="{:.6}" fill="none" stroke="#999999" stroke-width="1"/>"##,
        region.width() * scale,
        region.height() * scale
    );

    // real and imaginary axes when visible
    let _ = writeln!(out, r##"<g class="axes" stroke="#cccccc" stroke-width="0.5">"##);
    if region.y0 <= 0.0 && region.y1 >= 0.0 {
        let (a, b) = (Complex64::new(region.x0, 0.0), Complex64::new(region.x1, 0.0));
        let _ = writeln!(out, r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#, view.x(a), view.y(a), view.x(b), view.y(b));
    }
    if region.x0 <= 0.0 && region.x1 >= 0.0 {
        let (a, b) = (Complex64::new(0.0, region.y0), Complex64::new(0.0, region.y1));
        let _ = writeln!(out, r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#, view.x(a), view.y(a), view.x(b), view.y(b));
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g class="flagged" fill="#ffdd88" stroke="none">"##);
    for r in &graph.flagged {
        let tl = Complex64::new(r.x0, r.y1);
        let _ = writeln!(
            out,
            r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}"/>"#,
            view.x(tl),
            view.y(tl),
            r.width() * scale,
            r.height() * scale
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="bplus" fill="none" stroke-width="2">"#);
    for e in &graph.edges {
        let pts: Vec<String> = e.points.iter().map(|&p| view.point(p)).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="edge" data-label="{}" stroke="{}" points="{}"/>"#,
            e.label,
            color(e.label),
            pts.join(" ")
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="coorientation">"#);
    for e in &graph.edges {
        if e.normals.is_empty() {
            continue;
        }
        let i = e.normals.len() / 2;
        let mid = 0.5 * (e.points[i] + e.points[i + 1]);
        arrowhead(&mut out, view.x(mid), view.y(mid), view.dir(e.normals[i]), 6.0, color(e.label));
    }
    let _ = writeln!(out, "</g>");

    if let Some(path) = path {
        let chord = region.width().max(region.height()) / 400.0;
        let pts: Vec<String> = path.sample(chord).into_iter().map(|(_, p)| view.point(p)).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="loop" fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(out, r#"<g class="loop-direction">"#);
        for k in 1..8 {
            let t = k as f64 / 8.0;
            let p = path.point(t);
            arrowhead(&mut out, view.x(p), view.y(p), view.dir(path.direction(t)), 7.0, "black");
        }
        let _ = writeln!(out, "</g>");
        let b = path.start();
        let _ = writeln!(
            out,
            r#"<rect class="basepoint" x="{:.6}" y="{:.6}" width="8" height="8" fill="black"/>"#,
            view.x(b) - 4.0,
            view.y(b) - 4.0
        );
    }

    let _ = writeln!(out, r#"<g class="branch-points" fill="black">"#);
    for p in &branch.points {
        if region.contains(p.z) {
            let _ = writeln!(out, r#"<circle cx="{:.6}" cy="{:.6}" r="3.5"/>"#, view.x(p.z), view.y(p.z));
        }
    }
    let _ = writeln!(out, "</g>");

    let mut labels: Vec<usize> = graph.edges.iter().map(|e| e.label).collect();
    labels.sort_unstable();
    labels.dedup();
    let lx = PLANE_WIDTH + 2.0 * MARGIN;
    let _ = writeln!(out, r#"<g class="legend" font-family="sans-serif" font-size="14">"#);
    let _ = writeln!(out, r#"<text x="{lx:.6}" y="{:.6}">B+ labels</text>"#, MARGIN + 10.0);
    for (i, l) in labels.iter().enumerate() {
        let y = MARGIN + 32.0 + 22.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="{}" stroke-width="3"/>"#,
            y - 5.0,
            lx + 24.0,
            y - 5.0,
            color(*l)
        );
        let _ = writeln!(out, r#"<text x="{:.6}" y="{y:.6}">s{l}</text>"#, lx + 30.0);
    }
    let y = MARGIN + 32.0 + 22.0 * labels.len() as f64;
    let _ = writeln!(out, r#"<circle cx="{:.6}" cy="{:.6}" r="3.5" fill="black"/>"#, lx + 12.0, y - 5.0);
    let _ = writeln!(out, r#"<text x="{:.6}" y="{y:.6}">branch point</text>"#, lx + 30.0);
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

const STRAND_GAP: f64 = 40.0;
const COLUMN: f64 = 40.0;
const UNDER_GAP: f64 = 0.18;

/// The braid as `n` horizontal strands with one crossing per letter.
pub fn render_braid_svg(word: &BraidWord) -> String {
    let n = word.strands();
    let m = word.len();
    let width = 2.0 * MARGIN + COLUMN * (m.max(1) as f64 + 1.0);
    let height = 2.0 * MARGIN + STRAND_GAP * (n as f64 - 1.0);
    let y = |pos: usize| MARGIN + STRAND_GAP * (pos as f64 - 1.0);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.6}" height="{height:.6}" viewBox="0 0 {width:.6} {height:.6}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.6}" height="{height:.6}" fill="white"/>"#);
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="2" stroke-linecap="round">"#);
    let x_at = |col: usize| MARGIN + COLUMN * (col as f64 + 0.5);
    // straight pieces: lead-in, lead-out, and strands idle during each letter
    for pos in 1..=n {
        let _ = writeln!(
            out,
            r#"<line class="strand" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
            MARGIN,
            y(pos),
            x_at(0),
            y(pos)
        );
        let _ = writeln!(
            out,
            r#"<line class="strand" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
            x_at(m),
            y(pos),
            width - MARGIN,
            y(pos)
        );
    }
    for (c, l) in word.letters().iter().enumerate() {
        let (x0, x1) = (x_at(c), x_at(c + 1));
        let k = l.index();
        for pos in (1..=n).filter(|&p| p != k && p != k + 1) {
            let _ = writeln!(
                out,
                r#"<line class="strand" x1="{x0:.6}" y1="{:.6}" x2="{x1:.6}" y2="{:.6}"/>"#,
                y(pos),
                y(pos)
            );
        }
        let (top, bottom) = (y(k), y(k + 1));
        // strand from k+1 to k goes up, from k to k+1 goes down
        let up = [(x0, bottom), (x1, top)];
        let down = [(x0, top), (x1, bottom)];
        let (over, under) = if l.sign() > 0 { (up, down) } else { (down, up) };
        let class = if l.sign() > 0 { "crossing pos" } else { "crossing neg" };
        let _ = writeln!(out, r#"<g class="{class}">"#);
        let _ = writeln!(
            out,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
            over[0].0, over[0].1, over[1].0, over[1].1
        );
        let lerp = |s: f64| (under[0].0 + s * (under[1].0 - under[0].0), under[0].1 + s * (under[1].1 - under[0].1));
        let (a, b) = (lerp(0.5 - UNDER_GAP), lerp(0.5 + UNDER_GAP));
        let _ = writeln!(
            out,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
            under[0].0, under[0].1, a.0, a.1
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
            b.0, b.1, under[1].0, under[1].1
        );
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
