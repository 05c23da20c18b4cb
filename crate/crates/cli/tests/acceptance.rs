//! Acceptance checks, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL` line with its measurements before asserting.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qpbraid::bplus::{crossings_of, sample_bplus, BPlusGraph, Region};
use qpbraid::braid::QpFactor;
use qpbraid::branch::{analyze, BranchData, DEFAULT_BUDGET};
use qpbraid::monodromy::{
    braid_along, braid_along_with, clearance_floor, enclosed_count, lollipop_loop, max_feasible_radius, qp_factorization,
    Lollipop, TrackOptions,
};
use qpbraid::path::{LoopPath, Segment};
use qpbraid::poly::parse_polynomial;
use qpbraid::realization::realize;
use qpbraid::{BivariatePolynomial, BraidLetter, BraidWord, Error, QuasipositiveFactorization};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random loops keep at least this multiple of the clearance floor away
/// from every branch point, and never less than `RANDOM_CLEARANCE`.
const FLOOR_MARGIN: f64 = 2.0;
const RANDOM_CLEARANCE: f64 = 0.02;
const RANDOM_CASES: usize = 120;
const MAX_ERROR_RATE: f64 = 0.05;
const CORE_INSTANCES: usize = 1000;
const BPLUS_LOOPS: usize = 24;
const JITTERS: usize = 10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn line(id: u32, pass: bool, summary: &str) {
    println!("criterion {id}: {} {summary}", if pass { "PASS" } else { "FAIL" });
}

fn setup(expr: &str) -> (BivariatePolynomial, BranchData) {
    analyze(&parse_polynomial(expr).unwrap(), DEFAULT_BUDGET, None).unwrap()
}

fn word(n: usize, text: &str) -> BraidWord {
    BraidWord::parse(n, text).unwrap()
}

fn excursion(center: Complex64, rho: f64, turns: f64) -> Vec<Segment> {
    let entry = center * (1.0 - rho);
    let a0 = (-center).arg();
    vec![
        Segment::line(c(0.0, 0.0), entry),
        Segment::arc(center, rho, a0, a0 + 2.0 * PI * turns),
        Segment::line(entry, c(0.0, 0.0)),
    ]
}

/// Fixture loop for `w^3 - 3w + 2z^4`: from 0, three turns around `i`, one
/// around `e^{3 pi i/4}`, three turns back around `i`, one around `e^{pi i/4}`.
fn quartic_cubic_loop() -> LoopPath {
    let i = c(0.0, 1.0);
    let mut segs = excursion(i, 0.3, 3.0);
    segs.extend(excursion(Complex64::from_polar(1.0, 3.0 * PI / 4.0), 0.3, 1.0));
    segs.extend(excursion(i, 0.3, -3.0));
    segs.extend(excursion(Complex64::from_polar(1.0, PI / 4.0), 0.3, 1.0));
    LoopPath::new(segs).unwrap()
}

fn cli_word(args: &[&str]) -> (BraidWord, Duration) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_qpbraid"))
        .args(args)
        .arg("--json")
        .arg(&out)
        .output()
        .unwrap();
    let elapsed = t.elapsed();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (serde_json::from_value(v["word"].clone()).unwrap(), elapsed)
}

#[test]
fn criterion_1_square_root_circles() {
    let (ccw, t1) = cli_word(&["braid", "--poly", "w^2 - z", "--circle", "0,0,1"]);
    let (cw, t2) = cli_word(&["braid", "--poly", "w^2 - z", "--circle", "0,0,1", "--cw"]);
    let pass = ccw == word(2, "s1") && cw == word(2, "s1^-1") && t1 < Duration::from_secs(1) && t2 < Duration::from_secs(1);
    line(
        1,
        pass,
        &format!("ccw `{ccw}` ({:.3}s), cw `{cw}` ({:.3}s); want s1 / s1^-1 exactly, < 1s", t1.as_secs_f64(), t2.as_secs_f64()),
    );
    assert!(pass);
}

#[test]
fn criterion_2_quartic_cubic_word() {
    let t = Instant::now();
    let (f, b) = setup("w^3 - 3*w + 2*z^4");
    let w = braid_along(&f, &b, &quartic_cubic_loop()).unwrap().free_reduce();
    let elapsed = t.elapsed();
    let expected = word(3, "s1 s2 s2 s2 s1 s2^-1 s2^-1 s2^-1");
    let pass = w.cyclically_equal(&expected)
        && w.closure_components() == 1
        && w.exponent_sum() == 2
        && elapsed < Duration::from_secs(10);
    line(
        2,
        pass,
        &format!(
            "reduced word `{w}`, components {}, exponent sum {}, {:.3}s",
            w.closure_components(),
            w.exponent_sum(),
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

/// Monic in `w`, degree 2..=4, other coefficients integer polynomials in `z`
/// of degree <= 2 with entries in [-2, 2], made generic by perturbation.
fn random_curve(rng: &mut ChaCha8Rng) -> (BivariatePolynomial, BranchData) {
    loop {
        let n = rng.gen_range(2..=4);
        let mut table: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-2..=2) as f64).collect()).collect();
        table.push(vec![1.0]);
        let Ok(f) = BivariatePolynomial::from_table(&table) else {
            continue;
        };
        if let Ok((g, b)) = analyze(&f, DEFAULT_BUDGET, None) {
            if !b.points.is_empty() {
                return (g, b);
            }
        }
    }
}

fn clearance(path: &LoopPath, b: &BranchData) -> f64 {
    b.points.iter().map(|p| path.distance_to(p.z)).fold(f64::INFINITY, f64::min)
}

fn has_clearance(path: &LoopPath, b: &BranchData) -> bool {
    clearance(path, b) >= RANDOM_CLEARANCE.max(FLOOR_MARGIN * clearance_floor(b, path))
}

fn random_circle(rng: &mut ChaCha8Rng, b: &BranchData) -> LoopPath {
    loop {
        let center = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r = rng.gen_range(0.1..3.0);
        let l = LoopPath::circle_from(center, r, rng.gen_range(0.0..2.0 * PI), rng.gen_bool(0.5)).unwrap();
        if has_clearance(&l, b) {
            return l;
        }
    }
}

fn random_lollipop(rng: &mut ChaCha8Rng, b: &BranchData) -> Option<Lollipop> {
    let m = b.points.len();
    let count = rng.gen_range(1..=m.min(3));
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(rng);
    let targets = &idx[..count];
    let reach = b.points.iter().map(|p| p.z.norm()).fold(0.0, f64::max) + 1.5;
    let basepoint = Complex64::from_polar(reach, rng.gen_range(0.0..2.0 * PI));
    let r = 0.3 * max_feasible_radius(b, targets, basepoint);
    if r < 1e-4 {
        return None;
    }
    lollipop_loop(b, targets, basepoint, r).ok().filter(|lp| has_clearance(&lp.path, b))
}

struct RandomRun {
    cases: usize,
    rejected: usize,
    errors: Vec<String>,
    mismatches: Vec<String>,
    lollipops: Vec<(BivariatePolynomial, BranchData, Lollipop)>,
}

fn random_cases() -> RandomRun {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut run = RandomRun {
        cases: 0,
        rejected: 0,
        errors: Vec::new(),
        mismatches: Vec::new(),
        lollipops: Vec::new(),
    };
    while run.cases < RANDOM_CASES {
        let (f, b) = random_curve(&mut rng);
        let lollipop = run.cases % 2 == 1;
        let (path, lp) = if lollipop {
            match random_lollipop(&mut rng, &b) {
                Some(lp) => (lp.path.clone(), Some(lp)),
                None => {
                    run.rejected += 1;
                    continue;
                }
            }
        } else {
            (random_circle(&mut rng, &b), None)
        };
        run.cases += 1;
        match braid_along(&f, &b, &path) {
            Ok(w) => {
                let enclosed = enclosed_count(&path, &b);
                if w.exponent_sum() != enclosed {
                    run.mismatches.push(format!("{f}: exponent sum {} vs enclosed {enclosed}", w.exponent_sum()));
                }
                if let Some(lp) = lp {
                    run.lollipops.push((f, b, lp));
                }
            }
            Err(e) => run.errors.push(format!("{} on {f}: {e}", if lollipop { "lollipop" } else { "circle" })),
        }
    }
    run
}

#[test]
fn criterion_3_exponent_sum_counts_branch_points() {
    let t = Instant::now();
    let run = random_cases();
    let elapsed = t.elapsed();
    let rate = run.errors.len() as f64 / run.cases as f64;
    let pass = run.mismatches.is_empty() && rate <= MAX_ERROR_RATE && elapsed < Duration::from_secs(300);
    line(
        3,
        pass,
        &format!(
            "{} cases ({} lollipop draws without clearance redrawn), {} mismatches, {} errors ({:.1}%), {:.1}s",
            run.cases,
            run.rejected,
            run.mismatches.len(),
            run.errors.len(),
            100.0 * rate,
            elapsed.as_secs_f64()
        ),
    );
    for m in run.mismatches.iter().chain(&run.errors) {
        println!("  {m}");
    }
    assert!(pass);
}

#[test]
fn criterion_4_lollipops_factor_quasipositively() {
    let run = random_cases();
    let mut failures = Vec::new();
    for (f, b, lp) in &run.lollipops {
        match qp_factorization(f, b, lp) {
            Ok(qp) => {
                let direct = braid_along(f, b, &qp.lollipop.path).unwrap();
                let signs_ok = qp.factorization.factors().len() == lp.targets.len();
                if !signs_ok || !qp.factorization.expand().freely_equal(&direct) {
                    failures.push(format!("{f}: {} vs {direct}", qp.factorization));
                }
            }
            Err(e) => failures.push(format!("{f}: {e} (radius {}, targets {:?}, clearance {})", lp.radius, lp.targets, clearance(&lp.path, b))),
        }
    }
    let pass = failures.is_empty() && !run.lollipops.is_empty();
    line(
        4,
        pass,
        &format!("{} lollipops factored, {} failures", run.lollipops.len(), failures.len()),
    );
    for m in &failures {
        println!("  {m}");
    }
    assert!(pass);
}

fn qpf(n: usize, parts: &[(&[(usize, i8)], usize)]) -> QuasipositiveFactorization {
    QuasipositiveFactorization::from_parts(n, parts)
}

fn realization_corpus() -> Vec<QuasipositiveFactorization> {
    let mut corpus = Vec::new();
    for n in 2..=4usize {
        let letters: Vec<BraidLetter> =
            (1..n).flat_map(|k| [BraidLetter::positive(k), BraidLetter::negative(k)]).collect();
        let mut conj: Vec<Vec<BraidLetter>> = vec![vec![]];
        for a in &letters {
            conj.push(vec![*a]);
            for b in &letters {
                conj.push(vec![*a, *b]);
            }
        }
        for w in &conj {
            for k in 1..n {
                corpus.push(
                    QuasipositiveFactorization::new(
                        n,
                        vec![QpFactor {
                            conjugator: BraidWord::new(n, w.clone()).unwrap(),
                            k,
                        }],
                    )
                    .unwrap(),
                );
            }
        }
    }
    // 5_2 and the 8_20 pattern
    corpus.push(qpf(3, &[(&[], 1), (&[], 1), (&[], 2), (&[(2, 1)], 1)]));
    corpus.push(qpf(3, &[(&[], 1), (&[(2, 1), (2, 1), (2, 1)], 1)]));
    corpus
}

#[test]
fn criterion_5_realization_round_trip() {
    let t = Instant::now();
    let corpus = realization_corpus();
    let mut failures = Vec::new();
    for q in &corpus {
        match realize(q) {
            Ok(r) => {
                if !r.word.freely_equal(&q.expand()) || r.word.exponent_sum() != q.factors().len() as i64 {
                    failures.push(format!("{q}: got {}", r.word));
                }
            }
            Err(e) => failures.push(format!("{q}: {e}")),
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(120);
    line(
        5,
        pass,
        &format!("{} factorizations realized, {} failures, {:.1}s", corpus.len(), failures.len(), elapsed.as_secs_f64()),
    );
    for m in &failures {
        println!("  {m}");
    }
    assert!(pass);
}

/// Random circles and star-shaped polygons inside the graph's region.
fn random_region_loop(rng: &mut ChaCha8Rng, region: &Region) -> LoopPath {
    let span = region.width().min(region.height());
    let margin = 0.05 * span;
    loop {
        let center = c(
            rng.gen_range(region.x0 + margin..region.x1 - margin),
            rng.gen_range(region.y0 + margin..region.y1 - margin),
        );
        let room = (center.re - region.x0 - margin)
            .min(region.x1 - margin - center.re)
            .min(center.im - region.y0 - margin)
            .min(region.y1 - margin - center.im);
        if room < 0.1 {
            continue;
        }
        let ccw = rng.gen_bool(0.5);
        if rng.gen_bool(0.5) {
            let r = rng.gen_range(0.1..room);
            return LoopPath::circle_from(center, r, rng.gen_range(0.0..2.0 * PI), ccw).unwrap();
        }
        let k = rng.gen_range(5..=9);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        if !ccw {
            angles.reverse();
        }
        let pts: Vec<Complex64> = angles
            .iter()
            .map(|&a| center + Complex64::from_polar(rng.gen_range(0.3 * room..room), a))
            .collect();
        if let Ok(l) = LoopPath::polyline(&pts, true) {
            if l.is_simple() {
                return l;
            }
        }
    }
}

fn bplus_cross_check(expr: &str, region: Region, res: usize, seed: u64) -> (usize, usize, Vec<String>, BPlusGraph) {
    let (f, b) = setup(expr);
    let n = f.degree_w();
    let graph = sample_bplus(&f, &b, region, res).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut skipped) = (0, 0);
    let mut failures = Vec::new();
    while checked < BPLUS_LOOPS {
        let l = random_region_loop(&mut rng, &graph.region);
        if clearance(&l, &b) < 0.05 {
            skipped += 1;
            continue;
        }
        let from_graph = match crossings_of(&graph, &l, n) {
            Ok(w) => w,
            Err(Error::GraphUnreliable { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => panic!("{expr}: {e}"),
        };
        let tracked = braid_along(&f, &b, &l).unwrap();
        checked += 1;
        if from_graph.free_reduce() != tracked.free_reduce() {
            failures.push(format!("{expr}: graph `{from_graph}` vs tracking `{tracked}`"));
        }
    }
    (checked, skipped, failures, graph)
}

#[test]
fn criterion_6_bplus_cross_check() {
    let square2 = Region::new(-2.0, -2.0, 2.0, 2.0).unwrap();
    let square3 = Region::new(-3.0, -3.0, 3.0, 3.0).unwrap();
    let fixtures = [
        ("w^2 - z", square2, 256, 1),
        ("w^3 - 3*w + 2*z", square3, 128, 2),
        ("w^4 - z w^3 - w^2 + z w + 0.05", square3, 128, 3),
    ];
    let mut pass = true;
    let mut summary = Vec::new();
    let mut notes = Vec::new();
    for (expr, region, res, seed) in fixtures {
        let (checked, skipped, failures, graph) = bplus_cross_check(expr, region, res, seed);
        pass &= failures.is_empty() && checked >= 20;
        summary.push(format!("{expr}: {checked} loops agree-checked, {} disagree, {skipped} skipped", failures.len()));
        notes.extend(failures);
        if expr == "w^2 - z" {
            let (hx, hy) = graph.cell_size();
            let near_axis = graph
                .edges
                .iter()
                .all(|e| e.label == 1 && e.points.iter().all(|p| p.re <= hx && p.im.abs() <= hy));
            let length: f64 = graph
                .edges
                .iter()
                .flat_map(|e| e.points.windows(2).map(|w| (w[1] - w[0]).norm()))
                .sum();
            let covers = (length - 2.0).abs() <= 3.0 * hx;
            pass &= near_axis && covers;
            summary.push(format!("w^2 - z graph within one cell of the negative real axis: {near_axis}, length {length:.4}"));
        }
    }
    line(6, pass, &summary.join("; "));
    for m in &notes {
        println!("  {m}");
    }
    assert!(pass);
}

struct Fixture {
    expr: &'static str,
    path: LoopPath,
}

fn fixtures() -> Vec<Fixture> {
    let mut v = vec![
        Fixture {
            expr: "w^2 - z",
            path: LoopPath::circle(c(0.0, 0.0), 1.0, true).unwrap(),
        },
        Fixture {
            expr: "w^2 - z",
            path: LoopPath::circle(c(0.0, 0.0), 1.0, false).unwrap(),
        },
        Fixture {
            expr: "w^3 - 3*w + 2*z^4",
            path: quartic_cubic_loop(),
        },
        Fixture {
            expr: "w^3 - 3*w + 2*z",
            path: LoopPath::circle(c(0.0, 0.0), 3.0, true).unwrap(),
        },
    ];
    let (_, b) = setup("w^3 - 3*w + 2*z");
    v.push(Fixture {
        expr: "w^3 - 3*w + 2*z",
        path: lollipop_loop(&b, &[0, 1], c(0.0, -3.0), 0.4).unwrap().path,
    });
    v
}

/// The loop as a closed polygon through points at most `chord` apart, each
/// vertex moved by up to `amount` in a random direction.
fn jittered(path: &LoopPath, chord: f64, amount: f64, rng: &mut ChaCha8Rng) -> LoopPath {
    let mut pts: Vec<Complex64> = path.sample(chord).into_iter().map(|(_, p)| p).collect();
    pts.pop();
    let moved: Vec<Complex64> = pts
        .iter()
        .map(|&p| p + Complex64::from_polar(rng.gen_range(0.0..amount), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    LoopPath::polyline(&moved, true).unwrap()
}

#[test]
fn criterion_7_refinement_and_isotopy() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = Vec::new();
    let mut loops = 0;
    let mut jitters = 0;
    for fx in fixtures() {
        let (f, b) = setup(fx.expr);
        let base = braid_along(&f, &b, &fx.path).unwrap();
        for halvings in 1..=2 {
            let fine = braid_along_with(
                &f,
                &b,
                &fx.path,
                &TrackOptions {
                    max_step: TrackOptions::default().max_step / f64::powi(2.0, halvings),
                    ..TrackOptions::default()
                },
            )
            .unwrap();
            if fine != base {
                failures.push(format!("{}: refinement changed `{base}` to `{fine}`", fx.expr));
            }
        }
        let clear = clearance(&fx.path, &b);
        let reduced = base.free_reduce().cyclic_reduce();
        for _ in 0..JITTERS {
            // vertices move by at most half the clearance; the chord sagitta
            // of the sampling stays far below the other half
            let l = jittered(&fx.path, 0.25 * clear, 0.5 * clear, &mut rng);
            match braid_along(&f, &b, &l) {
                Ok(w) => {
                    if !w.free_reduce().cyclic_reduce().cyclically_equal(&reduced) {
                        failures.push(format!("{}: jitter gave `{w}` for `{base}`", fx.expr));
                    }
                }
                Err(e) => failures.push(format!("{}: jitter failed: {e}", fx.expr)),
            }
            jitters += 1;
        }
        loops += 1;
    }
    let pass = failures.is_empty();
    line(
        7,
        pass,
        &format!("{loops} fixture loops, 2 refinements each, {jitters} jittered copies, {} failures", failures.len()),
    );
    for m in &failures {
        println!("  {m}");
    }
    assert!(pass);
}

fn random_word(rng: &mut ChaCha8Rng, n: usize, max_len: usize) -> BraidWord {
    let len = rng.gen_range(0..=max_len);
    let letters = (0..len)
        .map(|_| {
            let k = rng.gen_range(1..n);
            if rng.gen_bool(0.5) {
                BraidLetter::positive(k)
            } else {
                BraidLetter::negative(k)
            }
        })
        .collect();
    BraidWord::new(n, letters).unwrap()
}

/// Cancels a randomly chosen adjacent inverse pair until none is left.
fn random_order_reduce(w: &BraidWord, rng: &mut ChaCha8Rng) -> Vec<BraidLetter> {
    let mut l = w.letters().to_vec();
    loop {
        let spots: Vec<usize> = (0..l.len().saturating_sub(1))
            .filter(|&i| l[i].index() == l[i + 1].index() && l[i].sign() == -l[i + 1].sign())
            .collect();
        let Some(&i) = spots.choose(rng) else {
            return l;
        };
        l.drain(i..i + 2);
    }
}

#[test]
fn criterion_8_braid_core_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts = [0usize; 5];
    let mut failures = Vec::new();
    for _ in 0..CORE_INSTANCES {
        let n = rng.gen_range(2..=6);
        let w = random_word(&mut rng, n, 40);
        let r = w.free_reduce();
        if r.free_reduce() != r {
            failures.push(format!("not idempotent on `{w}`"));
        }
        counts[0] += 1;
        if random_order_reduce(&w, &mut rng) != r.letters() {
            failures.push(format!("reduction order matters on `{w}`"));
        }
        counts[1] += 1;
        let u = random_word(&mut rng, n, 15);
        let conj = u.concat(&w).concat(&u.inverse());
        if conj.exponent_sum() != w.exponent_sum() || conj.closure_components() != w.closure_components() {
            failures.push(format!("conjugation by `{u}` changed invariants of `{w}`"));
        }
        counts[2] += 1;
        let m = rng.gen_range(0..=6);
        let factors = (0..m)
            .map(|_| QpFactor {
                conjugator: random_word(&mut rng, n, 6),
                k: rng.gen_range(1..n),
            })
            .collect();
        let q = QuasipositiveFactorization::new(n, factors).unwrap();
        if q.expand().exponent_sum() != m as i64 {
            failures.push(format!("expansion of {q} has exponent sum {}", q.expand().exponent_sum()));
        }
        counts[3] += 1;
        if q.band_euler_characteristic() != n as i64 - m as i64 {
            failures.push(format!("band Euler characteristic of {q}"));
        }
        counts[4] += 1;
    }
    let pass = failures.is_empty() && counts.iter().all(|&c| c >= CORE_INSTANCES);
    line(
        8,
        pass,
        &format!(
            "idempotence {}, confluence {}, conjugation {}, expansion {}, band Euler {} instances; {} failures",
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            counts[4],
            failures.len()
        ),
    );
    for m in failures.iter().take(10) {
        println!("  {m}");
    }
    assert!(pass);
}
