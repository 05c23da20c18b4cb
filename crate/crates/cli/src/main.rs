use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qpbraid::bplus::{sample_bplus, BPlusGraph, Region};
use qpbraid::branch::{analyze, BranchData, DEFAULT_BUDGET};
use qpbraid::monodromy::{
    enclosed_count, lollipop_loop, qp_factorization_with, track_roots, CrossingEvent, TrackOptions,
};
use qpbraid::path::LoopPath;
use qpbraid::poly::{parse_polynomial, DEFAULT_TOL};
use qpbraid::realization::{realize, Realization};
use qpbraid::render::{render_braid_svg, render_plane_svg};
use qpbraid::{BivariatePolynomial, BraidWord, QuasipositiveFactorization};

/// Resolution of the `B+` picture drawn behind a realized loop.
const REALIZE_SVG_RES: usize = 128;

#[derive(Parser)]
#[command(name = "qpbraid", version, about = "Braid monodromy of algebraic functions along loops")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Check that a file written with `--json` parses back.
    #[arg(long, value_name = "FILE")]
    validate: Option<PathBuf>,

    /// Fix the rotation angle instead of choosing it.
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<f64>,

    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Root-finding tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Branch points, perturbation and rotation of a polynomial.
    Analyze {
        #[command(flatten)]
        poly: PolyArg,
        /// Largest perturbation tried to reach genericity.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: f64,
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Braid word along a loop.
    Braid(BraidArgs),
    /// Sample the labeled graph B+ over a rectangle.
    Bplus {
        #[command(flatten)]
        poly: PolyArg,
        /// x0,y0,x1,y1
        #[arg(long, allow_hyphen_values = true)]
        region: String,
        #[arg(long, default_value_t = 128)]
        res: usize,
        #[arg(long, value_name = "OUT")]
        svg: Option<PathBuf>,
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Build a polynomial and loop realizing a quasipositive factorization.
    Realize {
        /// Factorization JSON file.
        #[arg(long)]
        qpf: PathBuf,
        #[arg(long, value_name = "OUT")]
        svg: Option<PathBuf>,
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Refinement and exponent-sum checks on a loop; exit code 1 on failure.
    Verify {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        lp: LoopArgs,
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PolyArg {
    /// Expression such as "w^3 - 3*w + 2*z^4", or a file with an expression
    /// or polynomial JSON.
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
}

#[derive(Args)]
struct LoopArgs {
    /// Loop JSON file.
    #[arg(long = "loop", value_name = "FILE")]
    loop_file: Option<PathBuf>,
    /// Circle re,im,r starting at angle 0.
    #[arg(long, allow_hyphen_values = true)]
    circle: Option<String>,
    /// Run the circle clockwise.
    #[arg(long)]
    cw: bool,
}

#[derive(Args)]
struct BraidArgs {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    lp: LoopArgs,
    /// Build a lollipop loop and read off its quasipositive factorization.
    #[arg(long)]
    qp: bool,
    /// Branch point indices (in the order printed by `analyze`).
    #[arg(long)]
    targets: Option<String>,
    /// re,im
    #[arg(long, allow_hyphen_values = true)]
    basepoint: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
    /// Write the crossing events as JSON lines.
    #[arg(long, value_name = "OUT")]
    events: Option<PathBuf>,
}

/// Everything written with `--json`, tagged by `kind`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Output {
    Analysis {
        polynomial: BivariatePolynomial,
        text: String,
        branch: BranchData,
    },
    Braid {
        polynomial: BivariatePolynomial,
        word: BraidWord,
        text: String,
        exponent_sum: i64,
        components: usize,
        enclosed_count: i64,
        simple: bool,
        path: LoopPath,
        factorization: Option<QuasipositiveFactorization>,
        events: Vec<CrossingEvent>,
    },
    Bplus {
        polynomial: BivariatePolynomial,
        graph: BPlusGraph,
    },
    Realization {
        polynomial_text: String,
        word_text: String,
        realization: Realization,
    },
    Verification {
        passed: bool,
        checks: Vec<Check>,
    },
}

#[derive(Serialize, Deserialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

struct Settings {
    theta: Option<f64>,
    tol: f64,
}

impl Settings {
    fn track(&self) -> TrackOptions {
        TrackOptions {
            root_tol: self.tol,
            ..TrackOptions::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = Settings {
        theta: cli.theta,
        tol: cli.tol,
    };
    let result = match (&cli.validate, cli.command) {
        (Some(file), None) => validate(file),
        (None, Some(cmd)) => run(cmd, &settings),
        (Some(_), Some(_)) => Err(anyhow!("--validate cannot be combined with a subcommand")),
        (None, None) => Err(anyhow!("no subcommand given (see --help)")),
    };
    match result {
        Ok(code) => code,
        Err(e) => report(&e),
    }
}

/// Diagnostics go to stderr as one JSON object; numerical failures exit 3,
/// everything else 2.
fn report(e: &anyhow::Error) -> ExitCode {
    let core = e.chain().find_map(|c| c.downcast_ref::<qpbraid::Error>());
    let numerical = core.is_some_and(|c| !c.is_input_error());
    let diag = serde_json::json!({
        "error": if numerical { "numerical" } else { "input" },
        "message": format!("{e:#}"),
        "detail": core.map(|c| format!("{c:?}")),
    });
    eprintln!("{diag}");
    ExitCode::from(if numerical { 3 } else { 2 })
}

fn run(cmd: Command, s: &Settings) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Analyze { poly, budget, json } => cmd_analyze(&poly, budget, json.as_deref(), s),
        Command::Braid(args) => cmd_braid(&args, s),
        Command::Bplus {
            poly,
            region,
            res,
            svg,
            json,
        } => cmd_bplus(&poly, &region, res, svg.as_deref(), json.as_deref(), s),
        Command::Realize { qpf, svg, json } => cmd_realize(&qpf, svg.as_deref(), json.as_deref()),
        Command::Verify { poly, lp, json } => cmd_verify(&poly, &lp, json.as_deref(), s),
    }
}

fn validate(file: &Path) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let out: Output = serde_json::from_str(&text).with_context(|| format!("{} is not valid output", file.display()))?;
    let kind = match out {
        Output::Analysis { .. } => "analysis",
        Output::Braid { .. } => "braid",
        Output::Bplus { .. } => "bplus",
        Output::Realization { .. } => "realization",
        Output::Verification { .. } => "verification",
    };
    println!("valid {kind}");
    Ok(ExitCode::SUCCESS)
}

fn write_json(path: Option<&Path>, out: &Output) -> anyhow::Result<()> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(out)?;
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn read_poly(arg: &PolyArg) -> anyhow::Result<BivariatePolynomial> {
    let p = Path::new(&arg.poly);
    let text = if p.is_file() {
        fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
    } else {
        arg.poly.clone()
    };
    let text = text.trim();
    if text.starts_with('{') {
        Ok(serde_json::from_str(text).context("parsing polynomial JSON")?)
    } else {
        Ok(parse_polynomial(text)?)
    }
}

fn floats(text: &str, count: usize, what: &str) -> anyhow::Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("{what}: expected {count} comma-separated numbers, got `{text}`"))?;
    if v.len() != count {
        bail!("{what}: expected {count} comma-separated numbers, got `{text}`");
    }
    Ok(v)
}

fn read_loop(lp: &LoopArgs) -> anyhow::Result<Option<LoopPath>> {
    match (&lp.loop_file, &lp.circle) {
        (Some(_), Some(_)) => bail!("give either --loop or --circle, not both"),
        (Some(file), None) => {
            let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            Ok(Some(serde_json::from_str(&text).context("parsing loop JSON")?))
        }
        (None, Some(c)) => {
            let v = floats(c, 3, "--circle")?;
            Ok(Some(LoopPath::circle(Complex64::new(v[0], v[1]), v[2], !lp.cw)?))
        }
        (None, None) => Ok(None),
    }
}

fn setup(poly: &PolyArg, budget: f64, s: &Settings) -> anyhow::Result<(BivariatePolynomial, BranchData)> {
    let f = read_poly(poly)?;
    Ok(analyze(&f, budget, s.theta)?)
}

fn cmd_analyze(poly: &PolyArg, budget: f64, json: Option<&Path>, s: &Settings) -> anyhow::Result<ExitCode> {
    let (g, b) = setup(poly, budget, s)?;
    let mut out = String::new();
    writeln!(out, "polynomial: {g}")?;
    match b.epsilon {
        Some(e) => writeln!(out, "perturbed by {e} w")?,
        None => writeln!(out, "no perturbation needed")?,
    }
    writeln!(out, "theta: {}", b.theta)?;
    if let Some(m) = b.margin {
        writeln!(out, "margin: {m:e}")?;
    }
    writeln!(out, "branch points: {}", b.points.len())?;
    for (i, p) in b.points.iter().enumerate() {
        writeln!(out, "  [{i}] {:.12} {:+.12}i  multiplicity {}", p.z.re, p.z.im, p.multiplicity)?;
    }
    print!("{out}");
    write_json(
        json,
        &Output::Analysis {
            text: g.to_string(),
            polynomial: g,
            branch: b,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_braid(a: &BraidArgs, s: &Settings) -> anyhow::Result<ExitCode> {
    let (g, b) = setup(&a.poly, DEFAULT_BUDGET, s)?;
    let n = g.degree_w();
    let opts = s.track();
    let (path, tracking, factorization) = if a.qp {
        if read_loop(&a.lp)?.is_some() {
            bail!("--qp builds its own loop; drop --loop/--circle");
        }
        let targets: Vec<usize> = a
            .targets
            .as_deref()
            .ok_or_else(|| anyhow!("--qp needs --targets"))?
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .context("--targets: expected comma-separated indices")?;
        let bp = floats(
            a.basepoint.as_deref().ok_or_else(|| anyhow!("--qp needs --basepoint"))?,
            2,
            "--basepoint",
        )?;
        let radius = a.radius.ok_or_else(|| anyhow!("--qp needs --radius"))?;
        let lp = lollipop_loop(&b, &targets, Complex64::new(bp[0], bp[1]), radius)?;
        let qp = qp_factorization_with(&g, &b, &lp, &opts)?;
        (qp.lollipop.path, qp.tracking, Some(qp.factorization))
    } else {
        let path = read_loop(&a.lp)?.ok_or_else(|| anyhow!("give a loop with --loop or --circle"))?;
        if !path.is_closed() {
            bail!("the loop is not closed");
        }
        let t = track_roots(&g, &b, &path, &opts)?;
        (path, t, None)
    };
    let word = tracking.word(n);
    let simple = path.is_simple();
    let enclosed = enclosed_count(&path, &b);
    let mut out = String::new();
    writeln!(out, "{}", if word.is_empty() { "(empty)".to_string() } else { word.to_string() })?;
    writeln!(out, "strands: {n}")?;
    writeln!(out, "exponent sum: {}", word.exponent_sum())?;
    writeln!(out, "closure components: {}", word.closure_components())?;
    writeln!(out, "enclosed branch points: {enclosed}")?;
    if !simple {
        writeln!(out, "note: the loop is not simple")?;
    }
    if let Some(q) = &factorization {
        writeln!(out, "factorization: {q}")?;
    }
    print!("{out}");
    if let Some(p) = &a.events {
        let mut lines = String::new();
        for e in &tracking.events {
            lines.push_str(&serde_json::to_string(e)?);
            lines.push('\n');
        }
        fs::write(p, lines).with_context(|| format!("writing {}", p.display()))?;
    }
    write_json(
        a.json.as_deref(),
        &Output::Braid {
            polynomial: g,
            text: word.to_string(),
            exponent_sum: word.exponent_sum(),
            components: word.closure_components(),
            enclosed_count: enclosed,
            simple,
            path,
            factorization,
            events: tracking.events,
            word,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bplus(
    poly: &PolyArg,
    region: &str,
    res: usize,
    svg: Option<&Path>,
    json: Option<&Path>,
    s: &Settings,
) -> anyhow::Result<ExitCode> {
    let (g, b) = setup(poly, DEFAULT_BUDGET, s)?;
    let r = floats(region, 4, "--region")?;
    let region = Region::new(r[0], r[1], r[2], r[3])?;
    for p in &b.points {
        if !region.contains(p.z) {
            eprintln!("warning: branch point {} lies outside the region", p.z);
        }
    }
    let graph = sample_bplus(&g, &b, region, res)?;
    let mut labels: Vec<usize> = graph.edges.iter().map(|e| e.label).collect();
    labels.sort_unstable();
    let mut out = String::new();
    writeln!(out, "polylines: {}", graph.edges.len())?;
    for l in 1..g.degree_w() {
        let c = labels.iter().filter(|&&x| x == l).count();
        if c > 0 {
            writeln!(out, "  s{l}: {c}")?;
        }
    }
    writeln!(out, "flagged cells: {}", graph.flagged.len())?;
    print!("{out}");
    if let Some(p) = svg {
        fs::write(p, render_plane_svg(&graph, None, &b)?).with_context(|| format!("writing {}", p.display()))?;
    }
    write_json(json, &Output::Bplus { polynomial: g, graph })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_realize(qpf: &Path, svg: Option<&Path>, json: Option<&Path>) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(qpf).with_context(|| format!("reading {}", qpf.display()))?;
    let q: QuasipositiveFactorization = serde_json::from_str(&text).context("parsing factorization JSON")?;
    let r = realize(&q)?;
    println!("polynomial: {}", r.f);
    println!("factorization: {}", r.factorization);
    println!("verification: {}", r.word);
    println!("reduced: {}", r.word.free_reduce());
    if let Some(p) = svg {
        let (_, b) = analyze(&r.f, DEFAULT_BUDGET, None)?;
        let (lo, hi) = r.path.bbox();
        let pad = 0.1 * (hi - lo).norm().max(1.0);
        let region = Region::new(lo.re - pad, lo.im - pad, hi.re + pad, hi.im + pad)?;
        let graph = sample_bplus(&r.f, &b, region, REALIZE_SVG_RES)?;
        let plane = render_plane_svg(&graph, Some(&r.path), &b)?;
        fs::write(p, plane).with_context(|| format!("writing {}", p.display()))?;
        let braid = p.with_extension("braid.svg");
        fs::write(&braid, render_braid_svg(&r.word)).with_context(|| format!("writing {}", braid.display()))?;
    }
    write_json(
        json,
        &Output::Realization {
            polynomial_text: r.f.to_string(),
            word_text: r.word.to_string(),
            realization: r,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(poly: &PolyArg, lp: &LoopArgs, json: Option<&Path>, s: &Settings) -> anyhow::Result<ExitCode> {
    let (g, b) = setup(poly, DEFAULT_BUDGET, s)?;
    let path = read_loop(lp)?.ok_or_else(|| anyhow!("give a loop with --loop or --circle"))?;
    if !path.is_closed() {
        bail!("the loop is not closed");
    }
    let n = g.degree_w();
    let coarse = s.track();
    let fine = TrackOptions {
        max_step: coarse.max_step / 2.0,
        ..coarse
    };
    let a = track_roots(&g, &b, &path, &coarse)?.word(n);
    let c = track_roots(&g, &b, &path, &fine)?.word(n);
    let enclosed = enclosed_count(&path, &b);
    let checks = vec![
        Check {
            name: "refinement".into(),
            passed: a == c,
            detail: format!("step 1/{}: {a}; step 1/{}: {c}", 1.0 / coarse.max_step, 1.0 / fine.max_step),
        },
        Check {
            name: "exponent-sum".into(),
            passed: a.exponent_sum() == enclosed,
            detail: format!("exponent sum {}, enclosed branch points {enclosed}", a.exponent_sum()),
        },
    ];
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    write_json(json, &Output::Verification { passed, checks })?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
