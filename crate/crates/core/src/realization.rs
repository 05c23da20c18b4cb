//! From a quasipositive factorization to a polynomial and a loop whose
//! braid monodromy reproduces it.
//!
//! The polynomial is `P(w)(w - z) + eps` with `P(w) = (w - 1)...(w - n + 1)`.
//! Near `z = j` two of its roots meet and `B+` carries the label `s_j`.
//! For each generator a loop from a common basepoint is found whose braid
//! is exactly that generator; a factor `c s_k c^-1` is then realized by
//! running the generator loops of `c`, the loop of `s_k`, and `c` backwards.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branch::{analyze, BranchData, DEFAULT_BUDGET};
use crate::braid::{BraidWord, QuasipositiveFactorization};
use crate::error::{Error, Result};
use crate::monodromy::{braid_along, lollipop_loop, max_feasible_radius, qp_factorization};
use crate::path::LoopPath;
use crate::poly::{BivariatePolynomial, UnivariatePolynomial};

pub const DEFAULT_EPSILON: f64 = 0.05;

/// How many times `eps` is halved when the curve comes out non-generic.
pub const EPSILON_HALVINGS: u32 = 4;

/// Lollipop radius as a fraction of the largest feasible one.
const RADIUS_FRACTION: f64 = 0.4;

/// `P(w)(w - z) + eps` for `P(w) = (w - 1)(w - 2)...(w - n + 1)`.
pub fn realization_curve(n: usize, eps: f64) -> Result<BivariatePolynomial> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 strands, got {n}")));
    }
    if !(eps != 0.0 && eps.abs() <= 0.1) {
        return Err(Error::InvalidInput(format!("epsilon must satisfy 0 < |eps| <= 0.1, got {eps}")));
    }
    let roots: Vec<Complex64> = (1..n).map(|j| Complex64::new(j as f64, 0.0)).collect();
    let p = UnivariatePolynomial::from_roots(&roots);
    // table[i][j]: coefficient of w^i z^j
    let mut table = vec![vec![0.0; 2]; n + 1];
    for (i, c) in p.coeffs().iter().enumerate() {
        table[i + 1][0] += c.re;
        table[i][1] -= c.re;
    }
    table[0][0] += eps;
    BivariatePolynomial::from_table(&table)
}

/// Generator loops for one strand count, shared by every factorization
/// with that many strands.
#[derive(Debug, Clone)]
pub struct RealizationPlan {
    pub strands: usize,
    pub epsilon: f64,
    pub f: BivariatePolynomial,
    pub branch: BranchData,
    pub basepoint: Complex64,
    /// `generators[k - 1]` is a loop at the basepoint whose braid is `s_k`.
    pub generators: Vec<LoopPath>,
    /// Words read along the generator loops (before free reduction).
    pub generator_words: Vec<BraidWord>,
}

impl RealizationPlan {
    pub fn build(n: usize) -> Result<Self> {
        Self::build_with(n, DEFAULT_EPSILON)
    }

    pub fn build_with(n: usize, eps: f64) -> Result<Self> {
        let mut last = None;
        for i in 0..=EPSILON_HALVINGS {
            let e = eps * 0.5f64.powi(i as i32);
            match Self::attempt(n, e) {
                Ok(plan) => return Ok(plan),
                Err(err @ Error::InvalidInput(_)) => return Err(err),
                Err(err) => last = Some(err),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn attempt(n: usize, eps: f64) -> Result<Self> {
        let f = realization_curve(n, eps)?;
        let (g, branch) = analyze(&f, DEFAULT_BUDGET, None)?;
        if branch.epsilon.is_some() {
            return Err(Error::NotGeneric(format!("realization curve with eps = {eps} needs perturbation")));
        }
        let (lo, hi) = branch
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z.re), hi.max(p.z.re)));
        let spread = (hi - lo).max(1.0);
        let basepoint = Complex64::new(lo - 2.0 * spread, 0.0);

        // lollipops around each branch point, as (conjugator, k, loop)
        let mut candidates = Vec::new();
        for t in 0..branch.points.len() {
            let r = RADIUS_FRACTION * max_feasible_radius(&branch, &[t], basepoint);
            let lp = lollipop_loop(&branch, &[t], basepoint, r)?;
            let Ok(qp) = qp_factorization(&g, &branch, &lp) else {
                continue;
            };
            if qp.lollipop.basepoint != basepoint {
                continue;
            }
            let factor = &qp.factorization.factors()[0];
            candidates.push((factor.conjugator.clone(), factor.k, qp.lollipop.path));
        }

        // a loop for c s_k c^-1 becomes one for s_k once loops for the letters
        // of c are known
        let mut generators: Vec<Option<LoopPath>> = vec![None; n - 1];
        let mut words: Vec<Option<BraidWord>> = vec![None; n - 1];
        loop {
            let mut progress = false;
            for (c, k, path) in &candidates {
                if generators[k - 1].is_some() {
                    continue;
                }
                let Some(conj) = word_loop(&generators, c)? else {
                    continue;
                };
                let full = match conj {
                    Some(cl) => LoopPath::concat_all(&[cl.reversed(), path.clone(), cl])?,
                    None => path.clone(),
                };
                let word = braid_along(&g, &branch, &full)?;
                let w = word.free_reduce();
                if w.len() == 1 && w.letters()[0].index() == *k && w.letters()[0].sign() == 1 {
                    generators[k - 1] = Some(full);
                    words[k - 1] = Some(word);
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        if let Some(k) = generators.iter().position(|g| g.is_none()) {
            return Err(Error::TemplatesExhausted {
                k: k + 1,
                words: candidates.iter().map(|(c, k, _)| format!("({c}) s{k} ({c})^-1")).collect(),
            });
        }
        Ok(Self {
            strands: n,
            epsilon: eps,
            f: g,
            branch,
            basepoint,
            generators: generators.into_iter().map(|g| g.expect("checked")).collect(),
            generator_words: words.into_iter().map(|w| w.expect("checked")).collect(),
        })
    }

    /// Loop whose braid freely equals the factorization's expansion.
    pub fn loop_for(&self, qpf: &QuasipositiveFactorization) -> Result<LoopPath> {
        if qpf.strands() != self.strands {
            return Err(Error::InvalidInput(format!(
                "factorization has {} strands, plan has {}",
                qpf.strands(),
                self.strands
            )));
        }
        let gens: Vec<Option<LoopPath>> = self.generators.iter().cloned().map(Some).collect();
        let mut parts = Vec::new();
        for factor in qpf.factors() {
            let conj = word_loop(&gens, &factor.conjugator)?.expect("all generators known");
            if let Some(c) = &conj {
                parts.push(c.clone());
            }
            parts.push(self.generators[factor.k - 1].clone());
            if let Some(c) = &conj {
                parts.push(c.reversed());
            }
        }
        if parts.is_empty() {
            // empty factorization: a small circle enclosing nothing
            let r = 0.25 * self.branch.points.iter().map(|p| (p.z - self.basepoint).norm()).fold(1.0, f64::min);
            let center = self.basepoint - Complex64::new(r, 0.0);
            return LoopPath::circle(center, r, true);
        }
        LoopPath::concat_all(&parts)
    }
}

/// The concatenation of generator loops spelling `word`; `Ok(None)` inside
/// the outer option when the word is empty, outer `None` when a letter has
/// no loop yet.
fn word_loop(generators: &[Option<LoopPath>], word: &BraidWord) -> Result<Option<Option<LoopPath>>> {
    let mut parts = Vec::new();
    for l in word.letters() {
        match &generators[l.index() - 1] {
            Some(g) if l.sign() > 0 => parts.push(g.clone()),
            Some(g) => parts.push(g.reversed()),
            None => return Ok(None),
        }
    }
    if parts.is_empty() {
        return Ok(Some(None));
    }
    Ok(Some(Some(LoopPath::concat_all(&parts)?)))
}

fn plan_cache() -> &'static Mutex<HashMap<usize, Arc<RealizationPlan>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<RealizationPlan>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The plan for `n` strands with the default `eps`, built once per process.
pub fn cached_plan(n: usize) -> Result<Arc<RealizationPlan>> {
    if let Some(p) = plan_cache().lock().expect("plan cache poisoned").get(&n) {
        return Ok(p.clone());
    }
    let plan = Arc::new(RealizationPlan::build(n)?);
    plan_cache()
        .lock()
        .expect("plan cache poisoned")
        .entry(n)
        .or_insert_with(|| plan.clone());
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub f: BivariatePolynomial,
    pub epsilon: f64,
    pub basepoint: Complex64,
    pub path: LoopPath,
    /// Braid read back from the loop by continuation.
    pub word: BraidWord,
    pub factorization: QuasipositiveFactorization,
}

/// Realizes `qpf` and checks the result by tracking the roots along the loop.
pub fn realize(qpf: &QuasipositiveFactorization) -> Result<Realization> {
    let plan = cached_plan(qpf.strands())?;
    realize_with(&plan, qpf)
}

pub fn realize_with(plan: &RealizationPlan, qpf: &QuasipositiveFactorization) -> Result<Realization> {
    let path = plan.loop_for(qpf)?;
    let word = braid_along(&plan.f, &plan.branch, &path)?;
    let expected = qpf.expand();
    if !word.freely_equal(&expected) || word.exponent_sum() != qpf.factors().len() as i64 {
        return Err(Error::VerificationMismatch {
            expected: expected.free_reduce().to_string(),
            got: word.free_reduce().to_string(),
        });
    }
    Ok(Realization {
        f: plan.f.clone(),
        epsilon: plan.epsilon,
        basepoint: plan.basepoint,
        path,
        word,
        factorization: qpf.clone(),
    })
}
