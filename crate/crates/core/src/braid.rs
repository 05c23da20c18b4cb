//! Braid words in the standard generators `s1 .. s(n-1)` and their inverses.
//!
//! Words are plain letter sequences. Nothing here solves the word problem in
//! the braid group: every comparison is either free-group level (free and
//! cyclic reduction) or goes through an invariant (exponent sum, underlying
//! permutation, number of closure components).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default length bound for the exhaustive syntactic quasipositivity parse.
pub const DEFAULT_QP_PARSE_BOUND: usize = 24;

/// One letter `s_k^{+1}` or `s_k^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(usize, i8)", into = "(usize, i8)")]
pub struct BraidLetter {
    index: usize,
    sign: i8,
}

impl BraidLetter {
    pub fn new(index: usize, sign: i8) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidInput("generator index must be >= 1".into()));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidInput(format!("letter sign must be +1 or -1, got {sign}")));
        }
        Ok(Self { index, sign })
    }

    pub fn positive(index: usize) -> Self {
        assert!(index >= 1, "generator index must be >= 1");
        Self { index, sign: 1 }
    }

    pub fn negative(index: usize) -> Self {
        assert!(index >= 1, "generator index must be >= 1");
        Self { index, sign: -1 }
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn inverse(self) -> Self {
        Self {
            index: self.index,
            sign: -self.sign,
        }
    }

    pub fn cancels(self, other: Self) -> bool {
        self.index == other.index && self.sign == -other.sign
    }
}

impl TryFrom<(usize, i8)> for BraidLetter {
    type Error = Error;

    fn try_from((index, sign): (usize, i8)) -> Result<Self> {
        Self::new(index, sign)
    }
}

impl From<BraidLetter> for (usize, i8) {
    fn from(l: BraidLetter) -> Self {
        (l.index, l.sign)
    }
}

impl fmt::Display for BraidLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign > 0 {
            write!(f, "s{}", self.index)
        } else {
            write!(f, "s{}^-1", self.index)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawWord", into = "RawWord")]
pub struct BraidWord {
    strands: usize,
    letters: Vec<BraidLetter>,
}

#[derive(Serialize, Deserialize)]
struct RawWord {
    n: usize,
    letters: Vec<BraidLetter>,
}

impl TryFrom<RawWord> for BraidWord {
    type Error = Error;

    fn try_from(raw: RawWord) -> Result<Self> {
        Self::new(raw.n, raw.letters)
    }
}

impl From<BraidWord> for RawWord {
    fn from(w: BraidWord) -> Self {
        RawWord {
            n: w.strands,
            letters: w.letters,
        }
    }
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<BraidLetter>) -> Result<Self> {
        if strands < 2 {
            return Err(Error::InvalidInput(format!("braid needs at least 2 strands, got {strands}")));
        }
        if let Some(bad) = letters.iter().find(|l| l.index >= strands) {
            return Err(Error::InvalidInput(format!(
                "letter {bad} out of range for {strands} strands"
            )));
        }
        Ok(Self { strands, letters })
    }

    pub fn identity(strands: usize) -> Result<Self> {
        Self::new(strands, Vec::new())
    }

    /// Build from `(index, sign)` pairs; panics on malformed input. Meant for
    /// literals in tests and fixtures.
    pub fn from_pairs(strands: usize, pairs: &[(usize, i8)]) -> Self {
        let letters = pairs
            .iter()
            .map(|&(k, s)| BraidLetter::new(k, s).expect("valid letter"))
            .collect();
        Self::new(strands, letters).expect("valid word")
    }

    /// Parse whitespace-separated `s<k>` / `s<k>^-1` tokens.
    pub fn parse(strands: usize, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let body = tok
                .strip_prefix('s')
                .or_else(|| tok.strip_prefix('σ'))
                .ok_or_else(|| Error::InvalidInput(format!("bad braid token `{tok}`")))?;
            let (num, sign) = match body.split_once('^') {
                None => (body, 1),
                Some((num, "-1")) => (num, -1),
                Some((num, "1")) | Some((num, "+1")) => (num, 1),
                Some(_) => return Err(Error::InvalidInput(format!("bad exponent in `{tok}`"))),
            };
            let index: usize = num
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad generator index in `{tok}`")))?;
            letters.push(BraidLetter::new(index, sign)?);
        }
        Self::new(strands, letters)
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Reverse the letters and invert each one.
    pub fn inverse(&self) -> Self {
        Self {
            strands: self.strands,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.strands, other.strands, "strand counts differ");
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self {
            strands: self.strands,
            letters,
        }
    }

    pub fn push(&mut self, letter: BraidLetter) {
        assert!(letter.index < self.strands, "letter out of range");
        self.letters.push(letter);
    }

    /// Rotate the letters left by `k` positions (a conjugate word).
    pub fn rotated(&self, k: usize) -> Self {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let k = k % letters.len();
            letters.rotate_left(k);
        }
        Self {
            strands: self.strands,
            letters,
        }
    }

    /// Delete adjacent cancelling pairs until none remain.
    pub fn free_reduce(&self) -> Self {
        let mut out: Vec<BraidLetter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            match out.last() {
                Some(&last) if last.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Self {
            strands: self.strands,
            letters: out,
        }
    }

    /// Free reduction followed by stripping cancelling first/last letters.
    pub fn cyclic_reduce(&self) -> Self {
        let reduced = self.free_reduce();
        let letters = &reduced.letters;
        let (mut lo, mut hi) = (0usize, letters.len());
        while hi - lo >= 2 && letters[lo].cancels(letters[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        Self {
            strands: self.strands,
            letters: letters[lo..hi].to_vec(),
        }
    }

    /// True when the two words are equal after free reduction.
    pub fn freely_equal(&self, other: &Self) -> bool {
        self.strands == other.strands && self.free_reduce().letters == other.free_reduce().letters
    }

    /// True when the cyclic reductions agree up to rotation.
    pub fn cyclically_equal(&self, other: &Self) -> bool {
        if self.strands != other.strands {
            return false;
        }
        let a = self.cyclic_reduce();
        let b = other.cyclic_reduce();
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        (0..a.len()).any(|k| a.letters[k..].iter().chain(&a.letters[..k]).eq(b.letters.iter()))
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.sign as i64).sum()
    }

    /// Underlying permutation. Starting from the identity arrangement, each
    /// letter `s_k` swaps the contents of positions `k` and `k+1`; the result
    /// maps a position to the strand label that ends there.
    pub fn permutation(&self) -> Permutation {
        let mut images: Vec<usize> = (1..=self.strands).collect();
        for l in &self.letters {
            images.swap(l.index - 1, l.index);
        }
        Permutation { images }
    }

    pub fn closure_components(&self) -> usize {
        self.permutation().cycle_count()
    }

    pub fn classify_positivity(&self) -> Positivity {
        self.classify_positivity_with_bound(DEFAULT_QP_PARSE_BOUND)
    }

    pub fn classify_positivity_with_bound(&self, bound: usize) -> Positivity {
        let positive = self.letters.iter().all(|l| l.sign > 0);
        let strictly_positive = positive && {
            let mut seen = vec![false; self.strands];
            for l in &self.letters {
                seen[l.index] = true;
            }
            seen[1..].iter().all(|&s| s)
        };
        let syntactically_quasipositive = if positive {
            Tristate::Yes
        } else if self.letters.len() > bound {
            Tristate::Unknown
        } else if parses_as_qp(&self.letters) {
            Tristate::Yes
        } else {
            Tristate::No
        };
        Positivity {
            positive,
            strictly_positive,
            syntactically_quasipositive,
        }
    }
}

/// Whether `letters` splits into consecutive blocks `w s_k w^-1` with `w^-1`
/// the literal reverse-inverse of `w`.
fn parses_as_qp(letters: &[BraidLetter]) -> bool {
    let m = letters.len();
    let is_block = |a: usize, b: usize| -> bool {
        // [a, b) of odd length with a positive centre letter
        let len = b - a;
        if len.is_multiple_of(2) {
            return false;
        }
        let half = len / 2;
        if letters[a + half].sign < 0 {
            return false;
        }
        (0..half).all(|i| letters[a + i].cancels(letters[b - 1 - i]))
    };
    let mut ok = vec![false; m + 1];
    ok[0] = true;
    for end in 1..=m {
        ok[end] = (0..end).any(|start| ok[start] && is_block(start, end));
    }
    ok[m]
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.letters {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tristate {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Positivity {
    pub positive: bool,
    pub strictly_positive: bool,
    pub syntactically_quasipositive: Tristate,
}

/// A bijection of `{1, .., n}` stored as its list of images.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &i in &images {
            if i == 0 || i > n || seen[i] {
                return Err(Error::InvalidInput(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (1..=n).collect(),
        }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j - 1] = i + 1;
        }
        Self { images: inv }
    }

    pub fn cycle_count(&self) -> usize {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i] - 1;
            }
        }
        cycles
    }
}

/// One factor `w s_k w^-1` of a quasipositive factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpFactor {
    pub conjugator: BraidWord,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFactorization", into = "RawFactorization")]
pub struct QuasipositiveFactorization {
    strands: usize,
    factors: Vec<QpFactor>,
}

#[derive(Serialize, Deserialize)]
struct RawFactor {
    conjugator: Vec<BraidLetter>,
    k: usize,
}

#[derive(Serialize, Deserialize)]
struct RawFactorization {
    n: usize,
    factors: Vec<RawFactor>,
}

impl TryFrom<RawFactorization> for QuasipositiveFactorization {
    type Error = Error;

    fn try_from(raw: RawFactorization) -> Result<Self> {
        let factors = raw
            .factors
            .into_iter()
            .map(|f| {
                Ok(QpFactor {
                    conjugator: BraidWord::new(raw.n, f.conjugator)?,
                    k: f.k,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.n, factors)
    }
}

impl From<QuasipositiveFactorization> for RawFactorization {
    fn from(q: QuasipositiveFactorization) -> Self {
        RawFactorization {
            n: q.strands,
            factors: q
                .factors
                .into_iter()
                .map(|f| RawFactor {
                    conjugator: f.conjugator.letters,
                    k: f.k,
                })
                .collect(),
        }
    }
}

impl QuasipositiveFactorization {
    pub fn new(strands: usize, factors: Vec<QpFactor>) -> Result<Self> {
        if strands < 2 {
            return Err(Error::InvalidInput(format!("braid needs at least 2 strands, got {strands}")));
        }
        for f in &factors {
            if f.conjugator.strands != strands {
                return Err(Error::InvalidInput("conjugator strand count mismatch".into()));
            }
            if f.k == 0 || f.k >= strands {
                return Err(Error::InvalidInput(format!(
                    "generator index {} out of range for {strands} strands",
                    f.k
                )));
            }
        }
        Ok(Self { strands, factors })
    }

    /// Shorthand used by fixtures: `(conjugator pairs, k)` per factor.
    pub fn from_parts(strands: usize, parts: &[(&[(usize, i8)], usize)]) -> Self {
        let factors = parts
            .iter()
            .map(|&(conj, k)| QpFactor {
                conjugator: BraidWord::from_pairs(strands, conj),
                k,
            })
            .collect();
        Self::new(strands, factors).expect("valid factorization")
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn factors(&self) -> &[QpFactor] {
        &self.factors
    }

    /// Concatenate `w s_k w^-1` over the factors.
    pub fn expand(&self) -> BraidWord {
        let mut letters = Vec::new();
        for f in &self.factors {
            letters.extend_from_slice(&f.conjugator.letters);
            letters.push(BraidLetter::positive(f.k));
            letters.extend(f.conjugator.letters.iter().rev().map(|l| l.inverse()));
        }
        BraidWord {
            strands: self.strands,
            letters,
        }
    }

    /// Euler characteristic of the band surface: one disk per strand, one
    /// band per factor.
    pub fn band_euler_characteristic(&self) -> i64 {
        self.strands as i64 - self.factors.len() as i64
    }
}

impl fmt::Display for QuasipositiveFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|q| {
                if q.conjugator.is_empty() {
                    format!("(s{})", q.k)
                } else {
                    format!("({} . s{} . {})", q.conjugator, q.k, q.conjugator.inverse())
                }
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}
