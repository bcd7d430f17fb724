//! Source models: i.i.d. and two-component mixed sources.
//!
//! Probabilities of a length-`n` sequence under these sources depend only on
//! its type (symbol counts), which is what the samplers draw: a multinomial
//! type has exactly the law of the type of an i.i.d. sequence, so self
//! information sampled this way matches sequence-level sampling in
//! distribution at `O(|X|)` cost per draw instead of `O(n)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::streams;

/// Default cap on `|support|^n` for exhaustive enumeration.
pub const DEFAULT_SUPPORT_CAP: u128 = 1 << 20;

const PMF_SUM_TOL: f64 = 1e-12;

/// Memoryless source over symbols `0..alphabet_size`.
#[derive(Clone, Debug, PartialEq)]
pub struct IidSource {
    pmf: Vec<f64>,
}

impl IidSource {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() < 2 {
            return Err(Error::InvalidSource(format!(
                "alphabet size {} must be at least 2",
                pmf.len()
            )));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidSource("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidSource(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { pmf })
    }

    /// `P(1) = p`, `P(0) = 1 - p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Entropy in base `base`, with `0 log 0 = 0`.
    pub fn entropy(&self, base: usize) -> f64 {
        let ln_b = (base as f64).ln();
        self.pmf.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum::<f64>() / ln_b
    }

    /// Variance of the per-symbol self-information, in base `base` (squared).
    pub fn varentropy(&self, base: usize) -> f64 {
        let ln_b = (base as f64).ln();
        let h = self.entropy(base);
        self.pmf
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| {
                let d = -p.ln() / ln_b - h;
                p * d * d
            })
            .sum()
    }

    /// Natural-log probability of any sequence with the given symbol counts.
    pub fn ln_prob_counts(&self, counts: &[u64]) -> f64 {
        let mut acc = 0.0;
        for (&c, &p) in counts.iter().zip(&self.pmf) {
            if c == 0 {
                continue;
            }
            if p == 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += c as f64 * p.ln();
        }
        acc
    }

    /// Draws the type of an i.i.d. length-`n` sequence into `counts`.
    fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R, n: u64, counts: &mut [u64]) {
        let mut left = n;
        let mut mass = 1.0;
        let last = self.pmf.len() - 1;
        for (s, &p) in self.pmf.iter().enumerate() {
            if s == last || left == 0 {
                counts[s] = left;
                left = 0;
                continue;
            }
            let cond = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
            let c = Binomial::new(left, cond).expect("probability in [0, 1]").sample(rng);
            counts[s] = c;
            left -= c;
            mass -= p;
        }
    }
}

/// `P(x) = w(1) P_1(x) + w(2) P_2(x)` over two i.i.d. components.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedSource {
    weights: [f64; 2],
    components: [IidSource; 2],
}

impl MixedSource {
    pub fn new(weights: [f64; 2], components: [IidSource; 2]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidSource("mixture weights must be strictly positive".into()));
        }
        if (weights[0] + weights[1] - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidSource("mixture weights must sum to 1".into()));
        }
        if components[0].alphabet_size() != components[1].alphabet_size() {
            return Err(Error::InvalidSource("mixture components must share an alphabet".into()));
        }
        Ok(Self { weights, components })
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    pub fn components(&self) -> &[IidSource; 2] {
        &self.components
    }

    /// The same source with the component order reversed.
    pub fn swapped(&self) -> Self {
        let [a, b] = self.components.clone();
        Self { weights: [self.weights[1], self.weights[0]], components: [b, a] }
    }
}

/// Any supported source.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Iid(IidSource),
    Mixed(MixedSource),
}

impl From<IidSource> for Source {
    fn from(s: IidSource) -> Self {
        Source::Iid(s)
    }
}

impl From<MixedSource> for Source {
    fn from(s: MixedSource) -> Self {
        Source::Mixed(s)
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl Source {
    pub fn alphabet_size(&self) -> usize {
        match self {
            Source::Iid(s) => s.alphabet_size(),
            Source::Mixed(m) => m.components[0].alphabet_size(),
        }
    }

    /// Symbols with positive probability under some component.
    pub fn support_symbols(&self) -> Vec<usize> {
        (0..self.alphabet_size())
            .filter(|&s| match self {
                Source::Iid(src) => src.pmf[s] > 0.0,
                Source::Mixed(m) => m.components.iter().any(|c| c.pmf[s] > 0.0),
            })
            .collect()
    }

    /// Natural-log probability of a sequence with the given type.
    pub fn ln_prob_counts(&self, counts: &[u64]) -> f64 {
        match self {
            Source::Iid(s) => s.ln_prob_counts(counts),
            Source::Mixed(m) => {
                let a = m.weights[0].ln() + m.components[0].ln_prob_counts(counts);
                let b = m.weights[1].ln() + m.components[1].ln_prob_counts(counts);
                log_add_exp(a, b)
            }
        }
    }

    /// Symbol counts of `x`, rejecting out-of-range symbols.
    pub fn counts_of(&self, x: &[usize]) -> Result<Vec<u64>> {
        let k = self.alphabet_size();
        let mut counts = vec![0u64; k];
        for &s in x {
            if s >= k {
                return Err(Error::SymbolOutOfRange { symbol: s, alphabet: k });
            }
            counts[s] += 1;
        }
        Ok(counts)
    }

    /// Natural-log probability of `x`.
    pub fn ln_prob(&self, x: &[usize]) -> Result<f64> {
        Ok(self.ln_prob_counts(&self.counts_of(x)?))
    }

    fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R, n: u64, counts: &mut [u64]) {
        match self {
            Source::Iid(s) => s.sample_counts(rng, n, counts),
            Source::Mixed(m) => {
                let pick = if rng.random::<f64>() < m.weights[0] { 0 } else { 1 };
                m.components[pick].sample_counts(rng, n, counts);
            }
        }
    }
}

/// `log_base P(x)`; `-inf` exactly when `P(x) = 0`.
pub fn log_prob(source: &Source, x: &[usize], base: usize) -> Result<f64> {
    Ok(source.ln_prob(x)? / (base as f64).ln())
}

pub fn entropy(source: &IidSource, base: usize) -> f64 {
    source.entropy(base)
}

pub fn varentropy(source: &IidSource, base: usize) -> f64 {
    source.varentropy(base)
}

/// Draws `count` length-`n` sequences from `source` and returns their self
/// information `-log_base P(x)` under the full source law. Mixed sources pick
/// the component once per sequence. Deterministic given `seed`.
pub fn sample_self_info(source: &Source, n: usize, count: usize, seed: u64, base: usize) -> Vec<f64> {
    let ln_b = (base as f64).ln();
    let k = source.alphabet_size();
    streams::generate(count, seed, |rng| {
        let mut counts = vec![0u64; k];
        source.sample_counts(rng, n as u64, &mut counts);
        let v = -source.ln_prob_counts(&counts) / ln_b;
        // -0.0 from deterministic sources
        v + 0.0
    })
}

/// One sequence of a [`SequenceDist`].
#[derive(Clone, Debug, PartialEq)]
pub struct SeqProb {
    pub symbols: Vec<usize>,
    pub prob: f64,
    pub ln_prob: f64,
}

/// Full support of `X^n` with exact probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceDist {
    n: usize,
    entries: Vec<SeqProb>,
}

impl SequenceDist {
    /// Validates `entries`: nonempty, distinct, length `n`, positive
    /// probabilities summing to one within `1e-9`.
    pub fn new(n: usize, entries: Vec<SeqProb>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySupport);
        }
        if let Some(e) = entries.iter().find(|e| e.symbols.len() != n) {
            return Err(Error::InvalidSource(format!(
                "sequence {:?} does not have length {n}",
                e.symbols
            )));
        }
        if entries.iter().any(|e| e.prob.is_nan() || e.prob <= 0.0) {
            return Err(Error::InvalidSource("support probabilities must be positive".into()));
        }
        let total: f64 = entries.iter().map(|e| e.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSource(format!("probabilities sum to {total}")));
        }
        let mut seen: Vec<&[usize]> = entries.iter().map(|e| e.symbols.as_slice()).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSource("duplicate sequences".into()));
        }
        Ok(Self { n, entries })
    }

    /// Uniform distribution over `sequences`.
    pub fn uniform(n: usize, sequences: Vec<Vec<usize>>) -> Result<Self> {
        let m = sequences.len() as f64;
        let entries = sequences
            .into_iter()
            .map(|symbols| SeqProb { symbols, prob: 1.0 / m, ln_prob: -m.ln() })
            .collect();
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SeqProb] {
        &self.entries
    }

    /// `-log_base P(x)` for every entry, in entry order.
    pub fn self_info(&self, base: usize) -> Vec<f64> {
        let ln_b = (base as f64).ln();
        self.entries.iter().map(|e| -e.ln_prob / ln_b + 0.0).collect()
    }
}

/// Enumerates the support of `X^n` in lexicographic order of symbol index.
pub fn enumerate_support(source: &Source, n: usize, cap: u128) -> Result<SequenceDist> {
    let symbols = source.support_symbols();
    let size = (symbols.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::SupportTooLarge { size, cap });
    }
    let k = source.alphabet_size();
    let mut digits = vec![0usize; n];
    let mut entries = Vec::with_capacity(size as usize);
    loop {
        let seq: Vec<usize> = digits.iter().map(|&d| symbols[d]).collect();
        let mut counts = vec![0u64; k];
        for &s in &seq {
            counts[s] += 1;
        }
        let ln_prob = source.ln_prob_counts(&counts);
        if ln_prob > f64::NEG_INFINITY {
            entries.push(SeqProb { symbols: seq, prob: ln_prob.exp(), ln_prob });
        }
        // odometer, last position fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return SequenceDist::new(n, entries);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < symbols.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// JSON document form of a source.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SourceDoc {
    Iid { pmf: Vec<f64> },
    Mixed { weights: [f64; 2], components: Vec<SourceDoc> },
}

impl SourceDoc {
    pub fn to_source(&self) -> Result<Source> {
        match self {
            SourceDoc::Iid { pmf } => Ok(Source::Iid(IidSource::new(pmf.clone())?)),
            SourceDoc::Mixed { weights, components } => {
                let parts = components
                    .iter()
                    .map(|c| match c {
                        SourceDoc::Iid { pmf } => IidSource::new(pmf.clone()),
                        SourceDoc::Mixed { .. } => {
                            Err(Error::InvalidSource("mixture components must be i.i.d.".into()))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let [a, b]: [IidSource; 2] = parts.try_into().map_err(|_| {
                    Error::InvalidSource("a mixed source needs exactly two components".into())
                })?;
                Ok(Source::Mixed(MixedSource::new(*weights, [a, b])?))
            }
        }
    }

    pub fn from_source(source: &Source) -> Self {
        match source {
            Source::Iid(s) => SourceDoc::Iid { pmf: s.pmf.clone() },
            Source::Mixed(m) => SourceDoc::Mixed {
                weights: m.weights,
                components: m
                    .components
                    .iter()
                    .map(|c| SourceDoc::Iid { pmf: c.pmf.clone() })
                    .collect(),
            },
        }
    }
}
