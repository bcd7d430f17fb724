//! Prefix codes over a costed code alphabet.
//!
//! [`PrefixCode`] is an explicit table from source sequences to code strings
//! with the inverse map for decoding. Tables come from the interval
//! construction in [`build_exact_code`], from [`random_prefix_code`], or from
//! the fixed-length transformation in [`crate::analysis`].

mod fixed;
mod interval;
mod random;

use std::collections::HashMap;

use serde::Serialize;

use crate::cost_model::CostModel;
use crate::error::{Error, Result};
use crate::sources::{sample_self_info, Source};
use crate::streams;

pub use interval::{
    build_exact_code, build_exact_code_with, BuildOptions, DEFAULT_PRECISION_BITS,
    MAX_PRECISION_BITS,
};
pub(crate) use interval::build_entries;
pub use random::random_prefix_code;

/// Certified per-sequence cost of the interval code:
/// `(-log_K P(x) + log_K 2) / alpha_c + 2 c_max`, from the natural-log
/// probability `ln_prob`.
pub fn certified_cost_bound(ln_prob: f64, alpha_c: f64, c_max: f64, k: usize) -> f64 {
    let ln_k = (k as f64).ln();
    (-ln_prob + std::f64::consts::LN_2) / ln_k / alpha_c + 2.0 * c_max
}

/// One row of a code table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeEntry {
    pub sequence: Vec<usize>,
    pub codeword: Vec<u8>,
    pub cost: f64,
    pub prob: f64,
}

/// An explicit prefix code for length-`n` sequences.
#[derive(Clone, Debug)]
pub struct PrefixCode {
    n: usize,
    model: CostModel,
    alpha_c: f64,
    entries: Vec<CodeEntry>,
    by_sequence: HashMap<Vec<usize>, usize>,
    /// Codewords in lexicographic order, with their entry index.
    sorted_words: Vec<(Vec<u8>, usize)>,
}

impl PrefixCode {
    /// Checks the table: nonempty, distinct sequences of length `n`, nonempty
    /// codewords over `0..K`, and no codeword a prefix of another.
    pub fn from_entries(n: usize, model: CostModel, alpha_c: f64, entries: Vec<CodeEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySupport);
        }
        let k = model.k();
        let mut by_sequence = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.sequence.len() != n {
                return Err(Error::InvalidCode(format!("sequence {:?} is not of length {n}", e.sequence)));
            }
            if e.codeword.is_empty() || e.codeword.iter().any(|&u| u as usize >= k) {
                return Err(Error::InvalidCode(format!("bad codeword {:?}", e.codeword)));
            }
            if by_sequence.insert(e.sequence.clone(), i).is_some() {
                return Err(Error::InvalidCode(format!("duplicate sequence {:?}", e.sequence)));
            }
        }
        let mut sorted_words: Vec<(Vec<u8>, usize)> =
            entries.iter().enumerate().map(|(i, e)| (e.codeword.clone(), i)).collect();
        sorted_words.sort();
        let code = Self { n, model, alpha_c, entries, by_sequence, sorted_words };
        if !code.is_prefix_free() {
            return Err(Error::InvalidCode("codewords are not prefix-free".into()));
        }
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &CostModel {
        &self.model
    }

    pub fn alpha_c(&self) -> f64 {
        self.alpha_c
    }

    pub fn entries(&self) -> &[CodeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// In lexicographic order a codeword that prefixes any other word
    /// prefixes its immediate successor, so adjacent pairs suffice.
    pub fn is_prefix_free(&self) -> bool {
        self.sorted_words.windows(2).all(|w| !w[1].0.starts_with(&w[0].0))
    }

    pub fn min_cost(&self) -> f64 {
        self.entries.iter().map(|e| e.cost).fold(f64::INFINITY, f64::min)
    }

    pub fn max_cost(&self) -> f64 {
        self.entries.iter().map(|e| e.cost).fold(f64::NEG_INFINITY, f64::max)
    }

    fn entry_for_word(&self, w: &[u8]) -> Result<&CodeEntry> {
        match self.sorted_words.binary_search_by(|(cw, _)| cw.as_slice().cmp(w)) {
            Ok(pos) => Ok(&self.entries[self.sorted_words[pos].1]),
            Err(pos) => match self.sorted_words.get(pos) {
                Some((cw, _)) if cw.starts_with(w) => Err(Error::TruncatedCodeword),
                _ => Err(Error::UnknownCodeword),
            },
        }
    }
}

pub fn encode<'a>(code: &'a PrefixCode, x: &[usize]) -> Result<&'a [u8]> {
    code.by_sequence
        .get(x)
        .map(|&i| code.entries[i].codeword.as_slice())
        .ok_or(Error::UnknownSequence)
}

pub fn decode<'a>(code: &'a PrefixCode, w: &[u8]) -> Result<&'a [usize]> {
    code.entry_for_word(w).map(|e| e.sequence.as_slice())
}

/// `sum_x K^(-alpha_c c(phi(x)))`.
pub fn kraft_sum(code: &PrefixCode) -> f64 {
    let k = code.model.k() as f64;
    code.entries.iter().map(|e| k.powf(-code.alpha_c * e.cost)).sum()
}

/// How the fraction of codewords relates to the per-sequence cost bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostBoundReport {
    /// Every codeword meets `(-log P + log 2)/alpha_c + 2 c_max`.
    pub all_within_certified: bool,
    /// Share of codewords meeting the tighter `(-log P + log 2)/alpha_c + c_max`.
    pub fraction_within_tight: f64,
    /// Largest `cost - certified bound`; nonpositive when all are within.
    pub worst_margin: f64,
}

pub fn cost_bound_report(code: &PrefixCode) -> CostBoundReport {
    let c_max = code.model.c_max();
    let k = code.model.k();
    let mut within_tight = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for e in &code.entries {
        let certified = certified_cost_bound(e.prob.ln(), code.alpha_c, c_max, k);
        if e.cost <= certified - c_max {
            within_tight += 1;
        }
        worst = worst.max(e.cost - certified);
    }
    CostBoundReport {
        all_within_certified: worst <= 0.0,
        fraction_within_tight: within_tight as f64 / code.len() as f64,
        worst_margin: worst,
    }
}

/// Which overflow threshold `eta_n` to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdFamily {
    /// `eta_n = n R`.
    FirstOrder { rate: f64 },
    /// `eta_n = n a + L sqrt(n)`.
    SecondOrder { center: f64, offset: f64 },
    Raw { eta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OverflowMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
    /// Samples the certified cost bound of the interval code instead of a
    /// table; an upper bound on the built code's overflow.
    SurrogateMonteCarlo { samples: usize, seed: u64 },
}

impl OverflowMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            OverflowMethod::Exact => "exact",
            OverflowMethod::MonteCarlo { .. } => "mc",
            OverflowMethod::SurrogateMonteCarlo { .. } => "surrogate-mc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverflowQuery {
    pub n: usize,
    pub family: ThresholdFamily,
    pub method: OverflowMethod,
}

impl OverflowQuery {
    /// The threshold `eta_n`, validated to be positive and finite.
    pub fn eta(&self) -> Result<f64> {
        let n = self.n as f64;
        let eta = match self.family {
            ThresholdFamily::FirstOrder { rate } => {
                if rate.is_nan() || rate <= 0.0 {
                    return Err(Error::InvalidQuery(format!("rate R = {rate} must be positive")));
                }
                n * rate
            }
            ThresholdFamily::SecondOrder { center, offset } => {
                if center.is_nan() || center <= 0.0 {
                    return Err(Error::InvalidQuery(format!("center a = {center} must be positive")));
                }
                n * center + offset * n.sqrt()
            }
            ThresholdFamily::Raw { eta } => eta,
        };
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidQuery(format!("threshold eta = {eta} must lie in (0, inf)")));
        }
        Ok(eta)
    }
}

/// What an overflow probability is computed for.
#[derive(Clone, Copy, Debug)]
pub enum OverflowTarget<'a> {
    Code(&'a PrefixCode),
    /// The interval code for this source, through its certified cost bound.
    Source { source: &'a Source, model: &'a CostModel },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverflowEstimate {
    pub eta: f64,
    pub probability: f64,
    pub stderr: Option<f64>,
    pub method: &'static str,
    /// Set when the value bounds the code's overflow from above rather than
    /// estimating it.
    pub upper_bound_surrogate: bool,
}

/// `Pr{ c(phi(X^n)) > eta_n }`.
pub fn overflow(target: OverflowTarget<'_>, q: &OverflowQuery) -> Result<OverflowEstimate> {
    let eta = q.eta()?;
    let estimate = |probability, stderr, surrogate| OverflowEstimate {
        eta,
        probability,
        stderr,
        method: q.method.tag(),
        upper_bound_surrogate: surrogate,
    };
    match (q.method, target) {
        (OverflowMethod::Exact, OverflowTarget::Code(code)) => {
            check_n(code, q)?;
            Ok(estimate(exact_overflow(code, eta), None, false))
        }
        (OverflowMethod::MonteCarlo { samples, seed }, OverflowTarget::Code(code)) => {
            check_n(code, q)?;
            check_samples(samples)?;
            let mut cumulative = Vec::with_capacity(code.len());
            let mut acc = 0.0;
            for e in &code.entries {
                acc += e.prob;
                cumulative.push(acc);
            }
            let hits = streams::generate(samples, seed, |rng| {
                let u = rand::Rng::random::<f64>(rng) * acc;
                let i = cumulative.partition_point(|&c| c <= u).min(code.len() - 1);
                code.entries[i].cost > eta
            });
            let p = hits.iter().filter(|&&h| h).count() as f64 / samples as f64;
            Ok(estimate(p, Some((p * (1.0 - p) / samples as f64).sqrt()), false))
        }
        (OverflowMethod::SurrogateMonteCarlo { samples, seed }, OverflowTarget::Source { source, model }) => {
            check_samples(samples)?;
            let alpha = model.capacity()?.alpha_c;
            let k = model.k();
            let ln_k = (k as f64).ln();
            let values = sample_self_info(source, q.n, samples, seed, k);
            let over = values
                .iter()
                .filter(|&&v| certified_cost_bound(-v * ln_k, alpha, model.c_max(), k) > eta)
                .count();
            let p = over as f64 / samples as f64;
            Ok(estimate(p, Some((p * (1.0 - p) / samples as f64).sqrt()), true))
        }
        (OverflowMethod::SurrogateMonteCarlo { .. }, OverflowTarget::Code(_)) => Err(Error::InvalidQuery(
            "surrogate-mc evaluates a source model, not a code table".into(),
        )),
        (method, OverflowTarget::Source { .. }) => Err(Error::MissingCodeTable(method.tag())),
    }
}

/// `sum { P(x) : c(phi(x)) > eta }` over the table, clamped to `[0, 1]`.
pub(crate) fn exact_overflow(code: &PrefixCode, eta: f64) -> f64 {
    let p: f64 = code.entries.iter().filter(|e| e.cost > eta).map(|e| e.prob).sum();
    // an empty float sum is -0.0
    (p + 0.0).clamp(0.0, 1.0)
}

fn check_n(code: &PrefixCode, q: &OverflowQuery) -> Result<()> {
    if code.n != q.n {
        return Err(Error::InvalidQuery(format!("query blocklength {} but code blocklength {}", q.n, code.n)));
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidQuery("Monte Carlo needs at least one sample".into()));
    }
    Ok(())
}
