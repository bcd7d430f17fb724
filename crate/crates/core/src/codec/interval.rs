//! Cost-aware interval code.
//!
//! Each source sequence `x` (in lexicographic order) owns the half-open
//! interval `[F(x), F(x) + P(x))` of cumulative probability. The code tree
//! splits every node interval among its children in proportion to
//! `q(u | context) = K^(-alpha_c c(u | context))`, so a node for the code
//! string `u` has width about `K^(-alpha_c c(u))`. Encoding `x` descends
//! towards the midpoint of its interval and stops at the first node whose
//! width is at most `P(x)/2`; that node lies inside the source interval, so
//! the emitted strings are prefix-free, and its parent was wider than
//! `P(x)/2`, which bounds the cost.
//!
//! All boundaries are exact dyadic fixed-point numbers, so prefix-freeness
//! never depends on rounding. Rounding only perturbs widths; each codeword's
//! cost is checked against `(-log P(x) + log 2)/alpha_c + 2 c_max`, and a
//! failed check retries at doubled precision.

use num_bigint::BigUint;

use crate::cost_model::{row_measure, CostModel};
use crate::error::{Error, Result};
use crate::sources::SequenceDist;

use super::fixed::{cumulative_splits, from_f64_floor, one};
use super::{certified_cost_bound, CodeEntry, PrefixCode};

/// Default fractional bits of the fixed-point arithmetic.
pub const DEFAULT_PRECISION_BITS: u32 = 192;
/// Upper limit for automatic precision doubling.
pub const MAX_PRECISION_BITS: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub precision_bits: u32,
    pub max_precision_bits: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { precision_bits: DEFAULT_PRECISION_BITS, max_precision_bits: MAX_PRECISION_BITS }
    }
}

/// Builds the interval code for `dist` at the default precision.
pub fn build_exact_code(dist: &SequenceDist, model: &CostModel) -> Result<PrefixCode> {
    build_exact_code_with(dist, model, &BuildOptions::default())
}

pub fn build_exact_code_with(
    dist: &SequenceDist,
    model: &CostModel,
    opts: &BuildOptions,
) -> Result<PrefixCode> {
    let alpha = model.capacity()?.alpha_c;
    let entries = build_entries(dist, model, alpha, &[], opts)?;
    PrefixCode::from_entries(dist.n(), model.clone(), alpha, entries)
}

/// Codewords for every entry of `dist`, each starting with `prefix`. The tree
/// below the prefix uses the contexts the prefix induces; the prefix itself
/// does not narrow the interval.
pub(crate) fn build_entries(
    dist: &SequenceDist,
    model: &CostModel,
    alpha: f64,
    prefix: &[u8],
    opts: &BuildOptions,
) -> Result<Vec<CodeEntry>> {
    let mut bits = opts.precision_bits.max(8);
    loop {
        match attempt(dist, model, alpha, prefix, bits) {
            Err(Error::PrecisionExhausted { .. }) if bits * 2 <= opts.max_precision_bits => bits *= 2,
            other => return other,
        }
    }
}

fn attempt(
    dist: &SequenceDist,
    model: &CostModel,
    alpha: f64,
    prefix: &[u8],
    bits: u32,
) -> Result<Vec<CodeEntry>> {
    let entries = dist.entries();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[a].symbols.cmp(&entries[b].symbols));

    // source interval boundaries, normalized so the last one is exactly 1
    let fixed: Vec<BigUint> = order.iter().map(|&i| from_f64_floor(entries[i].prob, bits)).collect();
    let total: BigUint = fixed.iter().sum();
    if total == BigUint::from(0u8) {
        return Err(Error::PrecisionExhausted { bits });
    }
    let mut bounds = Vec::with_capacity(fixed.len() + 1);
    bounds.push(BigUint::from(0u8));
    let mut running = BigUint::from(0u8);
    for f in &fixed {
        running += f;
        bounds.push((&running << bits as u64) / &total);
    }

    let k = model.k();
    let splits: Vec<Vec<BigUint>> = model
        .rows()
        .iter()
        .map(|row| cumulative_splits(&row_measure(k, row, alpha), bits))
        .collect();
    let two = BigUint::from(2u8);

    let mut words: Vec<Option<CodeEntry>> = vec![None; entries.len()];
    for (pos, &i) in order.iter().enumerate() {
        let entry = &entries[i];
        let width = &bounds[pos + 1] - &bounds[pos];
        if width < two {
            return Err(Error::PrecisionExhausted { bits });
        }
        let target = &bounds[pos] + (&width >> 1u32);
        let limit = certified_cost_bound(entry.ln_prob, alpha, model.c_max(), k);

        let mut lo = BigUint::from(0u8);
        let mut hi = one(bits);
        let mut word = prefix.to_vec();
        let mut cost = 0.0;
        while (&hi - &lo) * &two > width {
            let span = &hi - &lo;
            let split = &splits[model.row_index(&word)];
            let mut child_lo = lo.clone();
            let mut chosen = None;
            for u in 0..k {
                let child_hi = &lo + ((&span * &split[u + 1]) >> bits as u64);
                if target < child_hi {
                    chosen = Some((u, child_lo, child_hi));
                    break;
                }
                child_lo = child_hi;
            }
            let (u, new_lo, new_hi) = chosen.expect("target lies inside the node");
            cost += model.symbol_cost(&word, u as u8);
            word.push(u as u8);
            lo = new_lo;
            hi = new_hi;
            if cost > limit {
                return Err(Error::PrecisionExhausted { bits });
            }
        }
        debug_assert!(bounds[pos] <= lo && hi <= bounds[pos + 1]);
        words[i] = Some(CodeEntry {
            sequence: entry.symbols.clone(),
            cost: model.word_cost(&word),
            codeword: word,
            prob: entry.prob,
        });
    }
    Ok(words.into_iter().map(|w| w.expect("every entry encoded")).collect())
}
