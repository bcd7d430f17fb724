//! Costed code alphabets and the cost capacity.
//!
//! A [`CostModel`] assigns every code symbol `u in 0..K` a positive cost
//! `c(u)`. The cost capacity `alpha_c` is the unique positive root of
//! `sum_u K^(-alpha c(u)) = 1`; the map on the left is strictly decreasing in
//! `alpha`, so bisection always finds it.
//!
//! Models may also carry conditional costs `c(u | context)` where the context
//! is a bounded-depth suffix of the code symbols emitted so far. Such a model
//! is only usable when every context row has the same capacity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default maximum context length for conditional cost tables.
pub const DEFAULT_CONTEXT_DEPTH: usize = 1;

const RESIDUAL_TOL: f64 = 1e-13;
const WIDTH_TOL: f64 = 1e-14;
const ROW_AGREEMENT_TOL: f64 = 1e-9;
const INITIAL_BRACKET: (f64, f64) = (1e-9, 1.0);

/// A code alphabet of size `K` with per-symbol costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel {
    k: usize,
    costs: Vec<f64>,
    /// Context (oldest symbol first) -> conditional cost row.
    conditional: BTreeMap<Vec<u8>, Vec<f64>>,
    max_depth: usize,
    c_max: f64,
}

/// Result of solving for the cost capacity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostCapacity {
    pub alpha_c: f64,
    /// `sum_u K^(-alpha_c c(u)) - 1` at the returned root. Never positive.
    pub residual: f64,
    pub bracket: (f64, f64),
}

/// JSON document form of a cost model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostModelDoc {
    #[serde(rename = "K")]
    pub k: usize,
    pub costs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<BTreeMap<String, Vec<f64>>>,
}

fn check_row(k: usize, row: &[f64], what: &str) -> Result<()> {
    if row.len() != k {
        return Err(Error::InvalidCostModel(format!(
            "{what} has {} entries, expected K = {k}",
            row.len()
        )));
    }
    if let Some(c) = row.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::InvalidCostModel(format!(
            "{what} contains non-positive or non-finite cost {c}"
        )));
    }
    Ok(())
}

impl CostModel {
    /// Memoryless model; `K` is the number of costs.
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        Self::with_conditional(costs, BTreeMap::new(), DEFAULT_CONTEXT_DEPTH)
    }

    /// `K` symbols of cost 1.
    pub fn unit(k: usize) -> Result<Self> {
        Self::new(vec![1.0; k])
    }

    /// Model with a conditional cost table. `costs` prices symbols whose
    /// history has no matching context (in particular the first symbol).
    pub fn with_conditional(
        costs: Vec<f64>,
        conditional: BTreeMap<Vec<u8>, Vec<f64>>,
        max_depth: usize,
    ) -> Result<Self> {
        let k = costs.len();
        if k < 2 {
            return Err(Error::InvalidCostModel(format!(
                "alphabet size K = {k} must be at least 2"
            )));
        }
        if k > u8::MAX as usize + 1 {
            return Err(Error::InvalidCostModel(format!("alphabet size K = {k} too large")));
        }
        check_row(k, &costs, "costs")?;
        for (ctx, row) in &conditional {
            if ctx.is_empty() || ctx.len() > max_depth {
                return Err(Error::InvalidCostModel(format!(
                    "context {ctx:?} must have length 1..={max_depth}"
                )));
            }
            if let Some(&s) = ctx.iter().find(|&&s| s as usize >= k) {
                return Err(Error::InvalidCostModel(format!(
                    "context {ctx:?} uses symbol {s} outside 0..{k}"
                )));
            }
            check_row(k, row, &format!("context {ctx:?}"))?;
        }
        let c_max = costs
            .iter()
            .chain(conditional.values().flatten())
            .copied()
            .fold(f64::MIN, f64::max);
        Ok(Self { k, costs, conditional, max_depth, c_max })
    }

    /// Parses the JSON document form, allowing contexts up to `max_depth`.
    pub fn from_doc(doc: &CostModelDoc, max_depth: usize) -> Result<Self> {
        if doc.k != doc.costs.len() {
            return Err(Error::InvalidCostModel(format!(
                "K = {} but {} costs given",
                doc.k,
                doc.costs.len()
            )));
        }
        let mut table = BTreeMap::new();
        for (key, row) in doc.conditional.iter().flatten() {
            let ctx = parse_context(key, doc.k)?;
            table.insert(ctx, row.clone());
        }
        Self::with_conditional(doc.costs.clone(), table, max_depth)
    }

    pub fn to_doc(&self) -> CostModelDoc {
        let conditional = (!self.conditional.is_empty()).then(|| {
            self.conditional
                .iter()
                .map(|(ctx, row)| (format_context(ctx), row.clone()))
                .collect()
        });
        CostModelDoc { k: self.k, costs: self.costs.clone(), conditional }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn is_conditional(&self) -> bool {
        !self.conditional.is_empty()
    }

    /// All cost rows: the base row first, then the conditional rows in
    /// context order. Indices match [`CostModel::row_index`].
    pub fn rows(&self) -> Vec<&[f64]> {
        std::iter::once(self.costs.as_slice())
            .chain(self.conditional.values().map(Vec::as_slice))
            .collect()
    }

    /// Index into [`CostModel::rows`] of the row pricing the next symbol after
    /// `history`: the longest matching context suffix, else the base row.
    pub fn row_index(&self, history: &[u8]) -> usize {
        if self.conditional.is_empty() {
            return 0;
        }
        let deepest = history.len().min(self.max_depth);
        for len in (1..=deepest).rev() {
            let suffix = &history[history.len() - len..];
            if let Some(pos) = self.conditional.keys().position(|c| c.as_slice() == suffix) {
                return pos + 1;
            }
        }
        0
    }

    /// Cost of emitting `symbol` after `history`.
    pub fn symbol_cost(&self, history: &[u8], symbol: u8) -> f64 {
        if self.conditional.is_empty() {
            return self.costs[symbol as usize];
        }
        self.rows()[self.row_index(history)][symbol as usize]
    }

    /// Additive cost of a code string.
    pub fn word_cost(&self, word: &[u8]) -> f64 {
        (0..word.len()).map(|i| self.symbol_cost(&word[..i], word[i])).sum()
    }

    /// The same model with every cost multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        let scale = |row: &Vec<f64>| row.iter().map(|c| c * t).collect::<Vec<_>>();
        let table = self.conditional.iter().map(|(k, r)| (k.clone(), scale(r))).collect();
        Self::with_conditional(scale(&self.costs), table, self.max_depth)
    }

    /// Capacity of the model: the memoryless root, or the common root of all
    /// conditional rows.
    pub fn capacity(&self) -> Result<CostCapacity> {
        if self.is_conditional() {
            validate_conditional_model(self)
        } else {
            solve_cost_capacity(self)
        }
    }
}

/// Parses a context string: digits over `0..K` (requires `K <= 10`).
pub fn parse_context(key: &str, k: usize) -> Result<Vec<u8>> {
    if k > 10 {
        return Err(Error::InvalidCostModel(format!(
            "context strings are digit sequences; K = {k} is too large"
        )));
    }
    key.chars()
        .map(|ch| match ch.to_digit(10) {
            Some(d) if (d as usize) < k => Ok(d as u8),
            _ => Err(Error::InvalidCostModel(format!(
                "context {key:?} is not a digit string over 0..{k}"
            ))),
        })
        .collect()
}

fn format_context(ctx: &[u8]) -> String {
    ctx.iter().map(|d| char::from(b'0' + d)).collect()
}

fn kraft_residual(ln_k: f64, row: &[f64], alpha: f64) -> f64 {
    row.iter().map(|c| (-alpha * c * ln_k).exp()).sum::<f64>() - 1.0
}

/// Bisection for the root of `sum_u K^(-alpha c(u)) = 1` over one cost row.
///
/// The returned `alpha_c` is the upper end of the final bracket, so the
/// residual is never positive and Kraft sums evaluated with it stay `<= 1`.
fn solve_row(k: usize, row: &[f64]) -> CostCapacity {
    let ln_k = (k as f64).ln();
    let f = |a: f64| kraft_residual(ln_k, row, a);
    let (mut lo, mut hi) = INITIAL_BRACKET;
    while f(lo) <= 0.0 {
        lo *= 0.5;
    }
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut f_hi = f(hi);
    loop {
        let converged = hi - lo <= WIDTH_TOL && f_hi.abs() <= RESIDUAL_TOL;
        let mid = 0.5 * (lo + hi);
        if converged || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    CostCapacity { alpha_c: hi, residual: f_hi, bracket: (lo, hi) }
}

/// Cost capacity of the memoryless part of `model` (its base cost row).
pub fn solve_cost_capacity(model: &CostModel) -> Result<CostCapacity> {
    Ok(solve_row(model.k, &model.costs))
}

/// `q(u) = K^(-alpha_c c(u))` for every base-row symbol.
pub fn symbol_measure(model: &CostModel, cap: &CostCapacity) -> Vec<f64> {
    row_measure(model.k, &model.costs, cap.alpha_c)
}

pub(crate) fn row_measure(k: usize, row: &[f64], alpha: f64) -> Vec<f64> {
    let ln_k = (k as f64).ln();
    row.iter().map(|c| (-alpha * c * ln_k).exp()).collect()
}

/// Solves every context row and accepts the model iff all row capacities agree
/// within `1e-9`. The returned capacity is the largest row root, so every row's
/// Kraft sum is at most one.
pub fn validate_conditional_model(model: &CostModel) -> Result<CostCapacity> {
    let base = solve_row(model.k, &model.costs);
    let mut rows = vec![(String::new(), base)];
    for (ctx, row) in &model.conditional {
        rows.push((format_context(ctx), solve_row(model.k, row)));
    }
    let offending: Vec<(String, f64)> = rows
        .iter()
        .filter(|(_, cap)| (cap.alpha_c - base.alpha_c).abs() > ROW_AGREEMENT_TOL)
        .map(|(ctx, cap)| (ctx.clone(), cap.alpha_c))
        .collect();
    if !offending.is_empty() {
        let mut listed = vec![(String::new(), base.alpha_c)];
        listed.extend(offending);
        return Err(Error::NonConstantCapacity { rows: listed });
    }
    let (_, best) = rows
        .into_iter()
        .max_by(|a, b| a.1.alpha_c.total_cmp(&b.1.alpha_c))
        .expect("base row always present");
    let residual = model
        .rows()
        .iter()
        .map(|row| kraft_residual((model.k as f64).ln(), row, best.alpha_c))
        .fold(f64::MIN, f64::max);
    Ok(CostCapacity { residual, ..best })
}
