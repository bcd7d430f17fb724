//! Converting between variable-length and fixed-length codes.

use serde::Serialize;

use crate::codec::{build_entries, exact_overflow, BuildOptions, CodeEntry, PrefixCode};
use crate::cost_model::CostModel;
use crate::error::{Error, Result};
use crate::sources::{SeqProb, SequenceDist};

/// An `(n, M_n, eps_n)` fixed-length code given by its member set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedLengthCode {
    pub n: usize,
    /// Sorted lexicographically.
    pub members: Vec<Vec<usize>>,
    pub size: usize,
    pub error_probability: f64,
}

impl FixedLengthCode {
    /// The code with member set `members`, which must lie in the support of
    /// `dist`. The error probability is the mass outside the set.
    pub fn new(dist: &SequenceDist, mut members: Vec<Vec<usize>>) -> Result<Self> {
        members.sort();
        members.dedup();
        let mut sorted: Vec<&SeqProb> = dist.entries().iter().collect();
        sorted.sort_by(|a, b| a.symbols.cmp(&b.symbols));
        let mut outside = 0.0;
        let mut it = members.iter().peekable();
        for e in &sorted {
            if it.peek() == Some(&&e.symbols) {
                it.next();
            } else {
                outside += e.prob;
            }
        }
        if let Some(m) = it.next() {
            return Err(Error::InvalidCode(format!("member {m:?} is not in the source support")));
        }
        Ok(Self { n: dist.n(), size: members.len(), members, error_probability: outside })
    }

    /// The `m` most probable sequences, ties broken lexicographically.
    pub fn most_probable(dist: &SequenceDist, m: usize) -> Result<Self> {
        let mut sorted: Vec<&SeqProb> = dist.entries().iter().collect();
        sorted.sort_by(|a, b| b.prob.total_cmp(&a.prob).then_with(|| a.symbols.cmp(&b.symbols)));
        Self::new(dist, sorted.into_iter().take(m).map(|e| e.symbols.clone()).collect())
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        self.members.binary_search_by(|m| m.as_slice().cmp(x)).is_ok()
    }

    /// `log_K M_n`; negative infinity for the empty code.
    pub fn log_size(&self, k: usize) -> f64 {
        (self.size as f64).ln() / (k as f64).ln()
    }
}

/// `T_n = { x : c(phi(x)) <= eta }`, whose complement has probability equal
/// to the overflow of `code` at `eta`.
pub fn vl_to_fl(code: &PrefixCode, eta: f64) -> FixedLengthCode {
    let mut members: Vec<Vec<usize>> =
        code.entries().iter().filter(|e| e.cost <= eta).map(|e| e.sequence.clone()).collect();
    members.sort();
    FixedLengthCode { n: code.n(), size: members.len(), members, error_probability: exact_overflow(code, eta) }
}

/// Cost guarantee of [`fl_to_vl`] on the member set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlToVlCertificate {
    /// Flag symbol prepended to members.
    pub member_flag: u8,
    /// Flag symbol prepended to the other sequences.
    pub other_flag: u8,
    /// `(log_K M_n + log_K 2)/alpha_c + 2 c_max + c(flag)`.
    pub threshold: f64,
    /// The looser `threshold + c_max`.
    pub relaxed_threshold: f64,
    /// Largest codeword cost over the member set.
    pub max_member_cost: f64,
}

/// A prefix code whose cost on `T_n` is at most the certificate threshold:
/// members get a flag symbol followed by the interval code of the uniform
/// distribution on `T_n`, the rest another flag followed by the interval code
/// of the source conditioned on the complement.
pub fn fl_to_vl(
    fl: &FixedLengthCode,
    dist: &SequenceDist,
    model: &CostModel,
) -> Result<(PrefixCode, FlToVlCertificate)> {
    if fl.members.is_empty() {
        return Err(Error::EmptyFixedLengthSet);
    }
    if fl.n != dist.n() {
        return Err(Error::InvalidQuery(format!("code blocklength {} but source blocklength {}", fl.n, dist.n())));
    }
    let alpha = model.capacity()?.alpha_c;
    let k = model.k();
    let mut by_cost: Vec<u8> = (0..k as u8).collect();
    by_cost.sort_by(|&a, &b| model.symbol_cost(&[], a).total_cmp(&model.symbol_cost(&[], b)).then(a.cmp(&b)));
    let (member_flag, other_flag) = (by_cost[0], by_cost[1]);
    let opts = BuildOptions::default();

    let mut outside = Vec::new();
    for e in dist.entries() {
        if !fl.contains(&e.symbols) {
            outside.push(e.clone());
        }
    }
    if outside.len() + fl.size != dist.len() {
        return Err(Error::InvalidCode("fixed-length members are not all in the support".into()));
    }

    let inner = SequenceDist::uniform(fl.n, fl.members.clone())?;
    let mut entries = build_entries(&inner, model, alpha, &[member_flag], &opts)?;
    if !outside.is_empty() {
        let mass: f64 = outside.iter().map(|e| e.prob).sum();
        let ln_mass = mass.ln();
        let conditioned: Vec<SeqProb> = outside
            .iter()
            .map(|e| SeqProb { symbols: e.symbols.clone(), prob: e.prob / mass, ln_prob: e.ln_prob - ln_mass })
            .collect();
        let rest = SequenceDist::new(fl.n, conditioned)?;
        entries.extend(build_entries(&rest, model, alpha, &[other_flag], &opts)?);
    }

    let probs: std::collections::HashMap<&[usize], f64> =
        dist.entries().iter().map(|e| (e.symbols.as_slice(), e.prob)).collect();
    let entries: Vec<CodeEntry> = entries
        .into_iter()
        .map(|e| CodeEntry { prob: probs[e.sequence.as_slice()], ..e })
        .collect();
    let max_member_cost = entries
        .iter()
        .filter(|e| e.codeword[0] == member_flag)
        .map(|e| e.cost)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = (fl.log_size(k) + 2f64.ln() / (k as f64).ln()) / alpha
        + 2.0 * model.c_max()
        + model.symbol_cost(&[], member_flag);
    let code = PrefixCode::from_entries(fl.n, model.clone(), alpha, entries)?;
    Ok((
        code,
        FlToVlCertificate {
            member_flag,
            other_flag,
            threshold,
            relaxed_threshold: threshold + model.c_max(),
            max_member_cost,
        },
    ))
}
