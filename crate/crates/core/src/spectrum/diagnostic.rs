//! Empirical check of the strong converse property.
//!
//! A source has the strong converse property iff its spectral sup- and
//! inf-entropy rates coincide, i.e. the normalized self-information
//! concentrates. We estimate the `delta` and `1 - delta` quantiles of
//! `(1/n) log 1/P(X^n)` for growing `n` and watch the gap between them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sources::{sample_self_info, Source};

/// Gap at the largest `n`, relative to the reference separation, within which
/// a mixed source is declared two-peaked.
const TWO_PEAK_TOL: f64 = 0.25;
/// The gap must shrink at least this much across the run to count as
/// concentrating.
const SHRINK_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub n: usize,
    pub lower_quantile: f64,
    pub upper_quantile: f64,
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StrongConverseConsistent,
    TwoPeak,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongConverseReport {
    pub delta: f64,
    pub rows: Vec<DiagnosticRow>,
    /// `|H(X_1) - H(X_2)|` for mixed sources, 0 for i.i.d. ones.
    pub reference_gap: f64,
    pub verdict: Verdict,
}

fn empirical_quantile(sorted: &[f64], level: f64) -> f64 {
    let idx = ((level * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

fn seed_for(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Estimates the inter-quantile gap of the normalized self-information at each
/// blocklength in `n_list` from `samples` draws.
pub fn strong_converse_diagnostic(
    source: &Source,
    n_list: &[usize],
    delta: f64,
    samples: usize,
    seed: u64,
    base: usize,
) -> Result<StrongConverseReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidQuery(format!("delta = {delta} must lie in (0, 0.5)")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidQuery("blocklengths must be positive and nonempty".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidQuery("need at least one sample".into()));
    }
    let rows: Vec<DiagnosticRow> = n_list
        .iter()
        .map(|&n| {
            let mut rates: Vec<f64> = sample_self_info(source, n, samples, seed_for(seed, n), base)
                .into_iter()
                .map(|v| v / n as f64)
                .collect();
            rates.sort_by(f64::total_cmp);
            let lower_quantile = empirical_quantile(&rates, delta);
            let upper_quantile = empirical_quantile(&rates, 1.0 - delta);
            DiagnosticRow { n, lower_quantile, upper_quantile, gap: upper_quantile - lower_quantile }
        })
        .collect();

    let reference_gap = match source {
        Source::Iid(_) => 0.0,
        Source::Mixed(m) => {
            let [a, b] = m.components();
            (a.entropy(base) - b.entropy(base)).abs()
        }
    };
    let first = rows[0].gap;
    let last = rows[rows.len() - 1].gap;
    let verdict = if reference_gap > 0.0 && (last - reference_gap).abs() <= TWO_PEAK_TOL * reference_gap {
        Verdict::TwoPeak
    } else if last <= 1e-12 || (rows.len() > 1 && last <= SHRINK_FACTOR * first) {
        Verdict::StrongConverseConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(StrongConverseReport { delta, rows, reference_gap, verdict })
}
