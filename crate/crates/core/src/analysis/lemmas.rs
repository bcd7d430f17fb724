//! Information-spectrum bounds on the overflow probability.

use serde::Serialize;

use crate::cost_model::CostModel;
use crate::error::{Error, Result};
use crate::sources::{enumerate_support, sample_self_info, Source, DEFAULT_SUPPORT_CAP};
use crate::spectrum::{tie_slack, TailTable};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LemmaMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Lower and upper bounds on overflow at `eta`, raw and clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaBounds {
    pub eta: f64,
    pub z: f64,
    /// Holds for every prefix code.
    pub lower: f64,
    pub lower_raw: f64,
    /// Holds for the interval code.
    pub upper: f64,
    pub upper_raw: f64,
    pub method: &'static str,
}

/// `lower = Pr{P(X^n) <= z K^(-alpha_c eta)} - z` and
/// `upper = Pr{z P(X^n) <= K^(-alpha_c (eta - c_max))} + z K^(alpha_c c_max + 1)`.
///
/// Both probabilities are evaluated in the safe direction at ties, so
/// floating-point noise can only loosen the bounds.
pub fn lemma_bounds(
    source: &Source,
    model: &CostModel,
    n: usize,
    eta: f64,
    z: f64,
    method: LemmaMethod,
) -> Result<LemmaBounds> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidQuery(format!("z = {z} must be positive")));
    }
    if n == 0 || eta.is_nan() {
        return Err(Error::InvalidQuery("need n >= 1 and a numeric eta".into()));
    }
    let alpha = model.capacity()?.alpha_c;
    let k = model.k();
    let ln_k = (k as f64).ln();
    let log_z = z.ln() / ln_k;
    let (table, tag) = match method {
        LemmaMethod::Exact => {
            let dist = enumerate_support(source, n, DEFAULT_SUPPORT_CAP)?;
            let pairs = dist.self_info(k).into_iter().zip(dist.entries().iter().map(|e| e.prob));
            (TailTable::new(pairs.collect()), "exact")
        }
        LemmaMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidQuery("Monte Carlo needs at least one sample".into()));
            }
            (TailTable::from_samples(sample_self_info(source, n, samples, seed, k)), "mc")
        }
    };
    // -log P >= alpha eta - log z
    let t_lower = alpha * eta - log_z;
    // -log P >= alpha (eta - c_max) + log z
    let t_upper = alpha * (eta - model.c_max()) + log_z;
    let lower_raw = table.at_least(t_lower + tie_slack(t_lower)) - z;
    let upper_raw = table.at_least(t_upper - tie_slack(t_upper)) + z * (k as f64).powf(alpha * model.c_max() + 1.0);
    Ok(LemmaBounds {
        eta,
        z,
        lower: lower_raw.clamp(0.0, 1.0),
        lower_raw,
        upper: upper_raw.clamp(0.0, 1.0),
        upper_raw,
        method: tag,
    })
}
