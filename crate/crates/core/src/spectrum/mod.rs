//! Finite-n information spectrum.
//!
//! The first-order curve is `F_n(R) = Pr{ (1/(n alpha_c)) log 1/P(X^n) >= R }`
//! and the second-order curve, given a center `a`, is
//! `F_{a,n}(L) = Pr{ (-log P(X^n) - n alpha_c a) / (sqrt(n) alpha_c) >= L }`.
//! Both reduce to the upper tail of the self-information `-log_K P(X^n)` at a
//! threshold that is affine in the grid coordinate.
//!
//! Three evaluation methods are available: exhaustive enumeration, lattice
//! convolution (i.i.d. only; brackets the true value), and Monte Carlo.

mod diagnostic;
mod gaussian;
mod lattice;

pub use diagnostic::{strong_converse_diagnostic, DiagnosticRow, StrongConverseReport, Verdict};
pub use gaussian::{gaussian_cdf, gaussian_quantile};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sources::{enumerate_support, sample_self_info, Source, DEFAULT_SUPPORT_CAP};

/// Default lattice step of the dp method, in log-base-K units.
pub const DEFAULT_LATTICE_STEP: f64 = 1e-4;

/// Relative slack absorbing floating-point noise in `>=` comparisons against
/// a threshold.
pub(crate) fn tie_slack(t: f64) -> f64 {
    1e-10 * t.abs().max(1.0)
}

/// How to evaluate a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectrumMethod {
    Exact,
    Dp { step: f64 },
    MonteCarlo { samples: usize, seed: u64 },
}

impl SpectrumMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            SpectrumMethod::Exact => "exact",
            SpectrumMethod::Dp { .. } => "dp",
            SpectrumMethod::MonteCarlo { .. } => "mc",
        }
    }
}

/// A request for a spectrum curve.
#[derive(Clone, Debug)]
pub struct SpectrumQuery<'a> {
    pub source: &'a Source,
    pub n: usize,
    pub alpha_c: f64,
    /// Code alphabet size `K`; all logarithms use this base.
    pub base: usize,
    pub method: SpectrumMethod,
    /// Evaluation points, sorted ascending.
    pub grid: Vec<f64>,
}

impl SpectrumQuery<'_> {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidQuery("blocklength must be at least 1".into()));
        }
        if !(self.alpha_c.is_finite() && self.alpha_c > 0.0) {
            return Err(Error::InvalidQuery(format!("alpha_c = {} must be positive", self.alpha_c)));
        }
        if self.base < 2 {
            return Err(Error::InvalidQuery("logarithm base must be at least 2".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidQuery("grid is empty".into()));
        }
        if self.grid.iter().any(|g| !g.is_finite()) || self.grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidQuery("grid must be finite and sorted ascending".into()));
        }
        match self.method {
            SpectrumMethod::MonteCarlo { samples: 0, .. } => {
                Err(Error::InvalidQuery("Monte Carlo needs at least one sample".into()))
            }
            SpectrumMethod::Dp { step } if !(step.is_finite() && step > 0.0) => {
                Err(Error::InvalidQuery(format!("lattice step {step} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

/// One evaluated point of a curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub probability: f64,
    /// Monte Carlo standard error.
    pub stderr: Option<f64>,
    /// Rigorous `(lower, upper)` bracket from the dp method.
    pub bounds: Option<(f64, f64)>,
}

/// A tail curve, nonincreasing in its threshold coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumCurve {
    pub points: Vec<CurvePoint>,
    pub method: &'static str,
}

/// Weighted self-information values with suffix sums for tail queries.
pub(crate) struct TailTable {
    values: Vec<f64>,
    suffix: Vec<f64>,
    total: f64,
}

impl TailTable {
    pub(crate) fn new(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut suffix = vec![0.0; pairs.len() + 1];
        for i in (0..pairs.len()).rev() {
            suffix[i] = suffix[i + 1] + pairs[i].1;
        }
        Self { values: pairs.into_iter().map(|p| p.0).collect(), suffix, total: 1.0 }
    }

    /// Unit weights, so the suffix sums are exact counts.
    pub(crate) fn from_samples(values: Vec<f64>) -> Self {
        let total = values.len() as f64;
        Self { total, ..Self::new(values.into_iter().map(|v| (v, 1.0)).collect()) }
    }

    /// Total weight of values `>= t`.
    pub(crate) fn at_least(&self, t: f64) -> f64 {
        let i = self.values.partition_point(|&v| v < t);
        (self.suffix[i] / self.total).clamp(0.0, 1.0)
    }
}

fn tail_curve(q: &SpectrumQuery<'_>, thresholds: &[f64]) -> Result<SpectrumCurve> {
    let points = match q.method {
        SpectrumMethod::Exact => {
            let dist = enumerate_support(q.source, q.n, DEFAULT_SUPPORT_CAP)?;
            let pairs = dist.self_info(q.base).into_iter().zip(dist.entries().iter().map(|e| e.prob));
            let table = TailTable::new(pairs.collect());
            thresholds
                .iter()
                .map(|&t| (table.at_least(t - tie_slack(t)), None, None))
                .collect::<Vec<_>>()
        }
        SpectrumMethod::MonteCarlo { samples, seed } => {
            let table = TailTable::from_samples(sample_self_info(q.source, q.n, samples, seed, q.base));
            thresholds
                .iter()
                .map(|&t| {
                    let p = table.at_least(t - tie_slack(t));
                    (p, Some((p * (1.0 - p) / samples as f64).sqrt()), None)
                })
                .collect()
        }
        SpectrumMethod::Dp { step } => {
            let Source::Iid(src) = q.source else {
                return Err(Error::DpRequiresIid);
            };
            lattice::tail_bounds(src, q.n, q.base, step, thresholds)
                .into_iter()
                .map(|(lo, hi)| (0.5 * (lo + hi), None, Some((lo, hi))))
                .collect()
        }
    };
    Ok(SpectrumCurve {
        points: q
            .grid
            .iter()
            .zip(points)
            .map(|(&threshold, (probability, stderr, bounds))| CurvePoint {
                threshold,
                probability,
                stderr,
                bounds,
            })
            .collect(),
        method: q.method.tag(),
    })
}

/// `F_n(R)` at every grid point `R`.
pub fn first_order_spectrum(q: &SpectrumQuery<'_>) -> Result<SpectrumCurve> {
    q.validate()?;
    let scale = q.n as f64 * q.alpha_c;
    let thresholds: Vec<f64> = q.grid.iter().map(|r| scale * r).collect();
    tail_curve(q, &thresholds)
}

/// `F_{a,n}(L)` at every grid point `L`, for the center `a`.
pub fn second_order_spectrum(q: &SpectrumQuery<'_>, a: f64) -> Result<SpectrumCurve> {
    q.validate()?;
    if !a.is_finite() {
        return Err(Error::InvalidQuery(format!("center a = {a} must be finite")));
    }
    let n = q.n as f64;
    let thresholds: Vec<f64> =
        q.grid.iter().map(|l| n * q.alpha_c * a + n.sqrt() * q.alpha_c * l).collect();
    tail_curve(q, &thresholds)
}
