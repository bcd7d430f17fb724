//! Variable-length lossless source coding with unequal code-symbol costs.
//!
//! The crate covers the whole pipeline from a costed code alphabet to overflow
//! thresholds:
//!
//! - [`cost_model`]: code alphabet costs, the cost capacity `alpha_c` and the
//!   induced symbol measure `q(u) = K^(-alpha_c c(u))`.
//! - [`sources`]: i.i.d. and two-component mixed sources with exact
//!   log-probabilities, entropy, varentropy, sampling and support enumeration.
//! - [`spectrum`]: finite-n information-spectrum tails `F_n(R)` and
//!   `F_{a,n}(L)`, the Gaussian CDF/quantile, and strong-converse diagnostics.
//! - [`codec`]: the cost-aware interval prefix code, encode/decode, Kraft sums
//!   and overflow probabilities.
//! - [`analysis`]: first- and second-order overflow thresholds, the
//!   variable-length/fixed-length code transformations and the
//!   information-spectrum bounds on overflow.
//!
//! All logarithms are taken to the base `K` of the code alphabet unless a
//! function says otherwise.

pub mod analysis;
pub mod codec;
pub mod cost_model;
pub mod error;
pub mod io;
pub mod sources;
pub mod spectrum;
mod streams;

pub use error::{Error, Result};

/// Every public operation, by name. The CLI keeps a table mapping each of
/// these to the one subcommand that exposes it.
pub const OPERATIONS: &[&str] = &[
    "solve_cost_capacity",
    "symbol_measure",
    "validate_conditional_model",
    "log_prob",
    "entropy",
    "varentropy",
    "sample_self_info",
    "enumerate_support",
    "gaussian_cdf",
    "gaussian_quantile",
    "first_order_spectrum",
    "second_order_spectrum",
    "strong_converse_diagnostic",
    "build_exact_code",
    "encode",
    "decode",
    "kraft_sum",
    "overflow",
    "first_order_threshold",
    "second_order_threshold",
    "vl_to_fl",
    "fl_to_vl",
    "lemma_bounds",
];
