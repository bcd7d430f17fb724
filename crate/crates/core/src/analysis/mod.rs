//! Overflow thresholds and the fixed-length/variable-length equivalence.
//!
//! - [`first_order_threshold`] and [`second_order_threshold`] give the
//!   optimal rate `R(eps|X)` and deviation `L(eps, a|X)` for i.i.d. and
//!   two-component mixed sources.
//! - [`vl_to_fl`] and [`fl_to_vl`] turn a variable-length code into a
//!   fixed-length one and back.
//! - [`lemma_bounds`] brackets the overflow probability of any code by the
//!   information spectrum.

mod equivalence;
mod lemmas;
mod threshold;

pub use equivalence::{fl_to_vl, vl_to_fl, FixedLengthCode, FlToVlCertificate};
pub use lemmas::{lemma_bounds, LemmaBounds, LemmaMethod};
pub use threshold::{
    first_order_threshold, second_order_threshold, ThresholdCase, ThresholdInputs, ThresholdKind,
    ThresholdResult,
};
