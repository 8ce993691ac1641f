//! Fairness-constrained sequential selection.
//!
//! A decision maker screens applicants one at a time with a pre-trained
//! model until a position fills. This crate derives and evaluates policies
//! that make the filled position equally likely to go to a qualified
//! applicant from either demographic group (equal selection), covering
//! three pipelines:
//!
//! - randomized post-processing of a binary classifier ([`postprocess`]),
//! - the same with locally differentially private group attributes ([`dp`]),
//! - group-dependent thresholds on qualification scores ([`threshold`]).
//!
//! Closed-form evaluators are validated against a reproducible Monte Carlo
//! simulator ([`simulate`]). The numeric core is generic over the scalar
//! type; the `*64` aliases below are the supported double-precision
//! instantiations.

// Probability tables here are indexed by semantic binary axes (group,
// classifier output, label); plain index loops over 0..2 read better than
// iterator adapters for that. Negated comparisons like `!(x >= 0)` are
// NaN-rejecting guards and must not be "simplified" to `x < 0`.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod dp;
pub mod error;
pub mod ingest;
pub mod lp;
pub mod outcome;
pub mod postprocess;
pub mod real;
pub mod simulate;
pub mod threshold;

pub use error::{Error, Result};
pub use real::Real;

/// Double-precision instantiations of the core model types.
pub type BinaryJointPmf64 = distributions::BinaryJointPmf<f64>;
pub type ScoreModel64 = distributions::ScoreModel<f64>;
pub type CounterfactualModel64 = distributions::CounterfactualModel<f64>;
pub type SelectionOutcome64 = outcome::SelectionOutcome<f64>;
pub type PostProcessPolicy64 = postprocess::PostProcessPolicy<f64>;
pub type DpPolicy64 = dp::DpPolicy<f64>;
pub type DpConfig64 = dp::DpConfig<f64>;
pub type ThresholdPair64 = threshold::ThresholdPair<f64>;
pub type SearchConfig64 = threshold::SearchConfig<f64>;
