//! Probability models and their estimation from samples. Every closed-form
//! evaluator downstream reads from these types.

pub mod binary;
pub mod counterfactual;
pub mod score;

pub use binary::{
    estimate_binary_pmf, estimate_binary_pmf_smoothed, BinaryJointPmf, BinaryJointPmfJson,
};
pub use counterfactual::{
    estimate_counterfactual_model, estimate_counterfactual_model_smoothed, CounterfactualModel,
};
pub use score::{estimate_score_model, score_model_from_cdf_table, CdfRow, ScoreModel};
