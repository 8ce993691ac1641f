//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Estimation was asked to run on an empty sample list.
    #[error("cannot estimate a distribution from an empty sample list")]
    EmptySamples,

    /// A probability table failed a construction invariant.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A row of an input file failed validation.
    #[error("input error at row {row}: {message}")]
    InputRow { row: usize, message: String },

    /// A file-level format problem (bad header, wrong schema, unreadable).
    #[error("input format error: {0}")]
    InputFormat(String),

    /// A solver precondition does not hold (e.g. a zero cell where a
    /// strictly positive mass is required).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// No policy satisfying the fairness constraint exists.
    #[error("no fair policy exists: {0}")]
    NoFairPolicy(String),

    /// The policy accepts nobody, so the selection process never halts.
    #[error("policy never accepts an applicant; the selection process would not terminate")]
    NoSelection,

    /// An exhaustive search found no feasible threshold pair.
    #[error("no feasible threshold pair: {0}")]
    InfeasibleSearch(String),

    /// A continuous reduction was given a CDF it cannot invert.
    #[error("continuous reduction error: {0}")]
    ContinuousReduction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
