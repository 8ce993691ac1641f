//! Outcome summary shared by every selection pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Closed-form summary of a sequential selection process.
///
/// `p_e0` / `p_e1` are the probabilities that the position is filled by a
/// qualified applicant from group 0 / group 1; they partition `accuracy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SelectionOutcome<T> {
    pub p_e0: T,
    pub p_e1: T,
    /// Pr{selected applicant is qualified}.
    pub accuracy: T,
    /// |p_e0 - p_e1|.
    pub disparity: T,
    /// Per-step acceptance probability Pr{Z=1}.
    pub p_accept_per_step: T,
    /// Expected stopping time 1/Pr{Z=1}; absent when nobody is ever
    /// accepted.
    pub expected_steps: Option<T>,
}

impl<T: Real> SelectionOutcome<T> {
    /// Builds the outcome from the unnormalized selection masses
    /// `Pr{Z=1, A=a, Y=1}` and the per-step acceptance probability.
    pub fn from_masses(sel_q0: T, sel_q1: T, p_accept: T) -> Result<Self> {
        if !(p_accept > T::zero()) {
            return Err(Error::NoSelection);
        }
        let p_e0 = sel_q0 / p_accept;
        let p_e1 = sel_q1 / p_accept;
        Ok(Self {
            p_e0,
            p_e1,
            accuracy: (sel_q0 + sel_q1) / p_accept,
            disparity: (p_e0 - p_e1).abs(),
            p_accept_per_step: p_accept,
            expected_steps: Some(T::one() / p_accept),
        })
    }
}
