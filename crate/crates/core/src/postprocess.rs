//! Equal-selection-fair randomized post-processing of a pre-trained binary
//! classifier, plus the diagnostics that say when post-processing is needed
//! and how much accuracy it can retain.
//!
//! The fair predictor `Z` accepts with probability `α_{a,ŷ}` given the
//! group and the classifier output. Optimal coefficients come from a small
//! LP; the fractional objective it stands in for is degree-0 homogeneous in
//! `α`, which is what makes the reduction exact.

use serde::{Deserialize, Serialize};

use crate::distributions::BinaryJointPmf;
use crate::error::{Error, Result};
use crate::lp::{solve, LpProblem, LpStatus};
use crate::outcome::SelectionOutcome;
use crate::real::Real;

/// Acceptance probabilities `α_{a,ŷ} = Pr{Z=1 | A=a, R=ŷ}`, indexed
/// `alpha[a][ŷ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostProcessPolicy<T> {
    pub alpha: [[T; 2]; 2],
}

impl<T: Real> PostProcessPolicy<T> {
    pub fn new(alpha: [[T; 2]; 2]) -> Result<Self> {
        for row in &alpha {
            for &v in row {
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::Precondition(format!(
                        "acceptance probability {v} outside [0,1]"
                    )));
                }
            }
        }
        Ok(Self { alpha })
    }

    /// The identity policy `Z = R`.
    pub fn passthrough() -> Self {
        Self {
            alpha: [[T::zero(), T::one()], [T::zero(), T::one()]],
        }
    }

    /// Accept-everyone policy.
    pub fn accept_all() -> Self {
        Self {
            alpha: [[T::one(); 2]; 2],
        }
    }
}

/// JSON wire form: `{"alpha": {"a0_r0": .., "a0_r1": .., "a1_r0": .., "a1_r1": ..}}`.
#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PostProcessPolicyJson<T> {
    pub alpha: PolicyCellsJson<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PolicyCellsJson<T> {
    pub a0_r0: T,
    pub a0_r1: T,
    pub a1_r0: T,
    pub a1_r1: T,
}

impl<T: Real> PostProcessPolicy<T> {
    pub fn to_json(&self) -> PostProcessPolicyJson<T> {
        PostProcessPolicyJson {
            alpha: PolicyCellsJson {
                a0_r0: self.alpha[0][0],
                a0_r1: self.alpha[0][1],
                a1_r0: self.alpha[1][0],
                a1_r1: self.alpha[1][1],
            },
        }
    }

    pub fn from_json(json: &PostProcessPolicyJson<T>) -> Result<Self> {
        let a = &json.alpha;
        Self::new([[a.a0_r0, a.a0_r1], [a.a1_r0, a.a1_r1]])
    }
}

/// Which equality the solved policy must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairnessTarget {
    /// Equal selection of qualified applicants across groups.
    Es,
    /// Equal selection regardless of qualification (the `Pr{E_0}=Pr{E_1}`
    /// variant).
    EsDemographic,
}

/// Result of the perfect-fairness check for the raw classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct EsCondition<T> {
    /// |Pr{R=1,A=0,Y=1} - Pr{R=1,A=1,Y=1}|.
    pub residual: T,
    pub fair: bool,
    /// Pr{R=1} = 0 makes the condition hold vacuously.
    pub degenerate: bool,
}

/// Checks the perfect-ES condition for selecting directly on `R`.
pub fn check_es_condition<T: Real>(pmf: &BinaryJointPmf<T>, tol: T) -> EsCondition<T> {
    let residual = (pmf.p(0, 1, 1) - pmf.p(1, 1, 1)).abs();
    EsCondition {
        residual,
        fair: residual <= tol,
        degenerate: pmf.p_r(1) <= T::zero(),
    }
}

/// Equal-opportunity vs equal-selection diagnostic: EO on the classifier
/// only yields ES when the group base rates of qualification coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct EoBaseRateDiagnostic<T> {
    /// |Pr{R=1|Y=1,A=0} - Pr{R=1|Y=1,A=1}|, undefined if either group has
    /// no qualified mass.
    pub eo_residual: Option<T>,
    /// |Pr{A=0,Y=1} - Pr{A=1,Y=1}|.
    pub base_rate_residual: T,
    /// When the classifier is EO-fair: does ES follow? `None` when EO does
    /// not hold or cannot be evaluated.
    pub es_given_eo: Option<bool>,
}

pub fn check_eo_base_rate<T: Real>(pmf: &BinaryJointPmf<T>, tol: T) -> EoBaseRateDiagnostic<T> {
    let qual0 = pmf.p_ay(0, 1);
    let qual1 = pmf.p_ay(1, 1);
    let eo_residual = if qual0 > T::zero() && qual1 > T::zero() {
        Some((pmf.p(0, 1, 1) / qual0 - pmf.p(1, 1, 1) / qual1).abs())
    } else {
        None
    };
    let base_rate_residual = (qual0 - qual1).abs();
    let es_given_eo = match eo_residual {
        Some(r) if r <= tol => Some(base_rate_residual <= tol),
        _ => None,
    };
    EoBaseRateDiagnostic {
        eo_residual,
        base_rate_residual,
        es_given_eo,
    }
}

/// Near-optimality diagnostic: reports the checkable independence condition
/// `Pr{A=a|Y=1,R=1} = Pr{A=a|R=1}` and the pre-trained model's accuracy
/// term `Pr{Y=1|R=1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct NearOptimalityDiagnostic<T> {
    /// max over groups of |Pr{A=a|Y=1,R=1} - Pr{A=a|R=1}|.
    pub independence_residual: Option<T>,
    /// Pr{Y=1|R=1}.
    pub model_accuracy: Option<T>,
    pub condition_holds: Option<bool>,
}

pub fn check_near_optimality<T: Real>(
    pmf: &BinaryJointPmf<T>,
    tol: T,
) -> NearOptimalityDiagnostic<T> {
    let pr_r1 = pmf.p_r(1);
    let pr_y1r1 = pmf.p(0, 1, 1) + pmf.p(1, 1, 1);
    let model_accuracy = if pr_r1 > T::zero() {
        Some(pr_y1r1 / pr_r1)
    } else {
        None
    };
    let independence_residual = if pr_r1 > T::zero() && pr_y1r1 > T::zero() {
        let mut worst = T::zero();
        for a in 0..2 {
            let given_qual = pmf.p(a, 1, 1) / pr_y1r1;
            let given_r = pmf.p_ar(a, 1) / pr_r1;
            worst = worst.max((given_qual - given_r).abs());
        }
        Some(worst)
    } else {
        None
    };
    NearOptimalityDiagnostic {
        independence_residual,
        model_accuracy,
        condition_holds: independence_residual.map(|r| r <= tol),
    }
}

/// Closed-form outcome of running the selection process with predictor `Z`
/// drawn from the policy.
pub fn evaluate_policy<T: Real>(
    pmf: &BinaryJointPmf<T>,
    policy: &PostProcessPolicy<T>,
) -> Result<SelectionOutcome<T>> {
    let mut accept = T::zero();
    let mut sel_q = [T::zero(); 2];
    for a in 0..2 {
        for r in 0..2 {
            let alpha = policy.alpha[a][r];
            accept = accept + alpha * pmf.p_ar(a, r);
            sel_q[a] = sel_q[a] + alpha * pmf.p(a, r, 1);
        }
    }
    SelectionOutcome::from_masses(sel_q[0], sel_q[1], accept)
}

/// Derives the accuracy-maximizing fair policy from `(A, R)`.
///
/// Reduces the fractional objective to an LP by pinning the per-step
/// acceptance probability to the smallest `Pr{A=a, R=ŷ}` cell; degree-0
/// homogeneity of the objective makes the pin lossless.
pub fn solve_es_policy<T: Real>(
    pmf: &BinaryJointPmf<T>,
    target: FairnessTarget,
) -> Result<(PostProcessPolicy<T>, SelectionOutcome<T>)> {
    let min_cell = pmf.min_p_ar();
    if !(min_cell > T::zero()) {
        return Err(Error::Precondition(
            "every Pr{A=a,R=ŷ} cell must be positive to pin the LP normalization".into(),
        ));
    }
    // Variable order: (a0,r0), (a0,r1), (a1,r0), (a1,r1).
    let objective = vec![
        pmf.p(0, 0, 1),
        pmf.p(0, 1, 1),
        pmf.p(1, 0, 1),
        pmf.p(1, 1, 1),
    ];
    let fairness_row = match target {
        FairnessTarget::Es => vec![
            pmf.p(0, 0, 1),
            pmf.p(0, 1, 1),
            -pmf.p(1, 0, 1),
            -pmf.p(1, 1, 1),
        ],
        FairnessTarget::EsDemographic => vec![
            pmf.p_ar(0, 0),
            pmf.p_ar(0, 1),
            -pmf.p_ar(1, 0),
            -pmf.p_ar(1, 1),
        ],
    };
    let normalization_row = vec![
        pmf.p_ar(0, 0),
        pmf.p_ar(0, 1),
        pmf.p_ar(1, 0),
        pmf.p_ar(1, 1),
    ];
    let problem = LpProblem::new(
        objective,
        vec![(fairness_row, T::zero()), (normalization_row, min_cell)],
        vec![(T::zero(), T::one()); 4],
    )?;
    let solution = solve(&problem);
    if solution.status == LpStatus::Infeasible {
        return Err(Error::NoFairPolicy(
            "the fairness equality admits no policy at the pinned acceptance level".into(),
        ));
    }
    let policy = PostProcessPolicy::new([
        [solution.x[0], solution.x[1]],
        [solution.x[2], solution.x[3]],
    ])?;
    let outcome = evaluate_policy(pmf, &policy)?;
    Ok((policy, outcome))
}
