//! Fair selection when the decision maker only sees a randomized-response
//! version of the sensitive attribute.
//!
//! The noised attribute `Ã` equals `A` with probability `eᵉ/(1+eᵉ)`.
//! Decisions consult `(Ã, r(X,Ã))`, so the policy is a table
//! `β_{ã,ŷ} = Pr{Z=1 | Ã=ã, r(X,Ã)=ŷ}`. Perfect equal selection remains
//! attainable: the fairness equality is linear in `β`, and the optimum comes
//! from the same pin-the-denominator LP reduction as the non-private case.
//!
//! All constraint rows are scaled by `1/(1+eᵉ)` before they reach the
//! solver, i.e. written with the mixture weights `σ(ε)` and `σ(-ε)`. The
//! zero sets are identical to the unscaled equalities and the coefficients
//! stay bounded for any ε, which keeps residuals meaningful.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{BinaryJointPmf, CounterfactualModel};
use crate::error::{Error, Result};
use crate::lp::{solve, LpProblem, LpStatus};
use crate::outcome::SelectionOutcome;
use crate::real::Real;

/// Privacy parameters above this behave exactly like the noiseless limit
/// and would overflow `exp`; they are clamped.
pub const EPSILON_CAP: f64 = 700.0;

/// Local differential privacy configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DpConfig<T> {
    pub epsilon: T,
}

impl<T: Real> DpConfig<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < T::zero() {
            return Err(Error::Precondition(format!(
                "privacy parameter {epsilon} must be finite and non-negative"
            )));
        }
        Ok(Self { epsilon })
    }

    fn clamped(&self) -> T {
        self.epsilon.min(T::of(EPSILON_CAP))
    }

    /// Pr{Ã=a | A=a} = eᵉ/(1+eᵉ), computed in logistic form.
    pub fn keep_prob(&self) -> T {
        T::one() / (T::one() + (-self.clamped()).exp())
    }

    /// Pr{Ã=1-a | A=a} = 1/(1+eᵉ).
    pub fn flip_prob(&self) -> T {
        T::one() / (T::one() + self.clamped().exp())
    }

    /// Mixture weight for a term where the reported attribute `ã` matches
    /// (`true`) or differs from (`false`) the real one.
    fn weight(&self, matches: bool) -> T {
        if matches {
            self.keep_prob()
        } else {
            self.flip_prob()
        }
    }
}

/// Acceptance table `β[ã][ŷ]` over the reported attribute and the
/// classifier output it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpPolicy<T> {
    pub beta: [[T; 2]; 2],
}

impl<T: Real> DpPolicy<T> {
    pub fn new(beta: [[T; 2]; 2]) -> Result<Self> {
        for row in &beta {
            for &v in row {
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::Precondition(format!(
                        "acceptance probability {v} outside [0,1]"
                    )));
                }
            }
        }
        Ok(Self { beta })
    }

    pub fn zero() -> Self {
        Self {
            beta: [[T::zero(); 2]; 2],
        }
    }
}

/// JSON wire form: `{"beta": {"a0_r0": .., ...}}` (the `a` keys refer to the
/// reported attribute).
#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DpPolicyJson<T> {
    pub beta: crate::postprocess::PolicyCellsJson<T>,
}

impl<T: Real> DpPolicy<T> {
    pub fn to_json(&self) -> DpPolicyJson<T> {
        DpPolicyJson {
            beta: crate::postprocess::PolicyCellsJson {
                a0_r0: self.beta[0][0],
                a0_r1: self.beta[0][1],
                a1_r0: self.beta[1][0],
                a1_r1: self.beta[1][1],
            },
        }
    }

    pub fn from_json(json: &DpPolicyJson<T>) -> Result<Self> {
        let b = &json.beta;
        Self::new([[b.a0_r0, b.a0_r1], [b.a1_r0, b.a1_r1]])
    }
}

/// Randomized response: report `a` truthfully with probability
/// `eᵉ/(1+eᵉ)`, otherwise flip it.
pub fn randomize_response<T: Real, R: Rng + ?Sized>(
    a: u8,
    config: &DpConfig<T>,
    rng: &mut R,
) -> u8 {
    debug_assert!(a <= 1);
    let keep = config
        .keep_prob()
        .to_f64()
        .expect("probability fits in f64");
    if rng.gen::<f64>() < keep {
        a
    } else {
        1 - a
    }
}

fn require_binary<T: Real>(model: &CounterfactualModel<T>) -> Result<()> {
    if !model.is_binary() {
        return Err(Error::Precondition(
            "the β-policy pipeline needs a binary classifier output".into(),
        ));
    }
    Ok(())
}

/// `Pr{Z=1, A=a, Y=1}` under the policy, marginalizing over the reported
/// attribute.
fn selection_mass<T: Real>(
    model: &CounterfactualModel<T>,
    policy: &DpPolicy<T>,
    config: &DpConfig<T>,
    a: usize,
) -> T {
    let mut total = T::zero();
    for a_tilde in 0..2 {
        let w = config.weight(a_tilde == a);
        for y_hat in 0..2 {
            total = total + policy.beta[a_tilde][y_hat] * w * model.joint(a_tilde, a, 1, y_hat);
        }
    }
    total
}

/// Residual of the equal-selection equality under the private pipeline:
/// `|Pr{Z=1,A=0,Y=1} - Pr{Z=1,A=1,Y=1}|`. Zero within 1e-9 certifies
/// perfect fairness.
pub fn es_constraint_residual<T: Real>(
    model: &CounterfactualModel<T>,
    policy: &DpPolicy<T>,
    config: &DpConfig<T>,
) -> Result<T> {
    require_binary(model)?;
    Ok((selection_mass(model, policy, config, 0) - selection_mass(model, policy, config, 1)).abs())
}

/// Sufficient privacy level for a non-trivial fair policy to exist:
/// `ε > max_a -ln Pr{R=1, A=a, Y=1}`. `None` when either mass is zero
/// (the bound is infinite).
pub fn feasibility_bound<T: Real>(pmf: &BinaryJointPmf<T>) -> Option<T> {
    let mut bound = T::neg_infinity();
    for a in 0..2 {
        let mass = pmf.p(a, 1, 1);
        if !(mass > T::zero()) {
            return None;
        }
        bound = bound.max(-mass.ln());
    }
    Some(bound)
}

/// Fairness target for the private solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpFairness {
    Es,
    Eo,
    Unconstrained,
}

/// Coefficient row (over `β` in order (ã=0,ŷ=0), (0,1), (1,0), (1,1)) of
/// the equal-opportunity equality, scaled by `1/(1+eᵉ)`.
pub fn eo_constraint_coefficients<T: Real>(
    model: &CounterfactualModel<T>,
    config: &DpConfig<T>,
) -> Result<Vec<T>> {
    require_binary(model)?;
    let qual = [model.p_ay(0, 1), model.p_ay(1, 1)];
    if !(qual[0] > T::zero() && qual[1] > T::zero()) {
        return Err(Error::Precondition(
            "equal opportunity needs qualified mass in both groups".into(),
        ));
    }
    let mut row = Vec::with_capacity(4);
    for a_tilde in 0..2 {
        for y_hat in 0..2 {
            let c0 = config.weight(a_tilde == 0) * model.joint(a_tilde, 0, 1, y_hat) / qual[0];
            let c1 = config.weight(a_tilde == 1) * model.joint(a_tilde, 1, 1, y_hat) / qual[1];
            row.push(c0 - c1);
        }
    }
    Ok(row)
}

/// Residual of the EO equality at a given policy.
pub fn eo_constraint_residual<T: Real>(
    model: &CounterfactualModel<T>,
    policy: &DpPolicy<T>,
    config: &DpConfig<T>,
) -> Result<T> {
    let row = eo_constraint_coefficients(model, config)?;
    let mut acc = T::zero();
    for a_tilde in 0..2 {
        for y_hat in 0..2 {
            acc = acc + row[2 * a_tilde + y_hat] * policy.beta[a_tilde][y_hat];
        }
    }
    Ok(acc.abs())
}

/// Result of the private policy solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolveResult<T> {
    pub policy: DpPolicy<T>,
    pub outcome: SelectionOutcome<T>,
    /// Set when rejecting everyone is the only fair policy; the outcome then
    /// has zero acceptance and no expected stopping time.
    pub zero_policy: bool,
}

fn zero_outcome<T: Real>() -> SelectionOutcome<T> {
    SelectionOutcome {
        p_e0: T::zero(),
        p_e1: T::zero(),
        accuracy: T::zero(),
        disparity: T::zero(),
        p_accept_per_step: T::zero(),
        expected_steps: None,
    }
}

/// Maximizes accuracy over fair policies for the private pipeline.
///
/// The fractional objective is pinned the same way as in the non-private
/// reduction: per-step acceptance is fixed to the smallest mixture
/// coefficient `min_{ã,ŷ} Pr{Ã=ã, r(X,Ã)=ŷ}`-style mass, which must be
/// positive. When the fairness equality admits only the all-reject policy,
/// the LP is infeasible and the all-reject policy is returned flagged.
pub fn solve_dp_policy<T: Real>(
    model: &CounterfactualModel<T>,
    config: &DpConfig<T>,
    target: DpFairness,
) -> Result<DpSolveResult<T>> {
    require_binary(model)?;
    let sigma = config.keep_prob();
    let sigma_bar = config.flip_prob();

    // Normalization coefficients Pr{Ã=ã, r(X,Ã)=ŷ}.
    let mut norm_row = Vec::with_capacity(4);
    let mut objective = Vec::with_capacity(4);
    for a_tilde in 0..2 {
        for y_hat in 0..2 {
            let own = model.p_a_and_r(a_tilde, a_tilde, y_hat);
            let other = model.p_a_and_r(a_tilde, 1 - a_tilde, y_hat);
            norm_row.push(sigma * own + sigma_bar * other);
            let own_q = model.joint(a_tilde, a_tilde, 1, y_hat);
            let other_q = model.joint(a_tilde, 1 - a_tilde, 1, y_hat);
            objective.push(sigma * own_q + sigma_bar * other_q);
        }
    }
    let min_coeff = norm_row.iter().copied().fold(T::infinity(), T::min);
    if !(min_coeff > T::zero()) {
        return Err(Error::Precondition(
            "every Pr{Ã=ã, r(X,Ã)=ŷ} mass must be positive to pin the LP normalization".into(),
        ));
    }

    let mut equalities = Vec::new();
    match target {
        DpFairness::Es => {
            let mut row = Vec::with_capacity(4);
            for a_tilde in 0..2 {
                for y_hat in 0..2 {
                    let c0 = config.weight(a_tilde == 0) * model.joint(a_tilde, 0, 1, y_hat);
                    let c1 = config.weight(a_tilde == 1) * model.joint(a_tilde, 1, 1, y_hat);
                    row.push(c0 - c1);
                }
            }
            equalities.push((row, T::zero()));
        }
        DpFairness::Eo => {
            equalities.push((eo_constraint_coefficients(model, config)?, T::zero()));
        }
        DpFairness::Unconstrained => {}
    }
    equalities.push((norm_row, min_coeff));

    let problem = LpProblem::new(objective, equalities, vec![(T::zero(), T::one()); 4])?;
    let solution = solve(&problem);
    if solution.status == LpStatus::Infeasible {
        return Ok(DpSolveResult {
            policy: DpPolicy::zero(),
            outcome: zero_outcome(),
            zero_policy: true,
        });
    }
    let policy = DpPolicy::new([
        [solution.x[0], solution.x[1]],
        [solution.x[2], solution.x[3]],
    ])?;
    let outcome = evaluate_dp_policy(model, &policy, config)?;
    Ok(DpSolveResult {
        policy,
        outcome,
        zero_policy: false,
    })
}

/// Closed-form outcome of the private pipeline under a given policy.
pub fn evaluate_dp_policy<T: Real>(
    model: &CounterfactualModel<T>,
    policy: &DpPolicy<T>,
    config: &DpConfig<T>,
) -> Result<SelectionOutcome<T>> {
    require_binary(model)?;
    let sigma = config.keep_prob();
    let sigma_bar = config.flip_prob();
    let mut accept = T::zero();
    for a_tilde in 0..2 {
        for y_hat in 0..2 {
            let own = model.p_a_and_r(a_tilde, a_tilde, y_hat);
            let other = model.p_a_and_r(a_tilde, 1 - a_tilde, y_hat);
            accept = accept + policy.beta[a_tilde][y_hat] * (sigma * own + sigma_bar * other);
        }
    }
    SelectionOutcome::from_masses(
        selection_mass(model, policy, config, 0),
        selection_mass(model, policy, config, 1),
        accept,
    )
}
