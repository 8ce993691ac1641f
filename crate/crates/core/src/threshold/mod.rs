//! Score-based selection with group-dependent thresholds: exhaustive search
//! under equal-selection / equal-opportunity / statistical-parity
//! relaxations, an optional stopping-time constraint, the degenerate-outcome
//! verdicts for EO/SP, and the privatized threshold search.

pub mod continuous;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distributions::{CounterfactualModel, ScoreModel};
use crate::dp::DpConfig;
use crate::error::{Error, Result};
use crate::outcome::SelectionOutcome;
use crate::real::Real;

/// A group threshold: a support value (accept when `R ≥ τ`) or the sentinel
/// that rejects the whole group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<T> {
    At(T),
    AboveMax,
}

impl<T: Real> Threshold<T> {
    fn index_in(&self, support: &[T]) -> Result<usize> {
        match self {
            Threshold::AboveMax => Ok(support.len()),
            Threshold::At(tau) => support.iter().position(|s| s == tau).ok_or_else(|| {
                Error::Precondition(format!("threshold {tau} is not a support value"))
            }),
        }
    }

    fn from_index(support: &[T], i: usize) -> Self {
        if i >= support.len() {
            Threshold::AboveMax
        } else {
            Threshold::At(support[i])
        }
    }
}

impl<T: Serialize> Serialize for Threshold<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threshold::At(v) => v.serialize(s),
            Threshold::AboveMax => s.serialize_str("above_max"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Threshold<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Value(T),
            Text(String),
        }
        match Raw::<T>::deserialize(d)? {
            Raw::Value(v) => Ok(Threshold::At(v)),
            Raw::Text(t) if t == "above_max" => Ok(Threshold::AboveMax),
            Raw::Text(t) => Err(D::Error::custom(format!(
                "unknown threshold sentinel {t:?}"
            ))),
        }
    }
}

/// Thresholds for groups 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ThresholdPair<T> {
    pub tau0: Threshold<T>,
    pub tau1: Threshold<T>,
}

/// Fairness notion enforced by the threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fairness {
    /// Equal selection of qualified applicants (disparity of the selection
    /// outcome).
    Es,
    /// Equal selection regardless of qualification.
    EsDemographic,
    /// Equal opportunity on the per-step decision rule.
    Eo,
    /// Statistical parity on the per-step decision rule.
    Sp,
    /// Unconstrained accuracy maximization.
    None,
}

/// Cap on the chance the process outlasts `horizon` steps:
/// `Pr{nobody selected in horizon steps} ≤ psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct TimeConstraint<T> {
    pub horizon: u32,
    pub psi: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig<T> {
    pub fairness: Fairness,
    pub gamma: T,
    pub time_constraint: Option<TimeConstraint<T>>,
}

impl<T: Real> SearchConfig<T> {
    pub fn new(
        fairness: Fairness,
        gamma: T,
        time_constraint: Option<TimeConstraint<T>>,
    ) -> Result<Self> {
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::Precondition(format!("gamma {gamma} outside [0,1]")));
        }
        if let Some(tc) = &time_constraint {
            if tc.horizon < 1 {
                return Err(Error::Precondition("horizon must be at least 1".into()));
            }
            if !(tc.psi > T::zero() && tc.psi <= T::one()) {
                return Err(Error::Precondition(format!("psi {} outside (0,1]", tc.psi)));
            }
        }
        Ok(Self {
            fairness,
            gamma,
            time_constraint,
        })
    }
}

/// Precomputed suffix tails for one score model. Index `i` means the
/// acceptance region `R ≥ ρ_i`; index `n` is the empty region.
struct Tails<T> {
    /// Pr{R ≥ ρ_i, A=a, Y=1} (global mass).
    sel_q: [Vec<T>; 2],
    /// Pr{R ≥ ρ_i, A=a} (global mass).
    accept: [Vec<T>; 2],
    /// Pr{R ≥ ρ_i | A=a, Y=1}; zero for an empty stratum.
    cond_qual: [Vec<T>; 2],
    /// Pr{R ≥ ρ_i | A=a}; zero for an absent group.
    cond_marg: [Vec<T>; 2],
}

impl<T: Real> Tails<T> {
    fn build(model: &ScoreModel<T>) -> Self {
        let n = model.len();
        let mut sel_q = [vec![T::zero(); n + 1], vec![T::zero(); n + 1]];
        let mut accept = [vec![T::zero(); n + 1], vec![T::zero(); n + 1]];
        let mut cond_qual = [vec![T::zero(); n + 1], vec![T::zero(); n + 1]];
        let mut cond_marg = [vec![T::zero(); n + 1], vec![T::zero(); n + 1]];
        for a in 0..2 {
            let pa = model.p_a(a);
            let stratum_q: T = (0..n).map(|j| model.weight(a, 1, j)).sum();
            for i in (0..n).rev() {
                let w1 = model.weight(a, 1, i);
                let w = w1 + model.weight(a, 0, i);
                sel_q[a][i] = sel_q[a][i + 1] + pa * w1;
                accept[a][i] = accept[a][i + 1] + pa * w;
                cond_qual[a][i] = cond_qual[a][i + 1]
                    + if stratum_q > T::zero() {
                        w1 / stratum_q
                    } else {
                        T::zero()
                    };
                cond_marg[a][i] = cond_marg[a][i + 1] + w;
            }
        }
        Self {
            sel_q,
            accept,
            cond_qual,
            cond_marg,
        }
    }

    fn outcome(&self, i0: usize, i1: usize) -> Option<(T, T, T)> {
        let d = self.accept[0][i0] + self.accept[1][i1];
        if d > T::zero() {
            Some((self.sel_q[0][i0], self.sel_q[1][i1], d))
        } else {
            None
        }
    }

    fn residual(&self, fairness: Fairness, i0: usize, i1: usize, s0: T, s1: T, d: T) -> T {
        match fairness {
            Fairness::Es => (s0 / d - s1 / d).abs(),
            Fairness::EsDemographic => (self.accept[0][i0] - self.accept[1][i1]).abs() / d,
            Fairness::Eo => (self.cond_qual[0][i0] - self.cond_qual[1][i1]).abs(),
            Fairness::Sp => (self.cond_marg[0][i0] - self.cond_marg[1][i1]).abs(),
            Fairness::None => T::zero(),
        }
    }
}

fn time_ok<T: Real>(d: T, tc: &TimeConstraint<T>) -> bool {
    // (1 - d)^horizon ≤ psi, in log form.
    let h = T::from_u32(tc.horizon).unwrap();
    h * (-d).ln_1p() <= tc.psi.ln()
}

/// Closed-form outcome of a fixed threshold pair.
pub fn evaluate_thresholds<T: Real>(
    model: &ScoreModel<T>,
    pair: &ThresholdPair<T>,
) -> Result<SelectionOutcome<T>> {
    let tails = Tails::build(model);
    let i0 = pair.tau0.index_in(model.support())?;
    let i1 = pair.tau1.index_in(model.support())?;
    let (s0, s1, d) = tails.outcome(i0, i1).ok_or(Error::NoSelection)?;
    SelectionOutcome::from_masses(s0, s1, d)
}

/// Exhaustive search over all `(τ0, τ1)` pairs (`O(n'²)`), maximizing
/// accuracy among pairs passing the fairness relaxation and the optional
/// stopping-time constraint. Ties break toward smaller disparity, then the
/// lexicographically smaller pair (the reject-all sentinel sorts last).
pub fn search_thresholds<T: Real>(
    model: &ScoreModel<T>,
    config: &SearchConfig<T>,
) -> Result<(ThresholdPair<T>, SelectionOutcome<T>)> {
    let tails = Tails::build(model);
    let n = model.len();
    let mut best: Option<(usize, usize, T, T)> = None; // (i0, i1, acc, disparity)
    let mut saw_selection = false;
    let mut saw_time_ok = false;
    for i0 in 0..=n {
        for i1 in 0..=n {
            let Some((s0, s1, d)) = tails.outcome(i0, i1) else {
                continue;
            };
            saw_selection = true;
            if let Some(tc) = &config.time_constraint {
                if !time_ok(d, tc) {
                    continue;
                }
            }
            saw_time_ok = true;
            let residual = tails.residual(config.fairness, i0, i1, s0, s1, d);
            if config.fairness != Fairness::None && residual > config.gamma {
                continue;
            }
            let acc = (s0 + s1) / d;
            let disparity = (s0 / d - s1 / d).abs();
            let better = match &best {
                None => true,
                Some((b0, b1, bacc, bdisp)) => {
                    acc > *bacc
                        || (acc == *bacc
                            && (disparity < *bdisp
                                || (disparity == *bdisp && (i0, i1) < (*b0, *b1))))
                }
            };
            if better {
                best = Some((i0, i1, acc, disparity));
            }
        }
    }
    match best {
        Some((i0, i1, _, _)) => {
            let pair = ThresholdPair {
                tau0: Threshold::from_index(model.support(), i0),
                tau1: Threshold::from_index(model.support(), i1),
            };
            let outcome = evaluate_thresholds(model, &pair)?;
            Ok((pair, outcome))
        }
        None => {
            let binding = if !saw_selection {
                "no pair accepts anyone"
            } else if !saw_time_ok {
                "the stopping-time constraint excludes every pair"
            } else {
                "the fairness relaxation excludes every pair"
            };
            Err(Error::InfeasibleSearch(binding.into()))
        }
    }
}

/// Verdict of the degenerate-outcome check for EO/SP threshold selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateVerdict {
    /// Both hypotheses hold: accuracy increases in each threshold across
    /// the feasible grid, and the top-score mass condition is met.
    pub hypotheses_hold: bool,
    /// When the hypotheses hold: did the search reject one group entirely?
    pub search_matches_theorem: Option<bool>,
}

/// Checks the hypotheses under which the γ-EO (or γ-SP) optimum rejects an
/// entire group, then runs the search and reports whether it did.
pub fn verify_degenerate_theorem<T: Real>(
    model: &ScoreModel<T>,
    fairness: Fairness,
    gamma: T,
) -> Result<DegenerateVerdict> {
    if fairness != Fairness::Eo && fairness != Fairness::Sp {
        return Err(Error::Precondition(
            "degenerate-outcome check applies to EO or SP only".into(),
        ));
    }
    let n = model.len();
    let tails = Tails::build(model);
    // Top-score mass hypothesis.
    let top = n - 1;
    let mut top_mass_ok = true;
    for a in 0..2 {
        let mass = match fairness {
            Fairness::Eo => {
                let stratum: T = (0..n).map(|j| model.weight(a, 1, j)).sum();
                if stratum > T::zero() {
                    model.weight(a, 1, top) / stratum
                } else {
                    T::zero()
                }
            }
            _ => model.marginal_mass(a, top),
        };
        if mass > gamma {
            top_mass_ok = false;
        }
    }
    // Accuracy monotone over the feasible grid: among in-support pairs
    // meeting the fairness relaxation, raising either threshold (staying
    // feasible) must not lower accuracy.
    let slack = T::of(1e-12);
    let mut feasible: Vec<(usize, usize, T)> = Vec::new();
    for i0 in 0..n {
        for i1 in 0..n {
            if let Some((s0, s1, d)) = tails.outcome(i0, i1) {
                if tails.residual(fairness, i0, i1, s0, s1, d) <= gamma {
                    feasible.push((i0, i1, (s0 + s1) / d));
                }
            }
        }
    }
    let mut monotone = true;
    'pairs: for &(i0, i1, acc) in &feasible {
        for &(j0, j1, acc_up) in &feasible {
            if j0 >= i0 && j1 >= i1 && (j0, j1) != (i0, i1) && acc_up < acc - slack {
                monotone = false;
                break 'pairs;
            }
        }
    }
    let hypotheses_hold = top_mass_ok && monotone;
    if !hypotheses_hold {
        return Ok(DegenerateVerdict {
            hypotheses_hold,
            search_matches_theorem: None,
        });
    }
    let config = SearchConfig::new(fairness, gamma, None)?;
    let matches = match search_thresholds(model, &config) {
        Ok((pair, outcome)) => {
            let rejects_group = matches!(pair.tau0, Threshold::AboveMax)
                || matches!(pair.tau1, Threshold::AboveMax)
                || outcome.p_e0 <= T::of(1e-15)
                || outcome.p_e1 <= T::of(1e-15);
            Some(rejects_group)
        }
        Err(_) => Some(false),
    };
    Ok(DegenerateVerdict {
        hypotheses_hold,
        search_matches_theorem: matches,
    })
}

/// Suffix tails for the privatized threshold rule. `i` indexes the
/// acceptance region of the threshold applied when the REPORTED attribute
/// is `ã`; the real attribute stays `a`.
struct DpTails<T> {
    /// tail[ã][a][y][i] = Pr{r(X,ã) ≥ ρ_i, A=a, Y=y}.
    tail: [[[Vec<T>; 2]; 2]; 2],
}

impl<T: Real> DpTails<T> {
    fn build(model: &CounterfactualModel<T>) -> Self {
        let n = model.output_len();
        let mut tail: [[[Vec<T>; 2]; 2]; 2] = Default::default();
        for a_tilde in 0..2 {
            for a in 0..2 {
                for y in 0..2 {
                    let mut v = vec![T::zero(); n + 1];
                    for i in (0..n).rev() {
                        v[i] = v[i + 1] + model.joint(a_tilde, a, y, i);
                    }
                    tail[a_tilde][a][y] = v;
                }
            }
        }
        Self { tail }
    }

    /// Selection masses and acceptance probability for reported-attribute
    /// thresholds at indices `(i0, i1)`.
    fn outcome(&self, config: &DpConfig<T>, i0: usize, i1: usize) -> (T, T, T)
    where
        T: Real,
    {
        let sigma = config.keep_prob();
        let sigma_bar = config.flip_prob();
        let idx = [i0, i1];
        let mut sel = [T::zero(); 2];
        let mut accept = T::zero();
        for a_tilde in 0..2 {
            let i = idx[a_tilde];
            for a in 0..2 {
                let w = if a == a_tilde { sigma } else { sigma_bar };
                let q = self.tail[a_tilde][a][1][i];
                let u = self.tail[a_tilde][a][0][i];
                sel[a] = sel[a] + w * q;
                accept = accept + w * (q + u);
            }
        }
        (sel[0], sel[1], accept)
    }
}

/// Closed-form outcome of privatized thresholds `(τ̃0, τ̃1)` applied to the
/// reported attribute.
pub fn evaluate_dp_thresholds<T: Real>(
    model: &CounterfactualModel<T>,
    pair: &ThresholdPair<T>,
    config: &DpConfig<T>,
) -> Result<SelectionOutcome<T>> {
    let tails = DpTails::build(model);
    let i0 = pair.tau0.index_in(model.support())?;
    let i1 = pair.tau1.index_in(model.support())?;
    let (s0, s1, d) = tails.outcome(config, i0, i1);
    SelectionOutcome::from_masses(s0, s1, d)
}

/// Exhaustive `O(n'²)` search for the accuracy-maximizing privatized
/// threshold pair with selection disparity at most `gamma`.
pub fn search_dp_thresholds<T: Real>(
    model: &CounterfactualModel<T>,
    config: &DpConfig<T>,
    gamma: T,
) -> Result<(ThresholdPair<T>, SelectionOutcome<T>)> {
    let tails = DpTails::build(model);
    let n = model.output_len();
    let mut best: Option<(usize, usize, T, T)> = None;
    for i0 in 0..=n {
        for i1 in 0..=n {
            let (s0, s1, d) = tails.outcome(config, i0, i1);
            if !(d > T::zero()) {
                continue;
            }
            let disparity = (s0 / d - s1 / d).abs();
            if disparity > gamma {
                continue;
            }
            let acc = (s0 + s1) / d;
            let better = match &best {
                None => true,
                Some((b0, b1, bacc, bdisp)) => {
                    acc > *bacc
                        || (acc == *bacc
                            && (disparity < *bdisp
                                || (disparity == *bdisp && (i0, i1) < (*b0, *b1))))
                }
            };
            if better {
                best = Some((i0, i1, acc, disparity));
            }
        }
    }
    let Some((i0, i1, _, _)) = best else {
        return Err(Error::InfeasibleSearch(
            "no reported-attribute threshold pair meets the disparity bound".into(),
        ));
    };
    let pair = ThresholdPair {
        tau0: Threshold::from_index(model.support(), i0),
        tau1: Threshold::from_index(model.support(), i1),
    };
    let outcome = evaluate_dp_thresholds(model, &pair, config)?;
    Ok((pair, outcome))
}
