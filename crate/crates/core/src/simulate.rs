//! Monte Carlo validation of the closed-form evaluators: run the actual
//! arrival process, applicant by applicant, and compare the empirical
//! selection statistics against the analytics.
//!
//! Reproducibility contract: a trial's randomness comes only from
//! `(seed, trial index)` via independent counter-selected streams, and all
//! aggregation is integer-valued, so results are bit-identical across runs
//! and across thread counts.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{BinaryJointPmf, CounterfactualModel, ScoreModel};
use crate::dp::{evaluate_dp_policy, randomize_response, DpConfig, DpPolicy};
use crate::error::{Error, Result};
use crate::outcome::SelectionOutcome;
use crate::postprocess::{evaluate_policy, PostProcessPolicy};
use crate::real::Real;
use crate::threshold::{evaluate_dp_thresholds, evaluate_thresholds, Threshold, ThresholdPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Number of positions to fill per trial; each position restarts the
    /// arrival stream, so positions are independent repetitions.
    pub positions: u32,
    /// Per-position step cap; hitting it marks the trial truncated.
    pub max_steps: u64,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64, positions: u32, max_steps: u64) -> Result<Self> {
        if trials < 1 || positions < 1 || max_steps < 1 {
            return Err(Error::Precondition(
                "trials, positions, and max_steps must all be at least 1".into(),
            ));
        }
        Ok(Self {
            trials,
            seed,
            positions,
            max_steps,
        })
    }
}

/// A selection pipeline the simulator can drive.
pub enum Pipeline<'a, T> {
    Binary {
        pmf: &'a BinaryJointPmf<T>,
        policy: &'a PostProcessPolicy<T>,
    },
    Dp {
        model: &'a CounterfactualModel<T>,
        policy: &'a DpPolicy<T>,
        config: DpConfig<T>,
    },
    Threshold {
        model: &'a ScoreModel<T>,
        pair: ThresholdPair<T>,
    },
    DpThreshold {
        model: &'a CounterfactualModel<T>,
        pair: ThresholdPair<T>,
        config: DpConfig<T>,
    },
}

/// One entry point for the closed forms of every pipeline, so analytics and
/// simulation can never dispatch to different formulas.
pub fn closed_form_outcome<T: Real>(pipeline: &Pipeline<'_, T>) -> Result<SelectionOutcome<T>> {
    match pipeline {
        Pipeline::Binary { pmf, policy } => evaluate_policy(pmf, policy),
        Pipeline::Dp {
            model,
            policy,
            config,
        } => evaluate_dp_policy(model, policy, config),
        Pipeline::Threshold { model, pair } => evaluate_thresholds(model, pair),
        Pipeline::DpThreshold {
            model,
            pair,
            config,
        } => evaluate_dp_thresholds(model, pair, config),
    }
}

/// Empirical estimates for one position (or the pooled aggregate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateBlock {
    pub samples: u64,
    pub filled: u64,
    /// `None` when no trial filled the position.
    pub p_e0: Option<f64>,
    pub p_e1: Option<f64>,
    pub accuracy: Option<f64>,
    pub disparity: Option<f64>,
    /// Accepted arrivals over total arrivals: the per-step acceptance
    /// probability estimate.
    pub p_accept_per_step: Option<f64>,
    pub stderr_e0: f64,
    pub stderr_e1: f64,
    pub stderr_accuracy: f64,
    pub mean_steps: Option<f64>,
    pub stderr_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub per_position: Vec<EstimateBlock>,
    pub aggregate: EstimateBlock,
    /// Trials where some position hit `max_steps` unfilled.
    pub truncated_trials: u64,
    /// Stopping-time histogram over all filled positions.
    pub steps_histogram: BTreeMap<u64, u64>,
    /// Set when the analytic acceptance probability is zero and simulation
    /// was skipped instead of burning `max_steps` on every trial.
    pub analytically_no_selection: bool,
}

#[derive(Clone, Default)]
struct Tally {
    filled: u64,
    e0: u64,
    e1: u64,
    qualified: u64,
    steps_sum: u64,
    steps_sq_sum: u128,
}

#[derive(Clone)]
struct TrialAccumulator {
    per_position: Vec<Tally>,
    truncated: u64,
    histogram: BTreeMap<u64, u64>,
}

impl TrialAccumulator {
    fn new(positions: usize) -> Self {
        Self {
            per_position: vec![Tally::default(); positions],
            truncated: 0,
            histogram: BTreeMap::new(),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.per_position.iter_mut().zip(other.per_position) {
            a.filled += b.filled;
            a.e0 += b.e0;
            a.e1 += b.e1;
            a.qualified += b.qualified;
            a.steps_sum += b.steps_sum;
            a.steps_sq_sum += b.steps_sq_sum;
        }
        self.truncated += other.truncated;
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Inverse-CDF sampler over a small discrete distribution.
struct CumTable {
    cum: Vec<f64>,
}

impl CumTable {
    fn new(weights: impl Iterator<Item = f64>) -> Self {
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for w in weights {
            acc += w;
            cum.push(acc);
        }
        Self { cum }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen::<f64>() * self.cum.last().copied().unwrap_or(1.0);
        // First index whose cumulative weight exceeds u.
        let i = self.cum.partition_point(|&c| c <= u);
        i.min(self.cum.len() - 1)
    }
}

/// Per-arrival sampler compiled from the pipeline (f64 internally).
enum Sampler {
    Binary {
        cells: CumTable,
        alpha: [[f64; 2]; 2],
    },
    Dp {
        ay: CumTable,
        cond: Vec<CumTable>, // indexed ã*4 + a*2 + y
        beta: [[f64; 2]; 2],
        config: DpConfig<f64>,
    },
    Threshold {
        ay: CumTable,
        cond: Vec<CumTable>, // indexed a*2 + y
        accept_from: [usize; 2],
    },
    DpThreshold {
        ay: CumTable,
        cond: Vec<CumTable>, // indexed ã*4 + a*2 + y
        accept_from: [usize; 2],
        config: DpConfig<f64>,
    },
}

/// Outcome of a single arrival: was the applicant accepted, and their
/// (group, qualification).
impl Sampler {
    fn arrival(&self, rng: &mut ChaCha8Rng) -> (bool, usize, usize) {
        match self {
            Sampler::Binary { cells, alpha } => {
                let idx = cells.draw(rng);
                let (a, r, y) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
                let accept = rng.gen::<f64>() < alpha[a][r];
                (accept, a, y)
            }
            Sampler::Dp {
                ay,
                cond,
                beta,
                config,
            } => {
                let idx = ay.draw(rng);
                let (a, y) = (idx >> 1 & 1, idx & 1);
                let a_tilde = randomize_response(a as u8, config, rng) as usize;
                let y_hat = cond[a_tilde * 4 + a * 2 + y].draw(rng);
                let accept = rng.gen::<f64>() < beta[a_tilde][y_hat];
                (accept, a, y)
            }
            Sampler::Threshold {
                ay,
                cond,
                accept_from,
            } => {
                let idx = ay.draw(rng);
                let (a, y) = (idx >> 1 & 1, idx & 1);
                let j = cond[a * 2 + y].draw(rng);
                (j >= accept_from[a], a, y)
            }
            Sampler::DpThreshold {
                ay,
                cond,
                accept_from,
                config,
            } => {
                let idx = ay.draw(rng);
                let (a, y) = (idx >> 1 & 1, idx & 1);
                let a_tilde = randomize_response(a as u8, config, rng) as usize;
                let j = cond[a_tilde * 4 + a * 2 + y].draw(rng);
                (j >= accept_from[a_tilde], a, y)
            }
        }
    }
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar fits in f64")
}

fn threshold_start<T: Real>(support: &[T], t: &Threshold<T>) -> Result<usize> {
    match t {
        Threshold::AboveMax => Ok(support.len()),
        Threshold::At(tau) => support
            .iter()
            .position(|s| s == tau)
            .ok_or_else(|| Error::Precondition(format!("threshold {tau} not on support"))),
    }
}

fn build_sampler<T: Real>(pipeline: &Pipeline<'_, T>) -> Result<Sampler> {
    Ok(match pipeline {
        Pipeline::Binary { pmf, policy } => {
            let cells = CumTable::new((0..8).map(|i| to_f64(pmf.p(i >> 2 & 1, i >> 1 & 1, i & 1))));
            let mut alpha = [[0.0; 2]; 2];
            for a in 0..2 {
                for r in 0..2 {
                    alpha[a][r] = to_f64(policy.alpha[a][r]);
                }
            }
            Sampler::Binary { cells, alpha }
        }
        Pipeline::Dp {
            model,
            policy,
            config,
        } => {
            let ay = CumTable::new((0..4).map(|i| to_f64(model.p_ay(i >> 1 & 1, i & 1))));
            let mut cond = Vec::new();
            for a_tilde in 0..2 {
                for a in 0..2 {
                    for y in 0..2 {
                        let mass = to_f64(model.p_ay(a, y));
                        cond.push(CumTable::new((0..model.output_len()).map(|j| {
                            if mass > 0.0 {
                                to_f64(model.joint(a_tilde, a, y, j)) / mass
                            } else {
                                if j == 0 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                        })));
                    }
                }
            }
            let mut beta = [[0.0; 2]; 2];
            for at in 0..2 {
                for yh in 0..2 {
                    beta[at][yh] = to_f64(policy.beta[at][yh]);
                }
            }
            Sampler::Dp {
                ay,
                cond,
                beta,
                config: DpConfig::new(to_f64(config.epsilon))?,
            }
        }
        Pipeline::Threshold { model, pair } => {
            let ay = CumTable::new((0..4).map(|i| to_f64(model.p_ay(i >> 1 & 1, i & 1))));
            let mut cond = Vec::new();
            for a in 0..2 {
                for y in 0..2 {
                    let stratum: f64 = (0..model.len())
                        .map(|j| to_f64(model.weight(a, y, j)))
                        .sum();
                    cond.push(CumTable::new((0..model.len()).map(|j| {
                        if stratum > 0.0 {
                            to_f64(model.weight(a, y, j)) / stratum
                        } else {
                            if j == 0 {
                                1.0
                            } else {
                                0.0
                            }
                        }
                    })));
                }
            }
            let accept_from = [
                threshold_start(model.support(), &pair.tau0)?,
                threshold_start(model.support(), &pair.tau1)?,
            ];
            Sampler::Threshold {
                ay,
                cond,
                accept_from,
            }
        }
        Pipeline::DpThreshold {
            model,
            pair,
            config,
        } => {
            let ay = CumTable::new((0..4).map(|i| to_f64(model.p_ay(i >> 1 & 1, i & 1))));
            let mut cond = Vec::new();
            for a_tilde in 0..2 {
                for a in 0..2 {
                    for y in 0..2 {
                        let mass = to_f64(model.p_ay(a, y));
                        cond.push(CumTable::new((0..model.output_len()).map(|j| {
                            if mass > 0.0 {
                                to_f64(model.joint(a_tilde, a, y, j)) / mass
                            } else {
                                if j == 0 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                        })));
                    }
                }
            }
            let accept_from = [
                threshold_start(model.support(), &pair.tau0)?,
                threshold_start(model.support(), &pair.tau1)?,
            ];
            Sampler::DpThreshold {
                ay,
                cond,
                accept_from,
                config: DpConfig::new(to_f64(config.epsilon))?,
            }
        }
    })
}

fn proportion_block(samples: u64, tally: &Tally) -> EstimateBlock {
    let n = samples as f64;
    let prop = |count: u64| count as f64 / n;
    let stderr = |p: f64| (p * (1.0 - p) / n).sqrt();
    if tally.filled == 0 {
        return EstimateBlock {
            samples,
            filled: 0,
            p_e0: None,
            p_e1: None,
            accuracy: None,
            disparity: None,
            p_accept_per_step: None,
            stderr_e0: 0.0,
            stderr_e1: 0.0,
            stderr_accuracy: 0.0,
            mean_steps: None,
            stderr_steps: 0.0,
        };
    }
    let (p0, p1, pq) = (prop(tally.e0), prop(tally.e1), prop(tally.qualified));
    let k = tally.filled as f64;
    let mean_steps = tally.steps_sum as f64 / k;
    let var_steps = (tally.steps_sq_sum as f64 / k - mean_steps * mean_steps).max(0.0);
    EstimateBlock {
        samples,
        filled: tally.filled,
        p_e0: Some(p0),
        p_e1: Some(p1),
        accuracy: Some(pq),
        disparity: Some((p0 - p1).abs()),
        p_accept_per_step: Some(k / tally.steps_sum as f64),
        stderr_e0: stderr(p0),
        stderr_e1: stderr(p1),
        stderr_accuracy: stderr(pq),
        mean_steps: Some(mean_steps),
        stderr_steps: (var_steps / k).sqrt(),
    }
}

/// Runs the sequential selection process `config.trials` times.
///
/// Trials run in parallel; determinism is unaffected because each trial
/// draws from its own counter-derived stream and the aggregation is a sum
/// of integers.
pub fn simulate<T: Real>(pipeline: &Pipeline<'_, T>, config: &SimConfig) -> Result<SimResult> {
    let positions = config.positions as usize;
    // Detect the analytically-never-accepting case up front.
    let closed = closed_form_outcome(pipeline);
    if matches!(closed, Err(Error::NoSelection)) {
        return Ok(SimResult {
            per_position: vec![proportion_block(config.trials, &Tally::default()); positions],
            aggregate: proportion_block(config.trials * positions as u64, &Tally::default()),
            truncated_trials: config.trials,
            steps_histogram: BTreeMap::new(),
            analytically_no_selection: true,
        });
    }
    closed?;

    let sampler = build_sampler(pipeline)?;
    let chunk = 4096u64;
    let n_chunks = config.trials.div_ceil(chunk);
    let acc = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut local = TrialAccumulator::new(positions);
            let lo = c * chunk;
            let hi = (lo + chunk).min(config.trials);
            for trial in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(trial);
                let mut truncated = false;
                for pos in 0..positions {
                    let mut accepted = false;
                    let mut steps = 0u64;
                    while steps < config.max_steps {
                        steps += 1;
                        let (accept, a, y) = sampler.arrival(&mut rng);
                        if accept {
                            let tally = &mut local.per_position[pos];
                            tally.filled += 1;
                            tally.e0 += (a == 0 && y == 1) as u64;
                            tally.e1 += (a == 1 && y == 1) as u64;
                            tally.qualified += (y == 1) as u64;
                            tally.steps_sum += steps;
                            tally.steps_sq_sum += (steps as u128) * (steps as u128);
                            *local.histogram.entry(steps).or_insert(0) += 1;
                            accepted = true;
                            break;
                        }
                    }
                    if !accepted {
                        truncated = true;
                        break;
                    }
                }
                if truncated {
                    local.truncated += 1;
                }
            }
            local
        })
        .reduce(|| TrialAccumulator::new(positions), TrialAccumulator::merge);

    let per_position: Vec<EstimateBlock> = acc
        .per_position
        .iter()
        .map(|t| proportion_block(config.trials, t))
        .collect();
    let mut pooled = Tally::default();
    for t in &acc.per_position {
        pooled.filled += t.filled;
        pooled.e0 += t.e0;
        pooled.e1 += t.e1;
        pooled.qualified += t.qualified;
        pooled.steps_sum += t.steps_sum;
        pooled.steps_sq_sum += t.steps_sq_sum;
    }
    Ok(SimResult {
        per_position,
        aggregate: proportion_block(config.trials * positions as u64, &pooled),
        truncated_trials: acc.truncated,
        steps_histogram: acc.histogram,
        analytically_no_selection: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postprocess::PostProcessPolicy;

    fn uniform_passthrough() -> (BinaryJointPmf<f64>, PostProcessPolicy<f64>) {
        (BinaryJointPmf::uniform(), PostProcessPolicy::passthrough())
    }

    #[test]
    fn accept_everyone_fills_in_one_step() {
        let pmf = BinaryJointPmf::<f64>::uniform();
        let policy = PostProcessPolicy::accept_all();
        let pipeline = Pipeline::Binary {
            pmf: &pmf,
            policy: &policy,
        };
        let config = SimConfig::new(20_000, 3, 1, 1000).unwrap();
        let result = simulate(&pipeline, &config).unwrap();
        let block = &result.aggregate;
        assert_eq!(block.filled, 20_000);
        assert_eq!(block.mean_steps, Some(1.0));
        let acc = block.accuracy.unwrap();
        let se = block.stderr_accuracy;
        assert!((acc - 0.5).abs() < 3.0 * se);
        assert_eq!(result.steps_histogram.get(&1), Some(&20_000));
    }

    #[test]
    fn reject_everyone_is_flagged_without_burning_steps() {
        let pmf = BinaryJointPmf::<f64>::uniform();
        let policy = PostProcessPolicy::new([[0.0; 2]; 2]).unwrap();
        let pipeline = Pipeline::Binary {
            pmf: &pmf,
            policy: &policy,
        };
        let config = SimConfig::new(1_000, 3, 2, 1_000_000).unwrap();
        let result = simulate(&pipeline, &config).unwrap();
        assert!(result.analytically_no_selection);
        assert_eq!(result.truncated_trials, 1_000);
        assert_eq!(result.aggregate.p_e0, None);
    }

    #[test]
    fn passthrough_on_uniform_matches_closed_form_and_geometric_tail() {
        let (pmf, policy) = uniform_passthrough();
        let pipeline = Pipeline::Binary {
            pmf: &pmf,
            policy: &policy,
        };
        let trials = 200_000u64;
        let config = SimConfig::new(trials, 17, 1, 10_000).unwrap();
        let result = simulate(&pipeline, &config).unwrap();
        let block = &result.aggregate;
        for (est, se, want) in [
            (block.p_e0.unwrap(), block.stderr_e0, 0.25),
            (block.p_e1.unwrap(), block.stderr_e1, 0.25),
            (block.accuracy.unwrap(), block.stderr_accuracy, 0.5),
        ] {
            assert!((est - want).abs() < 3.0 * se, "{est} vs {want} (se {se})");
        }
        // Geometric(1/2) stopping time: mean 2.
        let mean = block.mean_steps.unwrap();
        assert!((mean - 2.0).abs() < 3.0 * block.stderr_steps);
        // Histogram halves step by step.
        let h1 = *result.steps_histogram.get(&1).unwrap() as f64;
        let h2 = *result.steps_histogram.get(&2).unwrap() as f64;
        assert!((h1 / trials as f64 - 0.5).abs() < 0.01);
        assert!((h2 / trials as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn positions_are_independent_repetitions() {
        let (pmf, policy) = uniform_passthrough();
        let pipeline = Pipeline::Binary {
            pmf: &pmf,
            policy: &policy,
        };
        let config = SimConfig::new(50_000, 23, 3, 10_000).unwrap();
        let result = simulate(&pipeline, &config).unwrap();
        assert_eq!(result.per_position.len(), 3);
        for block in &result.per_position {
            let est = block.p_e0.unwrap();
            assert!((est - 0.25).abs() < 3.0 * block.stderr_e0);
        }
    }

    #[test]
    fn identical_config_is_bit_identical_across_thread_counts() {
        let (pmf, policy) = uniform_passthrough();
        let config = SimConfig::new(30_000, 99, 2, 10_000).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| {
                simulate(
                    &Pipeline::Binary {
                        pmf: &pmf,
                        policy: &policy,
                    },
                    &config,
                )
                .unwrap()
            });
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| {
                simulate(
                    &Pipeline::Binary {
                        pmf: &pmf,
                        policy: &policy,
                    },
                    &config,
                )
                .unwrap()
            });
        assert_eq!(single, many);
        let again = simulate(
            &Pipeline::Binary {
                pmf: &pmf,
                policy: &policy,
            },
            &config,
        )
        .unwrap();
        assert_eq!(single, again);
    }

    #[test]
    fn closed_form_dispatch_matches_module_evaluators() {
        let (pmf, policy) = uniform_passthrough();
        let direct = evaluate_policy(&pmf, &policy).unwrap();
        let dispatched = closed_form_outcome(&Pipeline::Binary {
            pmf: &pmf,
            policy: &policy,
        })
        .unwrap();
        assert_eq!(direct, dispatched);
    }
}
