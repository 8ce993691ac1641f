//! Acceptance suite: one test per release criterion, each printing a
//! PASS line once its assertions hold. Run with
//! `cargo test -p fairsel --test acceptance -- --nocapture`.

#![allow(clippy::needless_range_loop)] // index loops over semantic binary axes

mod common;

use common::*;
use fairsel::distributions::ScoreModel;
use fairsel::dp::{
    es_constraint_residual, feasibility_bound, randomize_response, solve_dp_policy, DpConfig,
    DpFairness, DpPolicy,
};
use fairsel::postprocess::{evaluate_policy, solve_es_policy, FairnessTarget, PostProcessPolicy};
use fairsel::simulate::{closed_form_outcome, simulate, Pipeline, SimConfig};
use fairsel::threshold::continuous::{continuous_reduction, ContinuousDist, ContinuousProblem};
use fairsel::threshold::{
    search_thresholds, verify_degenerate_theorem, Fairness, SearchConfig, Threshold, ThresholdPair,
    TimeConstraint,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[test]
fn acceptance_1_lp_matches_vertex_oracle_and_grid() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..1000 {
        let pmf = random_pmf(&mut rng);
        let (_, outcome) = solve_es_policy(&pmf, FairnessTarget::Es).unwrap();
        let oracle = vertex_oracle_accuracy(&pmf).expect("feasible LP");
        assert!(
            (outcome.accuracy - oracle).abs() <= 1e-9,
            "case {case}: solver {} vs vertex oracle {}",
            outcome.accuracy,
            oracle
        );
        let grid = grid_bruteforce_accuracy(&pmf).expect("grid found a feasible point");
        assert!(
            outcome.accuracy >= grid - 0.02,
            "case {case}: solver {} below grid {} - slack",
            outcome.accuracy,
            grid
        );
        assert!(outcome.disparity <= 1e-9);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "criterion 1 took {elapsed:.1}s");
    println!("acceptance 1 (LP vs vertex oracle and α-grid, 1000 PMFs): PASS ({elapsed:.1}s)");
}

fn check_sim_against_closed(pipeline: &Pipeline<'_, f64>, seed: u64, label: &str) {
    let closed = closed_form_outcome(pipeline).unwrap();
    let config = SimConfig::new(1_000_000, seed, 1, 1_000_000).unwrap();
    let result = simulate(pipeline, &config).unwrap();
    assert_eq!(result.truncated_trials, 0, "{label}: unexpected truncation");
    let block = &result.aggregate;
    for (name, est, se, want) in [
        ("p_e0", block.p_e0.unwrap(), block.stderr_e0, closed.p_e0),
        ("p_e1", block.p_e1.unwrap(), block.stderr_e1, closed.p_e1),
        (
            "accuracy",
            block.accuracy.unwrap(),
            block.stderr_accuracy,
            closed.accuracy,
        ),
    ] {
        assert!(
            (est - want).abs() <= 3.0 * se.max(1e-9),
            "{label} {name}: estimate {est} vs closed {want} (se {se})"
        );
    }
}

#[test]
fn acceptance_2_simulator_agrees_with_closed_forms() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);

    for i in 0..20 {
        let pmf = random_pmf(&mut rng);
        let policy = random_policy(&mut rng, 0.35);
        check_sim_against_closed(
            &Pipeline::Binary {
                pmf: &pmf,
                policy: &policy,
            },
            3000 + i,
            &format!("binary[{i}]"),
        );
    }
    let binary_t = start.elapsed().as_secs_f64();
    assert!(binary_t < 120.0);

    let dp_start = Instant::now();
    for i in 0..20 {
        let model = random_counterfactual(&mut rng);
        let mut beta = [[0.0; 2]; 2];
        for row in beta.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.gen_range(0.35..1.0);
            }
        }
        let policy = DpPolicy::new(beta).unwrap();
        let config = DpConfig::new(rng.gen_range(0.5..3.0)).unwrap();
        check_sim_against_closed(
            &Pipeline::Dp {
                model: &model,
                policy: &policy,
                config,
            },
            4000 + i,
            &format!("dp[{i}]"),
        );
    }
    let dp_t = dp_start.elapsed().as_secs_f64();
    assert!(dp_t < 120.0);

    let th_start = Instant::now();
    let mut done = 0;
    while done < 20 {
        let model = random_score_model(&mut rng, 6);
        let support = model.support().to_vec();
        let pair = ThresholdPair {
            tau0: Threshold::At(support[rng.gen_range(0..3)]),
            tau1: Threshold::At(support[rng.gen_range(0..3)]),
        };
        let pipeline = Pipeline::Threshold {
            model: &model,
            pair,
        };
        if closed_form_outcome(&pipeline).unwrap().p_accept_per_step < 0.3 {
            continue;
        }
        check_sim_against_closed(&pipeline, 5000 + done, &format!("threshold[{done}]"));
        done += 1;
    }
    let th_t = th_start.elapsed().as_secs_f64();
    assert!(th_t < 120.0);
    println!(
        "acceptance 2 (simulator vs closed forms, 20 instances/family): PASS \
         (binary {binary_t:.1}s, dp {dp_t:.1}s, threshold {th_t:.1}s)"
    );
}

struct TableRow {
    fairness: Fairness,
    gamma: f64,
    tau0: f64,
    tau1: f64,
    p_e0: f64,
    p_e1: f64,
    accuracy: f64,
}

fn check_table_row(model: &ScoreModel<f64>, row: &TableRow, timed: bool, label: &str) {
    let time_constraint = timed.then_some(TimeConstraint {
        horizon: 100,
        psi: 0.5,
    });
    let config = SearchConfig::new(row.fairness, row.gamma, time_constraint).unwrap();
    let (pair, outcome) = search_thresholds(model, &config).unwrap();
    assert_eq!(
        pair.tau0,
        Threshold::At(row.tau0),
        "{label}: tau0 {:?} wanted {}",
        pair.tau0,
        row.tau0
    );
    assert_eq!(
        pair.tau1,
        Threshold::At(row.tau1),
        "{label}: tau1 {:?} wanted {}",
        pair.tau1,
        row.tau1
    );
    for (name, got, want) in [
        ("p_e0", outcome.p_e0, row.p_e0),
        ("p_e1", outcome.p_e1, row.p_e1),
        ("accuracy", outcome.accuracy, row.accuracy),
    ] {
        assert!(
            (got - want).abs() <= 0.005,
            "{label} {name}: {got} vs {want}"
        );
    }
}

#[test]
fn acceptance_3_fico_reference_outcomes_unconstrained() {
    let start = Instant::now();
    let model = load_fico();
    assert!((model.p_a(0) - FICO_PRIOR).abs() < 1e-15);
    assert!((model.p_a(0) - 0.879).abs() < 5e-4);
    let rows = [
        (
            "0.01-ES",
            TableRow {
                fairness: Fairness::Es,
                gamma: 0.01,
                tau0: 98.5,
                tau1: 84.5,
                p_e0: 0.483,
                p_e1: 0.491,
                accuracy: 0.974,
            },
        ),
        (
            "0.001-ES",
            TableRow {
                fairness: Fairness::Es,
                gamma: 0.001,
                tau0: 98.0,
                tau1: 65.0,
                p_e0: 0.483,
                p_e1: 0.483,
                accuracy: 0.966,
            },
        ),
        (
            "0.01-EO",
            TableRow {
                fairness: Fairness::Eo,
                gamma: 0.01,
                tau0: 99.5,
                tau1: 99.5,
                p_e0: 0.990,
                p_e1: 0.0,
                accuracy: 0.990,
            },
        ),
        (
            "0.01-SP",
            TableRow {
                fairness: Fairness::Sp,
                gamma: 0.01,
                tau0: 99.5,
                tau1: 99.5,
                p_e0: 0.990,
                p_e1: 0.0,
                accuracy: 0.990,
            },
        ),
    ];
    for (name, row) in &rows {
        check_table_row(&model, row, false, &format!("unconstrained {name}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 3 took {elapsed:.1}s");
    println!("acceptance 3 (FICO reference outcomes, unconstrained: thresholds exact, probabilities ±0.005): PASS ({elapsed:.1}s)");
}

#[test]
fn acceptance_4_fico_reference_outcomes_time_constrained() {
    let start = Instant::now();
    let model = load_fico();
    let rows = [
        (
            "0.01-EO",
            TableRow {
                fairness: Fairness::Eo,
                gamma: 0.01,
                tau0: 98.0,
                tau1: 97.5,
                p_e0: 0.947,
                p_e1: 0.042,
                accuracy: 0.989,
            },
        ),
        (
            "0.001-SP",
            TableRow {
                fairness: Fairness::Sp,
                gamma: 0.001,
                tau0: 98.0,
                tau1: 94.0,
                p_e0: 0.873,
                p_e1: 0.115,
                accuracy: 0.988,
            },
        ),
        (
            "0.001-ES",
            TableRow {
                fairness: Fairness::Es,
                gamma: 0.001,
                tau0: 98.0,
                tau1: 65.0,
                p_e0: 0.483,
                p_e1: 0.483,
                accuracy: 0.966,
            },
        ),
    ];
    for (name, row) in &rows {
        check_table_row(&model, row, true, &format!("time-constrained {name}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0);
    println!("acceptance 4 (FICO reference outcomes under the 100-step constraint): PASS ({elapsed:.1}s)");
}

#[test]
fn acceptance_5_dp_fairness_exactness_and_sweep_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    // Residual certificate and feasibility-bound sufficiency on random models.
    for case in 0..100 {
        let model = random_counterfactual(&mut rng);
        let config = DpConfig::new(rng.gen_range(0.2..6.0)).unwrap();
        let result = solve_dp_policy(&model, &config, DpFairness::Es).unwrap();
        let residual = es_constraint_residual(&model, &result.policy, &config).unwrap();
        assert!(
            residual <= 1e-9 || result.zero_policy,
            "case {case}: residual {residual}"
        );
        if result.zero_policy {
            assert_eq!(result.policy, DpPolicy::zero());
        }
        let induced = model.induced_binary_pmf().unwrap();
        if let Some(bound) = feasibility_bound(&induced) {
            for eps in [bound * 1.01 + 0.01, bound + 1.0, 20.0] {
                let config = DpConfig::new(eps).unwrap();
                let above = solve_dp_policy(&model, &config, DpFairness::Es).unwrap();
                assert!(
                    !above.zero_policy && above.outcome.p_accept_per_step > 0.0,
                    "case {case}: zero policy above the feasibility bound at ε={eps}"
                );
            }
        }
    }

    // Sweep shape on the skewed fixture: flat at zero below the empirical
    // threshold, then non-decreasing, reaching the non-private optimum.
    let skewed = load_dp_fixture("dp_skewed.csv");
    let mut grid: Vec<f64> = (0..=32).map(|i| i as f64 * 0.25).collect();
    grid.extend([10.0, 14.0, 20.0]);
    let mut prev = -1.0;
    let mut accs = Vec::new();
    for &eps in &grid {
        let config = DpConfig::new(eps).unwrap();
        let result = solve_dp_policy(&skewed, &config, DpFairness::Es).unwrap();
        let acc = result.outcome.accuracy;
        assert!(
            acc >= prev - 1e-9,
            "sweep not monotone at ε={eps}: {acc} after {prev}"
        );
        prev = acc;
        accs.push(acc);
    }
    assert_eq!(
        accs[0], 0.0,
        "accuracy must be zero at ε=0 on the skewed fixture"
    );
    assert!(*accs.last().unwrap() > 0.3);
    let induced = skewed.induced_binary_pmf().unwrap();
    let (_, nonprivate) = solve_es_policy(&induced, FairnessTarget::Es).unwrap();
    assert!(
        (accs.last().unwrap() - nonprivate.accuracy).abs() <= 1e-3,
        "ε=20 accuracy {} vs non-private {}",
        accs.last().unwrap(),
        nonprivate.accuracy
    );
    println!("acceptance 5 (DP residual ≤ 1e-9, feasibility-bound sufficiency, sweep shape): PASS");
}

/// Builds a score model satisfying the degenerate-outcome hypotheses: a
/// shared increasing per-bin qualification profile, a slightly better top
/// bin for one group, negligible top-bin mass, and near-equal qualified
/// base rates so the γ-ES search stays feasible.
fn degenerate_model(rng: &mut ChaCha8Rng, gamma: f64) -> ScoreModel<f64> {
    let n = rng.gen_range(4..9);
    let support: Vec<f64> = (0..n).map(|j| (j + 1) as f64 / n as f64).collect();
    let mut masses: Vec<f64> = (0..n)
        .map(|j| rng.gen_range(0.5..1.0) * (1.0 + (n - 1 - j) as f64))
        .collect();
    masses[n - 1] = gamma * rng.gen_range(0.02..0.08);
    let total: f64 = masses.iter().sum();
    for m in masses.iter_mut() {
        *m /= total;
    }
    let mut q: Vec<f64> = (0..n)
        .map(|j| 0.15 + 0.7 * j as f64 / (n - 1) as f64)
        .collect();
    q[n - 1] = 0.97;
    let boosted_group = rng.gen_range(0..2usize);
    let mut weights: [[Vec<f64>; 2]; 2] =
        [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]];
    for a in 0..2 {
        for j in 0..n {
            let mut qa = q[j];
            if j == n - 1 && a == boosted_group {
                qa = 0.99;
            }
            weights[a][1][j] = masses[j] * qa;
            weights[a][0][j] = masses[j] * (1.0 - qa);
        }
    }
    ScoreModel::from_weights(support, 0.5, weights).unwrap()
}

#[test]
fn acceptance_6_degenerate_outcome_theorems() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let gamma = 0.02;
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < 50 {
        attempts += 1;
        assert!(
            attempts < 300,
            "generator failed to satisfy the hypotheses often enough"
        );
        let model = degenerate_model(&mut rng, gamma);
        let eo = verify_degenerate_theorem(&model, Fairness::Eo, gamma).unwrap();
        let sp = verify_degenerate_theorem(&model, Fairness::Sp, gamma).unwrap();
        if !(eo.hypotheses_hold && sp.hypotheses_hold) {
            continue;
        }
        accepted += 1;
        assert_eq!(
            eo.search_matches_theorem,
            Some(true),
            "γ-EO search kept both groups on a model satisfying the hypotheses"
        );
        assert_eq!(sp.search_matches_theorem, Some(true));

        let es_config = SearchConfig::new(Fairness::Es, gamma, None).unwrap();
        let (_, es_outcome) = search_thresholds(&model, &es_config).unwrap();
        assert!(es_outcome.disparity <= gamma);
        let both_have_qualified = model.p_ay(0, 1) > 0.0 && model.p_ay(1, 1) > 0.0;
        if both_have_qualified {
            assert!(
                es_outcome.p_e0 > 0.0 && es_outcome.p_e1 > 0.0,
                "γ-ES rejected a group entirely: {es_outcome:?}"
            );
        }
    }
    assert!(
        accepted * 2 >= attempts,
        "hypothesis-satisfying construction should not be rare ({accepted}/{attempts})"
    );
    println!("acceptance 6 (degenerate EO/SP vs inclusive ES on {accepted} models): PASS");
}

#[test]
fn acceptance_7_uniform_closed_forms() {
    // Separated supports: unqualified on [0, b_a], qualified on [c_a, 1].
    let (c0, b0, c1, b1, p01, p11) = (0.3f64, 0.6, 0.4, 0.7, 0.2, 0.3);
    let p00 = (1.0 - p01 - p11) * 0.5;
    let p10 = 1.0 - p01 - p11 - p00;
    let case1 = ContinuousProblem {
        dist: [
            [
                ContinuousDist::uniform(0.0, b0).unwrap(),
                ContinuousDist::uniform(c0, 1.0).unwrap(),
            ],
            [
                ContinuousDist::uniform(0.0, b1).unwrap(),
                ContinuousDist::uniform(c1, 1.0).unwrap(),
            ],
        ],
        prior: [[p00, p01], [p10, p11]],
    };
    let sol = continuous_reduction(&case1).unwrap();
    let tau1_closed = 1.0 - (p01 / p11) * ((1.0 - c1) / (1.0 - c0)) * (1.0 - b0);
    assert!((sol.tau0 - b0).abs() <= 1e-6);
    assert!((sol.tau1 - tau1_closed).abs() <= 1e-6);
    assert!((sol.accuracy - 1.0).abs() <= 1e-6);
    assert!(sol.es_residual <= 1e-6);

    // Overlapping supports: the whole matched line is optimal.
    let (b0, c0, b1, c1) = (0.1f64, 0.3, 0.2, 0.5);
    let (p01, p11, p00, p10) = (0.2, 0.3, 0.25, 0.25);
    let case2 = ContinuousProblem {
        dist: [
            [
                ContinuousDist::uniform(b0, 1.0).unwrap(),
                ContinuousDist::uniform(c0, 1.0).unwrap(),
            ],
            [
                ContinuousDist::uniform(b1, 1.0).unwrap(),
                ContinuousDist::uniform(c1, 1.0).unwrap(),
            ],
        ],
        prior: [[p00, p01], [p10, p11]],
    };
    let sol = continuous_reduction(&case2).unwrap();
    let k = (p01 / p11) * (1.0 - c1) / (1.0 - c0);
    let closed = (p01 / (1.0 - c0) + p11 * k / (1.0 - c1))
        / (p01 / (1.0 - c0) + p00 / (1.0 - b0) + p10 * k / (1.0 - b1) + p11 * k / (1.0 - c1));
    assert!((sol.accuracy - closed).abs() <= 1e-6);
    assert!((sol.tau0 - c0).abs() <= 1e-6);
    assert!((sol.tau1 - (1.0 - (p01 / p11) * (1.0 - c1))).abs() <= 1e-6);
    assert!(sol.es_residual <= 1e-6);
    println!("acceptance 7 (uniform closed forms vs 1e-4 grid): PASS");
}

#[test]
fn acceptance_8_randomized_response_privacy_ratio() {
    let n = 1_000_000u64;
    for (k, eps) in [0.0, 0.5, 1.0, 2.0, 3.0f64.ln()].into_iter().enumerate() {
        let config = DpConfig::new(eps).unwrap();
        let mut counts = [[0u64; 2]; 2]; // [true a][reported ã]
        let mut rng = ChaCha8Rng::seed_from_u64(808 + k as u64);
        for a in 0..2u8 {
            for _ in 0..n {
                let reported = randomize_response(a, &config, &mut rng);
                counts[a as usize][reported as usize] += 1;
            }
        }
        let p_hat = |a: usize, b: usize| counts[a][b] as f64 / n as f64;
        let rel_se = |p: f64| ((1.0 - p) / (p * n as f64)).sqrt();
        for b in 0..2 {
            for a in 0..2 {
                let num = p_hat(a, b);
                let den = p_hat(1 - a, b);
                let delta = 3.0 * (rel_se(num) + rel_se(den));
                assert!(
                    num / den <= eps.exp() * (1.0 + delta),
                    "ε={eps}: ratio {} exceeds e^ε(1+δ) with δ={delta}",
                    num / den
                );
            }
        }
    }
    println!("acceptance 8 (randomized-response ratio within e^ε at 3σ): PASS");
}

#[test]
fn acceptance_9_identity_and_nesting_invariants() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);

    // Partition identity across all three evaluator families.
    for _ in 0..50 {
        let pmf = random_pmf(&mut rng);
        let policy = random_policy(&mut rng, 0.05);
        let out = evaluate_policy(&pmf, &policy).unwrap();
        assert!((out.p_e0 + out.p_e1 - out.accuracy).abs() <= 1e-12);

        let model = random_counterfactual(&mut rng);
        let config = DpConfig::new(rng.gen_range(0.0..5.0)).unwrap();
        let mut beta = [[0.0; 2]; 2];
        for row in beta.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.gen_range(0.05..1.0);
            }
        }
        let out = fairsel::dp::evaluate_dp_policy(&model, &DpPolicy::new(beta).unwrap(), &config)
            .unwrap();
        assert!((out.p_e0 + out.p_e1 - out.accuracy).abs() <= 1e-12);

        let score = random_score_model(&mut rng, 7);
        let support = score.support().to_vec();
        let pair = ThresholdPair {
            tau0: Threshold::At(support[rng.gen_range(0..4)]),
            tau1: Threshold::At(support[rng.gen_range(0..4)]),
        };
        let out = fairsel::threshold::evaluate_thresholds(&score, &pair).unwrap();
        assert!((out.p_e0 + out.p_e1 - out.accuracy).abs() <= 1e-12);
    }

    // Degree-0 homogeneity of the objective in the acceptance table.
    for _ in 0..50 {
        let pmf = random_pmf(&mut rng);
        let policy = random_policy(&mut rng, 0.2);
        let base = evaluate_policy(&pmf, &policy).unwrap();
        let t = rng.gen_range(0.1..1.0);
        let mut scaled = policy.alpha;
        for row in scaled.iter_mut() {
            for v in row.iter_mut() {
                *v *= t;
            }
        }
        let out = evaluate_policy(&pmf, &PostProcessPolicy::new(scaled).unwrap()).unwrap();
        assert!(
            (out.accuracy - base.accuracy).abs() <= 1e-12,
            "homogeneity violated: {} vs {}",
            out.accuracy,
            base.accuracy
        );
    }

    // Feasible-set nesting in γ and under the time constraint.
    for _ in 0..30 {
        let model = random_score_model(&mut rng, 8);
        let loose = SearchConfig::new(Fairness::Es, 0.05, None).unwrap();
        let tight = SearchConfig::new(Fairness::Es, 0.01, None).unwrap();
        let timed = SearchConfig::new(
            Fairness::Es,
            0.05,
            Some(TimeConstraint {
                horizon: 10,
                psi: 0.5,
            }),
        )
        .unwrap();
        let loose_acc = search_thresholds(&model, &loose).map(|(_, o)| o.accuracy);
        if let Ok(acc) = search_thresholds(&model, &tight).map(|(_, o)| o.accuracy) {
            assert!(acc <= *loose_acc.as_ref().unwrap() + 1e-12);
        }
        if let Ok(acc) = search_thresholds(&model, &timed).map(|(_, o)| o.accuracy) {
            assert!(acc <= *loose_acc.as_ref().unwrap() + 1e-12);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 9 took {elapsed:.1}s");
    println!("acceptance 9 (partition, homogeneity, nesting invariants): PASS ({elapsed:.1}s)");
}

/// The shipped FICO-style table survives load → emit → load bit-exactly:
/// identical bytes and an identical model.
#[test]
fn fico_fixture_round_trips_bit_exactly() {
    let path = data_path("fico_cdf.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let model = fairsel::ingest::parse_fico_cdf::<f64>(&text, FICO_PRIOR).unwrap();
    let emitted = fairsel::ingest::emit_fico_cdf(&model);
    assert_eq!(emitted, text, "emitted fixture differs from the file");
    let again = fairsel::ingest::parse_fico_cdf::<f64>(&emitted, FICO_PRIOR).unwrap();
    assert_eq!(model, again);
    println!("FICO fixture round-trip: PASS");
}

/// Stopping times of the uniform passthrough pipeline follow Geometric(1/2):
/// Pearson chi-square with bins pooled to expected count ≥ 5, 1% level.
#[test]
fn stopping_time_matches_geometric_distribution() {
    let pmf = fairsel::BinaryJointPmf64::uniform();
    let policy = PostProcessPolicy::passthrough();
    let pipeline = Pipeline::Binary {
        pmf: &pmf,
        policy: &policy,
    };
    let trials = 1_000_000u64;
    let config = SimConfig::new(trials, 77, 1, 1_000_000).unwrap();
    let result = simulate(&pipeline, &config).unwrap();

    // Pool histogram bins so every expected count is at least 5.
    let n = trials as f64;
    let mut observed: Vec<f64> = Vec::new();
    let mut expected: Vec<f64> = Vec::new();
    let mut tail_obs = 0.0;
    let mut tail_exp = 0.0;
    let max_step = *result.steps_histogram.keys().max().unwrap();
    for step in 1..=max_step {
        let obs = *result.steps_histogram.get(&step).unwrap_or(&0) as f64;
        let exp = n * 0.5f64.powi(step as i32);
        if exp >= 5.0 && tail_exp == 0.0 {
            observed.push(obs);
            expected.push(exp);
        } else {
            tail_obs += obs;
            tail_exp += exp;
        }
    }
    tail_exp += n * 0.5f64.powi(max_step as i32); // everything beyond the sample max
    observed.push(tail_obs);
    expected.push(tail_exp);
    let chi2: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = (observed.len() - 1) as f64;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.99);
    assert!(
        chi2 <= critical,
        "chi-square {chi2:.2} exceeds the 1% critical value {critical:.2} (dof {dof})"
    );
    println!("stopping-time geometric goodness of fit: PASS (chi2 {chi2:.1} ≤ {critical:.1})");
}
