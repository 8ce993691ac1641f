//! Shared generators and independent oracles for the acceptance suite.

#![allow(clippy::needless_range_loop)] // index loops over semantic binary axes

use fairsel::distributions::{BinaryJointPmf, CounterfactualModel, ScoreModel};
use fairsel::ingest::{load, DataFormat, DatasetManifest, LoadedModel};
use fairsel::lp::{enumerate_vertices, LpProblem};
use fairsel::postprocess::PostProcessPolicy;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FICO_PRIOR: f64 = 133165.0 / 151439.0;

pub fn data_path(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load_fico() -> ScoreModel<f64> {
    let manifest = DatasetManifest {
        group_prior: Some(FICO_PRIOR),
        ..DatasetManifest::new(data_path("fico_cdf.csv"), DataFormat::FicoCdf)
    };
    match load(&manifest).expect("fico fixture loads") {
        LoadedModel::Score(m) => m,
        other => panic!("unexpected model {other:?}"),
    }
}

pub fn load_dp_fixture(name: &str) -> CounterfactualModel<f64> {
    let manifest = DatasetManifest::<f64>::new(data_path(name), DataFormat::DpSamples);
    match load(&manifest).expect("dp fixture loads") {
        LoadedModel::Counterfactual(m) => m,
        other => panic!("unexpected model {other:?}"),
    }
}

/// Random joint PMF with every cell at least 0.0125.
pub fn random_pmf(rng: &mut ChaCha8Rng) -> BinaryJointPmf<f64> {
    let mut cells = [[[0.0f64; 2]; 2]; 2];
    let mut total = 0.0;
    for a in 0..2 {
        for r in 0..2 {
            for y in 0..2 {
                cells[a][r][y] = rng.gen_range(0.1..1.0);
                total += cells[a][r][y];
            }
        }
    }
    for a in 0..2 {
        for r in 0..2 {
            for y in 0..2 {
                cells[a][r][y] /= total;
            }
        }
    }
    BinaryJointPmf::new(cells).unwrap()
}

pub fn random_policy(rng: &mut ChaCha8Rng, lo: f64) -> PostProcessPolicy<f64> {
    let mut alpha = [[0.0; 2]; 2];
    for row in alpha.iter_mut() {
        for v in row.iter_mut() {
            *v = rng.gen_range(lo..1.0);
        }
    }
    PostProcessPolicy::new(alpha).unwrap()
}

/// Random binary-output counterfactual model with strictly positive cells
/// and matching (A, Y) marginals across the two tables.
pub fn random_counterfactual(rng: &mut ChaCha8Rng) -> CounterfactualModel<f64> {
    let mut marg = [[0.0f64; 2]; 2];
    let mut total = 0.0;
    for a in 0..2 {
        for y in 0..2 {
            marg[a][y] = rng.gen_range(0.05..1.0);
            total += marg[a][y];
        }
    }
    for a in 0..2 {
        for y in 0..2 {
            marg[a][y] /= total;
        }
    }
    let mut tables: [[[Vec<f64>; 2]; 2]; 2] = Default::default();
    for table in tables.iter_mut() {
        for (a, row) in table.iter_mut().enumerate() {
            for (y, cells) in row.iter_mut().enumerate() {
                let split = rng.gen_range(0.05..0.95);
                *cells = vec![marg[a][y] * (1.0 - split), marg[a][y] * split];
            }
        }
    }
    CounterfactualModel::new(vec![0.0, 1.0], tables).unwrap()
}

/// Random score model over an `n`-point support with positive mass in every
/// stratum.
pub fn random_score_model(rng: &mut ChaCha8Rng, n: usize) -> ScoreModel<f64> {
    let support: Vec<f64> = (0..n).map(|j| (j + 1) as f64 / (n + 1) as f64).collect();
    let p_a0 = rng.gen_range(0.25..0.75);
    let mut weights: [[Vec<f64>; 2]; 2] =
        [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]];
    for group in weights.iter_mut() {
        let mut total = 0.0;
        for row in group.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.gen_range(0.05..1.0);
                total += *v;
            }
        }
        for row in group.iter_mut() {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
    }
    ScoreModel::from_weights(support, p_a0, weights).unwrap()
}

/// Optimal accuracy by vertex enumeration of the fairness LP: independent
/// route against the simplex solve.
pub fn vertex_oracle_accuracy(pmf: &BinaryJointPmf<f64>) -> Option<f64> {
    let min_cell = pmf.min_p_ar();
    let objective = vec![
        pmf.p(0, 0, 1),
        pmf.p(0, 1, 1),
        pmf.p(1, 0, 1),
        pmf.p(1, 1, 1),
    ];
    let es_row = vec![
        pmf.p(0, 0, 1),
        pmf.p(0, 1, 1),
        -pmf.p(1, 0, 1),
        -pmf.p(1, 1, 1),
    ];
    let norm_row = vec![
        pmf.p_ar(0, 0),
        pmf.p_ar(0, 1),
        pmf.p_ar(1, 0),
        pmf.p_ar(1, 1),
    ];
    let problem = LpProblem::new(
        objective,
        vec![(es_row, 0.0), (norm_row, min_cell)],
        vec![(0.0, 1.0); 4],
    )
    .unwrap();
    let vertices = enumerate_vertices(&problem);
    vertices
        .iter()
        .map(|(_, obj)| obj / min_cell)
        .fold(None, |best, v| Some(best.map_or(v, |b: f64| b.max(v))))
}

/// Brute-force maximum of the fractional accuracy objective over a 0.01
/// grid on three acceptance probabilities, with the fourth solved from the
/// fairness equality (residual 0 by construction).
pub fn grid_bruteforce_accuracy(pmf: &BinaryJointPmf<f64>) -> Option<f64> {
    let p001 = pmf.p(0, 0, 1);
    let p011 = pmf.p(0, 1, 1);
    let p101 = pmf.p(1, 0, 1);
    let p111 = pmf.p(1, 1, 1);
    let par = [
        pmf.p_ar(0, 0),
        pmf.p_ar(0, 1),
        pmf.p_ar(1, 0),
        pmf.p_ar(1, 1),
    ];
    let steps = 100usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let mut best: Option<f64> = None;
    for &a00 in &grid {
        for &a01 in &grid {
            let qualified0 = a00 * p001 + a01 * p011;
            let denom01 = a00 * par[0] + a01 * par[1];
            for &a10 in &grid {
                let a11 = (qualified0 - a10 * p101) / p111;
                if !(0.0..=1.0).contains(&a11) {
                    continue;
                }
                let denom = denom01 + a10 * par[2] + a11 * par[3];
                if denom <= 1e-12 {
                    continue;
                }
                let acc = 2.0 * qualified0 / denom;
                if best.is_none_or(|b| acc > b) {
                    best = Some(acc);
                }
            }
        }
    }
    best
}
