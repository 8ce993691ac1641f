//! Discrete qualification-score model: per-group score distributions split
//! by qualification state, built either from samples or from a FICO-style
//! CDF table.

use crate::error::{Error, Result};
use crate::real::{sum_tolerance, Real};

/// Score-based population model over a finite, strictly increasing support.
///
/// Internally stores, per group `a`, the within-group joint weights
/// `w[a][y][j] = Pr{Y=y, R=ρ_j | A=a}`; the priors `P_{A,Y}` and the
/// conditional score PMFs of the public contract are derived views so the
/// two can never disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreModel<T> {
    support: Vec<T>,
    p_a: [T; 2],
    weights: [[Vec<T>; 2]; 2],
}

/// One row of a FICO-style CDF table: per-group cumulative score
/// distribution and per-score non-default (qualification) rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfRow<T> {
    pub score: T,
    /// `Pr{R ≤ score | A=a}` for a = 0, 1.
    pub cdf: [T; 2],
    /// `Pr{Y=1 | R=score, A=a}` for a = 0, 1.
    pub nondefault: [T; 2],
}

fn validate_support<T: Real>(support: &[T]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::InvalidDistribution("empty score support".into()));
    }
    for w in support.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidDistribution(format!(
                "support not strictly increasing at {} .. {}",
                w[0], w[1]
            )));
        }
    }
    if support.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidDistribution(
            "non-finite support value".into(),
        ));
    }
    Ok(())
}

impl<T: Real> ScoreModel<T> {
    /// Builds a model from within-group joint weights `Pr{Y=y, R=ρ_j | A=a}`
    /// and the group prior `Pr{A=0}`.
    pub fn from_weights(support: Vec<T>, p_a0: T, weights: [[Vec<T>; 2]; 2]) -> Result<Self> {
        validate_support(&support)?;
        if !(p_a0 >= T::zero() && p_a0 <= T::one()) {
            return Err(Error::InvalidDistribution(format!(
                "group prior {p_a0} outside [0,1]"
            )));
        }
        let n = support.len();
        for a in 0..2 {
            let mut group_total = T::zero();
            for y in 0..2 {
                if weights[a][y].len() != n {
                    return Err(Error::InvalidDistribution(
                        "weight vector length does not match support".into(),
                    ));
                }
                for (j, &w) in weights[a][y].iter().enumerate() {
                    if !w.is_finite() || w < T::zero() {
                        return Err(Error::InvalidDistribution(format!(
                            "weight (a={a}, y={y}, j={j}) = {w} negative or non-finite"
                        )));
                    }
                }
                group_total = group_total + weights[a][y].iter().copied().sum();
            }
            let drift = (group_total - T::one()).abs();
            if drift > sum_tolerance::<T>() {
                return Err(Error::InvalidDistribution(format!(
                    "group {a} score weights sum to {group_total}"
                )));
            }
        }
        let mut model = Self {
            support,
            p_a: [p_a0, T::one() - p_a0],
            weights,
        };
        // Renormalize sub-tolerance drift per group.
        for a in 0..2 {
            let total: T = model.weights[a][0].iter().copied().sum::<T>()
                + model.weights[a][1].iter().copied().sum::<T>();
            if total != T::one() && total > T::zero() {
                for y in 0..2 {
                    for w in &mut model.weights[a][y] {
                        *w = *w / total;
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Pr{A=a}.
    pub fn p_a(&self, a: usize) -> T {
        self.p_a[a]
    }

    /// Prior Pr{A=a, Y=y}.
    pub fn p_ay(&self, a: usize, y: usize) -> T {
        self.p_a[a] * self.weights[a][y].iter().copied().sum()
    }

    /// Within-group joint weight Pr{Y=y, R=ρ_j | A=a}.
    pub fn weight(&self, a: usize, y: usize, j: usize) -> T {
        self.weights[a][y][j]
    }

    /// Conditional score PMF `Pr{R=ρ_j | A=a, Y=y}`, or `None` for an empty
    /// stratum (no mass on (a, y)).
    pub fn cond(&self, a: usize, y: usize) -> Option<Vec<T>> {
        let total: T = self.weights[a][y].iter().copied().sum();
        if total <= T::zero() {
            return None;
        }
        Some(self.weights[a][y].iter().map(|&w| w / total).collect())
    }

    /// True when stratum (a, y) holds no mass.
    pub fn is_empty_stratum(&self, a: usize, y: usize) -> bool {
        self.weights[a][y].iter().copied().sum::<T>() <= T::zero()
    }

    /// Group-conditional score mass `Pr{R=ρ_j | A=a}`.
    pub fn marginal_mass(&self, a: usize, j: usize) -> T {
        self.weights[a][0][j] + self.weights[a][1][j]
    }

    /// `Pr{R ≤ τ | A=a, Y=y}` as a right-continuous step function.
    pub fn cdf_given_ay(&self, a: usize, y: usize, tau: T) -> T {
        let stratum: T = self.weights[a][y].iter().copied().sum();
        if stratum <= T::zero() {
            return T::zero();
        }
        let mut acc = T::zero();
        for (j, &s) in self.support.iter().enumerate() {
            if s <= tau {
                acc = acc + self.weights[a][y][j];
            } else {
                break;
            }
        }
        acc / stratum
    }

    /// `Pr{R ≤ τ | A=a}`.
    pub fn cdf_given_a(&self, a: usize, tau: T) -> T {
        let mut acc = T::zero();
        for (j, &s) in self.support.iter().enumerate() {
            if s <= tau {
                acc = acc + self.marginal_mass(a, j);
            } else {
                break;
            }
        }
        acc
    }

    /// `Pr{R ≤ τ}`.
    pub fn cdf(&self, tau: T) -> T {
        self.p_a[0] * self.cdf_given_a(0, tau) + self.p_a[1] * self.cdf_given_a(1, tau)
    }

    /// Reconstructs the FICO-style CDF rows for this model. Zero-mass bins
    /// get a zero non-default rate.
    pub fn to_cdf_rows(&self) -> Vec<CdfRow<T>> {
        let mut rows = Vec::with_capacity(self.support.len());
        let mut cum = [T::zero(); 2];
        for j in 0..self.support.len() {
            let mut cdf = [T::zero(); 2];
            let mut q = [T::zero(); 2];
            for a in 0..2 {
                let mass = self.marginal_mass(a, j);
                cum[a] = cum[a] + mass;
                cdf[a] = cum[a];
                q[a] = if mass > T::zero() {
                    self.weights[a][1][j] / mass
                } else {
                    T::zero()
                };
            }
            rows.push(CdfRow {
                score: self.support[j],
                cdf,
                nondefault: q,
            });
        }
        rows
    }
}

/// Empirical estimate from `(a, y, r)` sample triples over a declared
/// support. Strata with no samples are left empty (flagged, zero prior).
pub fn estimate_score_model<T: Real>(
    samples: &[(u8, u8, T)],
    support: &[T],
) -> Result<ScoreModel<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    validate_support(support)?;
    let n = support.len();
    let mut counts = [
        [vec![0u64; n], vec![0u64; n]],
        [vec![0u64; n], vec![0u64; n]],
    ];
    let mut group_counts = [0u64; 2];
    for (i, &(a, y, r)) in samples.iter().enumerate() {
        if a > 1 || y > 1 {
            return Err(Error::InputRow {
                row: i,
                message: format!("a = {a}, y = {y} must be binary"),
            });
        }
        let j = support
            .iter()
            .position(|&s| s == r)
            .ok_or_else(|| Error::InputRow {
                row: i,
                message: format!("score {r} is not in the declared support"),
            })?;
        counts[a as usize][y as usize][j] += 1;
        group_counts[a as usize] += 1;
    }
    let total = T::from_u64(samples.len() as u64).unwrap();
    let p_a0 = T::from_u64(group_counts[0]).unwrap() / total;
    let mut weights: [[Vec<T>; 2]; 2] = [
        [vec![T::zero(); n], vec![T::zero(); n]],
        [vec![T::zero(); n], vec![T::zero(); n]],
    ];
    for a in 0..2 {
        if group_counts[a] == 0 {
            continue;
        }
        let denom = T::from_u64(group_counts[a]).unwrap();
        for y in 0..2 {
            for j in 0..n {
                weights[a][y][j] = T::from_u64(counts[a][y][j]).unwrap() / denom;
            }
        }
    }
    // A group with no samples at all would have zero total weight; park its
    // mass on y=0 at the lowest score so the group-sum invariant holds with
    // a zero group prior making it inert.
    for a in 0..2 {
        if group_counts[a] == 0 {
            weights[a][0][0] = T::one();
        }
    }
    ScoreModel::from_weights(support.to_vec(), p_a0, weights)
}

/// Builds a [`ScoreModel`] from a FICO-style table of per-group CDFs and
/// non-default rates, plus the group prior `Pr{A=0}`.
///
/// Bin masses come from differencing each CDF column; each bin's mass is
/// split into qualified/unqualified parts by the non-default rate.
pub fn score_model_from_cdf_table<T: Real>(
    rows: &[CdfRow<T>],
    group_prior: T,
) -> Result<ScoreModel<T>> {
    if rows.is_empty() {
        return Err(Error::InputFormat("empty CDF table".into()));
    }
    if !(group_prior > T::zero() && group_prior < T::one()) {
        return Err(Error::Precondition(format!(
            "group prior {group_prior} must lie strictly inside (0,1)"
        )));
    }
    let support: Vec<T> = rows.iter().map(|r| r.score).collect();
    validate_support(&support)?;
    let n = rows.len();
    let end_tol = T::of(1e-9).max(sum_tolerance::<T>());
    let mut weights: [[Vec<T>; 2]; 2] = [
        [vec![T::zero(); n], vec![T::zero(); n]],
        [vec![T::zero(); n], vec![T::zero(); n]],
    ];
    for a in 0..2 {
        let mut prev = T::zero();
        for (i, row) in rows.iter().enumerate() {
            let c = row.cdf[a];
            if !c.is_finite() || c < prev {
                return Err(Error::InputRow {
                    row: i,
                    message: format!("cdf_a{a} = {c} is not monotone non-decreasing"),
                });
            }
            let q = row.nondefault[a];
            if !(q >= T::zero() && q <= T::one()) {
                return Err(Error::InputRow {
                    row: i,
                    message: format!("nondefault_a{a} = {q} outside [0,1]"),
                });
            }
            let mass = c - prev;
            weights[a][1][i] = mass * q;
            weights[a][0][i] = mass * (T::one() - q);
            prev = c;
        }
        if (prev - T::one()).abs() > end_tol {
            return Err(Error::InputFormat(format!(
                "cdf_a{a} ends at {prev}, expected 1"
            )));
        }
    }
    ScoreModel::from_weights(support, group_prior, weights)
}
