//! Joint tables over (group, label, counterfactual classifier output),
//! one per counterfactual sensitive input. This is the population model the
//! privacy pipeline works from: decisions consult `r(X, Ã)` where `Ã` is the
//! noised attribute, so the model must describe the classifier output under
//! both inputs.

use crate::distributions::binary::BinaryJointPmf;
use crate::distributions::score::ScoreModel;
use crate::error::{Error, Result};
use crate::real::{consistency_tolerance, sum_tolerance, Real};

/// For each counterfactual input `ã ∈ {0,1}`, the joint table
/// `t[ã][a][y][j] = Pr{A=a, Y=y, r(X,ã)=ρ_j}` over a shared output support.
///
/// For the binary pipeline the support is `{0, 1}`; the differentially
/// private threshold search uses a full score support.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualModel<T> {
    support: Vec<T>,
    tables: [[[Vec<T>; 2]; 2]; 2],
}

impl<T: Real> CounterfactualModel<T> {
    pub fn new(support: Vec<T>, tables: [[[Vec<T>; 2]; 2]; 2]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty output support".into()));
        }
        for w in support.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidDistribution(
                    "output support not strictly increasing".into(),
                ));
            }
        }
        let n = support.len();
        for (ta, table) in tables.iter().enumerate() {
            let mut total = T::zero();
            for row in table.iter().flatten() {
                if row.len() != n {
                    return Err(Error::InvalidDistribution(
                        "table width does not match support".into(),
                    ));
                }
                for &c in row {
                    if !c.is_finite() || c < T::zero() {
                        return Err(Error::InvalidDistribution(format!(
                            "counterfactual table {ta} has a negative or non-finite cell"
                        )));
                    }
                    total = total + c;
                }
            }
            if (total - T::one()).abs() > sum_tolerance::<T>() {
                return Err(Error::InvalidDistribution(format!(
                    "counterfactual table {ta} sums to {total}"
                )));
            }
        }
        let model = Self { support, tables };
        // The two tables describe one population; their (A, Y) marginals
        // must agree. Disagreement is surfaced, never silently repaired.
        let tol = consistency_tolerance::<T>();
        for a in 0..2 {
            for y in 0..2 {
                let m0 = model.p_ay_from(0, a, y);
                let m1 = model.p_ay_from(1, a, y);
                if (m0 - m1).abs() > tol {
                    return Err(Error::InvalidDistribution(format!(
                        "counterfactual tables disagree on Pr{{A={a},Y={y}}}: {m0} vs {m1}"
                    )));
                }
            }
        }
        Ok(model)
    }

    fn p_ay_from(&self, ta: usize, a: usize, y: usize) -> T {
        self.tables[ta][a][y].iter().copied().sum()
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    /// Number of classifier output values.
    pub fn output_len(&self) -> usize {
        self.support.len()
    }

    /// True when the classifier output is binary (`{ŷ=0, ŷ=1}`).
    pub fn is_binary(&self) -> bool {
        self.support.len() == 2
    }

    /// `Pr{A=a, Y=y, r(X,ã)=ρ_j}`.
    pub fn joint(&self, a_tilde: usize, a: usize, y: usize, j: usize) -> T {
        self.tables[a_tilde][a][y][j]
    }

    /// `Pr{A=a, Y=y}` (taken from the ã=0 table; the constructor verified
    /// both tables agree).
    pub fn p_ay(&self, a: usize, y: usize) -> T {
        self.p_ay_from(0, a, y)
    }

    /// `Pr{A=a}`.
    pub fn p_a(&self, a: usize) -> T {
        self.p_ay(a, 0) + self.p_ay(a, 1)
    }

    /// `Pr{r(X,ã)=ρ_j | A=a}`, or zero when the group has no mass.
    pub fn p_r_given_a(&self, a_tilde: usize, j: usize, a: usize) -> T {
        let pa = self.p_a(a);
        if pa <= T::zero() {
            return T::zero();
        }
        (self.tables[a_tilde][a][0][j] + self.tables[a_tilde][a][1][j]) / pa
    }

    /// `Pr{A=a, r(X,ã)=ρ_j}`.
    pub fn p_a_and_r(&self, a_tilde: usize, a: usize, j: usize) -> T {
        self.tables[a_tilde][a][0][j] + self.tables[a_tilde][a][1][j]
    }

    /// Suffix tail `Pr{r(X,ã) ≥ ρ_j, A=a, Y=y}` summed from index `j` up;
    /// `j = output_len()` gives zero (the empty acceptance region).
    pub fn tail_joint(&self, a_tilde: usize, a: usize, y: usize, j: usize) -> T {
        self.tables[a_tilde][a][y][j..].iter().copied().sum()
    }

    /// The joint PMF of `(A, R, Y)` when decisions see the true attribute,
    /// i.e. `R = r(X, A)`. Requires a binary output.
    pub fn induced_binary_pmf(&self) -> Result<BinaryJointPmf<T>> {
        if !self.is_binary() {
            return Err(Error::Precondition(
                "induced binary PMF needs a binary classifier output".into(),
            ));
        }
        let mut cells = [[[T::zero(); 2]; 2]; 2];
        for a in 0..2 {
            for y in 0..2 {
                for r in 0..2 {
                    cells[a][r][y] = self.tables[a][a][y][r];
                }
            }
        }
        BinaryJointPmf::new(cells)
    }

    /// The score model seen by a non-private decision maker (`R = r(X, A)`).
    pub fn induced_score_model(&self) -> Result<ScoreModel<T>> {
        let n = self.support.len();
        let mut weights: [[Vec<T>; 2]; 2] = [
            [vec![T::zero(); n], vec![T::zero(); n]],
            [vec![T::zero(); n], vec![T::zero(); n]],
        ];
        for a in 0..2 {
            let pa = self.p_a(a);
            for y in 0..2 {
                for j in 0..n {
                    weights[a][y][j] = if pa > T::zero() {
                        self.tables[a][a][y][j] / pa
                    } else if y == 0 && j == 0 {
                        T::one()
                    } else {
                        T::zero()
                    };
                }
            }
        }
        ScoreModel::from_weights(self.support.clone(), self.p_a(0), weights)
    }
}

/// Empirical estimate from `(a, y, r0, r1)` rows: the classifier output is
/// recorded under both counterfactual inputs for every sampled individual.
pub fn estimate_counterfactual_model<T: Real>(
    samples: &[(u8, u8, T, T)],
    support: &[T],
) -> Result<CounterfactualModel<T>> {
    estimate_counterfactual_model_smoothed(samples, support, T::zero())
}

/// Estimate with an additive pseudo-count per table cell (`0` = plain
/// frequencies). Smoothing keeps the solver's pinned
/// normalization coefficient positive when rare cells are unobserved.
pub fn estimate_counterfactual_model_smoothed<T: Real>(
    samples: &[(u8, u8, T, T)],
    support: &[T],
    pseudo_count: T,
) -> Result<CounterfactualModel<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if pseudo_count < T::zero() {
        return Err(Error::Precondition(
            "pseudo-count must be non-negative".into(),
        ));
    }
    let n = support.len();
    let mut counts: [[[Vec<u64>; 2]; 2]; 2] =
        std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| vec![0u64; n])));
    let locate = |r: T, row: usize| -> Result<usize> {
        support
            .iter()
            .position(|&s| s == r)
            .ok_or_else(|| Error::InputRow {
                row,
                message: format!("classifier output {r} is not in the declared support"),
            })
    };
    for (i, &(a, y, r0, r1)) in samples.iter().enumerate() {
        if a > 1 || y > 1 {
            return Err(Error::InputRow {
                row: i,
                message: format!("a = {a}, y = {y} must be binary"),
            });
        }
        let j0 = locate(r0, i)?;
        let j1 = locate(r1, i)?;
        counts[0][a as usize][y as usize][j0] += 1;
        counts[1][a as usize][y as usize][j1] += 1;
    }
    let cells_per_table = T::from_usize(4 * n).unwrap();
    let denom = T::from_u64(samples.len() as u64).unwrap() + pseudo_count * cells_per_table;
    let mut tables: [[[Vec<T>; 2]; 2]; 2] = [
        [
            [vec![T::zero(); n], vec![T::zero(); n]],
            [vec![T::zero(); n], vec![T::zero(); n]],
        ],
        [
            [vec![T::zero(); n], vec![T::zero(); n]],
            [vec![T::zero(); n], vec![T::zero(); n]],
        ],
    ];
    for ta in 0..2 {
        for a in 0..2 {
            for y in 0..2 {
                for j in 0..n {
                    tables[ta][a][y][j] =
                        (T::from_u64(counts[ta][a][y][j]).unwrap() + pseudo_count) / denom;
                }
            }
        }
    }
    // With smoothing the two tables' (A, Y) marginals stay equal because the
    // same pseudo-count lands on both sides.
    CounterfactualModel::new(support.to_vec(), tables)
}
