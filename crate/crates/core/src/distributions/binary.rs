//! Joint distribution over (sensitive attribute, classifier output, label)
//! for binary-classifier pipelines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{sum4, sum_tolerance, Real};

/// Full joint PMF over `(A, R, Y) ∈ {0,1}³`.
///
/// Cells are indexed `[a][r][y]`. All marginals are derived on demand from
/// the eight cells; nothing is stored twice.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryJointPmf<T> {
    cells: [[[T; 2]; 2]; 2],
}

impl<T: Real> BinaryJointPmf<T> {
    /// Validates and builds a PMF from raw cells.
    ///
    /// Cells must be non-negative and sum to one within the construction
    /// tolerance; drift below the tolerance is renormalized away, larger
    /// drift is an error.
    pub fn new(cells: [[[T; 2]; 2]; 2]) -> Result<Self> {
        for a in 0..2 {
            for r in 0..2 {
                for y in 0..2 {
                    let c = cells[a][r][y];
                    if !c.is_finite() || c < T::zero() {
                        return Err(Error::InvalidDistribution(format!(
                            "cell ({a},{r},{y}) = {c} is negative or non-finite"
                        )));
                    }
                }
            }
        }
        let mut pmf = Self { cells };
        let total = pmf.total();
        let drift = (total - T::one()).abs();
        if drift > sum_tolerance::<T>() {
            return Err(Error::InvalidDistribution(format!(
                "cells sum to {total}, drift {drift} exceeds tolerance"
            )));
        }
        if drift > T::zero() {
            for a in 0..2 {
                for r in 0..2 {
                    for y in 0..2 {
                        pmf.cells[a][r][y] = pmf.cells[a][r][y] / total;
                    }
                }
            }
        }
        Ok(pmf)
    }

    /// The uniform PMF (each cell 1/8).
    pub fn uniform() -> Self {
        let c = T::of(0.125);
        Self {
            cells: [[[c; 2]; 2]; 2],
        }
    }

    /// Pr{A=a, R=r, Y=y}.
    pub fn p(&self, a: usize, r: usize, y: usize) -> T {
        self.cells[a][r][y]
    }

    /// Pr{A=a, R=r}.
    pub fn p_ar(&self, a: usize, r: usize) -> T {
        self.cells[a][r][0] + self.cells[a][r][1]
    }

    /// Pr{R=r, Y=y, A=a} (same cell as `p`, in the ordering downstream
    /// formulas are written in).
    pub fn p_rya(&self, r: usize, y: usize, a: usize) -> T {
        self.cells[a][r][y]
    }

    /// Pr{A=a, Y=y}.
    pub fn p_ay(&self, a: usize, y: usize) -> T {
        self.cells[a][0][y] + self.cells[a][1][y]
    }

    /// Pr{A=a}.
    pub fn p_a(&self, a: usize) -> T {
        self.p_ar(a, 0) + self.p_ar(a, 1)
    }

    /// Pr{R=r}.
    pub fn p_r(&self, r: usize) -> T {
        self.p_ar(0, r) + self.p_ar(1, r)
    }

    /// Pr{Y=y}.
    pub fn p_y(&self, y: usize) -> T {
        sum4(
            self.cells[0][0][y],
            self.cells[0][1][y],
            self.cells[1][0][y],
            self.cells[1][1][y],
        )
    }

    /// Smallest of the four `Pr{A=a, R=r}` masses; the post-processing LP
    /// pins its per-step acceptance probability to this value.
    pub fn min_p_ar(&self) -> T {
        let mut m = self.p_ar(0, 0);
        for (a, r) in [(0, 1), (1, 0), (1, 1)] {
            m = m.min(self.p_ar(a, r));
        }
        m
    }

    /// Sum of all eight cells, associated identically to the marginal sums.
    pub fn total(&self) -> T {
        sum4(
            self.p_ar(0, 0),
            self.p_ar(0, 1),
            self.p_ar(1, 0),
            self.p_ar(1, 1),
        )
    }
}

fn check_bit(value: u8, what: &str, index: usize) -> Result<()> {
    if value > 1 {
        return Err(Error::InputRow {
            row: index,
            message: format!("{what} = {value} is not binary"),
        });
    }
    Ok(())
}

/// Plug-in (empirical frequency) estimate of the joint PMF from
/// `(a, r, y)` sample triples. No smoothing.
pub fn estimate_binary_pmf<T: Real>(samples: &[(u8, u8, u8)]) -> Result<BinaryJointPmf<T>> {
    estimate_binary_pmf_smoothed(samples, T::zero())
}

/// Frequency estimate with an additive pseudo-count on every cell.
///
/// `pseudo_count = 0` is the plain maximum-likelihood estimator. A positive
/// pseudo-count guarantees strictly positive cells, which the post-processing
/// LP needs when the raw data leaves a cell empty.
pub fn estimate_binary_pmf_smoothed<T: Real>(
    samples: &[(u8, u8, u8)],
    pseudo_count: T,
) -> Result<BinaryJointPmf<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if pseudo_count < T::zero() {
        return Err(Error::Precondition(
            "pseudo-count must be non-negative".into(),
        ));
    }
    let mut counts = [[[0u64; 2]; 2]; 2];
    for (i, &(a, r, y)) in samples.iter().enumerate() {
        check_bit(a, "a", i)?;
        check_bit(r, "r", i)?;
        check_bit(y, "y", i)?;
        counts[a as usize][r as usize][y as usize] += 1;
    }
    let denom = T::from_u64(samples.len() as u64).unwrap() + T::of(8.0) * pseudo_count;
    let mut cells = [[[T::zero(); 2]; 2]; 2];
    for a in 0..2 {
        for r in 0..2 {
            for y in 0..2 {
                cells[a][r][y] = (T::from_u64(counts[a][r][y]).unwrap() + pseudo_count) / denom;
            }
        }
    }
    BinaryJointPmf::new(cells)
}

/// JSON mirror with the wire field names (`a0_r0_y0`, ...).
#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct BinaryJointPmfJson<T> {
    pub p: BinaryCellsJson<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct BinaryCellsJson<T> {
    pub a0_r0_y0: T,
    pub a0_r0_y1: T,
    pub a0_r1_y0: T,
    pub a0_r1_y1: T,
    pub a1_r0_y0: T,
    pub a1_r0_y1: T,
    pub a1_r1_y0: T,
    pub a1_r1_y1: T,
}

impl<T: Real> BinaryJointPmf<T> {
    pub fn to_json(&self) -> BinaryJointPmfJson<T> {
        BinaryJointPmfJson {
            p: BinaryCellsJson {
                a0_r0_y0: self.p(0, 0, 0),
                a0_r0_y1: self.p(0, 0, 1),
                a0_r1_y0: self.p(0, 1, 0),
                a0_r1_y1: self.p(0, 1, 1),
                a1_r0_y0: self.p(1, 0, 0),
                a1_r0_y1: self.p(1, 0, 1),
                a1_r1_y0: self.p(1, 1, 0),
                a1_r1_y1: self.p(1, 1, 1),
            },
        }
    }

    pub fn from_json(json: &BinaryJointPmfJson<T>) -> Result<Self> {
        let c = &json.p;
        Self::new([
            [[c.a0_r0_y0, c.a0_r0_y1], [c.a0_r1_y0, c.a0_r1_y1]],
            [[c.a1_r0_y0, c.a1_r0_y1], [c.a1_r1_y0, c.a1_r1_y1]],
        ])
    }
}
