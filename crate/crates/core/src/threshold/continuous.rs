//! One-variable reduction for continuous score distributions: the fairness
//! equality pins `τ1` as a function of `τ0`, and accuracy is maximized over
//! `τ0 ∈ [0,1]` by a dense grid in place of a black-box optimizer.

use crate::error::{Error, Result};
use crate::real::Real;

/// Grid step for the one-variable search.
pub const GRID_STEP: f64 = 1e-4;

/// A continuous score distribution on a sub-interval of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousDist<T> {
    Uniform { lo: T, hi: T },
}

impl<T: Real> ContinuousDist<T> {
    pub fn uniform(lo: T, hi: T) -> Result<Self> {
        if !(T::zero() <= lo && lo < hi && hi <= T::one()) {
            return Err(Error::ContinuousReduction(format!(
                "uniform support [{lo}, {hi}] must satisfy 0 ≤ lo < hi ≤ 1"
            )));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn cdf(&self, x: T) -> T {
        match *self {
            Self::Uniform { lo, hi } => {
                if x <= lo {
                    T::zero()
                } else if x >= hi {
                    T::one()
                } else {
                    (x - lo) / (hi - lo)
                }
            }
        }
    }

    /// Inverse CDF on `[0, 1]`; errors outside that range.
    pub fn inverse_cdf(&self, p: T) -> Result<T> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::ContinuousReduction(format!(
                "cannot invert the CDF at {p}"
            )));
        }
        match *self {
            Self::Uniform { lo, hi } => Ok(lo + p * (hi - lo)),
        }
    }
}

/// Continuous-score population: `dist[a][y]` is the score distribution of
/// stratum `(A=a, Y=y)` and `prior[a][y] = Pr{A=a, Y=y}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousProblem<T> {
    pub dist: [[ContinuousDist<T>; 2]; 2],
    pub prior: [[T; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousSolution<T> {
    pub tau0: T,
    pub tau1: T,
    pub accuracy: T,
    /// |p01·Pr{R≥τ0|0,1} - p11·Pr{R≥τ1|1,1}| at the returned pair.
    pub es_residual: T,
}

impl<T: Real> ContinuousProblem<T> {
    fn swapped(&self) -> Self {
        Self {
            dist: [self.dist[1], self.dist[0]],
            prior: [self.prior[1], self.prior[0]],
        }
    }

    fn accuracy(&self, tau0: T, tau1: T) -> Option<T> {
        let taus = [tau0, tau1];
        let mut qualified = T::zero();
        let mut accepted = T::zero();
        for a in 0..2 {
            for y in 0..2 {
                let tail = T::one() - self.dist[a][y].cdf(taus[a]);
                let mass = self.prior[a][y] * tail;
                accepted = accepted + mass;
                if y == 1 {
                    qualified = qualified + mass;
                }
            }
        }
        if accepted > T::zero() {
            Some(qualified / accepted)
        } else {
            None
        }
    }
}

/// Solves the fairness-constrained threshold problem for continuous scores.
///
/// With `p01 ≤ p11` (the other orientation is handled by swapping groups),
/// the equality `p01·(1-F01(τ0)) = p11·(1-F11(τ1))` determines
/// `τ1 = F11⁻¹(1 - (p01/p11)(1-F01(τ0)))`, and accuracy is maximized over a
/// `1e-4` grid in `τ0`. When a plateau of optima exists, the smallest `τ0`
/// on the grid is returned.
pub fn continuous_reduction<T: Real>(
    problem: &ContinuousProblem<T>,
) -> Result<ContinuousSolution<T>> {
    for row in &problem.prior {
        for &p in row {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::ContinuousReduction(format!(
                    "prior {p} outside [0,1]"
                )));
            }
        }
    }
    let p01 = problem.prior[0][1];
    let p11 = problem.prior[1][1];
    if !(p01 > T::zero() && p11 > T::zero()) {
        return Err(Error::ContinuousReduction(
            "both groups need qualified mass".into(),
        ));
    }
    if p01 > p11 {
        let sol = continuous_reduction(&problem.swapped())?;
        return Ok(ContinuousSolution {
            tau0: sol.tau1,
            tau1: sol.tau0,
            ..sol
        });
    }

    let ratio = p01 / p11;
    let steps = (T::one() / T::of(GRID_STEP)).to_usize().unwrap();
    let mut best: Option<(T, T, T)> = None;
    for k in 0..=steps {
        let tau0 = T::of(GRID_STEP) * T::from_usize(k).unwrap();
        let matched = T::one() - ratio * (T::one() - problem.dist[0][1].cdf(tau0));
        let tau1 = problem.dist[1][1].inverse_cdf(matched)?;
        let Some(acc) = problem.accuracy(tau0, tau1) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((_, _, bacc)) => acc > *bacc,
        };
        if better {
            best = Some((tau0, tau1, acc));
        }
    }
    let Some((_, _, best_acc)) = best else {
        return Err(Error::ContinuousReduction(
            "no threshold pair accepts anyone".into(),
        ));
    };
    // Ties flatten whole plateaus; return the first grid point within
    // rounding noise of the best accuracy.
    let tie_slack = T::of(1e-9);
    for k in 0..=steps {
        let tau0 = T::of(GRID_STEP) * T::from_usize(k).unwrap();
        let matched = T::one() - ratio * (T::one() - problem.dist[0][1].cdf(tau0));
        let tau1 = problem.dist[1][1].inverse_cdf(matched)?;
        let Some(acc) = problem.accuracy(tau0, tau1) else {
            continue;
        };
        if acc >= best_acc - tie_slack {
            let tail0 = T::one() - problem.dist[0][1].cdf(tau0);
            let tail1 = T::one() - problem.dist[1][1].cdf(tau1);
            let es_residual = (p01 * tail0 - p11 * tail1).abs();
            return Ok(ContinuousSolution {
                tau0,
                tau1,
                accuracy: acc,
                es_residual,
            });
        }
    }
    unreachable!("a best grid point exists");
}
