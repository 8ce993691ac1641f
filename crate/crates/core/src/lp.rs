//! Dense linear programming for the tiny box-constrained problems the
//! post-processing theorems produce: maximize `c·x` subject to a handful of
//! equality rows and per-variable bounds inside `[0, 1]`.
//!
//! The solver is a two-phase simplex with Bland's rule. Problems here have
//! at most eight variables, so robustness and determinism beat speed;
//! Bland's rule guarantees termination. An independent vertex-enumeration
//! oracle backs the solver in tests.

use crate::error::{Error, Result};
use crate::real::Real;

/// Pivot tolerance: entries smaller than this are treated as zero.
fn pivot_tol<T: Real>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(256.0))
}

/// Feasibility tolerance for residuals and bound checks.
fn feas_tol<T: Real>() -> T {
    T::of(1e-9).max(T::epsilon() * T::of(4096.0))
}

/// A small dense LP: maximize `objective · x` subject to
/// `row · x = rhs` for every equality and `bounds[i].0 ≤ x[i] ≤ bounds[i].1`.
#[derive(Debug, Clone)]
pub struct LpProblem<T> {
    pub n: usize,
    pub objective: Vec<T>,
    pub equalities: Vec<(Vec<T>, T)>,
    pub bounds: Vec<(T, T)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub status: LpStatus,
}

impl<T: Real> LpProblem<T> {
    pub fn new(
        objective: Vec<T>,
        equalities: Vec<(Vec<T>, T)>,
        bounds: Vec<(T, T)>,
    ) -> Result<Self> {
        let n = objective.len();
        if n == 0 || n > 8 {
            return Err(Error::Precondition(format!(
                "LP has {n} variables, supported range is 1..=8"
            )));
        }
        if equalities.is_empty() || equalities.len() > n {
            return Err(Error::Precondition(format!(
                "LP needs between 1 and {n} equality rows, got {}",
                equalities.len()
            )));
        }
        if bounds.len() != n {
            return Err(Error::Precondition("bounds length mismatch".into()));
        }
        for &c in &objective {
            if !c.is_finite() {
                return Err(Error::Precondition(
                    "non-finite objective coefficient".into(),
                ));
            }
        }
        for (row, rhs) in &equalities {
            if row.len() != n {
                return Err(Error::Precondition("equality row length mismatch".into()));
            }
            if row.iter().any(|c| !c.is_finite()) || !rhs.is_finite() {
                return Err(Error::Precondition(
                    "non-finite equality coefficient".into(),
                ));
            }
        }
        for &(lo, hi) in &bounds {
            if !(T::zero() <= lo && lo <= hi && hi <= T::one()) {
                return Err(Error::Precondition(format!(
                    "bounds [{lo}, {hi}] must satisfy 0 ≤ lo ≤ hi ≤ 1"
                )));
            }
        }
        Ok(Self {
            n,
            objective,
            equalities,
            bounds,
        })
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    live: Vec<bool>,
    /// Columns allowed to enter the basis (artificials are shut out after
    /// phase one).
    enterable: Vec<bool>,
    ncols: usize,
}

impl<T: Real> Tableau<T> {
    fn pivot(&mut self, prow: usize, pcol: usize) {
        let piv = self.rows[prow][pcol];
        let inv = T::one() / piv;
        for v in self.rows[prow].iter_mut() {
            *v = *v * inv;
        }
        self.rhs[prow] = self.rhs[prow] * inv;
        for r in 0..self.rows.len() {
            if r == prow || !self.live[r] {
                continue;
            }
            let factor = self.rows[r][pcol];
            if factor == T::zero() {
                continue;
            }
            for c in 0..self.ncols {
                let delta = factor * self.rows[prow][c];
                self.rows[r][c] = self.rows[r][c] - delta;
            }
            self.rhs[r] = self.rhs[r] - factor * self.rhs[prow];
        }
        self.basis[prow] = pcol;
    }

    /// Runs Bland-rule simplex on the given cost vector (minimization).
    /// Returns the reduced-cost row at optimality.
    fn minimize(&mut self, cost: &[T]) -> Vec<T> {
        let tol = pivot_tol::<T>();
        // Price out the basic variables.
        let mut red = cost.to_vec();
        for r in 0..self.rows.len() {
            if !self.live[r] {
                continue;
            }
            let cb = cost[self.basis[r]];
            if cb == T::zero() {
                continue;
            }
            for c in 0..self.ncols {
                let delta = cb * self.rows[r][c];
                red[c] = red[c] - delta;
            }
        }
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            assert!(iterations < 100_000, "simplex failed to terminate");
            // Bland: entering variable is the lowest-index improving column.
            let mut entering = None;
            for c in 0..self.ncols {
                if self.enterable[c] && red[c] < -tol {
                    entering = Some(c);
                    break;
                }
            }
            let Some(pcol) = entering else {
                return red;
            };
            // Ratio test; ties broken by smallest basic variable index.
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                if !self.live[r] {
                    continue;
                }
                let a = self.rows[r][pcol];
                if a > tol {
                    let ratio = self.rhs[r] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio || (ratio == lratio && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let (prow, _) = leave.expect("unbounded LP; impossible for box-bounded problems");
            let piv_coef = red[pcol];
            self.pivot(prow, pcol);
            for c in 0..self.ncols {
                let delta = piv_coef * self.rows[prow][c];
                red[c] = red[c] - delta;
            }
        }
    }
}

/// Solves the LP. Deterministic: identical input yields an identical
/// solution, and optima are vertices of the feasible polytope.
pub fn solve<T: Real>(problem: &LpProblem<T>) -> LpSolution<T> {
    let n = problem.n;
    let k = problem.equalities.len();
    let tol = feas_tol::<T>();

    // Shift to x = lo + z with z ∈ [0, u]; upper bounds become slack rows.
    let lo: Vec<T> = problem.bounds.iter().map(|b| b.0).collect();
    let up: Vec<T> = problem.bounds.iter().map(|b| b.1 - b.0).collect();

    let nrows = k + n;
    let ncols = 2 * n + k; // z, slacks, artificials
    let mut rows = vec![vec![T::zero(); ncols]; nrows];
    let mut rhs = vec![T::zero(); nrows];
    let mut basis = vec![0usize; nrows];

    for (i, (row, b)) in problem.equalities.iter().enumerate() {
        let mut shifted = *b;
        for j in 0..n {
            shifted = shifted - row[j] * lo[j];
        }
        let flip = shifted < T::zero();
        for j in 0..n {
            rows[i][j] = if flip { -row[j] } else { row[j] };
        }
        rhs[i] = if flip { -shifted } else { shifted };
        rows[i][2 * n + i] = T::one();
        basis[i] = 2 * n + i;
    }
    for j in 0..n {
        let r = k + j;
        rows[r][j] = T::one();
        rows[r][n + j] = T::one();
        rhs[r] = up[j];
        basis[r] = n + j;
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        live: vec![true; nrows],
        enterable: vec![true; ncols],
        ncols,
    };

    // Phase one: minimize the sum of artificials.
    let mut phase1 = vec![T::zero(); ncols];
    for c in 2 * n..ncols {
        phase1[c] = T::one();
    }
    tab.minimize(&phase1);
    let infeas: T = (0..nrows)
        .filter(|&r| tab.live[r] && tab.basis[r] >= 2 * n)
        .map(|r| tab.rhs[r])
        .sum();
    if infeas > tol {
        return LpSolution {
            x: vec![T::zero(); n],
            objective: T::zero(),
            status: LpStatus::Infeasible,
        };
    }
    // Drive zero-valued artificials out of the basis; rows that cannot be
    // pivoted are redundant and dropped.
    for c in 2 * n..ncols {
        tab.enterable[c] = false;
    }
    for r in 0..nrows {
        if !tab.live[r] || tab.basis[r] < 2 * n {
            continue;
        }
        let piv = pivot_tol::<T>();
        let col = (0..2 * n).find(|&c| tab.rows[r][c].abs() > piv);
        match col {
            Some(c) => tab.pivot(r, c),
            None => tab.live[r] = false,
        }
    }

    // Phase two: minimize -c over the feasible region.
    let mut phase2 = vec![T::zero(); ncols];
    for j in 0..n {
        phase2[j] = -problem.objective[j];
    }
    tab.minimize(&phase2);

    let mut x = lo;
    for r in 0..nrows {
        if tab.live[r] && tab.basis[r] < n {
            let j = tab.basis[r];
            x[j] = x[j] + tab.rhs[r];
        }
    }
    // Snap rounding residue back inside the box.
    for j in 0..n {
        let (blo, bhi) = problem.bounds[j];
        x[j] = x[j].max(blo).min(bhi);
    }
    let objective = dot(&problem.objective, &x);
    debug_assert!(problem
        .equalities
        .iter()
        .all(|(row, b)| (dot(row, &x) - *b).abs() <= tol));
    LpSolution {
        x,
        objective,
        status: LpStatus::Optimal,
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Test oracle: enumerates every basic feasible point by fixing `n - k`
/// variables at a bound and solving the `k` equality rows for the rest.
/// Returns each feasible vertex with its objective value.
pub fn enumerate_vertices<T: Real>(problem: &LpProblem<T>) -> Vec<(Vec<T>, T)> {
    let n = problem.n;
    let k = problem.equalities.len();
    let tol = feas_tol::<T>();
    let mut out: Vec<(Vec<T>, T)> = Vec::new();

    // All k-subsets of variables left free.
    let mut free = Vec::new();
    subsets(n, k, &mut Vec::new(), &mut free);

    for free_set in &free {
        let fixed: Vec<usize> = (0..n).filter(|j| !free_set.contains(j)).collect();
        let combos = 1usize << fixed.len();
        for mask in 0..combos {
            let mut x = vec![T::zero(); n];
            for (bit, &j) in fixed.iter().enumerate() {
                let (lo, hi) = problem.bounds[j];
                x[j] = if mask >> bit & 1 == 1 { hi } else { lo };
            }
            // Solve the k×k system for the free variables.
            let mut a = vec![vec![T::zero(); k]; k];
            let mut b = vec![T::zero(); k];
            for (i, (row, rhs)) in problem.equalities.iter().enumerate() {
                b[i] = *rhs;
                for &j in &fixed {
                    b[i] = b[i] - row[j] * x[j];
                }
                for (c, &j) in free_set.iter().enumerate() {
                    a[i][c] = row[j];
                }
            }
            let Some(sol) = gauss_solve(&mut a, &mut b) else {
                continue; // singular subsystem for this choice
            };
            for (c, &j) in free_set.iter().enumerate() {
                x[j] = sol[c];
            }
            let feasible = (0..n).all(|j| {
                let (lo, hi) = problem.bounds[j];
                x[j] >= lo - tol && x[j] <= hi + tol
            }) && problem
                .equalities
                .iter()
                .all(|(row, rhs)| (dot(row, &x) - *rhs).abs() <= tol);
            if feasible {
                for j in 0..n {
                    let (lo, hi) = problem.bounds[j];
                    x[j] = x[j].max(lo).min(hi);
                }
                let obj = dot(&problem.objective, &x);
                if !out
                    .iter()
                    .any(|(v, _)| v.iter().zip(&x).all(|(&p, &q)| (p - q).abs() <= tol))
                {
                    out.push((x.clone(), obj));
                }
            }
        }
    }
    out
}

fn subsets(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    let start = cur.last().map_or(0, |&l| l + 1);
    for j in start..n {
        cur.push(j);
        subsets(n, k, cur, out);
        cur.pop();
    }
}

fn gauss_solve<T: Real>(a: &mut [Vec<T>], b: &mut [T]) -> Option<Vec<T>> {
    let k = b.len();
    let tol = pivot_tol::<T>();
    for col in 0..k {
        let mut best = col;
        for r in col + 1..k {
            if a[r][col].abs() > a[best][col].abs() {
                best = r;
            }
        }
        if a[best][col].abs() <= tol {
            return None;
        }
        a.swap(col, best);
        b.swap(col, best);
        let inv = T::one() / a[col][col];
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r][col] * inv;
            if f == T::zero() {
                continue;
            }
            for c in col..k {
                let delta = f * a[col][c];
                a[r][c] = a[r][c] - delta;
            }
            b[r] = b[r] - f * b[col];
        }
    }
    Some((0..k).map(|i| b[i] / a[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn unit_bounds(n: usize) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); n]
    }

    #[test]
    fn corner_solution() {
        let p =
            LpProblem::new(vec![1.0, 0.0], vec![(vec![1.0, 1.0], 1.0)], unit_bounds(2)).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!(s.x[1].abs() < 1e-12);
    }

    #[test]
    fn bound_conflict_is_infeasible() {
        let p = LpProblem::new(vec![1.0], vec![(vec![1.0], 2.0)], unit_bounds(1)).unwrap();
        assert_eq!(solve(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn vertices_of_unit_segment() {
        let p =
            LpProblem::new(vec![1.0, 0.0], vec![(vec![1.0, 1.0], 1.0)], unit_bounds(2)).unwrap();
        let mut vs = enumerate_vertices(&p);
        vs.sort_by(|a, b| a.0[0].partial_cmp(&b.0[0]).unwrap());
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[0].0, vec![0.0, 1.0]);
        assert_eq!(vs[1].0, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible_problem_has_no_vertices() {
        let p = LpProblem::new(vec![1.0], vec![(vec![1.0], 2.0)], unit_bounds(1)).unwrap();
        assert!(enumerate_vertices(&p).is_empty());
    }

    #[test]
    fn degenerate_redundant_rows_handled() {
        // Same constraint twice: phase one leaves a zero artificial basic.
        let p = LpProblem::new(
            vec![1.0, 2.0],
            vec![(vec![1.0, 1.0], 1.0), (vec![2.0, 2.0], 2.0)],
            unit_bounds(2),
        )
        .unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn tight_bounds_respected() {
        let p = LpProblem::new(
            vec![1.0f64, 1.0, -1.0],
            vec![(vec![1.0, 1.0, 1.0], 1.2)],
            vec![(0.0, 1.0), (0.25, 0.25), (0.0, 0.5)],
        )
        .unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x[1], 0.25);
        assert!((s.x[0] - 0.95).abs() < 1e-9);
        assert!((s.objective - 1.2).abs() < 1e-9);
    }

    #[test]
    fn random_problems_match_vertex_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut feasible_seen = 0;
        for _ in 0..300 {
            let n = 4;
            let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let eqs: Vec<(Vec<f64>, f64)> = (0..2)
                .map(|_| {
                    let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let rhs = rng.gen_range(-0.5..1.5);
                    (row, rhs)
                })
                .collect();
            let p = LpProblem::new(objective, eqs, unit_bounds(n)).unwrap();
            let s = solve(&p);
            let vs = enumerate_vertices(&p);
            match s.status {
                LpStatus::Optimal => {
                    feasible_seen += 1;
                    let best = vs.iter().map(|(_, o)| *o).fold(f64::NEG_INFINITY, f64::max);
                    assert!(
                        (s.objective - best).abs() <= 1e-9,
                        "solver {} vs oracle {}",
                        s.objective,
                        best
                    );
                }
                LpStatus::Infeasible => assert!(vs.is_empty()),
            }
        }
        assert!(
            feasible_seen > 50,
            "generator produced too few feasible LPs"
        );
    }

    #[test]
    fn solve_is_deterministic() {
        let p = LpProblem::new(
            vec![0.3, -0.2, 0.7, 0.1],
            vec![
                (vec![1.0, 1.0, 1.0, 1.0], 1.0),
                (vec![0.5, -0.5, 0.25, 0.0], 0.1),
            ],
            unit_bounds(4),
        )
        .unwrap();
        let a = solve(&p);
        let b = solve(&p);
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective, b.objective);
    }
}
