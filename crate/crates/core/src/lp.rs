//! Dense two-phase simplex for the small linear programs this crate builds.
//!
//! Problems are stated as `min c·x` over `x ≥ 0` with `≤ / ≥ / =` rows.
//! Pivoting uses Bland's rule throughout, so the solver cannot cycle; a
//! generous pivot cap turns any numerical stall into an explicit error
//! instead of a hang. Sizes here are desk-scale (hundreds of variables at
//! most), so a dense tableau is the simplest correct choice.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// Sparse coefficients, comparison, right-hand side.
type Row = (Vec<(usize, f64)>, Cmp, f64);

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal values of the original variables.
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
}

impl LinearProgram {
    /// Starts `min objective·x` with `x ≥ 0` and no constraints yet.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let num_vars = objective.len();
        Self { num_vars, objective, rows: Vec::new() }
    }

    /// Adds a row `Σ coeff·x_j  cmp  rhs`. Indices must be within range.
    pub fn constraint(&mut self, coeffs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.num_vars));
        self.rows.push((coeffs, cmp, rhs));
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self)?.run(&self.objective).map(|x| {
            let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            LpSolution { x, value }
        })
    }
}

/// Equality-form tableau: rows `A x = b` with `b ≥ 0`, basis column per row.
struct Tableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    num_original: usize,
    /// Columns at or past this index are artificial.
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let m = lp.rows.len();
        let n = lp.num_vars;
        // One slack/surplus column per inequality row, then artificials.
        let num_slack = lp.rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let artificial_start = n + num_slack;
        let total = artificial_start + m;

        let mut a = vec![vec![0.0; total]; m];
        let mut b = vec![0.0; m];
        let mut basis = vec![usize::MAX; m];
        let mut next_slack = n;

        for (i, (coeffs, cmp, rhs)) in lp.rows.iter().enumerate() {
            let flip = *rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            for &(j, c) in coeffs {
                a[i][j] += sign * c;
            }
            b[i] = sign * rhs;
            let cmp = match (cmp, flip) {
                (Cmp::Le, false) | (Cmp::Ge, true) => Cmp::Le,
                (Cmp::Ge, false) | (Cmp::Le, true) => Cmp::Ge,
                (Cmp::Eq, _) => Cmp::Eq,
            };
            match cmp {
                Cmp::Le => {
                    a[i][next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Cmp::Ge => {
                    a[i][next_slack] = -1.0;
                    next_slack += 1;
                }
                Cmp::Eq => {}
            }
            if basis[i] == usize::MAX {
                let art = artificial_start + i;
                a[i][art] = 1.0;
                basis[i] = art;
            }
        }

        Ok(Self { a, b, basis, num_original: n, artificial_start })
    }

    fn run(mut self, objective: &[f64]) -> Result<Vec<f64>> {
        // Phase 1: minimize the artificial mass, if any artificial is basic.
        if self.basis.iter().any(|&j| j >= self.artificial_start) {
            let total = self.a.first().map_or(0, Vec::len);
            let mut phase1 = vec![0.0; total];
            phase1[self.artificial_start..].fill(1.0);
            let value = self.optimize(&phase1, total)?;
            if value > 1e-7 {
                return Err(Error::LpInfeasible);
            }
            self.evict_artificials();
        }

        let mut costs = vec![0.0; self.a.first().map_or(0, Vec::len)];
        costs[..objective.len()].copy_from_slice(objective);
        self.optimize(&costs, self.artificial_start)?;

        let mut x = vec![0.0; self.num_original];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.num_original {
                x[j] = self.b[i];
            }
        }
        Ok(x)
    }

    /// Bland-rule simplex on the current basis; only columns below
    /// `allowed` may enter. Returns the objective value at optimum.
    fn optimize(&mut self, costs: &[f64], allowed: usize) -> Result<f64> {
        for _ in 0..MAX_PIVOTS {
            let entering = match self.entering(costs, allowed) {
                Some(j) => j,
                None => {
                    let value = self.basis.iter().zip(&self.b).map(|(&j, &bi)| costs[j] * bi).sum();
                    return Ok(value);
                }
            };
            let row = self.leaving(entering).ok_or(Error::LpUnbounded)?;
            self.pivot(row, entering);
        }
        Err(Error::LpStalled(MAX_PIVOTS))
    }

    /// Smallest-index column with negative reduced cost.
    fn entering(&self, costs: &[f64], allowed: usize) -> Option<usize> {
        for j in 0..allowed {
            if self.basis.contains(&j) {
                continue;
            }
            let reduced = costs[j] - self.basis.iter().enumerate().map(|(i, &bj)| costs[bj] * self.a[i][j]).sum::<f64>();
            if reduced < -EPS {
                return Some(j);
            }
        }
        None
    }

    /// Min-ratio row; ties broken by smallest basic variable index.
    fn leaving(&self, entering: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.a.len() {
            let coef = self.a[i][entering];
            if coef <= EPS {
                continue;
            }
            let ratio = self.b[i] / coef;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br - EPS || (ratio < br + EPS && self.basis[i] < self.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        for v in &mut self.a[row] {
            *v /= piv;
        }
        self.b[row] /= piv;
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.a[i].len() {
                self.a[i][j] -= factor * self.a[row][j];
            }
            self.b[i] -= factor * self.b[row];
            if self.b[i].abs() < 1e-13 {
                self.b[i] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// After phase 1, pivots any still-basic artificial out on a real
    /// column, or drops the row when it is redundant.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.a.len() {
            if self.basis[i] < self.artificial_start {
                i += 1;
                continue;
            }
            match (0..self.artificial_start).find(|&j| self.a[i][j].abs() > EPS) {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.a.remove(i);
                    self.b.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}
