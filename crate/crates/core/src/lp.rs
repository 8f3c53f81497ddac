//! Dense linear programming in max form.
//!
//! Every program is `max cᵀx + offset  s.t.  Ax ≤ b, x ≥ 0` with an optional
//! set of variables pinned to zero. Minimisation problems with `≥` rows are
//! expressed by negating objective and rows before they get here.
//!
//! [`solve_lp`] is a two-phase tableau simplex using Bland's rule for both the
//! entering and the leaving variable, so identical inputs always produce
//! identical pivots. [`enumerate_vertices_oracle`] is an independent brute-force
//! route used to check it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot tolerance.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-9;
/// Tolerance used when asserting feasibility, duality and classifications.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;
/// Largest `n + k` accepted by the vertex-enumeration oracle.
pub const ORACLE_MAX_DIM: usize = 16;

const ZERO_CLEAN: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    /// Objective coefficients (length n), maximised.
    pub objective: Vec<f64>,
    /// Constant added to the reported objective value.
    #[serde(default)]
    pub objective_offset: f64,
    /// Row-major `k × n` matrix of `≤` rows.
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    #[serde(default)]
    pub fixed_to_zero: BTreeSet<usize>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, matrix: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let lp = Self {
            objective,
            objective_offset: 0.0,
            matrix,
            rhs,
            fixed_to_zero: BTreeSet::new(),
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn with_fixed_to_zero(mut self, fixed: impl IntoIterator<Item = usize>) -> Result<Self> {
        self.fixed_to_zero.extend(fixed);
        self.validate()?;
        Ok(self)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.objective_offset = offset;
        self
    }

    /// Appends a `≤` row.
    pub fn push_row(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        if row.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "row has {} entries, program has {} variables",
                row.len(),
                self.num_vars()
            )));
        }
        self.matrix.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.matrix.len() != self.rhs.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows but rhs has {} entries",
                self.matrix.len(),
                self.rhs.len()
            )));
        }
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Dimension(format!("row {r} has a non-finite entry")));
            }
        }
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension("rhs has a non-finite entry".into()));
        }
        if self.objective.iter().any(|v| !v.is_finite()) || !self.objective_offset.is_finite() {
            return Err(Error::Dimension("objective has a non-finite entry".into()));
        }
        if let Some(&i) = self.fixed_to_zero.iter().find(|&&i| i >= n) {
            return Err(Error::Dimension(format!(
                "fixed variable {i} out of range for {n} variables"
            )));
        }
        Ok(())
    }

    /// Column indices that remain after deleting the fixed variables.
    fn free_columns(&self) -> Vec<usize> {
        (0..self.num_vars())
            .filter(|i| !self.fixed_to_zero.contains(i))
            .collect()
    }

    fn slacks_of(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| b - dot(row, x))
            .collect()
    }

    fn objective_of(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x) + self.objective_offset
    }

    fn dump(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{self:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    /// `cᵀx + offset`; `-∞` when infeasible, `+∞` when unbounded.
    pub objective_value: f64,
    /// Basic variables: `i < n` are structural, `n + j` is the slack of row `j`.
    pub basis: Vec<usize>,
    /// `b − Ax`.
    pub slacks: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn infeasible(lp: &LinearProgram) -> Self {
        Self {
            status: LpStatus::Infeasible,
            primal: vec![0.0; lp.num_vars()],
            dual: vec![0.0; lp.num_rows()],
            objective_value: f64::NEG_INFINITY,
            basis: Vec::new(),
            slacks: lp.rhs.clone(),
        }
    }

    fn unbounded(lp: &LinearProgram, x: Vec<f64>) -> Self {
        Self {
            status: LpStatus::Unbounded,
            slacks: lp.slacks_of(&x),
            primal: x,
            dual: vec![0.0; lp.num_rows()],
            objective_value: f64::INFINITY,
            basis: Vec::new(),
        }
    }

    /// Worst violation among primal feasibility, dual feasibility, dual sign,
    /// strong duality (relative) and both complementary-slackness families.
    pub fn optimality_residual(&self, lp: &LinearProgram) -> f64 {
        let n = lp.num_vars();
        let mut worst: f64 = 0.0;
        for s in &self.slacks {
            worst = worst.max(-s);
        }
        for y in &self.dual {
            worst = worst.max(-y);
        }
        for i in 0..n {
            if lp.fixed_to_zero.contains(&i) {
                worst = worst.max(self.primal[i].abs());
                continue;
            }
            let col: f64 = lp
                .matrix
                .iter()
                .zip(&self.dual)
                .map(|(row, y)| row[i] * y)
                .sum();
            let reduced = col - lp.objective[i];
            worst = worst.max(-reduced);
            worst = worst.max(self.primal[i] * reduced);
            worst = worst.max(-self.primal[i]);
        }
        for (y, s) in self.dual.iter().zip(&self.slacks) {
            worst = worst.max(y * s);
        }
        let primal_obj = dot(&lp.objective, &self.primal);
        let dual_obj = dot(&lp.rhs, &self.dual);
        worst = worst.max((primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs()));
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row, same width as `rows`.
    cost: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    tol: f64,
}

enum Pivoting {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let p = self.rows[pr][pc];
        for v in self.rows[pr].iter_mut() {
            *v /= p;
        }
        self.rows[pr][pc] = 1.0;
        let pivot_row = self.rows[pr].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let f = row[pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..width {
                row[c] -= f * pivot_row[c];
                if row[c].abs() < ZERO_CLEAN {
                    row[c] = 0.0;
                }
            }
            row[pc] = 0.0;
        }
        let f = self.cost[pc];
        if f != 0.0 {
            for (cost, p) in self.cost.iter_mut().zip(&pivot_row).take(width) {
                *cost -= f * p;
                if cost.abs() < ZERO_CLEAN {
                    *cost = 0.0;
                }
            }
            self.cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland-rule pivots until optimal or unbounded. Columns with
    /// `allowed[c] == false` never enter.
    fn run(&mut self, allowed: &[bool], iterations: &mut usize, cap: usize) -> Option<Pivoting> {
        loop {
            let entering = (0..self.cols).find(|&c| allowed[c] && self.cost[c] < -self.tol);
            let Some(pc) = entering else {
                return Some(Pivoting::Optimal);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][pc];
                if a <= self.tol {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let scale = 1.0 + lratio.abs();
                        let smaller = ratio < lratio - self.tol * scale;
                        let tie_wins = ratio <= lratio + self.tol * scale && self.basis[r] < self.basis[lr];
                        if smaller || tie_wins {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((pr, _)) = leaving else {
                return Some(Pivoting::Unbounded);
            };
            *iterations += 1;
            if *iterations > cap {
                return None;
            }
            self.pivot(pr, pc);
        }
    }
}

/// Solves `lp` to optimality with a two-phase dense simplex.
pub fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<LpSolution> {
    lp.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let n = lp.num_vars();
    let k = lp.num_rows();
    let free = lp.free_columns();
    let nf = free.len();

    // Column layout: free structurals, one slack per row, one artificial per
    // row whose rhs is negative (those rows are negated).
    let negated: Vec<bool> = lp.rhs.iter().map(|&b| b < 0.0).collect();
    let n_art = negated.iter().filter(|&&x| x).count();
    let cols = nf + k + n_art;
    let mut rows = Vec::with_capacity(k);
    let mut basis = Vec::with_capacity(k);
    let mut art = nf + k;
    for r in 0..k {
        let sign = if negated[r] { -1.0 } else { 1.0 };
        let mut row = vec![0.0; cols + 1];
        for (c, &orig) in free.iter().enumerate() {
            row[c] = sign * lp.matrix[r][orig];
        }
        row[nf + r] = sign;
        row[cols] = sign * lp.rhs[r];
        if negated[r] {
            row[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(nf + r);
        }
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        cost: vec![0.0; cols + 1],
        basis,
        cols,
        tol,
    };
    let cap = 50 * (n + k).max(1);
    let mut iterations = 0usize;
    let fail = |iterations| Error::SolverFailure {
        iterations,
        dump: lp.dump(),
    };

    let is_art = |c: usize| c >= nf + k;
    if n_art > 0 {
        // Phase 1: maximise −Σ artificials.
        for c in nf + k..cols {
            tab.cost[c] = 1.0;
        }
        for r in 0..k {
            if is_art(tab.basis[r]) {
                for c in 0..=cols {
                    tab.cost[c] -= tab.rows[r][c];
                }
            }
        }
        let allowed = vec![true; cols];
        match tab.run(&allowed, &mut iterations, cap) {
            None => return Err(fail(iterations)),
            Some(Pivoting::Unbounded) => {
                // Phase-1 objective is bounded above by zero.
                return Err(fail(iterations));
            }
            Some(Pivoting::Optimal) => {}
        }
        let infeasibility = -tab.cost[cols];
        let scale = 1.0 + lp.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > DEFAULT_FEAS_TOL.max(tol) * scale {
            return Ok(LpSolution::infeasible(lp));
        }
        // Drive zero-level artificials out of the basis where possible;
        // rows where that fails are redundant and keep their artificial.
        for r in 0..k {
            if is_art(tab.basis[r]) {
                if let Some(c) = (0..nf + k).find(|&c| tab.rows[r][c].abs() > tol) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase 2.
    tab.cost = vec![0.0; cols + 1];
    for (c, &orig) in free.iter().enumerate() {
        tab.cost[c] = -lp.objective[orig];
    }
    for r in 0..k {
        let bc = tab.basis[r];
        let cb = if bc < nf { lp.objective[free[bc]] } else { 0.0 };
        if cb != 0.0 {
            for c in 0..=cols {
                tab.cost[c] += cb * tab.rows[r][c];
            }
        }
    }
    let allowed: Vec<bool> = (0..cols).map(|c| !is_art(c)).collect();
    let outcome = tab.run(&allowed, &mut iterations, cap).ok_or_else(|| fail(iterations))?;

    let mut x = vec![0.0; n];
    for r in 0..k {
        let bc = tab.basis[r];
        if bc < nf {
            x[free[bc]] = tab.rhs(r).max(0.0);
        }
    }
    if let Pivoting::Unbounded = outcome {
        return Ok(LpSolution::unbounded(lp, x));
    }

    let dual: Vec<f64> = (0..k).map(|r| tab.cost[nf + r]).collect();
    let mut basis: Vec<usize> = tab
        .basis
        .iter()
        .filter(|&&c| !is_art(c))
        .map(|&c| if c < nf { free[c] } else { n + (c - nf) })
        .collect();
    basis.sort_unstable();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_of(&x),
        slacks: lp.slacks_of(&x),
        primal: x,
        dual,
        basis,
    })
}

/// Solves the square system `a · x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when the system is numerically singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            if f == 0.0 {
                continue;
            }
            for (v, p) in row[col..n].iter_mut().zip(&pivot[col..n]) {
                *v -= f * p;
            }
            b[col + 1 + offset] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Best vertex of `max cᵀx, Ax ≤ b, x ≥ 0` by exhaustive enumeration of
/// active sets. `None` when no vertex is feasible.
fn best_vertex(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = c.len();
    let k = b.len();
    let feas = 1e-9;
    if n == 0 {
        return b.iter().all(|&v| v >= -feas).then(|| (Vec::new(), 0.0));
    }
    let total = k + n;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..(1u32 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut sys = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for idx in 0..total {
            if mask & (1 << idx) == 0 {
                continue;
            }
            if idx < k {
                sys.push(a[idx].clone());
                rhs.push(b[idx]);
            } else {
                let mut e = vec![0.0; n];
                e[idx - k] = 1.0;
                sys.push(e);
                rhs.push(0.0);
            }
        }
        let Some(x) = solve_square(sys, rhs) else {
            continue;
        };
        let ok = x.iter().all(|&v| v >= -feas)
            && a.iter()
                .zip(b)
                .all(|(row, &bi)| dot(row, &x) <= bi + feas * (1.0 + bi.abs()));
        if !ok {
            continue;
        }
        let x: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
        let val = dot(c, &x);
        if best.as_ref().is_none_or(|(_, bv)| val > *bv) {
            best = Some((x, val));
        }
    }
    best
}

/// Exhaustive vertex enumeration of the primal and of its dual.
///
/// The primal optimum is the best feasible basic solution; the dual vector is
/// taken from the same enumeration run on `max −bᵀy, −Aᵀy ≤ −c, y ≥ 0`. A
/// feasible primal with an infeasible dual is reported as unbounded.
pub fn enumerate_vertices_oracle(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let k = lp.num_rows();
    if n + k > ORACLE_MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "vertex enumeration limited to n + k <= {ORACLE_MAX_DIM}, got {}",
            n + k
        )));
    }
    let free = lp.free_columns();
    let c: Vec<f64> = free.iter().map(|&i| lp.objective[i]).collect();
    let a: Vec<Vec<f64>> = lp
        .matrix
        .iter()
        .map(|row| free.iter().map(|&i| row[i]).collect())
        .collect();

    let Some((xf, _)) = best_vertex(&c, &a, &lp.rhs) else {
        return Ok(LpSolution::infeasible(lp));
    };
    let mut x = vec![0.0; n];
    for (j, &i) in free.iter().enumerate() {
        x[i] = xf[j];
    }

    let dual_c: Vec<f64> = lp.rhs.iter().map(|v| -v).collect();
    let dual_a: Vec<Vec<f64>> = (0..free.len())
        .map(|j| a.iter().map(|row| -row[j]).collect())
        .collect();
    let dual_b: Vec<f64> = c.iter().map(|v| -v).collect();
    let Some((y, _)) = best_vertex(&dual_c, &dual_a, &dual_b) else {
        return Ok(LpSolution::unbounded(lp, x));
    };

    let basis = (0..n)
        .filter(|&i| x[i] > 0.0)
        .chain((0..k).filter(|&j| lp.rhs[j] - dot(&lp.matrix[j], &x) > 1e-9).map(|j| n + j))
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_of(&x),
        slacks: lp.slacks_of(&x),
        primal: x,
        dual: y,
        basis,
    })
}
