//! Empirical means, projected confidence intervals and the confidence-bound LPs.
//!
//! Every entry of an arm's column shares the radius `sqrt(2 ln T / n_i)`,
//! and the interval is clipped to `[0, 1]`. Arms that have never been played
//! get the full interval `(0, 1)`.

use serde::{Deserialize, Serialize};

use crate::environment::Outcome;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::lp::{self, LinearProgram, LpStatus, DEFAULT_PIVOT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Intersect each new interval with the previous one.
    pub monotone: bool,
    /// Multiplier on the confidence radius; 1 gives the standard radius.
    pub radius_scale: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            monotone: false,
            radius_scale: 1.0,
        }
    }
}

/// Lower/upper bounds on rewards (`m`) and consumptions (`d × m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub mu_lower: Vec<f64>,
    pub mu_upper: Vec<f64>,
    pub c_lower: Vec<Vec<f64>>,
    pub c_upper: Vec<Vec<f64>>,
}

impl Bounds {
    fn uninformative(m: usize, d: usize) -> Self {
        Self {
            mu_lower: vec![0.0; m],
            mu_upper: vec![1.0; m],
            c_lower: vec![vec![0.0; m]; d],
            c_upper: vec![vec![1.0; m]; d],
        }
    }

    /// Both bounds equal to the true means.
    pub fn exact(inst: &ProblemInstance) -> Self {
        Self {
            mu_lower: inst.mu.clone(),
            mu_upper: inst.mu.clone(),
            c_lower: inst.c.clone(),
            c_upper: inst.c.clone(),
        }
    }

    /// Whether every true mean lies in its closed interval.
    pub fn covers(&self, inst: &ProblemInstance) -> bool {
        let inside = |v: f64, lo: f64, hi: f64| lo <= v && v <= hi;
        (0..inst.m).all(|i| {
            inside(inst.mu[i], self.mu_lower[i], self.mu_upper[i])
                && (0..inst.d).all(|j| inside(inst.c[j][i], self.c_lower[j][i], self.c_upper[j][i]))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceState {
    pub n: Vec<u64>,
    pub mean_reward: Vec<f64>,
    /// `d × m`.
    pub mean_consumption: Vec<Vec<f64>>,
    pub horizon: usize,
    pub config: EstimatorConfig,
    bounds: Bounds,
}

fn project(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

impl ConfidenceState {
    pub fn new(m: usize, d: usize, horizon: usize, config: EstimatorConfig) -> Self {
        Self {
            n: vec![0; m],
            mean_reward: vec![0.0; m],
            mean_consumption: vec![vec![0.0; m]; d],
            horizon,
            config,
            bounds: Bounds::uninformative(m, d),
        }
    }

    /// A state whose bounds collapse onto the true means, standing in for
    /// the limit of infinitely many plays.
    pub fn exact(inst: &ProblemInstance, horizon: usize) -> Self {
        Self {
            n: vec![1; inst.m],
            mean_reward: inst.mu.clone(),
            mean_consumption: inst.c.clone(),
            horizon,
            config: EstimatorConfig {
                monotone: false,
                radius_scale: 0.0,
            },
            bounds: Bounds::exact(inst),
        }
    }

    pub fn m(&self) -> usize {
        self.n.len()
    }

    pub fn d(&self) -> usize {
        self.mean_consumption.len()
    }

    pub fn radius(&self, plays: u64) -> f64 {
        if plays == 0 {
            return f64::INFINITY;
        }
        let log_t = (self.horizon.max(1) as f64).ln();
        self.config.radius_scale * (2.0 * log_t / plays as f64).sqrt()
    }

    pub fn update(&mut self, arm: usize, outcome: &Outcome) -> Result<()> {
        if arm >= self.m() {
            return Err(Error::InvalidInput(format!("arm {arm} out of range for m = {}", self.m())));
        }
        if outcome.consumption.len() != self.d() {
            return Err(Error::Dimension(format!(
                "consumption has {} entries, expected {}",
                outcome.consumption.len(),
                self.d()
            )));
        }
        self.n[arm] += 1;
        let n = self.n[arm] as f64;
        self.mean_reward[arm] += (outcome.reward - self.mean_reward[arm]) / n;
        for (row, c) in self.mean_consumption.iter_mut().zip(&outcome.consumption) {
            row[arm] += (c - row[arm]) / n;
        }
        self.refresh(arm);
        Ok(())
    }

    fn refresh(&mut self, arm: usize) {
        let r = self.radius(self.n[arm]);
        let monotone = self.config.monotone;
        let tighten = |lo: &mut f64, hi: &mut f64, mean: f64| {
            let (new_lo, new_hi) = (project(mean - r), project(mean + r));
            if monotone {
                *lo = lo.max(new_lo);
                *hi = hi.min(new_hi);
                if *lo > *hi {
                    // Disjoint from history: keep the current interval.
                    *lo = new_lo;
                    *hi = new_hi;
                }
            } else {
                *lo = new_lo;
                *hi = new_hi;
            }
        };
        let b = &mut self.bounds;
        tighten(&mut b.mu_lower[arm], &mut b.mu_upper[arm], self.mean_reward[arm]);
        for j in 0..self.mean_consumption.len() {
            tighten(&mut b.c_lower[j][arm], &mut b.c_upper[j][arm], self.mean_consumption[j][arm]);
        }
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }
}

/// `max objᵀx  s.t.  A x ≤ rhs·1, x ≥ 0, x_i = 0 for i ∈ fixed`.
pub(crate) fn confidence_lp(
    objective: &[f64],
    matrix: &[Vec<f64>],
    rhs: Vec<f64>,
    fixed: impl IntoIterator<Item = usize>,
) -> Result<LinearProgram> {
    LinearProgram::new(objective.to_vec(), matrix.to_vec(), rhs)?.with_fixed_to_zero(fixed)
}

fn optimal_value(lp: &LinearProgram) -> Result<f64> {
    let sol = lp::solve_lp(lp, DEFAULT_PIVOT_TOL)?;
    Ok(match sol.status {
        LpStatus::Optimal => sol.objective_value,
        LpStatus::Unbounded => f64::INFINITY,
        LpStatus::Infeasible => f64::NEG_INFINITY,
    })
}

fn budget(conf: &ConfidenceState, b: f64) -> Vec<f64> {
    vec![conf.horizon as f64 * b; conf.d()]
}

/// Pessimistic LP value: `max (μ^L)ᵀx  s.t.  C^U x ≤ T·b·1`.
pub fn lcb_lp_value(conf: &ConfidenceState, b: f64) -> Result<f64> {
    let bd = conf.bounds();
    optimal_value(&confidence_lp(&bd.mu_lower, &bd.c_upper, budget(conf, b), [])?)
}

/// Optimistic LP value: `max (μ^U)ᵀx  s.t.  C^L x ≤ T·b·1`; `+∞` if unbounded.
pub fn ucb_lp_value(conf: &ConfidenceState, b: f64) -> Result<f64> {
    let bd = conf.bounds();
    optimal_value(&confidence_lp(&bd.mu_upper, &bd.c_lower, budget(conf, b), [])?)
}

/// Optimistic value of the LP with arm `i` removed; `+∞` if unbounded.
pub fn arm_removal_ucb(conf: &ConfidenceState, b: f64, i: usize) -> Result<f64> {
    if i >= conf.m() {
        return Err(Error::InvalidInput(format!("arm {i} out of range for m = {}", conf.m())));
    }
    let bd = conf.bounds();
    optimal_value(&confidence_lp(&bd.mu_upper, &bd.c_lower, budget(conf, b), [i])?)
}

/// Optimistic value of the left-over-penalised LP for constraint `j`, in its
/// dual form `min Bᵀy − B  s.t.  (C^L)ᵀy ≥ μ^U + C^U_j, y ≥ 0`.
///
/// An infeasible dual maps to `+∞`.
pub fn constraint_ucb(conf: &ConfidenceState, b: f64, j: usize) -> Result<f64> {
    if j >= conf.d() {
        return Err(Error::InvalidInput(format!("constraint {j} out of range for d = {}", conf.d())));
    }
    let bd = conf.bounds();
    let big_b = conf.horizon as f64 * b;
    let (m, d) = (conf.m(), conf.d());
    // As a max problem: max −Bᵀy  s.t.  −(C^L)ᵀy ≤ −(μ^U + C^U_j).
    let objective = vec![-big_b; d];
    let matrix: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..d).map(|row| -bd.c_lower[row][i]).collect())
        .collect();
    let rhs: Vec<f64> = (0..m).map(|i| -(bd.mu_upper[i] + bd.c_upper[j][i])).collect();
    let sol = lp::solve_lp(&LinearProgram::new(objective, matrix, rhs)?, DEFAULT_PIVOT_TOL)?;
    Ok(match sol.status {
        LpStatus::Optimal => -sol.objective_value - big_b,
        LpStatus::Infeasible => f64::INFINITY,
        // Bᵀy ≥ 0 on y ≥ 0, so the min problem cannot be unbounded.
        LpStatus::Unbounded => f64::NEG_INFINITY,
    })
}
