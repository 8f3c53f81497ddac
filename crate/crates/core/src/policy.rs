//! Decision policies.
//!
//! * `TwoPhase`: round-robin identification of the optimal arms and the
//!   non-binding constraints, then adaptive exhaustion of the binding
//!   resources using only the identified arms.
//! * `OnePhase`: the adaptive LP from the first step, over all arms.
//! * `StaticLp`: the optimistic LP with the static budget `T·b`.
//! * `Uniform`: every arm with probability `1/m`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{KnapsackState, Outcome};
use crate::error::{Error, Result};
use crate::estimators::{self, confidence_lp, ConfidenceState, EstimatorConfig};
use crate::lp::{self, LpStatus, DEFAULT_PIVOT_TOL};

/// Mass below which an LP solution counts as the zero vector.
const ZERO_MASS: f64 = 1e-9;

/// Relative margin an elimination test must clear.
const ELIMINATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    TwoPhase,
    OnePhase,
    StaticLp,
    Uniform,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::TwoPhase,
        PolicyKind::OnePhase,
        PolicyKind::StaticLp,
        PolicyKind::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::TwoPhase => "two_phase",
            PolicyKind::OnePhase => "one_phase",
            PolicyKind::StaticLp => "static_lp",
            PolicyKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "unknown policy {s:?}; expected two_phase, one_phase, static_lp or uniform"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Identify,
    Exhaust,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyState {
    pub kind: PolicyKind,
    pub conf: ConfidenceState,
    pub phase: Phase,
    /// Arms identified as optimal.
    pub i_hat: BTreeSet<usize>,
    /// Constraints identified as non-binding.
    pub j_hat: BTreeSet<usize>,
    pub round_cursor: usize,
    /// Step at which identification finished.
    pub phase1_end: Option<usize>,
    b: f64,
}

/// Draws an index with probability proportional to `weights`.
fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

impl PolicyState {
    pub fn new(kind: PolicyKind, m: usize, d: usize, b: f64, horizon: usize, config: EstimatorConfig) -> Self {
        Self::with_confidence(kind, ConfidenceState::new(m, d, horizon, config), b)
    }

    pub fn with_confidence(kind: PolicyKind, conf: ConfidenceState, b: f64) -> Self {
        Self {
            kind,
            conf,
            phase: Phase::Identify,
            i_hat: BTreeSet::new(),
            j_hat: BTreeSet::new(),
            round_cursor: 0,
            phase1_end: None,
            b,
        }
    }

    fn m(&self) -> usize {
        self.conf.m()
    }

    fn d(&self) -> usize {
        self.conf.d()
    }

    fn null_arm(&self) -> usize {
        self.m() - 1
    }

    /// Next arm of the identification sweep.
    pub fn phase1_select(&mut self) -> Result<usize> {
        if self.phase != Phase::Identify {
            return Err(Error::ContractViolation("identification sweep after phase I ended".into()));
        }
        let arm = self.round_cursor;
        self.round_cursor = (self.round_cursor + 1) % self.m();
        Ok(arm)
    }

    /// Elimination checks after a completed sweep. `t` is the number of
    /// steps played so far and is only recorded.
    pub fn phase1_update(&mut self, t: usize) -> Result<()> {
        if self.phase != Phase::Identify {
            return Ok(());
        }
        let lower = estimators::lcb_lp_value(&self.conf, self.b)?;
        // Ties up to round-off are not separations.
        let slack = ELIMINATION_TOL * lower.abs().max(1.0);
        for i in 0..self.m() {
            if !self.i_hat.contains(&i) && lower > estimators::arm_removal_ucb(&self.conf, self.b, i)? + slack {
                self.i_hat.insert(i);
            }
        }
        for j in 0..self.d() {
            if !self.j_hat.contains(&j) && lower > estimators::constraint_ucb(&self.conf, self.b, j)? + slack {
                self.j_hat.insert(j);
            }
        }
        if self.i_hat.len() + self.j_hat.len() >= self.d() {
            self.phase = Phase::Exhaust;
            self.phase1_end = Some(t);
        }
        Ok(())
    }

    /// Solves `max (μ^U)ᵀx  s.t.  C^L x ≤ rhs, 1ᵀx ≤ cap` over the arms in
    /// `allowed`. Returns `None` when the program without the cap would be
    /// unbounded: some allowed arm has positive optimistic reward and an
    /// all-zero optimistic consumption column.
    fn capped_solution(&self, allowed: &[bool], rhs: &[f64], cap: f64) -> Result<Option<Vec<f64>>> {
        let m = self.m();
        let bd = self.conf.bounds();
        let unbounded = (0..m).any(|i| {
            allowed[i] && bd.mu_upper[i] > 0.0 && (0..self.d()).all(|j| bd.c_lower[j][i] <= 0.0)
        });
        if unbounded {
            return Ok(None);
        }
        let fixed: Vec<usize> = (0..m).filter(|&i| !allowed[i]).collect();
        let rhs: Vec<f64> = rhs.iter().map(|v| v.max(0.0)).collect();
        let mut program = confidence_lp(&bd.mu_upper, &bd.c_lower, rhs, fixed)?;
        program.push_row(vec![1.0; m], cap.max(0.0))?;
        let sol = lp::solve_lp(&program, DEFAULT_PIVOT_TOL)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::ContractViolation(format!(
                "capped LP reported {:?} although x = 0 is feasible",
                sol.status
            )));
        }
        Ok(Some(sol.primal))
    }

    fn optimistic_uniform(&self, allowed: &[bool]) -> Vec<f64> {
        let bd = self.conf.bounds();
        let support: Vec<usize> = (0..self.m()).filter(|&i| allowed[i] && bd.mu_upper[i] > 0.0).collect();
        let mut weights = vec![0.0; self.m()];
        if support.is_empty() {
            weights[self.null_arm()] = 1.0;
        }
        for &i in &support {
            weights[i] = 1.0 / support.len() as f64;
        }
        weights
    }

    /// Sampling weights for the adaptive LP with budget `rhs` and the
    /// implicit time cap `1ᵀx ≤ cap`, normalised by `‖x‖₁`.
    ///
    /// An unbounded program falls back to uniform weights over the allowed
    /// arms with positive optimistic reward; a zero solution to the null arm.
    pub fn adaptive_weights(&self, allowed: &[bool], rhs: &[f64], cap: f64) -> Result<Vec<f64>> {
        let Some(x) = self.capped_solution(allowed, rhs, cap)? else {
            return Ok(self.optimistic_uniform(allowed));
        };
        let mass: f64 = x.iter().sum();
        let mut weights = vec![0.0; self.m()];
        if mass > ZERO_MASS {
            for (w, xi) in weights.iter_mut().zip(&x) {
                *w = xi / mass;
            }
        } else {
            weights[self.null_arm()] = 1.0;
        }
        Ok(weights)
    }

    fn exhaust_allowed(&self) -> Vec<bool> {
        (0..self.m()).map(|i| self.i_hat.contains(&i)).collect()
    }

    /// Phase-II weights given the remaining budget and the steps left.
    pub fn phase2_weights(&self, remaining: &[f64], steps_left: usize) -> Result<Vec<f64>> {
        if self.phase != Phase::Exhaust {
            return Err(Error::ContractViolation("phase II selection during identification".into()));
        }
        self.adaptive_weights(&self.exhaust_allowed(), remaining, steps_left as f64)
    }

    pub fn phase2_select<R: Rng + ?Sized>(&self, remaining: &[f64], steps_left: usize, rng: &mut R) -> Result<usize> {
        Ok(sample_index(&self.phase2_weights(remaining, steps_left)?, rng))
    }

    pub fn one_phase_weights(&self, remaining: &[f64], steps_left: usize) -> Result<Vec<f64>> {
        self.adaptive_weights(&vec![true; self.m()], remaining, steps_left as f64)
    }

    pub fn one_phase_select<R: Rng + ?Sized>(&self, remaining: &[f64], steps_left: usize, rng: &mut R) -> Result<usize> {
        Ok(sample_index(&self.one_phase_weights(remaining, steps_left)?, rng))
    }

    /// Static-budget weights: the optimistic LP at `T·b` divided by `T`, with
    /// the unused mass on the null arm.
    pub fn static_weights(&self) -> Result<Vec<f64>> {
        let horizon = self.conf.horizon as f64;
        let budget = vec![horizon * self.b; self.d()];
        let allowed = vec![true; self.m()];
        let Some(x) = self.capped_solution(&allowed, &budget, horizon)? else {
            return Ok(self.optimistic_uniform(&allowed));
        };
        let mut weights: Vec<f64> = x.iter().map(|v| v / horizon).collect();
        let used: f64 = weights.iter().sum();
        let null = self.null_arm();
        weights[null] += (1.0 - used).max(0.0);
        Ok(weights)
    }

    pub fn baseline_static_select<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        Ok(sample_index(&self.static_weights()?, rng))
    }

    pub fn uniform_select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.m())
    }

    /// Chooses the arm for the next step.
    pub fn select<R: Rng + ?Sized>(&mut self, state: &KnapsackState, rng: &mut R) -> Result<usize> {
        let steps_left = state.horizon() - state.t();
        match self.kind {
            PolicyKind::TwoPhase => match self.phase {
                Phase::Identify => self.phase1_select(),
                Phase::Exhaust => self.phase2_select(state.remaining(), steps_left, rng),
            },
            PolicyKind::OnePhase => self.one_phase_select(state.remaining(), steps_left, rng),
            PolicyKind::StaticLp => self.baseline_static_select(rng),
            PolicyKind::Uniform => Ok(self.uniform_select(rng)),
        }
    }

    /// Feeds back the outcome of an accepted step; `t` counts steps played
    /// including this one. Runs the elimination checks when a sweep ends.
    pub fn observe(&mut self, arm: usize, outcome: &Outcome, t: usize) -> Result<()> {
        self.conf.update(arm, outcome)?;
        if self.kind == PolicyKind::TwoPhase && self.phase == Phase::Identify && self.round_cursor == 0 {
            self.phase1_update(t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{f1, f2};
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn exact(inst: &crate::instance::ProblemInstance, kind: PolicyKind) -> PolicyState {
        PolicyState::with_confidence(kind, ConfidenceState::exact(inst, 100), inst.b)
    }

    #[test]
    fn round_robin_wraps() {
        let mut p = PolicyState::new(PolicyKind::TwoPhase, 3, 2, 0.5, 100, EstimatorConfig::default());
        let arms: Vec<usize> = (0..7).map(|_| p.phase1_select().unwrap()).collect();
        assert_eq!(arms, vec![0, 1, 2, 0, 1, 2, 0]);
        p.phase = Phase::Exhaust;
        assert!(matches!(p.phase1_select(), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn exact_means_identify_f1_in_one_update() {
        let mut p = exact(&f1(), PolicyKind::TwoPhase);
        p.phase1_update(3).unwrap();
        assert_eq!(p.i_hat, [0, 1].into_iter().collect());
        assert!(p.j_hat.is_empty());
        assert_eq!(p.phase, Phase::Exhaust);
        assert_eq!(p.phase1_end, Some(3));
    }

    #[test]
    fn exact_means_identify_f2_slack_row() {
        let inst = f2();
        let mut p = PolicyState::with_confidence(PolicyKind::TwoPhase, ConfidenceState::exact(&inst, 100), inst.b);
        p.phase1_update(3).unwrap();
        assert_eq!(p.i_hat, [0, 1].into_iter().collect());
        assert_eq!(p.j_hat, [2].into_iter().collect());
        assert_eq!(p.phase, Phase::Exhaust);
    }

    #[test]
    fn uninformed_update_adds_nothing() {
        let mut p = PolicyState::new(PolicyKind::TwoPhase, 3, 2, 0.5, 100, EstimatorConfig::default());
        p.phase1_update(0).unwrap();
        assert!(p.i_hat.is_empty() && p.j_hat.is_empty());
        assert_eq!(p.phase, Phase::Identify);
    }

    #[test]
    fn phase2_distributions() {
        let mut p = exact(&f1(), PolicyKind::TwoPhase);
        p.phase1_update(3).unwrap();
        let w = p.phase2_weights(&[50.0, 50.0], 100).unwrap();
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-12);
        assert_eq!(w[2], 0.0);
        assert_eq!(p.phase2_weights(&[0.0, 0.0], 100).unwrap(), vec![0.0, 0.0, 1.0]);
        let w = p.phase2_weights(&[50.0, 10.0], 100).unwrap();
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12);
        let fresh = exact(&f1(), PolicyKind::TwoPhase);
        assert!(matches!(fresh.phase2_weights(&[50.0, 50.0], 100), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn one_phase_distributions() {
        let p = exact(&f1(), PolicyKind::OnePhase);
        let w = p.one_phase_weights(&[50.0, 50.0], 100).unwrap();
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-12);
        // Resource 1 empty: only arms that do not use it can get mass.
        let w = p.one_phase_weights(&[50.0, 0.0], 100).unwrap();
        assert_eq!(w[0], 0.0);
        let cold = PolicyState::new(PolicyKind::OnePhase, 3, 2, 0.5, 100, EstimatorConfig::default());
        let w = cold.one_phase_weights(&[50.0, 50.0], 100).unwrap();
        assert_eq!(w, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn static_and_uniform_baselines() {
        let p = exact(&f1(), PolicyKind::StaticLp);
        let w = p.static_weights().unwrap();
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 0.0, epsilon = 1e-12);
        let p = exact(&f1(), PolicyKind::Uniform);
        let mut counts = [0usize; 3];
        for t in 0..30_000 {
            counts[p.uniform_select(&mut rng::stream(1, t, 0))] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn sampling_follows_weights() {
        let mut hits = [0usize; 3];
        for t in 0..20_000 {
            hits[sample_index(&[0.25, 0.0, 0.75], &mut rng::stream(9, t, 0))] += 1;
        }
        assert_eq!(hits[1], 0);
        assert!((hits[0] as f64 / 20_000.0 - 0.25).abs() < 0.02);
    }

    #[test]
    fn policy_names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
        }
        assert!("greedy".parse::<PolicyKind>().is_err());
    }
}
