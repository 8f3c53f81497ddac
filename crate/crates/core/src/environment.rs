//! The stochastic knapsack process.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{OutcomeLaw, ProblemInstance};

/// Relative slack allowed when comparing consumption against the remaining
/// budget, so that `Σ c = B` accumulated in floating point still counts as
/// feasible.
const BUDGET_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub reward: f64,
    pub consumption: Vec<f64>,
}

/// Draws the reward and consumption of one play of `arm`.
///
/// The time row always consumes exactly `b`; every other entry follows the
/// instance's law.
pub fn sample_outcome<R: Rng + ?Sized>(inst: &ProblemInstance, arm: usize, rng: &mut R) -> Outcome {
    let draw = |mean: f64, rng: &mut R| match inst.dist {
        OutcomeLaw::Deterministic => mean,
        OutcomeLaw::Bernoulli => {
            if rng.gen::<f64>() < mean {
                1.0
            } else {
                0.0
            }
        }
    };
    let reward = draw(inst.mu[arm], rng);
    let mut consumption = Vec::with_capacity(inst.d);
    consumption.push(inst.b);
    for j in 1..inst.d {
        consumption.push(draw(inst.c[j][arm], rng));
    }
    Outcome { reward, consumption }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    /// The outcome would overdraw a resource; the episode ends before it.
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackState {
    initial: Vec<f64>,
    remaining: Vec<f64>,
    t: usize,
    horizon: usize,
    stopped: Option<usize>,
    cumulative_reward: f64,
}

impl KnapsackState {
    pub fn new(inst: &ProblemInstance, horizon: usize) -> Self {
        let b0 = vec![inst.budget(horizon); inst.d];
        Self {
            initial: b0.clone(),
            remaining: b0,
            t: 0,
            horizon,
            stopped: if horizon == 0 { Some(0) } else { None },
            cumulative_reward: 0.0,
        }
    }

    /// Starts from an arbitrary remaining budget at step `t`.
    pub fn from_parts(initial: Vec<f64>, remaining: Vec<f64>, t: usize, horizon: usize) -> Result<Self> {
        if initial.len() != remaining.len() {
            return Err(Error::Dimension("initial and remaining budgets differ in length".into()));
        }
        if t > horizon {
            return Err(Error::InvalidInput(format!("t = {t} beyond horizon {horizon}")));
        }
        Ok(Self {
            initial,
            remaining,
            t,
            horizon,
            stopped: (t == horizon).then_some(t),
            cumulative_reward: 0.0,
        })
    }

    pub fn remaining(&self) -> &[f64] {
        &self.remaining
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn stopped(&self) -> Option<usize> {
        self.stopped
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped.is_some()
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative_reward
    }

    /// Applies one outcome. A round that would overdraw any resource is not
    /// credited and freezes the state with `τ = t`.
    pub fn step(&mut self, outcome: &Outcome) -> Result<StepOutcome> {
        if let Some(tau) = self.stopped {
            return Err(Error::ContractViolation(format!("episode already stopped at {tau}")));
        }
        if outcome.consumption.len() != self.remaining.len() {
            return Err(Error::Dimension(format!(
                "consumption has {} entries, expected {}",
                outcome.consumption.len(),
                self.remaining.len()
            )));
        }
        let violated = self
            .remaining
            .iter()
            .zip(&outcome.consumption)
            .zip(&self.initial)
            .any(|((r, c), b0)| r - c < -BUDGET_EPS * b0.max(1.0));
        if violated {
            self.stopped = Some(self.t);
            return Ok(StepOutcome::Violated);
        }
        for (r, c) in self.remaining.iter_mut().zip(&outcome.consumption) {
            *r = (*r - c).max(0.0);
        }
        self.cumulative_reward += outcome.reward;
        self.t += 1;
        if self.t == self.horizon {
            self.stopped = Some(self.horizon);
        }
        Ok(StepOutcome::Accepted)
    }

    /// Average remaining budget per remaining step, `B^(t) / (T − t)`.
    pub fn remaining_ratio(&self) -> Result<Vec<f64>> {
        if self.t >= self.horizon {
            return Err(Error::InvalidInput("remaining ratio undefined at t = T".into()));
        }
        let left = (self.horizon - self.t) as f64;
        Ok(self.remaining.iter().map(|r| r / left).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::f1;
    use crate::rng;

    fn outcome(c: &[f64]) -> Outcome {
        Outcome {
            reward: 1.0,
            consumption: c.to_vec(),
        }
    }

    #[test]
    fn point_mass_and_null_arm_outcomes() {
        let det = f1().with_dist(OutcomeLaw::Deterministic);
        let mut r = rng::stream(0, 0, 0);
        for _ in 0..10 {
            assert_eq!(sample_outcome(&det, 0, &mut r), Outcome { reward: 0.8, consumption: vec![0.5, 0.8] });
            assert_eq!(sample_outcome(&f1(), 2, &mut r), Outcome { reward: 0.0, consumption: vec![0.5, 0.0] });
        }
    }

    #[test]
    fn bernoulli_means_match() {
        let inst = f1();
        let mut r = rng::stream(11, 0, 1);
        let n = 100_000;
        let (mut rew, mut c1) = (0.0, 0.0);
        for _ in 0..n {
            let o = sample_outcome(&inst, 1, &mut r);
            assert_eq!(o.consumption[0], 0.5);
            rew += o.reward;
            c1 += o.consumption[1];
        }
        let n = n as f64;
        let sd = |p: f64| (p * (1.0 - p) / n).sqrt();
        assert!((rew / n - 0.5).abs() < 3.0 * sd(0.5));
        assert!((c1 / n - 0.2).abs() < 3.0 * sd(0.2));
    }

    #[test]
    fn violation_stops_without_credit() {
        let mut s = KnapsackState::from_parts(vec![5.0, 5.0], vec![1.0, 0.3], 6, 10).unwrap();
        assert_eq!(s.step(&outcome(&[0.5, 0.4])).unwrap(), StepOutcome::Violated);
        assert_eq!(s.stopped(), Some(6));
        assert_eq!(s.cumulative_reward(), 0.0);
        assert_eq!(s.remaining(), &[1.0, 0.3]);
        assert!(matches!(s.step(&outcome(&[0.0, 0.0])), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn exact_exhaustion_is_feasible() {
        let mut s = KnapsackState::from_parts(vec![1.0], vec![0.5], 0, 10).unwrap();
        assert_eq!(s.step(&outcome(&[0.5])).unwrap(), StepOutcome::Accepted);
        assert_eq!(s.remaining(), &[0.0]);
        assert!(!s.is_stopped());
    }

    #[test]
    fn balanced_deterministic_run_exhausts_exactly() {
        let inst = f1().with_dist(OutcomeLaw::Deterministic);
        let horizon = 100;
        let mut s = KnapsackState::new(&inst, horizon);
        let mut r = rng::stream(0, 0, 0);
        for t in 0..horizon {
            let ratio = s.remaining_ratio().unwrap();
            assert!((ratio[0] - 0.5).abs() < 1e-12);
            // The ratio of resource 1 is exactly b after every complete pair.
            if t % 2 == 0 {
                assert!((ratio[1] - 0.5).abs() < 1e-12);
            }
            let o = sample_outcome(&inst, t % 2, &mut r);
            assert_eq!(s.step(&o).unwrap(), StepOutcome::Accepted);
        }
        assert_eq!(s.stopped(), Some(horizon));
        assert!(s.remaining().iter().all(|r| r.abs() < 1e-9));
        assert!((s.cumulative_reward() - 65.0).abs() < 1e-9);
    }

    #[test]
    fn remaining_ratio_cases() {
        let s = KnapsackState::new(&f1(), 100);
        assert_eq!(s.remaining_ratio().unwrap(), vec![0.5, 0.5]);
        let s = KnapsackState::from_parts(vec![50.0, 50.0], vec![30.0, 20.0], 50, 100).unwrap();
        assert_eq!(s.remaining_ratio().unwrap(), vec![0.6, 0.4]);
        let s = KnapsackState::from_parts(vec![50.0], vec![0.0], 100, 100).unwrap();
        assert!(matches!(s.remaining_ratio(), Err(Error::InvalidInput(_))));
    }
}
