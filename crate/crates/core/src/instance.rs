//! Problem instances, the LP family built from them, and the
//! problem-dependent quantities that govern how hard an instance is.
//!
//! Conventions: constraint 0 is the time resource (every arm consumes exactly
//! `b` of it) and arm `m - 1` is the null arm (`μ = 0`, consumption `(b, 0, …, 0)`).
//! Budgets are `B = T·b` on every row.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use rand::distributions::{Distribution as _, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpSolution, DEFAULT_FEAS_TOL, DEFAULT_PIVOT_TOL};

const MEAN_TOL: f64 = 1e-12;

/// Outcome law of each reward/consumption entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeLaw {
    /// Independent Bernoulli draws with the entry's mean.
    #[default]
    Bernoulli,
    /// Point mass at the mean.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub label: String,
    /// Arms, including the null arm.
    pub m: usize,
    /// Resources, including the time resource.
    pub d: usize,
    pub b: f64,
    pub mu: Vec<f64>,
    /// Consumption means, `d × m`.
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    pub dist: OutcomeLaw,
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

/// Builds an instance from the factual arms and resources by prepending the
/// time row and appending the null arm.
///
/// `raw_c` is `d_raw × m_raw`. The result uses Bernoulli outcomes and an empty
/// label; see [`ProblemInstance::with_dist`] and [`ProblemInstance::with_label`].
pub fn augment_with_null_arm(raw_mu: &[f64], raw_c: &[Vec<f64>], b: f64) -> Result<ProblemInstance> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::Validation(format!("budget rate b must lie in (0, 1], got {b}")));
    }
    let m_raw = raw_mu.len();
    if let Some(v) = raw_mu.iter().find(|v| !in_unit(**v)) {
        return Err(Error::Validation(format!("mean reward {v} outside [0, 1]")));
    }
    for (j, row) in raw_c.iter().enumerate() {
        if row.len() != m_raw {
            return Err(Error::Dimension(format!(
                "consumption row {j} has {} entries, expected {m_raw}",
                row.len()
            )));
        }
        if let Some(v) = row.iter().find(|v| !in_unit(**v)) {
            return Err(Error::Validation(format!("mean consumption {v} outside [0, 1]")));
        }
    }
    let m = m_raw + 1;
    let d = raw_c.len() + 1;
    let mut c = Vec::with_capacity(d);
    c.push(vec![b; m]);
    for row in raw_c {
        let mut r = row.clone();
        r.push(0.0);
        c.push(r);
    }
    let mut mu = raw_mu.to_vec();
    mu.push(0.0);
    let inst = ProblemInstance {
        label: String::new(),
        m,
        d,
        b,
        mu,
        c,
        dist: OutcomeLaw::Bernoulli,
    };
    inst.validate()?;
    Ok(inst)
}

impl ProblemInstance {
    pub fn with_dist(mut self, dist: OutcomeLaw) -> Self {
        self.dist = dist;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn null_arm(&self) -> usize {
        self.m - 1
    }

    pub fn budget(&self, horizon: usize) -> f64 {
        horizon as f64 * self.b
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.d == 0 {
            return Err(Error::Validation("instance needs at least the null arm and time row".into()));
        }
        if self.mu.len() != self.m {
            return Err(Error::Dimension(format!("mu has {} entries, m = {}", self.mu.len(), self.m)));
        }
        if self.c.len() != self.d || self.c.iter().any(|r| r.len() != self.m) {
            return Err(Error::Dimension(format!("C must be {} x {}", self.d, self.m)));
        }
        if !(self.b > 0.0 && self.b <= 1.0) {
            return Err(Error::Validation(format!("budget rate b must lie in (0, 1], got {}", self.b)));
        }
        if self.mu.iter().chain(self.c.iter().flatten()).any(|v| !in_unit(*v)) {
            return Err(Error::Validation("all means must lie in [0, 1]".into()));
        }
        if self.c[0].iter().any(|v| (v - self.b).abs() > MEAN_TOL) {
            return Err(Error::Validation("time row must equal b for every arm".into()));
        }
        let null = self.null_arm();
        if self.mu[null].abs() > MEAN_TOL || (1..self.d).any(|j| self.c[j][null].abs() > MEAN_TOL) {
            return Err(Error::Validation(
                "last arm must be the null arm: zero reward, consumption (b, 0, ..., 0)".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    fn check_arm(&self, i: usize) -> Result<()> {
        if i >= self.m {
            return Err(Error::InvalidInput(format!("arm {i} out of range for m = {}", self.m)));
        }
        Ok(())
    }

    fn check_row(&self, j: usize) -> Result<()> {
        if j >= self.d {
            return Err(Error::InvalidInput(format!("constraint {j} out of range for d = {}", self.d)));
        }
        Ok(())
    }
}

/// Reference instances used throughout the tests and docs.
pub mod fixtures {
    use super::*;

    /// Two factual arms, one factual resource, `b = 1/2`.
    ///
    /// `μ = (0.8, 0.5, 0)`, `C = [[0.5, 0.5, 0.5], [0.8, 0.2, 0]]`. Both
    /// factual arms are optimal and both constraints bind.
    pub fn f1() -> ProblemInstance {
        augment_with_null_arm(&[0.8, 0.5], &[vec![0.8, 0.2]], 0.5)
            .expect("valid fixture")
            .with_label("F1")
    }

    /// F1 plus a slack resource with consumption `(0.1, 0.1, 0)`.
    pub fn f2() -> ProblemInstance {
        augment_with_null_arm(&[0.8, 0.5], &[vec![0.8, 0.2], vec![0.1, 0.1]], 0.5)
            .expect("valid fixture")
            .with_label("F2")
    }
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon T must be at least 1".into()));
    }
    Ok(())
}

/// `max μᵀx  s.t.  Cx ≤ T·b·1, x ≥ 0`.
pub fn build_primal_lp(inst: &ProblemInstance, horizon: usize) -> Result<LinearProgram> {
    check_horizon(horizon)?;
    LinearProgram::new(inst.mu.clone(), inst.c.clone(), vec![inst.budget(horizon); inst.d])
}

/// The primal LP with arm `i` removed (`x_i = 0`).
pub fn build_arm_removal_lp(inst: &ProblemInstance, horizon: usize, i: usize) -> Result<LinearProgram> {
    inst.check_arm(i)?;
    build_primal_lp(inst, horizon)?.with_fixed_to_zero([i])
}

/// `max μᵀx − (B − C_j x)` over the primal feasible set: the primal form of
/// the left-over-penalised LP for constraint `j`.
pub fn build_binding_penalty_lp(inst: &ProblemInstance, horizon: usize, j: usize) -> Result<LinearProgram> {
    inst.check_row(j)?;
    let mut lp = build_primal_lp(inst, horizon)?;
    for (obj, cj) in lp.objective.iter_mut().zip(&inst.c[j]) {
        *obj += cj;
    }
    Ok(lp.with_offset(-inst.budget(horizon)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetClassification {
    /// Arms with positive mass in the LP optimum.
    pub i_star: BTreeSet<usize>,
    pub i_prime: BTreeSet<usize>,
    /// Constraints exhausted by the LP optimum.
    pub j_star: BTreeSet<usize>,
    pub j_prime: BTreeSet<usize>,
}

/// Splits arms and constraints by the optimal solution, with thresholds
/// `tol·T` so the split is invariant to scaling the horizon.
pub fn classify_sets(sol: &LpSolution, horizon: usize, tol: f64) -> Result<SetClassification> {
    if !sol.is_optimal() {
        return Err(Error::InvalidInput(format!(
            "cannot classify a {:?} solution",
            sol.status
        )));
    }
    let cut = tol * horizon as f64;
    let (i_star, i_prime) = (0..sol.primal.len()).partition(|&i| sol.primal[i] > cut);
    let (j_star, j_prime) = (0..sol.slacks.len()).partition(|&j| sol.slacks[j] < cut);
    Ok(SetClassification {
        i_star,
        i_prime,
        j_star,
        j_prime,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDiagnostics {
    pub horizon: usize,
    pub opt_lp_per_t: f64,
    pub x_star_per_t: Vec<f64>,
    pub y_star: Vec<f64>,
    #[serde(flatten)]
    pub sets: SetClassification,
    /// Reduced costs `c_iᵀy* − μ_i`.
    pub delta_i: Vec<f64>,
    /// `None` when both `I*` and `J′` are empty.
    pub delta: Option<f64>,
    /// Smallest singular value of `C[J*, I*]` (0 when either set is empty).
    pub sigma: f64,
    pub chi: Option<f64>,
    pub theta: Option<f64>,
    pub nondegenerate: bool,
    pub opt_i_per_t: Vec<f64>,
    pub opt_j_per_t: Vec<f64>,
    pub warnings: Vec<String>,
}

fn solve_optimal(lp: &LinearProgram) -> Result<LpSolution> {
    let sol = lp::solve_lp(lp, DEFAULT_PIVOT_TOL)?;
    if !sol.is_optimal() {
        return Err(Error::InvalidInput(format!("LP unexpectedly {:?}", sol.status)));
    }
    Ok(sol)
}

pub fn min_singular_value(rows: &[Vec<f64>]) -> f64 {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(r, c, |i, j| rows[i][j]);
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// All problem-dependent quantities of `inst` at horizon `horizon`.
///
/// Degenerate instances still produce diagnostics; `nondegenerate` is false
/// and `warnings` says why. Uniqueness of the optimum is judged by a
/// heuristic: a sub-optimal arm with (near) zero reduced cost, or a basic
/// variable at (near) zero level, marks the instance degenerate.
pub fn diagnostics(inst: &ProblemInstance, horizon: usize, tol: f64) -> Result<InstanceDiagnostics> {
    inst.validate()?;
    check_horizon(horizon)?;
    let t = horizon as f64;
    let primal = build_primal_lp(inst, horizon)?;
    let sol = solve_optimal(&primal)?;
    let sets = classify_sets(&sol, horizon, tol)?;
    let mut warnings = Vec::new();

    let opt_lp = sol.objective_value;
    let y_star = sol.dual.clone();
    let delta_i: Vec<f64> = (0..inst.m)
        .map(|i| (0..inst.d).map(|j| inst.c[j][i] * y_star[j]).sum::<f64>() - inst.mu[i])
        .collect();

    let opt_i = (0..inst.m)
        .map(|i| Ok(solve_optimal(&build_arm_removal_lp(inst, horizon, i)?)?.objective_value))
        .collect::<Result<Vec<f64>>>()?;
    let opt_j = (0..inst.d)
        .map(|j| Ok(solve_optimal(&build_binding_penalty_lp(inst, horizon, j)?)?.objective_value))
        .collect::<Result<Vec<f64>>>()?;

    let best_competitor = sets
        .i_star
        .iter()
        .map(|&i| opt_i[i])
        .chain(sets.j_prime.iter().map(|&j| opt_j[j]))
        .fold(f64::NEG_INFINITY, f64::max);
    let delta = if best_competitor == f64::NEG_INFINITY {
        warnings.push("both I* and J' are empty; delta is undefined".into());
        None
    } else {
        if sets.j_prime.is_empty() {
            warnings.push("J' is empty; delta uses optimal arms only".into());
        }
        if sets.i_star.is_empty() {
            warnings.push("I* is empty; delta uses non-binding constraints only".into());
        }
        Some((opt_lp - best_competitor) / t)
    };

    let sub: Vec<Vec<f64>> = sets
        .j_star
        .iter()
        .map(|&j| sets.i_star.iter().map(|&i| inst.c[j][i]).collect())
        .collect();
    let sigma = min_singular_value(&sub);

    let chi = sets
        .i_star
        .iter()
        .map(|&i| sol.primal[i] / t)
        .reduce(f64::min);

    let theta = match (delta, chi) {
        (Some(delta), Some(chi)) => {
            let (m, d) = (inst.m as f64, inst.d as f64);
            let first = sigma.powi(2).min(1.0) * chi.min(delta) / (12.0 * (m * m).min(d * d));
            let second = (2.0 + 1.0 / inst.b).powi(-2) * delta / 5.0;
            Some(first.min(second))
        }
        _ => None,
    };

    let mut nondegenerate = true;
    if sets.i_star.len() != sets.j_star.len() {
        nondegenerate = false;
        warnings.push(format!(
            "|I*| = {} differs from |J*| = {}",
            sets.i_star.len(),
            sets.j_star.len()
        ));
    }
    if let Some(&i) = sets.i_prime.iter().find(|&&i| delta_i[i] < tol) {
        nondegenerate = false;
        warnings.push(format!("sub-optimal arm {i} has zero reduced cost; optimum may not be unique"));
    }
    let cut = tol * t;
    for &v in &sol.basis {
        let level = if v < inst.m { sol.primal[v] } else { sol.slacks[v - inst.m] };
        if level < cut {
            nondegenerate = false;
            warnings.push(format!("basic variable {v} is at zero level (primal degeneracy)"));
        }
    }
    match delta {
        Some(dl) if dl > tol => {}
        Some(dl) => {
            nondegenerate = false;
            warnings.push(format!("delta = {dl} is not positive"));
        }
        None => nondegenerate = false,
    }
    if sigma <= tol {
        nondegenerate = false;
        warnings.push("C[J*, I*] is singular".into());
    }

    Ok(InstanceDiagnostics {
        horizon,
        opt_lp_per_t: opt_lp / t,
        x_star_per_t: sol.primal.iter().map(|x| x / t).collect(),
        y_star,
        sets,
        delta_i,
        delta,
        sigma,
        chi,
        theta,
        nondegenerate,
        opt_i_per_t: opt_i.iter().map(|v| v / t).collect(),
        opt_j_per_t: opt_j.iter().map(|v| v / t).collect(),
        warnings,
    })
}

/// Attempts allowed before [`generate_random_instance`] gives up.
pub const GENERATION_ATTEMPTS: usize = 100;
/// Smallest `δ` accepted by the generator.
pub const MIN_GENERATED_DELTA: f64 = 0.02;

/// Draws a random non-degenerate instance with all raw means uniform on
/// `[0.05, 0.95]`, redrawing until `δ ≥ 0.02`.
pub fn generate_random_instance(m_raw: usize, d_raw: usize, b: f64, seed: u64) -> Result<ProblemInstance> {
    if m_raw == 0 || d_raw == 0 {
        return Err(Error::Validation("m_raw and d_raw must be at least 1".into()));
    }
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::Validation(format!("budget rate b must lie in (0, 1], got {b}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let law = Uniform::new_inclusive(0.05, 0.95);
    let mut last = Vec::new();
    for attempt in 0..GENERATION_ATTEMPTS {
        let mu: Vec<f64> = (0..m_raw).map(|_| law.sample(&mut rng)).collect();
        let c: Vec<Vec<f64>> = (0..d_raw)
            .map(|_| (0..m_raw).map(|_| law.sample(&mut rng)).collect())
            .collect();
        let inst = augment_with_null_arm(&mu, &c, b)?
            .with_label(format!("random-m{m_raw}-d{d_raw}-b{b}-seed{seed}"));
        let diag = diagnostics(&inst, 1, DEFAULT_FEAS_TOL)?;
        match diag.delta {
            Some(delta) if diag.nondegenerate && delta >= MIN_GENERATED_DELTA => return Ok(inst),
            Some(delta) if diag.nondegenerate => {
                last = vec![format!("attempt {attempt}: delta = {delta:.4} below {MIN_GENERATED_DELTA}")];
            }
            _ => last = diag.warnings,
        }
    }
    Err(Error::GenerationFailure {
        attempts: GENERATION_ATTEMPTS,
        warnings: last,
    })
}

#[cfg(test)]
mod tests {
    use super::fixtures::{f1, f2};
    use super::*;
    use approx::assert_abs_diff_eq;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn value(lp: &LinearProgram) -> f64 {
        lp::solve_lp(lp, DEFAULT_PIVOT_TOL).unwrap().objective_value
    }

    #[test]
    fn augmentation_builds_f1() {
        let inst = f1();
        assert_eq!((inst.m, inst.d), (3, 2));
        assert_eq!(inst.c, vec![vec![0.5, 0.5, 0.5], vec![0.8, 0.2, 0.0]]);
        assert_eq!(inst.mu, vec![0.8, 0.5, 0.0]);
    }

    #[test]
    fn empty_augmentation_is_null_only() {
        let inst = augment_with_null_arm(&[], &[], 1.0).unwrap();
        assert_eq!((inst.m, inst.d), (1, 1));
        assert_eq!(inst.c, vec![vec![1.0]]);
    }

    #[test]
    fn out_of_range_means_are_rejected() {
        assert!(matches!(
            augment_with_null_arm(&[0.3], &[vec![1.2]], 0.5),
            Err(Error::Validation(_))
        ));
        assert!(matches!(augment_with_null_arm(&[1.3], &[vec![0.2]], 0.5), Err(Error::Validation(_))));
        assert!(matches!(augment_with_null_arm(&[0.3], &[vec![0.2]], 0.0), Err(Error::Validation(_))));
        assert!(matches!(augment_with_null_arm(&[0.3], &[vec![0.2, 0.1]], 0.5), Err(Error::Dimension(_))));
    }

    #[test]
    fn primal_lp_values() {
        let lp100 = build_primal_lp(&f1(), 100).unwrap();
        assert_eq!(lp100.rhs, vec![50.0, 50.0]);
        assert_abs_diff_eq!(value(&lp100), 65.0, epsilon = 1e-9);
        assert_abs_diff_eq!(value(&build_primal_lp(&f1(), 1).unwrap()), 0.65, epsilon = 1e-12);
        let null_only = augment_with_null_arm(&[], &[], 1.0).unwrap();
        assert_eq!(value(&build_primal_lp(&null_only, 10).unwrap()), 0.0);
        assert!(build_primal_lp(&f1(), 0).is_err());
    }

    #[test]
    fn arm_removal_values() {
        let inst = f1();
        let v: Vec<f64> = (0..3).map(|i| value(&build_arm_removal_lp(&inst, 100, i).unwrap())).collect();
        assert_abs_diff_eq!(v[0], 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[1], 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[2], 65.0, epsilon = 1e-9);
        assert!(matches!(build_arm_removal_lp(&inst, 100, 3), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn binding_penalty_values() {
        assert_abs_diff_eq!(value(&build_binding_penalty_lp(&f1(), 100, 0).unwrap()), 65.0, epsilon = 1e-9);
        assert_abs_diff_eq!(value(&build_binding_penalty_lp(&f1(), 100, 1).unwrap()), 65.0, epsilon = 1e-9);
        assert_abs_diff_eq!(value(&build_binding_penalty_lp(&f2(), 100, 2).unwrap()), 25.0, epsilon = 1e-9);
        assert!(matches!(build_binding_penalty_lp(&f1(), 100, 2), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn classification_of_fixtures() {
        let s = lp::solve_lp(&build_primal_lp(&f1(), 100).unwrap(), DEFAULT_PIVOT_TOL).unwrap();
        let c = classify_sets(&s, 100, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(c.i_star, set(&[0, 1]));
        assert_eq!(c.i_prime, set(&[2]));
        assert_eq!(c.j_star, set(&[0, 1]));
        assert!(c.j_prime.is_empty());

        let s = lp::solve_lp(&build_primal_lp(&f2(), 100).unwrap(), DEFAULT_PIVOT_TOL).unwrap();
        let c = classify_sets(&s, 100, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(c.i_star, set(&[0, 1]));
        assert_eq!(c.j_star, set(&[0, 1]));
        assert_eq!(c.j_prime, set(&[2]));

        let null_only = augment_with_null_arm(&[], &[], 1.0).unwrap();
        let s = lp::solve_lp(&build_primal_lp(&null_only, 10).unwrap(), DEFAULT_PIVOT_TOL).unwrap();
        let c = classify_sets(&s, 10, DEFAULT_FEAS_TOL).unwrap();
        assert!(c.i_star.is_empty());
        assert_eq!(c.j_prime, set(&[0]));
    }

    #[test]
    fn classification_rejects_non_optimal() {
        let p = LinearProgram::new(vec![1.0], vec![vec![0.0]], vec![1.0]).unwrap();
        let s = lp::solve_lp(&p, DEFAULT_PIVOT_TOL).unwrap();
        assert!(matches!(classify_sets(&s, 1, 1e-6), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn f1_diagnostics() {
        let d = diagnostics(&f1(), 100, DEFAULT_FEAS_TOL).unwrap();
        assert!(d.nondegenerate, "{:?}", d.warnings);
        assert_abs_diff_eq!(d.opt_lp_per_t, 0.65, epsilon = 1e-12);
        assert_abs_diff_eq!(d.delta.unwrap(), 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(d.chi.unwrap(), 0.5, epsilon = 1e-12);
        for (got, want) in d.delta_i.iter().zip([0.0, 0.0, 0.4]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        // Eigenvalues of C Cᵀ for C = [[.5, .5], [.8, .2]]: trace 1.18, det 0.09.
        let lambda_min: f64 = (1.18 - (1.18f64 * 1.18 - 4.0 * 0.09).sqrt()) / 2.0;
        assert_abs_diff_eq!(d.sigma, lambda_min.sqrt(), epsilon = 1e-12);
        let theta1 = lambda_min.min(1.0) * 0.15 / (12.0 * 4.0);
        let theta2 = 0.15 / (16.0 * 5.0);
        assert_abs_diff_eq!(d.theta.unwrap(), theta1.min(theta2), epsilon = 1e-12);
    }

    #[test]
    fn duplicate_arms_are_degenerate() {
        let inst = augment_with_null_arm(&[0.6, 0.6], &[vec![0.3, 0.3]], 0.5).unwrap();
        let d = diagnostics(&inst, 100, DEFAULT_FEAS_TOL).unwrap();
        assert!(!d.nondegenerate);
        assert!(!d.warnings.is_empty());
    }

    #[test]
    fn null_only_diagnostics_are_degenerate() {
        let inst = augment_with_null_arm(&[], &[], 1.0).unwrap();
        let d = diagnostics(&inst, 10, DEFAULT_FEAS_TOL).unwrap();
        assert!(!d.nondegenerate);
        assert!(d.chi.is_none());
    }

    #[test]
    fn generator_is_deterministic_and_filters() {
        let a = generate_random_instance(2, 1, 0.5, 7).unwrap();
        let b = generate_random_instance(2, 1, 0.5, 7).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let d = diagnostics(&a, 1, DEFAULT_FEAS_TOL).unwrap();
        assert!(d.nondegenerate);
        assert!(d.delta.unwrap() >= MIN_GENERATED_DELTA);
    }

    #[test]
    fn single_arm_generation() {
        let inst = generate_random_instance(1, 1, 1.0, 0).unwrap();
        let d = diagnostics(&inst, 1, DEFAULT_FEAS_TOL).unwrap();
        assert!(inst.mu[0] > 0.0);
        assert_eq!(d.sets.i_star, set(&[0]));
    }

    #[test]
    fn generator_validates_arguments() {
        assert!(matches!(generate_random_instance(0, 1, 0.5, 0), Err(Error::Validation(_))));
        assert!(matches!(generate_random_instance(1, 1, 0.0, 0), Err(Error::Validation(_))));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let inst = f2().with_dist(OutcomeLaw::Deterministic);
        let back = ProblemInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(inst, back);
        let json = inst.to_json().unwrap();
        assert!(json.contains("\"C\"") && json.contains("\"deterministic\""));
        let mut broken = inst.clone();
        broken.c[0][1] = 0.4;
        assert!(ProblemInstance::from_json(&serde_json::to_string(&broken).unwrap()).is_err());
    }
}
