//! Seeded episodes, replication sweeps and regret reports.
//!
//! Regret is always measured against the LP benchmark `OPT_LP`, which upper
//! bounds the value of the optimal dynamic policy; reported regret therefore
//! overstates true regret.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::{sample_outcome, KnapsackState, StepOutcome};
use crate::error::{Error, Result};
use crate::estimators::EstimatorConfig;
use crate::instance::{InstanceDiagnostics, ProblemInstance};
use crate::policy::{Phase, PolicyKind, PolicyState};
use crate::rng::{self, POLICY_LANE};

/// Label written in every report header.
pub const BENCHMARK: &str = "opt_lp";

/// Number of `B^(t)/(T − t)` samples kept per episode.
pub const RATIO_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// Interval tightening; `None` picks the policy default (on for
    /// `one_phase`, off otherwise).
    pub monotone: Option<bool>,
    pub radius_scale: f64,
    /// Keep per-step records in the trace.
    pub record_steps: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            monotone: None,
            radius_scale: 1.0,
            record_steps: false,
        }
    }
}

impl EpisodeConfig {
    pub fn estimator_for(&self, kind: PolicyKind) -> EstimatorConfig {
        EstimatorConfig {
            monotone: self.monotone.unwrap_or(kind == PolicyKind::OnePhase),
            radius_scale: self.radius_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    pub arm: usize,
    pub reward: f64,
    pub consumption: Vec<f64>,
    pub remaining: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub t: usize,
    pub ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    pub policy: PolicyKind,
    pub horizon: usize,
    pub instance: String,
    #[serde(skip)]
    pub steps: Vec<StepRecord>,
    pub tau: usize,
    pub total_reward: f64,
    pub phase1_end: Option<usize>,
    /// Resources ran out while still identifying.
    pub exhausted_in_phase1: bool,
    pub i_hat: BTreeSet<usize>,
    pub j_hat: BTreeSet<usize>,
    /// Accepted plays per arm; sums to `tau`.
    pub counts: Vec<u64>,
    pub final_remaining: Vec<f64>,
    pub b_ratio_samples: Vec<RatioSample>,
}

/// What an observer sees after each accepted step.
pub struct EpisodeView<'a> {
    pub t: usize,
    pub arm: usize,
    pub policy: &'a PolicyState,
    pub state: &'a KnapsackState,
}

pub fn run_episode(
    inst: &ProblemInstance,
    kind: PolicyKind,
    horizon: usize,
    seed: u64,
    cfg: &EpisodeConfig,
) -> Result<RunTrace> {
    run_episode_observed(inst, kind, horizon, seed, cfg, |_| Ok(()))
}

/// Runs one episode to its stopping time, calling `observer` after every
/// accepted step. Deterministic in `(inst, kind, horizon, seed, cfg)`.
pub fn run_episode_observed<F>(
    inst: &ProblemInstance,
    kind: PolicyKind,
    horizon: usize,
    seed: u64,
    cfg: &EpisodeConfig,
    mut observer: F,
) -> Result<RunTrace>
where
    F: FnMut(&EpisodeView<'_>) -> Result<()>,
{
    inst.validate()?;
    if horizon < inst.m {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} shorter than the number of arms {}",
            inst.m
        )));
    }
    let mut state = KnapsackState::new(inst, horizon);
    let mut policy = PolicyState::new(kind, inst.m, inst.d, inst.b, horizon, cfg.estimator_for(kind));
    let mut counts = vec![0u64; inst.m];
    let mut steps = Vec::new();
    let stride = horizon.div_ceil(RATIO_SAMPLES).max(1);
    let mut ratios = vec![RatioSample {
        t: 0,
        ratio: state.remaining_ratio()?,
    }];
    let wrap = |step: usize, e: Error| Error::Episode {
        step,
        policy: kind.name().to_string(),
        source: Box::new(e),
    };

    while !state.is_stopped() {
        let t = state.t();
        let arm = policy
            .select(&state, &mut rng::stream(seed, t as u64, POLICY_LANE))
            .map_err(|e| wrap(t + 1, e))?;
        let outcome = sample_outcome(inst, arm, &mut rng::stream(seed, t as u64, arm as u64));
        if state.step(&outcome).map_err(|e| wrap(t + 1, e))? == StepOutcome::Violated {
            break;
        }
        counts[arm] += 1;
        let now = state.t();
        policy.observe(arm, &outcome, now).map_err(|e| wrap(now, e))?;
        if cfg.record_steps {
            steps.push(StepRecord {
                t: now,
                arm,
                reward: outcome.reward,
                consumption: outcome.consumption,
                remaining: state.remaining().to_vec(),
            });
        }
        if now < horizon && now.is_multiple_of(stride) {
            ratios.push(RatioSample {
                t: now,
                ratio: state.remaining_ratio()?,
            });
        }
        observer(&EpisodeView {
            t: now,
            arm,
            policy: &policy,
            state: &state,
        })
        .map_err(|e| wrap(now, e))?;
    }

    let tau = state.stopped().unwrap_or(state.t());
    Ok(RunTrace {
        seed,
        policy: kind,
        horizon,
        instance: inst.label.clone(),
        steps,
        tau,
        total_reward: state.cumulative_reward(),
        phase1_end: policy.phase1_end,
        exhausted_in_phase1: kind == PolicyKind::TwoPhase && policy.phase == Phase::Identify && tau < horizon,
        i_hat: policy.i_hat,
        j_hat: policy.j_hat,
        counts,
        final_remaining: state.remaining().to_vec(),
        b_ratio_samples: ratios,
    })
}

/// Seed of replication `rep` at horizon `horizon`. Policies share seeds, so
/// they face the same outcome streams.
pub fn replication_seed(master_seed: u64, horizon: usize, rep: usize) -> u64 {
    rng::derive_seed(&[master_seed, horizon as u64, rep as u64])
}

/// `reps` independent episodes in parallel, returned in replication order.
pub fn run_replications(
    inst: &ProblemInstance,
    kind: PolicyKind,
    horizon: usize,
    reps: usize,
    master_seed: u64,
    cfg: &EpisodeConfig,
) -> Result<Vec<RunTrace>> {
    (0..reps)
        .into_par_iter()
        .map(|rep| run_episode(inst, kind, horizon, replication_seed(master_seed, horizon, rep), cfg))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    /// `None` with fewer than two samples.
    pub stderr: Option<f64>,
}

impl MeanStderr {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = (values.len() >= 2).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        });
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub benchmark: String,
    pub policy: PolicyKind,
    pub horizon: usize,
    pub reps: usize,
    pub regret: MeanStderr,
    /// Mean of `Σ_{i∈I′} n_i(τ)·Δ_i`.
    pub subopt_term: MeanStderr,
    /// Mean of `Σ_{j∈J*} B_j^(τ)·y*_j`.
    pub leftover_term: MeanStderr,
    pub bound: MeanStderr,
    /// `sqrt(se(regret)² + se(bound)²)`.
    pub combined_stderr: Option<f64>,
    /// Mean `B_j^(τ)` for every constraint.
    pub mean_leftover: Vec<f64>,
    /// Mean `B_j^(τ)` restricted to the binding constraints.
    pub mean_leftover_binding: BTreeMap<usize, f64>,
    /// Fraction of runs with `Î* = I*` and `Ĵ′ = J′` (two-phase only).
    pub identification_accuracy: Option<f64>,
    pub phase1_mean_length: Option<f64>,
    pub mean_tau: f64,
}

impl RegretReport {
    /// Whether mean regret stays below the decomposition bound plus two
    /// combined standard errors.
    pub fn decomposition_holds(&self) -> bool {
        self.regret.mean <= self.bound.mean + 2.0 * self.combined_stderr.unwrap_or(0.0)
    }
}

/// Aggregates traces of one `(instance, policy, T)` cell.
pub fn regret_report(traces: &[RunTrace], diag: &InstanceDiagnostics, horizon: usize) -> Result<RegretReport> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidInput("regret report needs at least one trace".into()))?;
    if let Some(t) = traces
        .iter()
        .find(|t| t.policy != first.policy || t.horizon != horizon || t.instance != first.instance)
    {
        return Err(Error::InvalidInput(format!(
            "mixed traces: ({}, {}, {}) vs ({}, {}, {})",
            first.policy, horizon, first.instance, t.policy, t.horizon, t.instance
        )));
    }
    let d = diag.y_star.len();
    let m = diag.delta_i.len();
    if traces.iter().any(|t| t.counts.len() != m || t.final_remaining.len() != d) {
        return Err(Error::Dimension("trace dimensions differ from the diagnostics".into()));
    }
    let opt = diag.opt_lp_per_t * horizon as f64;
    let regret: Vec<f64> = traces.iter().map(|t| opt - t.total_reward).collect();
    let subopt: Vec<f64> = traces
        .iter()
        .map(|t| diag.sets.i_prime.iter().map(|&i| t.counts[i] as f64 * diag.delta_i[i]).sum())
        .collect();
    let leftover: Vec<f64> = traces
        .iter()
        .map(|t| diag.sets.j_star.iter().map(|&j| t.final_remaining[j] * diag.y_star[j]).sum())
        .collect();
    let bound: Vec<f64> = subopt.iter().zip(&leftover).map(|(a, b)| a + b).collect();
    let n = traces.len() as f64;
    let mean_leftover: Vec<f64> = (0..d)
        .map(|j| traces.iter().map(|t| t.final_remaining[j]).sum::<f64>() / n)
        .collect();
    let mean_leftover_binding = diag.sets.j_star.iter().map(|&j| (j, mean_leftover[j])).collect();
    let two_phase = first.policy == PolicyKind::TwoPhase;
    let identification_accuracy = two_phase.then(|| {
        traces
            .iter()
            .filter(|t| t.i_hat == diag.sets.i_star && t.j_hat == diag.sets.j_prime)
            .count() as f64
            / n
    });
    let phase1_mean_length =
        two_phase.then(|| traces.iter().map(|t| t.phase1_end.unwrap_or(t.tau) as f64).sum::<f64>() / n);

    let regret = MeanStderr::of(&regret);
    let bound = MeanStderr::of(&bound);
    let combined_stderr = match (regret.stderr, bound.stderr) {
        (Some(a), Some(b)) => Some(a.hypot(b)),
        _ => None,
    };
    Ok(RegretReport {
        benchmark: BENCHMARK.to_string(),
        policy: first.policy,
        horizon,
        reps: traces.len(),
        regret,
        subopt_term: MeanStderr::of(&subopt),
        leftover_term: MeanStderr::of(&leftover),
        bound,
        combined_stderr,
        mean_leftover,
        mean_leftover_binding,
        identification_accuracy,
        phase1_mean_length,
        mean_tau: traces.iter().map(|t| t.tau as f64).sum::<f64>() / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub policy: PolicyKind,
    pub cells: Vec<RegretReport>,
    /// Mean regret against `ln T`.
    pub log_fit: LinearFit,
    /// Mean regret against `√T`.
    pub sqrt_fit: LinearFit,
    /// `regret(T_max) / regret(T_min)`.
    pub regret_ratio: f64,
    /// Set when any cell had fewer than two replications.
    pub stderr_undefined: bool,
}

pub fn validate_grid(grid: &[usize], reps: usize) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::Validation(format!("T grid needs at least 3 points, got {}", grid.len())));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("T grid must be strictly ascending".into()));
    }
    if reps == 0 {
        return Err(Error::Validation("reps must be at least 1".into()));
    }
    Ok(())
}

/// Fits the regret curve of a set of cells sharing one policy.
pub fn fit_scaling(cells: Vec<RegretReport>) -> Result<ScalingReport> {
    let first = cells
        .first()
        .ok_or_else(|| Error::InvalidInput("no cells to fit".into()))?;
    let policy = first.policy;
    let ts: Vec<f64> = cells.iter().map(|c| c.horizon as f64).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.regret.mean).collect();
    let logs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let roots: Vec<f64> = ts.iter().map(|t| t.sqrt()).collect();
    let regret_ratio = ys[ys.len() - 1] / ys[0];
    Ok(ScalingReport {
        policy,
        log_fit: least_squares(&logs, &ys),
        sqrt_fit: least_squares(&roots, &ys),
        regret_ratio,
        stderr_undefined: cells.iter().any(|c| c.regret.stderr.is_none()),
        cells,
    })
}

/// Runs `reps` episodes at every horizon of `grid` and fits mean regret
/// against `ln T` and `√T`.
pub fn sweep_and_fit(
    inst: &ProblemInstance,
    kind: PolicyKind,
    grid: &[usize],
    reps: usize,
    master_seed: u64,
    cfg: &EpisodeConfig,
    diag: &InstanceDiagnostics,
) -> Result<ScalingReport> {
    validate_grid(grid, reps)?;
    let cells = grid
        .iter()
        .map(|&horizon| {
            let traces = run_replications(inst, kind, horizon, reps, master_seed, cfg)?;
            regret_report(&traces, diag, horizon)
        })
        .collect::<Result<Vec<_>>>()?;
    fit_scaling(cells)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes report cells as CSV. Every cell must have the same number of
/// constraints.
pub fn write_report_csv<W: Write>(cells: &[RegretReport], writer: W) -> Result<()> {
    let d = cells.first().map_or(0, |c| c.mean_leftover.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = [
        "benchmark",
        "policy",
        "T",
        "reps",
        "mean_regret",
        "stderr",
        "subopt_term",
        "leftover_term",
        "bound",
        "identification_accuracy",
        "phase1_mean_length",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..d).map(|j| format!("leftover_{j}_mean")));
    w.write_record(&header)?;
    for c in cells {
        if c.mean_leftover.len() != d {
            return Err(Error::Dimension("report cells have different constraint counts".into()));
        }
        let mut row = vec![
            c.benchmark.clone(),
            c.policy.to_string(),
            c.horizon.to_string(),
            c.reps.to_string(),
            c.regret.mean.to_string(),
            fmt_opt(c.regret.stderr),
            c.subopt_term.mean.to_string(),
            c.leftover_term.mean.to_string(),
            c.bound.mean.to_string(),
            fmt_opt(c.identification_accuracy),
            fmt_opt(c.phase1_mean_length),
        ];
        row.extend(c.mean_leftover.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Regret-versus-horizon points for plotting.
pub fn write_scaling_points_csv<W: Write>(cells: &[RegretReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["policy", "T", "log_T", "sqrt_T", "mean_regret", "stderr"])?;
    for c in cells {
        let t = c.horizon as f64;
        w.write_record([
            c.policy.to_string(),
            c.horizon.to_string(),
            t.ln().to_string(),
            t.sqrt().to_string(),
            c.regret.mean.to_string(),
            fmt_opt(c.regret.stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Groups traces into `(policy, T)` cells in the given order and reports
/// each one. Traces within a cell keep their input order.
pub fn report_cells(
    inst: &ProblemInstance,
    traces: &[RunTrace],
    policies: &[PolicyKind],
    grid: &[usize],
    tol: f64,
) -> Result<Vec<RegretReport>> {
    let mut cells = Vec::with_capacity(policies.len() * grid.len());
    for &kind in policies {
        for &horizon in grid {
            let group: Vec<RunTrace> = traces
                .iter()
                .filter(|t| t.policy == kind && t.horizon == horizon)
                .cloned()
                .collect();
            if group.is_empty() {
                return Err(Error::InvalidInput(format!("no traces for ({kind}, T = {horizon})")));
            }
            let diag = crate::instance::diagnostics(inst, horizon, tol)?;
            cells.push(regret_report(&group, &diag, horizon)?);
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TraceLine {
    Header {
        benchmark: String,
        seed: u64,
        policy: PolicyKind,
        horizon: usize,
        instance: String,
    },
    Step(StepRecord),
    Summary(RunTrace),
}

/// Writes a full trace as JSONL: a header line, one line per step and a
/// closing summary line.
pub fn write_trace_jsonl<W: Write>(trace: &RunTrace, mut writer: W) -> Result<()> {
    let header = TraceLine::Header {
        benchmark: BENCHMARK.to_string(),
        seed: trace.seed,
        policy: trace.policy,
        horizon: trace.horizon,
        instance: trace.instance.clone(),
    };
    serde_json::to_writer(&mut writer, &header)?;
    writeln!(writer)?;
    for s in &trace.steps {
        serde_json::to_writer(&mut writer, &TraceLine::Step(s.clone()))?;
        writeln!(writer)?;
    }
    serde_json::to_writer(&mut writer, &TraceLine::Summary(trace.clone()))?;
    writeln!(writer)?;
    Ok(())
}

/// Reads every trace in a JSONL stream: full traces (header, steps, summary)
/// and bare summary lines may be mixed.
pub fn read_traces_jsonl<R: BufRead>(reader: R) -> Result<Vec<RunTrace>> {
    let mut out = Vec::new();
    let mut pending = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TraceLine>(&line) {
            Ok(TraceLine::Header { .. }) => pending.clear(),
            Ok(TraceLine::Step(s)) => pending.push(s),
            Ok(TraceLine::Summary(mut t)) => {
                t.steps = std::mem::take(&mut pending);
                out.push(t);
            }
            Err(e) => {
                return Err(Error::InvalidInput(format!("trace line {}: {e}", no + 1)));
            }
        }
    }
    Ok(out)
}

/// Writes summary-only lines, one per run.
pub fn write_summaries_jsonl<W: Write>(traces: &[RunTrace], mut writer: W) -> Result<()> {
    for t in traces {
        serde_json::to_writer(&mut writer, &TraceLine::Summary(t.clone()))?;
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::f1;
    use crate::instance::{diagnostics, OutcomeLaw};
    use crate::lp::DEFAULT_FEAS_TOL;

    fn det_f1() -> ProblemInstance {
        f1().with_dist(OutcomeLaw::Deterministic)
    }

    #[test]
    fn uniform_on_point_mass_f1_matches_simulation_oracle() {
        let inst = det_f1();
        let horizon = 300;
        let trace = run_episode(&inst, PolicyKind::Uniform, horizon, 4, &EpisodeConfig::default()).unwrap();
        // Replay the same arm sequence by hand: the arm drawn at step t
        // depends only on the policy stream at t.
        let mut remaining = [150.0f64, 150.0];
        let mut reward = 0.0;
        let mut tau = horizon;
        for t in 0..horizon {
            let arm = {
                use rand::Rng;
                rng::stream(4, t as u64, POLICY_LANE).gen_range(0..3)
            };
            let c = [0.5, inst.c[1][arm]];
            if remaining.iter().zip(c).any(|(r, c)| r - c < -1e-9) {
                tau = t;
                break;
            }
            remaining[0] -= c[0];
            remaining[1] -= c[1];
            reward += inst.mu[arm];
        }
        assert_eq!(trace.tau, tau);
        assert!((trace.total_reward - reward).abs() < 1e-9);
        assert_eq!(trace.counts.iter().sum::<u64>() as usize, trace.tau);
    }

    #[test]
    fn episodes_are_deterministic() {
        let cfg = EpisodeConfig {
            record_steps: true,
            ..EpisodeConfig::default()
        };
        let a = run_episode(&f1(), PolicyKind::OnePhase, 300, 9, &cfg).unwrap();
        let b = run_episode(&f1(), PolicyKind::OnePhase, 300, 9, &cfg).unwrap();
        assert_eq!(a, b);
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        write_trace_jsonl(&a, &mut ba).unwrap();
        write_trace_jsonl(&b, &mut bb).unwrap();
        assert_eq!(ba, bb);
        let back = read_traces_jsonl(&ba[..]).unwrap();
        assert_eq!(back, vec![a]);
    }

    #[test]
    fn two_phase_point_mass_f1_runs_to_horizon() {
        let inst = det_f1();
        let trace = run_episode(&inst, PolicyKind::TwoPhase, 300, 1, &EpisodeConfig::default()).unwrap();
        assert_eq!(trace.tau, 300);
        assert!(trace.total_reward <= 0.65 * 300.0 + 1e-9);
        let null_plays = trace.counts[2] as f64;
        // Regret equals the null-arm plays times their reduced cost plus
        // leftover binding budget priced at y*.
        let leftover = 0.8 * trace.final_remaining[0] + 0.5 * trace.final_remaining[1];
        let regret = 0.65 * 300.0 - trace.total_reward;
        assert!((regret - (0.4 * null_plays + leftover)).abs() < 1e-6);
    }

    #[test]
    fn horizon_shorter_than_arms_is_rejected() {
        assert!(matches!(
            run_episode(&f1(), PolicyKind::Uniform, 2, 0, &EpisodeConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn ratio_samples_are_sparse() {
        let trace = run_episode(&det_f1(), PolicyKind::Uniform, 1000, 0, &EpisodeConfig::default()).unwrap();
        assert!(trace.b_ratio_samples.len() <= RATIO_SAMPLES + 1);
        assert_eq!(trace.b_ratio_samples[0].ratio, vec![0.5, 0.5]);
    }

    #[test]
    fn report_rejects_mixed_traces() {
        let diag = diagnostics(&f1(), 100, DEFAULT_FEAS_TOL).unwrap();
        let a = run_episode(&f1(), PolicyKind::Uniform, 100, 0, &EpisodeConfig::default()).unwrap();
        let b = run_episode(&f1(), PolicyKind::StaticLp, 100, 0, &EpisodeConfig::default()).unwrap();
        assert!(matches!(regret_report(&[a.clone(), b], &diag, 100), Err(Error::InvalidInput(_))));
        assert!(matches!(regret_report(&[], &diag, 100), Err(Error::InvalidInput(_))));
        assert!(matches!(regret_report(&[a], &diag, 200), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_rep_has_undefined_stderr() {
        let diag = diagnostics(&f1(), 100, DEFAULT_FEAS_TOL).unwrap();
        let r = sweep_and_fit(&f1(), PolicyKind::Uniform, &[30, 60, 120], 1, 0, &EpisodeConfig::default(), &diag)
            .unwrap();
        assert!(r.stderr_undefined);
        assert!(r.cells.iter().all(|c| c.regret.stderr.is_none()));
        assert!(validate_grid(&[10, 20], 5).is_err());
        assert!(validate_grid(&[10, 30, 20], 5).is_err());
        assert!(validate_grid(&[10, 20, 30], 0).is_err());
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let fit = least_squares(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let diag = diagnostics(&f1(), 100, DEFAULT_FEAS_TOL).unwrap();
        let traces = run_replications(&f1(), PolicyKind::TwoPhase, 100, 3, 1, &EpisodeConfig::default()).unwrap();
        let rep = regret_report(&traces, &diag, 100).unwrap();
        let mut out = Vec::new();
        write_report_csv(&[rep], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "benchmark,policy,T,reps,mean_regret,stderr,subopt_term,leftover_term,bound,\
             identification_accuracy,phase1_mean_length,leftover_0_mean,leftover_1_mean"
        );
        assert!(lines.next().unwrap().starts_with("opt_lp,two_phase,100,3,"));
    }
}
