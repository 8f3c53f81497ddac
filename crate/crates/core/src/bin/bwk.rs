use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bwk::config::{ExperimentConfig, InstanceSource};
use bwk::harness::{self, EpisodeConfig, RegretReport, ScalingReport};
use bwk::instance::{augment_with_null_arm, diagnostics, generate_random_instance, InstanceDiagnostics, OutcomeLaw, ProblemInstance};
use bwk::lp::DEFAULT_FEAS_TOL;
use bwk::policy::PolicyKind;
use bwk::{Error, Result};

#[derive(Parser)]
#[command(name = "bwk", version, about = "Bandits with knapsacks: diagnostics, policies and regret experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file from explicit means or a random draw.
    Generate(GenerateArgs),
    /// Print LP diagnostics of an instance.
    Diagnose(DiagnoseArgs),
    /// Run one episode and write its full trace.
    Run(RunArgs),
    /// Run a replication sweep and write all artifacts to a directory.
    Sweep(SweepArgs),
    /// Rebuild the report of a sweep directory from its traces.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Rewards of the real arms, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "random")]
    mu: Vec<f64>,
    /// Consumption rows of the real resources, `;` between rows.
    #[arg(long, requires = "mu")]
    consumption: Option<String>,
    #[arg(long)]
    b: f64,
    #[arg(long, default_value = "bernoulli")]
    dist: String,
    #[arg(long, default_value = "")]
    label: String,
    /// Draw a random non-degenerate instance instead.
    #[arg(long, requires_all = ["m_raw", "d_raw", "seed"])]
    random: bool,
    #[arg(long)]
    m_raw: Option<usize>,
    #[arg(long)]
    d_raw: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    instance: PathBuf,
    #[arg(long, short = 'T', default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = DEFAULT_FEAS_TOL)]
    tol: f64,
    /// Also write the diagnostics as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file.
    #[arg(long, group = "src")]
    instance: Option<PathBuf>,
    /// Built-in fixture (f1, f2).
    #[arg(long, group = "src")]
    fixture: Option<String>,
    /// Random instance `m_raw,d_raw,b,seed`.
    #[arg(long, group = "src", value_delimiter = ',', num_args = 4)]
    random: Option<Vec<String>>,
}

impl InstanceArgs {
    fn source(&self) -> Result<Option<InstanceSource>> {
        if let Some(path) = &self.instance {
            return Ok(Some(InstanceSource::File { path: path.clone() }));
        }
        if let Some(name) = &self.fixture {
            return Ok(Some(InstanceSource::Fixture { name: name.clone() }));
        }
        if let Some(parts) = &self.random {
            let bad = |what: &str| Error::Validation(format!("--random: bad {what}"));
            return Ok(Some(InstanceSource::Random {
                m_raw: parts[0].parse().map_err(|_| bad("m_raw"))?,
                d_raw: parts[1].parse().map_err(|_| bad("d_raw"))?,
                b: parts[2].parse().map_err(|_| bad("b"))?,
                seed: parts[3].parse().map_err(|_| bad("seed"))?,
            }));
        }
        Ok(None)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    policy: PolicyKind,
    #[arg(long, short = 'T')]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    monotone: Option<bool>,
    #[arg(long, default_value_t = 1.0)]
    radius_scale: f64,
    /// Trace output (JSONL).
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Config file; the remaining flags except `--out` override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<PolicyKind>>,
    #[arg(long = "t-grid", value_delimiter = ',')]
    t_grid: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    monotone: Option<bool>,
    #[arg(long)]
    radius_scale: Option<f64>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep directory.
    dir: PathBuf,
    /// Where to write the CSV; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Fail unless the rebuilt report equals the stored one.
    #[arg(long)]
    check: bool,
}

fn parse_dist(s: &str) -> Result<OutcomeLaw> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
        .map_err(|_| Error::Validation(format!("unknown outcome law {s:?}")))
}

fn parse_rows(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';')
        .filter(|r| !r.trim().is_empty())
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Validation(format!("bad consumption entry {v:?}")))
                })
                .collect()
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.6}"))
}

fn fmt_set(s: &std::collections::BTreeSet<usize>) -> String {
    let items: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", items.join(", "))
}

fn print_diagnostics(inst: &ProblemInstance, diag: &InstanceDiagnostics) {
    println!("instance      {} (m = {}, d = {}, b = {})", inst.label, inst.m, inst.d, inst.b);
    println!("benchmark     OPT_LP (upper bounds the optimal dynamic policy)");
    println!("T             {}", diag.horizon);
    println!("OPT_LP / T    {:.6}", diag.opt_lp_per_t);
    println!("x* / T        {}", fmt_vec(&diag.x_star_per_t));
    println!("y*            {}", fmt_vec(&diag.y_star));
    println!("Delta_i       {}", fmt_vec(&diag.delta_i));
    println!("I*            {}", fmt_set(&diag.sets.i_star));
    println!("I'            {}", fmt_set(&diag.sets.i_prime));
    println!("J*            {}", fmt_set(&diag.sets.j_star));
    println!("J'            {}", fmt_set(&diag.sets.j_prime));
    println!("OPT_i / T     {}", fmt_vec(&diag.opt_i_per_t));
    println!("OPT_j / T     {}", fmt_vec(&diag.opt_j_per_t));
    println!("delta         {}", opt(diag.delta));
    println!("sigma         {:.6}", diag.sigma);
    println!("chi           {}", opt(diag.chi));
    println!("theta         {}", opt(diag.theta));
    println!("nondegenerate {}", diag.nondegenerate);
    if !diag.warnings.is_empty() {
        println!("warnings:");
        for w in &diag.warnings {
            println!("  - {w}");
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let inst = if a.random {
        let (m, d, s) = (a.m_raw.unwrap_or(0), a.d_raw.unwrap_or(0), a.seed.unwrap_or(0));
        generate_random_instance(m, d, a.b, s)?
    } else {
        if a.mu.is_empty() {
            return Err(Error::Validation("either --mu or --random is required".into()));
        }
        let rows = parse_rows(a.consumption.as_deref().unwrap_or(""))?;
        augment_with_null_arm(&a.mu, &rows, a.b)?.with_dist(parse_dist(&a.dist)?)
    };
    let inst = if a.label.is_empty() { inst } else { inst.with_label(a.label) };
    inst.validate()?;
    inst.save(&a.out)?;
    print_diagnostics(&inst, &diagnostics(&inst, 1, DEFAULT_FEAS_TOL)?);
    Ok(())
}

fn cmd_diagnose(a: DiagnoseArgs) -> Result<()> {
    let inst = ProblemInstance::load(&a.instance)?;
    let diag = diagnostics(&inst, a.horizon, a.tol)?;
    print_diagnostics(&inst, &diag);
    if let Some(path) = a.json {
        fs::write(path, serde_json::to_string_pretty(&diag)?)?;
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let src = a
        .inst
        .source()?
        .ok_or_else(|| Error::Validation("one of --instance, --fixture or --random is required".into()))?;
    let inst = src.resolve()?;
    let cfg = EpisodeConfig {
        monotone: a.monotone,
        radius_scale: a.radius_scale,
        record_steps: true,
    };
    let trace = harness::run_episode(&inst, a.policy, a.horizon, a.seed, &cfg)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    harness::write_trace_jsonl(&trace, &mut w)?;
    w.flush()?;
    let opt = diagnostics(&inst, a.horizon, DEFAULT_FEAS_TOL)?.opt_lp_per_t * a.horizon as f64;
    println!(
        "policy {} T {} seed {}: tau = {}, reward = {:.4}, regret vs OPT_LP = {:.4}",
        a.policy,
        a.horizon,
        a.seed,
        trace.tau,
        trace.total_reward,
        opt - trace.total_reward
    );
    Ok(())
}

/// Config text and parsed config; the text is what gets persisted.
fn sweep_config(a: &SweepArgs) -> Result<(String, ExperimentConfig)> {
    let base: Option<(String, ExperimentConfig)> = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let cfg = ExperimentConfig::from_json(&text)?;
            Some((text, cfg))
        }
        None => None,
    };
    let overridden = a.inst.source()?.is_some()
        || a.policies.is_some()
        || a.t_grid.is_some()
        || a.reps.is_some()
        || a.master_seed.is_some()
        || a.tol.is_some()
        || a.monotone.is_some()
        || a.radius_scale.is_some();
    if let Some((text, cfg)) = &base {
        if !overridden {
            let mut cfg = cfg.clone();
            if a.out.is_some() {
                cfg.out_dir = a.out.clone();
            }
            return Ok((text.clone(), cfg));
        }
    }
    let missing = |f: &str| Error::Validation(format!("--{f} is required without a config file"));
    let base = base.map(|(_, c)| c);
    let cfg = ExperimentConfig {
        instance: match (a.inst.source()?, &base) {
            (Some(s), _) => s,
            (None, Some(b)) => b.instance.clone(),
            (None, None) => return Err(missing("instance")),
        },
        policies: a
            .policies
            .clone()
            .or_else(|| base.as_ref().map(|b| b.policies.clone()))
            .ok_or_else(|| missing("policies"))?,
        t_grid: a
            .t_grid
            .clone()
            .or_else(|| base.as_ref().map(|b| b.t_grid.clone()))
            .ok_or_else(|| missing("t-grid"))?,
        reps: a.reps.or(base.as_ref().map(|b| b.reps)).ok_or_else(|| missing("reps"))?,
        master_seed: a.master_seed.or(base.as_ref().map(|b| b.master_seed)).unwrap_or(0),
        out_dir: a.out.clone().or_else(|| base.as_ref().and_then(|b| b.out_dir.clone())),
        tol: a.tol.or(base.as_ref().map(|b| b.tol)).unwrap_or(DEFAULT_FEAS_TOL),
        monotone: a.monotone.or(base.as_ref().and_then(|b| b.monotone)),
        radius_scale: a.radius_scale.or(base.as_ref().map(|b| b.radius_scale)).unwrap_or(1.0),
    };
    cfg.validate()?;
    Ok((cfg.to_json()?, cfg))
}

fn write_reports(dir: &Path, cfg: &ExperimentConfig, cells: &[RegretReport]) -> Result<()> {
    harness::write_report_csv(cells, BufWriter::new(File::create(dir.join("report.csv"))?))?;
    harness::write_scaling_points_csv(cells, BufWriter::new(File::create(dir.join("scaling.csv"))?))?;
    if cfg.t_grid.len() >= 3 {
        let fits = cfg
            .policies
            .iter()
            .map(|&k| harness::fit_scaling(cells.iter().filter(|c| c.policy == k).cloned().collect()))
            .collect::<Result<Vec<ScalingReport>>>()?;
        fs::write(dir.join("fits.json"), serde_json::to_string_pretty(&fits)?)?;
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let (text, cfg) = sweep_config(&a)?;
    let dir = cfg
        .out_dir
        .clone()
        .ok_or_else(|| Error::Validation("no output directory (--out or out_dir)".into()))?;
    let inst = cfg.instance.resolve()?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), &text)?;
    inst.save(dir.join("instance.json"))?;
    let ep = cfg.episode_config();
    let mut traces = Vec::new();
    for &kind in &cfg.policies {
        for &horizon in &cfg.t_grid {
            traces.extend(harness::run_replications(&inst, kind, horizon, cfg.reps, cfg.master_seed, &ep)?);
        }
    }
    let mut w = BufWriter::new(File::create(dir.join("runs.jsonl"))?);
    harness::write_summaries_jsonl(&traces, &mut w)?;
    w.flush()?;
    let cells = harness::report_cells(&inst, &traces, &cfg.policies, &cfg.t_grid, cfg.tol)?;
    write_reports(&dir, &cfg, &cells)?;
    for c in &cells {
        println!(
            "{:<10} T = {:>6}  regret = {:>10.3} ± {}  bound = {:.3}",
            c.policy.name(),
            c.horizon,
            c.regret.mean,
            opt(c.regret.stderr),
            c.bound.mean
        );
    }
    println!("artifacts in {}", dir.display());
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(a.dir.join("config.json"))?;
    let inst = ProblemInstance::load(a.dir.join("instance.json"))?;
    let traces = harness::read_traces_jsonl(BufReader::new(File::open(a.dir.join("runs.jsonl"))?))?;
    let cells = harness::report_cells(&inst, &traces, &cfg.policies, &cfg.t_grid, cfg.tol)?;
    let mut csv = Vec::new();
    harness::write_report_csv(&cells, &mut csv)?;
    if a.check {
        let stored = fs::read(a.dir.join("report.csv"))?;
        if stored != csv {
            return Err(Error::ContractViolation("rebuilt report differs from report.csv".into()));
        }
    }
    match a.out {
        Some(p) => fs::write(p, &csv)?,
        None => std::io::stdout().write_all(&csv)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
