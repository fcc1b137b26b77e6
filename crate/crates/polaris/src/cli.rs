//! Command-line front end. Exit codes: 0 success, 1 validation failure,
//! 2 infeasible request, 3 I/O error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use polaris_core::decomposition::decompose;
use polaris_core::domain::MechanismKind;
use polaris_core::evaluation::{sweep, LatencyMetric, SweepConfig};
use polaris_core::policy::{baseline_select, select_with, BaselineKind, NormalizeOver, PolicyError, PolicyParams, Scenario};
use polaris_core::profiling::{percentile, ProfileStore, StoreConfig};
use polaris_core::simulator::{exceedance_rate, run, uniform_events, PolicyChoice, SimConfig, EXCEEDANCE_THRESHOLD_MS};
use polaris_core::trace::{IngestMode, SteeringExecution};
use serde::Serialize;

use crate::config::{Config, CONFIG_ENV};
use crate::datagen::{generate, DatagenError, Feasibility, GenOptions};
use crate::io::{self, FileError};
use crate::report;
use crate::trace_format::{self, IngestError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Infeasible(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        if e.is_io() {
            Self::Io(e.to_string())
        } else {
            Self::Validation(e.to_string())
        }
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::NoFeasibleMechanism(_) | PolicyError::FixedMechanismUnavailable(..) => Self::Infeasible(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "polaris", version, about = "Disruption-aware spectrum steering: traces, profiles, policy and evaluation")]
pub struct Cli {
    /// JSON config file (scenarios, policy grid, calibration targets, store and refresh settings).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a calibrated synthetic trace (JSON-lines).
    Generate(GenerateArgs),
    /// Segment a trace into executions and write an ingest report.
    Ingest(IngestArgs),
    /// Build a profile store from executions and print the amplification table.
    Profile(ProfileArgs),
    /// One-shot policy decision with its full score trace.
    Score(ScoreArgs),
    /// Run the closed-loop simulator over a spectrum event stream.
    Simulate(SimulateArgs),
    /// Sweep scenarios x policy grid x baselines and write the comparison matrix.
    Evaluate(EvaluateArgs),
    /// Write the plot-ready CSV bundle for a profile store.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// RNG seed; the same seed and targets give a byte-identical trace.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// JSON list of calibration targets (overrides the config file and built-in defaults).
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Multiplier applied to every target count.
    #[arg(long, default_value_t = 1)]
    pub scale: usize,
    #[arg(long, default_value_t = 4)]
    pub devices: usize,
    /// Fail (exit 2) on infeasible targets instead of generating the closest achievable corpus.
    #[arg(long)]
    pub strict_targets: bool,
    /// Write fitted parameters and infeasibility notes here as JSON.
    #[arg(long)]
    pub fit_report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Strict,
    Lenient,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Executions output (JSON-lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Ingest report output (JSON); printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lenient")]
    pub mode: ModeArg,
    /// Exit 0 even when executions were rejected.
    #[arg(long)]
    pub allow_rejects: bool,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub executions: PathBuf,
    /// Profile store output (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the amplification table as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Max retained samples per mechanism.
    #[arg(long)]
    pub window: Option<usize>,
    /// Minimum samples for policy eligibility.
    #[arg(long)]
    pub min_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OverArg {
    Scenario,
    All,
}

impl From<OverArg> for NormalizeOver {
    fn from(o: OverArg) -> Self {
        match o {
            OverArg::Scenario => NormalizeOver::Scenario,
            OverArg::All => NormalizeOver::All,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    Polaris,
    AlwaysBwp,
    AlwaysHo,
    MinMean,
    MinT95,
}

impl PolicyArg {
    fn choice(self, params: PolicyParams, over: NormalizeOver) -> PolicyChoice {
        let baseline = |kind| PolicyChoice::Baseline { kind };
        match self {
            Self::Polaris => PolicyChoice::Polaris { params, normalize_over: over },
            Self::AlwaysBwp => baseline(BaselineKind::AlwaysBwp),
            Self::AlwaysHo => baseline(BaselineKind::AlwaysHo),
            Self::MinMean => baseline(BaselineKind::MinMean),
            Self::MinT95 => baseline(BaselineKind::MinT95),
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value = "unconstrained")]
    pub scenario: String,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    #[arg(long, value_enum, default_value = "scenario")]
    pub normalize_over: OverArg,
    #[arg(long, value_enum, default_value = "polaris")]
    pub policy: PolicyArg,
    /// Decision trace output (JSON); printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// Spectrum events (JSON-lines of time_ms, carrier_id, scenario). Without
    /// it, `--count` evenly spaced events under `--scenario` are used.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value = "unconstrained")]
    pub scenario: String,
    #[arg(long, default_value_t = 1000.0)]
    pub spacing_ms: f64,
    #[arg(long, value_enum, default_value = "polaris")]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    #[arg(long, value_enum, default_value = "scenario")]
    pub normalize_over: OverArg,
    /// Seed of the latency bootstrap.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Activations between profile refreshes (0 disables); defaults to the config value or 50.
    #[arg(long)]
    pub refresh_period: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub kpm_period: usize,
    /// Telemetry log output (JSON-lines).
    #[arg(long)]
    pub telemetry: PathBuf,
    /// Summary metrics output (JSON); printed to stdout when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Phy,
    RrcPhy,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub out_json: PathBuf,
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Bootstrap seeds, one simulation per seed and cell.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Activations per cell and seed.
    #[arg(long)]
    pub events: Option<usize>,
    /// Scenario names (default: config scenarios or the canonical five).
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "phy")]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value = "scenario")]
    pub normalize_over: OverArg,
    #[arg(long)]
    pub refresh_period: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    match path {
        Some(p) => Ok(io::write_json(p, value)?),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
            Ok(())
        }
    }
}

fn scenario(cfg: &Config, name: &str) -> Result<Scenario, CliError> {
    cfg.scenario(name)
        .ok_or_else(|| CliError::Validation(format!("INVALID_SCENARIO: unknown scenario `{name}`")))
}

pub fn run_cli(cli: Cli) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Generate(a) => cmd_generate(&cfg, a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Profile(a) => cmd_profile(&cfg, a),
        Command::Score(a) => cmd_score(&cfg, a),
        Command::Simulate(a) => cmd_simulate(&cfg, a),
        Command::Evaluate(a) => cmd_evaluate(&cfg, a),
        Command::Report(a) => cmd_report(a),
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    seed: u64,
    executions: usize,
    lines: usize,
    fitted: &'a [crate::datagen::FittedTarget],
    infeasible: &'a [crate::datagen::Infeasible],
}

fn cmd_generate(cfg: &Config, a: GenerateArgs) -> Result<(), CliError> {
    let targets = match &a.targets {
        Some(p) => io::read_json(p)?,
        None => cfg.targets(),
    };
    let opts = GenOptions {
        feasibility: if a.strict_targets { Feasibility::Strict } else { Feasibility::Closest },
        devices: a.devices,
        scale: a.scale,
    };
    let corpus = generate(&targets, a.seed, opts).map_err(|e| match e {
        DatagenError::InfeasibleTarget(_) => CliError::Infeasible(e.to_string()),
        DatagenError::InvalidTarget(..) => CliError::Validation(e.to_string()),
    })?;
    for issue in &corpus.issues {
        eprintln!(
            "INFEASIBLE_TARGET {}: {}; generating amplification {} with PHY median {:.3} ms, log-sigma {:.4}",
            issue.mechanism, issue.reason, issue.achievable_amp_ratio, issue.achievable_median_phy, issue.achievable_sigma_phy
        );
    }
    let mut w = io::create(&a.out)?;
    trace_format::write_trace(&mut w, &corpus.events).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    if let Some(p) = &a.fit_report {
        io::write_json(
            p,
            &FitReport {
                seed: a.seed,
                executions: corpus.executions,
                lines: corpus.events.len(),
                fitted: &corpus.fitted,
                infeasible: &corpus.issues,
            },
        )?;
    }
    println!("wrote {} executions ({} lines) to {}", corpus.executions, corpus.events.len(), a.out.display());
    Ok(())
}

fn cmd_ingest(a: IngestArgs) -> Result<(), CliError> {
    let mode = match a.mode {
        ModeArg::Strict => IngestMode::Strict,
        ModeArg::Lenient => IngestMode::Lenient,
    };
    let reader = io::open(&a.trace)?;
    let (execs, report) = trace_format::ingest(reader, mode).map_err(|e| match e {
        IngestError::Io(err) => CliError::Io(format!("{}: {err}", a.trace.display())),
        parse => CliError::Validation(format!("{}: {parse}", a.trace.display())),
    })?;
    io::write_jsonl(&a.out, &execs)?;
    emit_json(a.report.as_deref(), &report)?;
    eprintln!(
        "{} executions ok, {} rejected, {} lines skipped",
        report.executions_ok,
        report.executions_rejected,
        report.skipped.len()
    );
    if report.executions_rejected > 0 && !a.allow_rejects {
        return Err(CliError::Validation(format!(
            "{} executions rejected (pass --allow-rejects to accept)",
            report.executions_rejected
        )));
    }
    Ok(())
}

/// Builds a store from executions, keeping every sample up to the window.
pub fn profile_executions(execs: &[SteeringExecution], config: StoreConfig) -> ProfileStore {
    let decomps: Vec<_> = execs.iter().map(|e| (e.mechanism, decompose(e))).collect();
    ProfileStore::bootstrap(config, decomps.iter().map(|(m, d)| (*m, d)))
}

fn cmd_profile(cfg: &Config, a: ProfileArgs) -> Result<(), CliError> {
    let execs: Vec<SteeringExecution> = io::read_jsonl(&a.executions)?;
    let mut config = cfg.store_config();
    config.window = a.window.unwrap_or(config.window);
    config.min_n = a.min_n.unwrap_or(config.min_n);
    let counts = execs.iter().fold(BTreeMap::<MechanismKind, usize>::new(), |mut m, e| {
        *m.entry(e.mechanism).or_default() += 1;
        m
    });
    if let Some((m, n)) = counts.iter().find(|(_, n)| **n > config.window) {
        eprintln!("note: {m} has {n} executions; only the newest {} are kept (raise --window)", config.window);
    }
    let store = profile_executions(&execs, config);
    io::write_json(&a.out, &store)?;
    let rows = report::amplification_table(&store);
    if let Some(p) = &a.table {
        report::write_csv(p, &rows)?;
    }
    print!("{}", report::render_amplification(&rows));
    Ok(())
}

fn cmd_score(cfg: &Config, a: ScoreArgs) -> Result<(), CliError> {
    let store = io::load_store(&a.store)?;
    let scenario = scenario(cfg, &a.scenario)?;
    let decision = match a.policy.choice(PolicyParams::new(a.lambda, a.mu)?, a.normalize_over.into()) {
        PolicyChoice::Polaris { params, normalize_over } => select_with(&store, &scenario, params, normalize_over)?,
        PolicyChoice::Baseline { kind } => baseline_select(&store, &scenario, kind)?,
    };
    emit_json(a.out.as_deref(), &decision)
}

#[derive(Serialize)]
struct SimSummary {
    policy: &'static str,
    seed: u64,
    refresh_period: usize,
    activations: usize,
    failures: usize,
    selections: BTreeMap<MechanismKind, usize>,
    mean_phy_ms: Option<f64>,
    t95_phy_ms: Option<f64>,
    mean_rrc_phy_ms: Option<f64>,
    t95_rrc_phy_ms: Option<f64>,
    exceedance_50ms_phy: Option<f64>,
    exceedance_50ms_rrc_phy: Option<f64>,
}

fn stats(xs: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None, None);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (Some(mean), percentile(xs, 0.95).ok(), Some(exceedance_rate(xs, EXCEEDANCE_THRESHOLD_MS)))
}

fn cmd_simulate(cfg: &Config, a: SimulateArgs) -> Result<(), CliError> {
    let store = io::load_store(&a.store)?;
    let events = match &a.events {
        Some(p) => io::read_events(p, |n| cfg.scenario(n))?,
        None => uniform_events(&scenario(cfg, &a.scenario)?, a.count, a.spacing_ms),
    };
    let choice = a.policy.choice(PolicyParams::new(a.lambda, a.mu)?, a.normalize_over.into());
    let sim = SimConfig {
        seed: a.seed,
        refresh_period: a.refresh_period.or(cfg.refresh_period).unwrap_or(50),
        kpm_period: a.kpm_period,
    };
    let out = run(&events, &store, &choice, sim).map_err(|e| CliError::Validation(e.to_string()))?;
    io::write_jsonl(&a.telemetry, &out.log)?;
    let (mean_phy, t95_phy, ex_phy) = stats(&out.phy_latencies());
    let (mean_rrc, t95_rrc, ex_rrc) = stats(&out.rrc_phy_latencies());
    let summary = SimSummary {
        policy: choice.label(),
        seed: a.seed,
        refresh_period: sim.refresh_period,
        activations: events.len(),
        failures: out.failures,
        selections: out.decisions.iter().flatten().fold(BTreeMap::new(), |mut m, d| {
            *m.entry(*d).or_default() += 1;
            m
        }),
        mean_phy_ms: mean_phy,
        t95_phy_ms: t95_phy,
        mean_rrc_phy_ms: mean_rrc,
        t95_rrc_phy_ms: t95_rrc,
        exceedance_50ms_phy: ex_phy,
        exceedance_50ms_rrc_phy: ex_rrc,
    };
    emit_json(a.summary.as_deref(), &summary)
}

fn cmd_evaluate(cfg: &Config, a: EvaluateArgs) -> Result<(), CliError> {
    let store = io::load_store(&a.store)?;
    let scenarios = match &a.scenarios {
        Some(names) => names.iter().map(|n| scenario(cfg, n)).collect::<Result<_, _>>()?,
        None => cfg.scenario_set(),
    };
    let defaults = SweepConfig::default();
    let sweep_cfg = SweepConfig {
        scenarios,
        grid: cfg.grid()?,
        seeds: a.seeds.or_else(|| cfg.seeds.clone()).unwrap_or(defaults.seeds),
        events_per_cell: a.events.or(cfg.events_per_cell).unwrap_or(defaults.events_per_cell),
        spacing_ms: defaults.spacing_ms,
        refresh_period: a.refresh_period.or(cfg.refresh_period).unwrap_or(defaults.refresh_period),
        normalize_over: a.normalize_over.into(),
        metric: match a.metric {
            MetricArg::Phy => LatencyMetric::Phy,
            MetricArg::RrcPhy => LatencyMetric::RrcPhy,
        },
    };
    let result = sweep(&store, &sweep_cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    io::write_json(&a.out_json, &result)?;
    report::write_sweep_csv(&a.out_csv, &result)?;
    for s in &result.summary {
        let picks: Vec<_> = s.selections.iter().map(|m| m.id()).collect();
        println!("{:<14} stable={:<5} selections={}", s.scenario, s.stable, picks.join(","));
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<(), CliError> {
    let store = io::load_store(&a.store)?;
    for p in report::write_bundle(&store, &a.out_dir)? {
        println!("{}", p.display());
    }
    Ok(())
}
