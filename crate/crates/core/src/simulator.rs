//! Closed-loop steering harness: spectrum activations arrive, the policy
//! picks a mechanism, an execution latency is bootstrapped from that
//! mechanism's profile buffer, telemetry is logged, and profiles refresh
//! every `refresh_period` activations.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::MechanismKind;
use crate::policy::{
    baseline_select, select_with, BaselineKind, NormalizeOver, PolicyDecision, PolicyError,
    PolicyParams, Scenario,
};
use crate::profiling::{percentile, Eligibility, LatencySample, ProfileStore};

/// Tail exceedance threshold used in every comparison.
pub const EXCEEDANCE_THRESHOLD_MS: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEvent {
    pub time_ms: f64,
    pub carrier_id: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum PolicyChoice {
    Polaris {
        params: PolicyParams,
        #[serde(default)]
        normalize_over: NormalizeOver,
    },
    Baseline {
        kind: BaselineKind,
    },
}

impl PolicyChoice {
    pub fn polaris(params: PolicyParams) -> Self {
        Self::Polaris {
            params,
            normalize_over: NormalizeOver::Scenario,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Polaris { .. } => "polaris",
            Self::Baseline { kind } => kind.name(),
        }
    }

    fn decide(&self, store: &ProfileStore, scenario: &Scenario) -> Result<PolicyDecision, PolicyError> {
        match *self {
            Self::Polaris { params, normalize_over } => select_with(store, scenario, params, normalize_over),
            Self::Baseline { kind } => baseline_select(store, scenario, kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Activations between profile refreshes; 0 disables refresh.
    pub refresh_period: usize,
    /// Activations between KPM reports; 0 disables them.
    pub kpm_period: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            refresh_period: 50,
            kpm_period: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TelemetryKind {
    KpmReport,
    ControlAction,
    ExecComplete,
    ActivationFailed,
}

/// Profile summary carried by a KPM report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpmEntry {
    pub mechanism: MechanismKind,
    pub n: usize,
    pub mean_phy: f64,
    pub t95_phy: f64,
    pub median_rrc_phy: f64,
    pub rel_variability: Option<f64>,
    pub eligibility: Eligibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub time_ms: f64,
    pub activation: usize,
    pub kind: TelemetryKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_latency_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_rrc_phy_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<PolicyDecision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kpm: Option<Vec<KpmEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl TelemetryRecord {
    fn new(time_ms: f64, activation: usize, kind: TelemetryKind) -> Self {
        Self {
            time_ms,
            activation,
            kind,
            carrier_id: None,
            mechanism: None,
            sampled_latency_ms: None,
            sampled_rrc_phy_ms: None,
            decision: None,
            kpm: None,
            failure: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationLatency {
    pub activation: usize,
    pub mechanism: MechanismKind,
    pub phy_ms: f64,
    pub rrc_phy_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub log: Vec<TelemetryRecord>,
    pub final_store: ProfileStore,
    pub latencies: Vec<ActivationLatency>,
    /// Mechanism executed per activation, `None` where the activation failed.
    pub decisions: Vec<Option<MechanismKind>>,
    pub failures: usize,
}

impl SimulationOutcome {
    pub fn phy_latencies(&self) -> Vec<f64> {
        self.latencies.iter().map(|l| l.phy_ms).collect()
    }

    pub fn rrc_phy_latencies(&self) -> Vec<f64> {
        self.latencies.iter().map(|l| l.rrc_phy_ms).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("spectrum events must have non-decreasing time_ms (event {0})")]
    UnsortedEvents(usize),
    #[error("replay holds {got} decisions for {expected} events")]
    ReplayLength { expected: usize, got: usize },
    #[error("EMPTY_LOG: latency list is empty")]
    EmptyLog,
}

enum Driver<'a> {
    Policy(&'a PolicyChoice),
    Replay(&'a [Option<MechanismKind>]),
}

pub fn run(
    events: &[SpectrumEvent],
    store0: &ProfileStore,
    policy: &PolicyChoice,
    config: SimConfig,
) -> Result<SimulationOutcome, SimError> {
    simulate(events, store0, Driver::Policy(policy), config)
}

/// Re-executes a logged decision sequence without consulting the policy.
pub fn replay(
    events: &[SpectrumEvent],
    store0: &ProfileStore,
    decisions: &[Option<MechanismKind>],
    config: SimConfig,
) -> Result<SimulationOutcome, SimError> {
    if decisions.len() != events.len() {
        return Err(SimError::ReplayLength {
            expected: events.len(),
            got: decisions.len(),
        });
    }
    simulate(events, store0, Driver::Replay(decisions), config)
}

fn kpm_summary(store: &ProfileStore) -> Vec<KpmEntry> {
    store
        .profiles()
        .map(|p| KpmEntry {
            mechanism: p.mechanism,
            n: p.n,
            mean_phy: p.mean_phy,
            t95_phy: p.t95_phy,
            median_rrc_phy: p.median_rrc_phy,
            rel_variability: p.rel_variability,
            eligibility: store.eligibility(p.mechanism),
        })
        .collect()
}

fn simulate(
    events: &[SpectrumEvent],
    store0: &ProfileStore,
    driver: Driver<'_>,
    config: SimConfig,
) -> Result<SimulationOutcome, SimError> {
    if let Some(i) = events.windows(2).position(|w| w[1].time_ms < w[0].time_ms) {
        return Err(SimError::UnsortedEvents(i + 1));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut store = store0.clone();
    let mut log = Vec::new();
    let mut latencies = Vec::new();
    let mut decisions = Vec::with_capacity(events.len());
    let mut pending: Vec<(MechanismKind, LatencySample)> = Vec::new();
    let mut failures = 0;

    for (i, ev) in events.iter().enumerate() {
        if config.kpm_period > 0 && i % config.kpm_period == 0 {
            let mut r = TelemetryRecord::new(ev.time_ms, i, TelemetryKind::KpmReport);
            r.kpm = Some(kpm_summary(&store));
            log.push(r);
        }

        let choice: Result<(MechanismKind, Option<PolicyDecision>), String> = match &driver {
            Driver::Policy(p) => p
                .decide(&store, &ev.scenario)
                .map(|d| (d.selected, Some(d)))
                .map_err(|e| String::from(e.code())),
            Driver::Replay(ds) => ds[i].map(|m| (m, None)).ok_or_else(|| String::from("REPLAYED_FAILURE")),
        };
        // an eligible profile always has a non-empty buffer
        let sampled = choice.and_then(|(m, d)| {
            let profile = store.get(m).filter(|p| !p.samples.is_empty()).ok_or_else(|| String::from("EMPTY_SAMPLES"))?;
            let idx = rng.random_range(0..profile.samples.len());
            Ok((m, d, profile.samples[idx].clone()))
        });

        match sampled {
            Ok((m, decision, sample)) => {
                let mut action = TelemetryRecord::new(ev.time_ms, i, TelemetryKind::ControlAction);
                action.carrier_id = Some(ev.carrier_id.clone());
                action.mechanism = Some(m);
                action.decision = decision;
                log.push(action);

                let mut done = TelemetryRecord::new(ev.time_ms + sample.t_rrc_phy_ms, i, TelemetryKind::ExecComplete);
                done.carrier_id = Some(ev.carrier_id.clone());
                done.mechanism = Some(m);
                done.sampled_latency_ms = Some(sample.t_phy_ms);
                done.sampled_rrc_phy_ms = Some(sample.t_rrc_phy_ms);
                log.push(done);

                latencies.push(ActivationLatency {
                    activation: i,
                    mechanism: m,
                    phy_ms: sample.t_phy_ms,
                    rrc_phy_ms: sample.t_rrc_phy_ms,
                });
                decisions.push(Some(m));
                pending.push((m, sample));
            }
            Err(code) => {
                let mut r = TelemetryRecord::new(ev.time_ms, i, TelemetryKind::ActivationFailed);
                r.carrier_id = Some(ev.carrier_id.clone());
                r.failure = Some(code);
                log.push(r);
                decisions.push(None);
                failures += 1;
            }
        }

        if config.refresh_period > 0 && (i + 1) % config.refresh_period == 0 && !pending.is_empty() {
            store = store.refresh_samples(&pending);
            pending.clear();
        }
    }

    Ok(SimulationOutcome {
        log,
        final_store: store,
        latencies,
        decisions,
        failures,
    })
}

/// Reduction of `a` relative to baseline `b`, plus tail exceedance of both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mean_a: f64,
    pub mean_b: f64,
    pub t95_a: f64,
    pub t95_b: f64,
    pub mean_reduction: f64,
    pub t95_reduction: f64,
    pub exceedance_50ms_a: f64,
    pub exceedance_50ms_b: f64,
}

pub fn exceedance_rate(xs: &[f64], threshold_ms: f64) -> f64 {
    xs.iter().filter(|x| **x > threshold_ms).count() as f64 / xs.len() as f64
}

pub fn evaluate(log_a: &[f64], log_b: &[f64]) -> Result<Evaluation, SimError> {
    if log_a.is_empty() || log_b.is_empty() {
        return Err(SimError::EmptyLog);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let t95 = |xs: &[f64]| percentile(xs, 0.95).map_err(|_| SimError::EmptyLog);
    let (mean_a, mean_b) = (mean(log_a), mean(log_b));
    let (t95_a, t95_b) = (t95(log_a)?, t95(log_b)?);
    Ok(Evaluation {
        mean_a,
        mean_b,
        t95_a,
        t95_b,
        mean_reduction: (mean_b - mean_a) / mean_b,
        t95_reduction: (t95_b - t95_a) / t95_b,
        exceedance_50ms_a: exceedance_rate(log_a, EXCEEDANCE_THRESHOLD_MS),
        exceedance_50ms_b: exceedance_rate(log_b, EXCEEDANCE_THRESHOLD_MS),
    })
}

/// Evenly spaced activations under one scenario.
pub fn uniform_events(scenario: &Scenario, count: usize, spacing_ms: f64) -> Vec<SpectrumEvent> {
    (0..count)
        .map(|i| SpectrumEvent {
            time_ms: i as f64 * spacing_ms,
            carrier_id: alloc::format!("carrier-{}", i % 4),
            scenario: scenario.clone(),
        })
        .collect()
}
