//! Scenario × policy sweep: every canonical or configured scenario is run
//! under each grid point and each static baseline, and compared cell by cell.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::MechanismKind;
use crate::policy::{parameter_grid, BaselineKind, NormalizeOver, PolicyParams, Scenario};
use crate::profiling::ProfileStore;
use crate::simulator::{
    evaluate, exceedance_rate, run, uniform_events, PolicyChoice, SimConfig, SimError,
    SimulationOutcome, EXCEEDANCE_THRESHOLD_MS,
};

/// Which latency the comparison matrix is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyMetric {
    /// PHY-centric execution latency.
    #[default]
    Phy,
    RrcPhy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scenarios: Vec<Scenario>,
    pub grid: Vec<PolicyParams>,
    pub seeds: Vec<u64>,
    pub events_per_cell: usize,
    pub spacing_ms: f64,
    pub refresh_period: usize,
    #[serde(default)]
    pub normalize_over: NormalizeOver,
    #[serde(default)]
    pub metric: LatencyMetric,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scenarios: Scenario::all_canonical(),
            grid: parameter_grid(),
            seeds: (0..3).collect(),
            events_per_cell: 1000,
            spacing_ms: 1000.0,
            refresh_period: 50,
            normalize_over: NormalizeOver::Scenario,
            metric: LatencyMetric::Phy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub baseline: BaselineKind,
    pub status: CellStatus,
    pub mean_reduction: Option<f64>,
    pub t95_reduction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub scenario: String,
    pub policy: String,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub status: CellStatus,
    pub failure: Option<String>,
    pub activations: usize,
    pub failures: usize,
    pub mean_ms: Option<f64>,
    pub t95_ms: Option<f64>,
    pub exceedance_50ms: Option<f64>,
    /// Distinct mechanisms executed in this cell.
    pub selected: Vec<MechanismKind>,
    pub reductions: Vec<Reduction>,
    #[serde(skip)]
    latencies: Vec<f64>,
}

impl SweepCell {
    pub fn latencies(&self) -> &[f64] {
        &self.latencies
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    /// True when every grid point executed the same single mechanism.
    pub stable: bool,
    pub selections: Vec<MechanismKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metric: LatencyMetric,
    pub cells: Vec<SweepCell>,
    pub summary: Vec<ScenarioSummary>,
}

impl SweepReport {
    pub fn cell(&self, scenario: &str, policy: &str, params: Option<PolicyParams>) -> Option<&SweepCell> {
        self.cells.iter().find(|c| {
            c.scenario == scenario
                && c.policy == policy
                && params.map_or(true, |p| c.lambda == Some(p.lambda()) && c.mu == Some(p.mu()))
        })
    }

    pub fn scenario_summary(&self, scenario: &str) -> Option<&ScenarioSummary> {
        self.summary.iter().find(|s| s.scenario == scenario)
    }
}

fn run_cell(
    store: &ProfileStore,
    scenario: &Scenario,
    choice: PolicyChoice,
    cfg: &SweepConfig,
) -> Result<SweepCell, SimError> {
    let events = uniform_events(scenario, cfg.events_per_cell, cfg.spacing_ms);
    let mut latencies = Vec::new();
    let mut selected = BTreeSet::new();
    let mut failures = 0;
    let mut failure = None;
    for &seed in &cfg.seeds {
        let sim = SimConfig {
            seed,
            refresh_period: cfg.refresh_period,
            kpm_period: 0,
        };
        let out: SimulationOutcome = run(&events, store, &choice, sim)?;
        failures += out.failures;
        if failure.is_none() {
            failure = out.log.iter().find_map(|r| r.failure.clone());
        }
        for l in &out.latencies {
            selected.insert(l.mechanism);
            latencies.push(match cfg.metric {
                LatencyMetric::Phy => l.phy_ms,
                LatencyMetric::RrcPhy => l.rrc_phy_ms,
            });
        }
    }
    let (lambda, mu) = match choice {
        PolicyChoice::Polaris { params, .. } => (Some(params.lambda()), Some(params.mu())),
        PolicyChoice::Baseline { .. } => (None, None),
    };
    let failed = failures > 0 || latencies.is_empty();
    let stats = if latencies.is_empty() {
        None
    } else {
        // self-comparison yields mean and t95 in one pass
        let e = evaluate(&latencies, &latencies)?;
        Some((e.mean_a, e.t95_a, exceedance_rate(&latencies, EXCEEDANCE_THRESHOLD_MS)))
    };
    Ok(SweepCell {
        scenario: String::from(scenario.name()),
        policy: String::from(choice.label()),
        lambda,
        mu,
        status: if failed { CellStatus::Failed } else { CellStatus::Ok },
        failure,
        activations: cfg.events_per_cell * cfg.seeds.len(),
        failures,
        mean_ms: stats.map(|s| s.0),
        t95_ms: stats.map(|s| s.1),
        exceedance_50ms: stats.map(|s| s.2),
        selected: selected.into_iter().collect(),
        reductions: Vec::new(),
        latencies,
    })
}

pub fn sweep(store: &ProfileStore, cfg: &SweepConfig) -> Result<SweepReport, SimError> {
    let mut cells = Vec::new();
    let mut summary = Vec::new();
    for scenario in &cfg.scenarios {
        let mut rows = Vec::new();
        for &params in &cfg.grid {
            let choice = PolicyChoice::Polaris {
                params,
                normalize_over: cfg.normalize_over,
            };
            rows.push(run_cell(store, scenario, choice, cfg)?);
        }
        let grid_rows = rows.len();
        for kind in BaselineKind::ALL {
            rows.push(run_cell(store, scenario, PolicyChoice::Baseline { kind }, cfg)?);
        }

        let baselines: Vec<(BaselineKind, Option<Vec<f64>>)> = BaselineKind::ALL
            .iter()
            .zip(&rows[grid_rows..])
            .map(|(k, c)| (*k, (c.status == CellStatus::Ok).then(|| c.latencies.clone())))
            .collect();
        for row in &mut rows {
            row.reductions = baselines
                .iter()
                .map(|(kind, base)| {
                    let e = match (row.status, base) {
                        (CellStatus::Ok, Some(b)) => evaluate(&row.latencies, b).ok(),
                        _ => None,
                    };
                    Reduction {
                        baseline: *kind,
                        status: if e.is_some() { CellStatus::Ok } else { CellStatus::Failed },
                        mean_reduction: e.map(|e| e.mean_reduction),
                        t95_reduction: e.map(|e| e.t95_reduction),
                    }
                })
                .collect();
        }

        let selections: BTreeSet<MechanismKind> =
            rows[..grid_rows].iter().flat_map(|c| c.selected.iter().copied()).collect();
        let stable = selections.len() == 1 && rows[..grid_rows].iter().all(|c| c.status == CellStatus::Ok);
        summary.push(ScenarioSummary {
            scenario: String::from(scenario.name()),
            stable,
            selections: selections.into_iter().collect(),
        });
        cells.extend(rows);
    }
    Ok(SweepReport {
        metric: cfg.metric,
        cells,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiling::{LatencySample, StoreConfig};
    use alloc::vec;

    fn store() -> ProfileStore {
        let mut samples = Vec::new();
        for i in 0..40 {
            let f = 1.0 + (i % 10) as f64 * 0.02;
            for (m, phy, amp) in [
                (MechanismKind::Bwp, 6.0, 300.0),
                (MechanismKind::HoLte, 40.0, 1.0),
                (MechanismKind::HoNr, 60.0, 1.3),
                (MechanismKind::Endc, 20.0, 2.0),
                (MechanismKind::Ca, 200.0, 1.0),
            ] {
                let t = phy * f;
                samples.push((m, LatencySample { t_phy_ms: t, t_rrc_phy_ms: t * amp, stages: vec![] }));
            }
        }
        ProfileStore::new(StoreConfig::default()).refresh_samples(&samples)
    }

    fn cfg() -> SweepConfig {
        SweepConfig {
            seeds: vec![1, 2],
            events_per_cell: 60,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn sweep_marks_failed_cells_and_stability() {
        let report = sweep(&store(), &cfg()).unwrap();
        assert_eq!(report.cells.len(), 5 * (25 + 4));
        let failed = report.cell("no-BWP", "always_bwp", None).unwrap();
        assert_eq!(failed.status, CellStatus::Failed);
        assert_eq!(failed.failure.as_deref(), Some("FIXED_MECHANISM_UNAVAILABLE"));
        // no registered R&R profile, so mobility-only and LTE-only still run
        let unc = report.scenario_summary("unconstrained").unwrap();
        assert!(unc.stable);
        assert_eq!(unc.selections, vec![MechanismKind::Bwp]);
        let cell = report.cell("unconstrained", "polaris", Some(PolicyParams::new(0.5, 0.5).unwrap())).unwrap();
        assert_eq!(cell.exceedance_50ms, Some(0.0));
        let vs_ho = cell.reductions.iter().find(|r| r.baseline == BaselineKind::AlwaysHo).unwrap();
        assert!(vs_ho.mean_reduction.unwrap() > 0.8);
        let no_bwp = report.cell("no-BWP", "polaris", Some(PolicyParams::new(0.5, 0.5).unwrap())).unwrap();
        let vs_bwp = no_bwp.reductions.iter().find(|r| r.baseline == BaselineKind::AlwaysBwp).unwrap();
        assert_eq!(vs_bwp.status, CellStatus::Failed);
        assert!(!no_bwp.selected.contains(&MechanismKind::Ca));
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = sweep(&store(), &cfg()).unwrap();
        let b = sweep(&store(), &cfg()).unwrap();
        assert_eq!(a, b);
    }
}
