//! Plot-ready CSV tables derived from a profile store.

use std::path::{Path, PathBuf};

use polaris_core::domain::MechanismKind;
use polaris_core::evaluation::{CellStatus, SweepReport};
use polaris_core::profiling::{exceedance_curve, Eligibility, ProfileStore};
use serde::Serialize;

use crate::io::{create, FileError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplificationRow {
    pub mechanism: MechanismKind,
    pub label: &'static str,
    pub n: usize,
    pub eligibility: Eligibility,
    pub median_phy_ms: f64,
    pub median_rrc_phy_ms: f64,
    pub amp_ratio: Option<f64>,
    pub rel_variability: Option<f64>,
    pub mean_phy_ms: f64,
    pub t95_phy_ms: f64,
    pub t95_rrc_phy_ms: f64,
}

/// One row per registered mechanism, plus ineligible placeholder rows for
/// mechanisms without a profile.
pub fn amplification_table(store: &ProfileStore) -> Vec<AmplificationRow> {
    MechanismKind::ALL
        .iter()
        .map(|&m| match store.get(m) {
            Some(p) => AmplificationRow {
                mechanism: m,
                label: m.label(),
                n: p.n,
                eligibility: store.eligibility(m),
                median_phy_ms: p.median_phy,
                median_rrc_phy_ms: p.median_rrc_phy,
                amp_ratio: p.amp_ratio,
                rel_variability: p.rel_variability,
                mean_phy_ms: p.mean_phy,
                t95_phy_ms: p.t95_phy,
                t95_rrc_phy_ms: p.t95_rrc_phy,
            },
            None => AmplificationRow {
                mechanism: m,
                label: m.label(),
                n: 0,
                eligibility: Eligibility::NoProfile,
                median_phy_ms: f64::NAN,
                median_rrc_phy_ms: f64::NAN,
                amp_ratio: None,
                rel_variability: None,
                mean_phy_ms: f64::NAN,
                t95_phy_ms: f64::NAN,
                t95_rrc_phy_ms: f64::NAN,
            },
        })
        .collect()
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.digits$}"))
}

/// Fixed-width text rendering: ratio to one decimal, variability to two.
pub fn render_amplification(rows: &[AmplificationRow]) -> String {
    let mut out = format!(
        "{:<14} {:>6} {:>12} {:>14} {:>10} {:>8}  {}\n",
        "mechanism", "n", "median PHY", "median RRC-PHY", "ratio", "V", "status"
    );
    for r in rows {
        let status = match r.eligibility {
            Eligibility::Eligible => "",
            Eligibility::NoProfile => "ineligible (no profile)",
            Eligibility::TooFewSamples => "ineligible (too few samples)",
            Eligibility::ZeroMedian => "ineligible (zero median)",
        };
        out.push_str(&format!(
            "{:<14} {:>6} {:>12} {:>14} {:>10} {:>8}  {}\n",
            r.label,
            r.n,
            opt(Some(r.median_phy_ms).filter(|v| !v.is_nan()), 2),
            opt(Some(r.median_rrc_phy_ms).filter(|v| !v.is_nan()), 2),
            opt(r.amp_ratio, 1),
            opt(r.rel_variability, 2),
            status
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianRow {
    pub mechanism: MechanismKind,
    pub label: &'static str,
    pub median_phy_ms: f64,
    pub median_rrc_phy_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceRow {
    pub mechanism: MechanismKind,
    pub threshold_ms: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageShareRow {
    pub mechanism: MechanismKind,
    pub stage: String,
    pub count: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub mean_share: f64,
}

pub fn median_rows(store: &ProfileStore) -> Vec<MedianRow> {
    store
        .profiles()
        .map(|p| MedianRow {
            mechanism: p.mechanism,
            label: p.mechanism.label(),
            median_phy_ms: p.median_phy,
            median_rrc_phy_ms: p.median_rrc_phy,
        })
        .collect()
}

/// Ten thresholds per decade from 1 ms to 100 s.
pub fn default_thresholds() -> Vec<f64> {
    (0..=50)
        .map(|k| if k % 10 == 0 { 10f64.powi(k / 10) } else { 10f64.powf(k as f64 / 10.0) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Phy,
    RrcPhy,
}

pub fn exceedance_rows(store: &ProfileStore, view: View, thresholds: &[f64]) -> Vec<ExceedanceRow> {
    let mut out = Vec::new();
    for p in store.profiles() {
        let samples = match view {
            View::Phy => p.samples_phy(),
            View::RrcPhy => p.samples_rrc_phy(),
        };
        let curve = exceedance_curve(&samples, thresholds).expect("profiles hold samples and thresholds increase");
        out.extend(curve.into_iter().map(|(t, pr)| ExceedanceRow {
            mechanism: p.mechanism,
            threshold_ms: t,
            probability: pr,
        }));
    }
    out
}

pub fn stage_share_rows(store: &ProfileStore) -> Vec<StageShareRow> {
    store
        .profiles()
        .flat_map(|p| {
            p.stage_summary.iter().map(move |s| StageShareRow {
                mechanism: p.mechanism,
                stage: s.label.to_string(),
                count: s.count,
                mean_ms: s.mean_ms,
                min_ms: s.min_ms,
                max_ms: s.max_ms,
                mean_share: s.mean_share,
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), FileError> {
    let to_err = |e: csv::Error| FileError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r).map_err(to_err)?;
    }
    w.flush().map_err(|e| FileError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub const FIG1: &str = "fig1_median.csv";
pub const FIG2A: &str = "fig2a_exceedance_phy.csv";
pub const FIG2B: &str = "fig2b_exceedance_rrc_phy.csv";
pub const STAGES: &str = "stage_shares.csv";
pub const AMPLIFICATION: &str = "amplification.csv";

/// Writes the full CSV bundle into `dir` and returns the written paths.
pub fn write_bundle(store: &ProfileStore, dir: &Path) -> Result<Vec<PathBuf>, FileError> {
    let thresholds = default_thresholds();
    let paths: Vec<PathBuf> = [FIG1, FIG2A, FIG2B, STAGES, AMPLIFICATION].iter().map(|f| dir.join(f)).collect();
    write_csv(&paths[0], &median_rows(store))?;
    write_csv(&paths[1], &exceedance_rows(store, View::Phy, &thresholds))?;
    write_csv(&paths[2], &exceedance_rows(store, View::RrcPhy, &thresholds))?;
    write_csv(&paths[3], &stage_share_rows(store))?;
    write_csv(&paths[4], &amplification_table(store))?;
    Ok(paths)
}

/// Flat comparison matrix: one row per cell, reduction columns per baseline.
pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> Result<(), FileError> {
    let to_err = |e: csv::Error| FileError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = [
        "scenario", "policy", "lambda", "mu", "status", "failure", "activations", "failures", "mean_ms", "t95_ms",
        "exceedance_50ms", "selected",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if let Some(first) = report.cells.first() {
        for r in &first.reductions {
            header.push(format!("mean_reduction_vs_{}", r.baseline));
            header.push(format!("t95_reduction_vs_{}", r.baseline));
        }
    }
    w.write_record(&header).map_err(to_err)?;
    let num = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    for c in &report.cells {
        let mut rec = vec![
            c.scenario.clone(),
            c.policy.clone(),
            num(c.lambda),
            num(c.mu),
            if c.status == CellStatus::Ok { "OK".into() } else { "FAILED".into() },
            c.failure.clone().unwrap_or_default(),
            c.activations.to_string(),
            c.failures.to_string(),
            num(c.mean_ms),
            num(c.t95_ms),
            num(c.exceedance_50ms),
            c.selected.iter().map(|m| m.id()).collect::<Vec<_>>().join("|"),
        ];
        for r in &c.reductions {
            if r.status == CellStatus::Ok {
                rec.push(num(r.mean_reduction));
                rec.push(num(r.t95_reduction));
            } else {
                rec.push("FAILED".into());
                rec.push("FAILED".into());
            }
        }
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| FileError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
