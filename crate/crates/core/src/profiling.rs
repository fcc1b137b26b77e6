//! Empirical disruption profiles: percentiles, relative variability,
//! amplification, exceedance curves, and the sliding-window profile store.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::decomposition::{LatencyDecomposition, Stage};
use crate::domain::{MechanismKind, StageLabel};

/// Medians at or below this are treated as zero.
pub const ZERO_EPS_MS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("EMPTY_SAMPLES: statistic requested over an empty sample set")]
    EmptySamples,
    #[error("ZERO_MEDIAN: median is zero while the spread is not")]
    ZeroMedian,
    #[error("INVALID_PROBABILITY: percentile level outside [0, 1]")]
    InvalidProbability,
    #[error("NON_INCREASING_THRESHOLDS: exceedance thresholds must strictly increase")]
    NonIncreasingThresholds,
    #[error("INVALID_SAMPLE: latency samples must be finite and non-negative")]
    InvalidSample,
}

impl StatsError {
    pub fn code(self) -> &'static str {
        match self {
            Self::EmptySamples => "EMPTY_SAMPLES",
            Self::ZeroMedian => "ZERO_MEDIAN",
            Self::InvalidProbability => "INVALID_PROBABILITY",
            Self::NonIncreasingThresholds => "NON_INCREASING_THRESHOLDS",
            Self::InvalidSample => "INVALID_SAMPLE",
        }
    }
}

fn sorted_copy(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySamples);
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(StatsError::InvalidSample);
    }
    let mut v = samples.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Linear interpolation between closest ranks over an already sorted slice:
/// position `1 + (n - 1) p`, one-based.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> Result<f64, StatsError> {
    if sorted.is_empty() {
        return Err(StatsError::EmptySamples);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::InvalidProbability);
    }
    let h = (sorted.len() - 1) as f64 * p;
    // h >= 0, so truncation is floor
    let lo = h as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        return Ok(sorted[lo.min(sorted.len() - 1)]);
    }
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

pub fn percentile(samples: &[f64], p: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::InvalidProbability);
    }
    percentile_sorted(&sorted_copy(samples)?, p)
}

fn variability_sorted(sorted: &[f64]) -> Result<(f64, f64), StatsError> {
    let q1 = percentile_sorted(sorted, 0.25)?;
    let median = percentile_sorted(sorted, 0.5)?;
    let q3 = percentile_sorted(sorted, 0.75)?;
    let iqr = q3 - q1;
    if median <= ZERO_EPS_MS {
        if iqr > ZERO_EPS_MS {
            return Err(StatsError::ZeroMedian);
        }
        return Ok((iqr, 0.0));
    }
    Ok((iqr, iqr / median))
}

/// IQR over median of the RRC-to-PHY completion latency.
pub fn relative_variability(samples_rrc_phy: &[f64]) -> Result<f64, StatsError> {
    variability_sorted(&sorted_copy(samples_rrc_phy)?).map(|(_, v)| v)
}

/// `P(T > t)` for each threshold.
pub fn exceedance_curve(samples: &[f64], thresholds: &[f64]) -> Result<Vec<(f64, f64)>, StatsError> {
    let sorted = sorted_copy(samples)?;
    if thresholds.windows(2).any(|w| w[1] <= w[0]) || thresholds.iter().any(|t| t.is_nan()) {
        return Err(StatsError::NonIncreasingThresholds);
    }
    let n = sorted.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| {
            let at_or_below = sorted.partition_point(|&s| s <= t);
            (t, (sorted.len() - at_or_below) as f64 / n)
        })
        .collect())
}

/// Empirical CDF `P(T <= t)`.
pub fn cdf_at(samples: &[f64], t: f64) -> Result<f64, StatsError> {
    let sorted = sorted_copy(samples)?;
    Ok(sorted.partition_point(|&s| s <= t) as f64 / sorted.len() as f64)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One latency observation as kept in a profile buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySample {
    pub t_phy_ms: f64,
    pub t_rrc_phy_ms: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<Stage>,
}

impl LatencySample {
    pub fn is_valid(&self) -> bool {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        ok(self.t_phy_ms) && ok(self.t_rrc_phy_ms) && self.t_rrc_phy_ms >= self.t_phy_ms
    }
}

impl From<&LatencyDecomposition> for LatencySample {
    fn from(d: &LatencyDecomposition) -> Self {
        Self {
            t_phy_ms: d.t_phy_ms,
            t_rrc_phy_ms: d.t_rrc_phy_ms,
            stages: d.stages.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub label: StageLabel,
    pub count: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    /// Mean fraction of the PHY-centric execution spent in the stage.
    pub mean_share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProfileIssue {
    /// RRC-to-PHY median is zero with non-zero spread; variability undefined.
    ZeroMedianRrcPhy,
    /// PHY-centric median is zero; amplification undefined.
    ZeroMedianPhy,
}

/// Per-mechanism statistics over both timing views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisruptionProfile {
    pub mechanism: MechanismKind,
    pub n: usize,
    pub mean_phy: f64,
    pub median_phy: f64,
    pub t95_phy: f64,
    pub mean_rrc_phy: f64,
    pub median_rrc_phy: f64,
    pub t95_rrc_phy: f64,
    pub iqr_rrc_phy: f64,
    pub rel_variability: Option<f64>,
    pub amp_ratio: Option<f64>,
    pub issues: Vec<ProfileIssue>,
    pub stage_summary: Vec<StageSummary>,
    pub samples: Vec<LatencySample>,
}

impl DisruptionProfile {
    /// Computes every statistic from the sample buffer.
    pub fn from_samples(mechanism: MechanismKind, samples: Vec<LatencySample>) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::EmptySamples);
        }
        if samples.iter().any(|s| !s.is_valid()) {
            return Err(StatsError::InvalidSample);
        }
        let phy: Vec<f64> = samples.iter().map(|s| s.t_phy_ms).collect();
        let rrc: Vec<f64> = samples.iter().map(|s| s.t_rrc_phy_ms).collect();
        let phy_sorted = sorted_copy(&phy)?;
        let rrc_sorted = sorted_copy(&rrc)?;

        let median_phy = percentile_sorted(&phy_sorted, 0.5)?;
        let median_rrc_phy = percentile_sorted(&rrc_sorted, 0.5)?;
        let mut issues = Vec::new();
        let (iqr_rrc_phy, rel_variability) = match variability_sorted(&rrc_sorted) {
            Ok((iqr, v)) => (iqr, Some(v)),
            Err(_) => {
                issues.push(ProfileIssue::ZeroMedianRrcPhy);
                (
                    percentile_sorted(&rrc_sorted, 0.75)? - percentile_sorted(&rrc_sorted, 0.25)?,
                    None,
                )
            }
        };
        let amp_ratio = if median_phy > ZERO_EPS_MS {
            Some(median_rrc_phy / median_phy)
        } else {
            issues.push(ProfileIssue::ZeroMedianPhy);
            None
        };

        Ok(Self {
            mechanism,
            n: samples.len(),
            mean_phy: mean(&phy),
            median_phy,
            t95_phy: percentile_sorted(&phy_sorted, 0.95)?,
            mean_rrc_phy: mean(&rrc),
            median_rrc_phy,
            t95_rrc_phy: percentile_sorted(&rrc_sorted, 0.95)?,
            iqr_rrc_phy,
            rel_variability,
            amp_ratio,
            issues,
            stage_summary: summarize_stages(&samples),
            samples,
        })
    }

    pub fn samples_phy(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t_phy_ms).collect()
    }

    pub fn samples_rrc_phy(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t_rrc_phy_ms).collect()
    }

    /// True when every stored statistic matches a fresh recomputation.
    pub fn is_consistent(&self) -> bool {
        match Self::from_samples(self.mechanism, self.samples.clone()) {
            Ok(fresh) => fresh == *self,
            Err(_) => false,
        }
    }
}

fn summarize_stages(samples: &[LatencySample]) -> Vec<StageSummary> {
    struct Acc {
        count: usize,
        sum: f64,
        min: f64,
        max: f64,
        share_sum: f64,
        share_n: usize,
    }
    let mut acc: BTreeMap<StageLabel, Acc> = BTreeMap::new();
    for s in samples {
        for st in &s.stages {
            let a = acc.entry(st.label).or_insert(Acc {
                count: 0,
                sum: 0.0,
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
                share_sum: 0.0,
                share_n: 0,
            });
            a.count += 1;
            a.sum += st.duration_ms;
            a.min = a.min.min(st.duration_ms);
            a.max = a.max.max(st.duration_ms);
            if s.t_phy_ms > 0.0 {
                a.share_sum += st.duration_ms / s.t_phy_ms;
                a.share_n += 1;
            }
        }
    }
    acc.into_iter()
        .map(|(label, a)| StageSummary {
            label,
            count: a.count,
            mean_ms: a.sum / a.count as f64,
            min_ms: a.min,
            max_ms: a.max,
            mean_share: if a.share_n == 0 { 0.0 } else { a.share_sum / a.share_n as f64 },
        })
        .collect()
}

pub fn build_profile(
    mechanism: MechanismKind,
    decomps: &[LatencyDecomposition],
) -> Result<DisruptionProfile, StatsError> {
    DisruptionProfile::from_samples(mechanism, decomps.iter().map(LatencySample::from).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoreConfig {
    /// Max retained samples per mechanism.
    pub window: usize,
    /// Minimum samples for a profile to take part in policy decisions.
    pub min_n: usize,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self { window: 1024, min_n: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Eligibility {
    Eligible,
    NoProfile,
    TooFewSamples,
    ZeroMedian,
}

/// Immutable snapshot of all profiles. `refresh` returns a new snapshot and
/// leaves this one untouched; unchanged profiles are shared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStore {
    pub config: StoreConfig,
    profiles: BTreeMap<MechanismKind, Arc<DisruptionProfile>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("profile for {0} does not match recomputation from its samples")]
    Inconsistent(MechanismKind),
    #[error("profile for {0} holds {1} samples, above the window")]
    OverWindow(MechanismKind, usize),
    #[error("profile keyed {0} describes {1}")]
    KeyMismatch(MechanismKind, MechanismKind),
}

impl ProfileStore {
    pub fn new(config: StoreConfig) -> Self {
        Self {
            config,
            profiles: BTreeMap::new(),
        }
    }

    /// Offline bootstrap from decomposed executions.
    pub fn bootstrap<'a, I>(config: StoreConfig, decomps: I) -> Self
    where
        I: IntoIterator<Item = (MechanismKind, &'a LatencyDecomposition)>,
    {
        let samples: Vec<_> = decomps
            .into_iter()
            .map(|(m, d)| (m, LatencySample::from(d)))
            .collect();
        Self::new(config).refresh_samples(&samples)
    }

    pub fn get(&self, mechanism: MechanismKind) -> Option<&DisruptionProfile> {
        self.profiles.get(&mechanism).map(Arc::as_ref)
    }

    pub fn shared(&self, mechanism: MechanismKind) -> Option<&Arc<DisruptionProfile>> {
        self.profiles.get(&mechanism)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &DisruptionProfile> {
        self.profiles.values().map(Arc::as_ref)
    }

    pub fn mechanisms(&self) -> impl Iterator<Item = MechanismKind> + '_ {
        self.profiles.keys().copied()
    }

    pub fn eligibility(&self, mechanism: MechanismKind) -> Eligibility {
        match self.get(mechanism) {
            None => Eligibility::NoProfile,
            Some(p) if p.n < self.config.min_n => Eligibility::TooFewSamples,
            Some(p) if p.rel_variability.is_none() => Eligibility::ZeroMedian,
            Some(_) => Eligibility::Eligible,
        }
    }

    pub fn is_eligible(&self, mechanism: MechanismKind) -> bool {
        self.eligibility(mechanism) == Eligibility::Eligible
    }

    pub fn refresh(&self, new: &[(MechanismKind, LatencyDecomposition)]) -> Self {
        let samples: Vec<_> = new.iter().map(|(m, d)| (*m, LatencySample::from(d))).collect();
        self.refresh_samples(&samples)
    }

    /// Appends samples per mechanism (oldest evicted beyond the window) and
    /// recomputes the touched profiles. Invalid samples are ignored.
    pub fn refresh_samples(&self, new: &[(MechanismKind, LatencySample)]) -> Self {
        let mut grouped: BTreeMap<MechanismKind, Vec<LatencySample>> = BTreeMap::new();
        for (m, s) in new {
            if s.is_valid() {
                grouped.entry(*m).or_default().push(s.clone());
            }
        }
        let mut profiles = self.profiles.clone();
        let window = self.config.window.max(1);
        for (m, fresh) in grouped {
            let mut buf: Vec<LatencySample> = self
                .profiles
                .get(&m)
                .map(|p| p.samples.clone())
                .unwrap_or_default();
            buf.extend(fresh);
            if buf.len() > window {
                buf.drain(..buf.len() - window);
            }
            if let Ok(p) = DisruptionProfile::from_samples(m, buf) {
                profiles.insert(m, Arc::new(p));
            }
        }
        Self {
            config: self.config,
            profiles,
        }
    }

    /// Replaces the profile set wholesale; used by fixtures and importers.
    pub fn with_profiles<I: IntoIterator<Item = DisruptionProfile>>(config: StoreConfig, profiles: I) -> Self {
        Self {
            config,
            profiles: profiles
                .into_iter()
                .map(|p| (p.mechanism, Arc::new(p)))
                .collect(),
        }
    }

    /// Checks every profile against recomputation from its samples.
    pub fn verify(&self) -> Result<(), StoreError> {
        for (k, p) in &self.profiles {
            if *k != p.mechanism {
                return Err(StoreError::KeyMismatch(*k, p.mechanism));
            }
            if p.samples.len() > self.config.window {
                return Err(StoreError::OverWindow(*k, p.samples.len()));
            }
            if !p.is_consistent() {
                return Err(StoreError::Inconsistent(*k));
            }
        }
        Ok(())
    }
}
