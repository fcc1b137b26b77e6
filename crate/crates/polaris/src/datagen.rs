//! Synthetic trace corpora calibrated to per-mechanism latency targets.
//!
//! Each execution draws one standard-normal score `z` (stratified across the
//! population, then shuffled). The RRC-to-PHY latency is log-normal,
//! `median_rrc * exp(s_rrc * z)`, with `s_rrc` chosen so IQR / median hits
//! the variability target. The PHY-centric latency uses the same score,
//! `median_phy * exp(s_phy * z)`, capped at the RRC-to-PHY value so the
//! reaction delay is never negative. The cap leaves the quartiles untouched
//! as long as `ln(amp) >= 0.6745 * |s_rrc - s_phy|`.

use std::collections::BTreeMap;

use polaris_core::domain::{MechanismKind, MilestoneKind, StageLabel};
use polaris_core::trace::TraceEvent;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Standard-normal upper quartile; a log-normal has IQR / median = 2 sinh(IQR_Z * sigma).
pub const IQR_Z: f64 = 0.674_489_750_196_081_7;
pub const P95_Z: f64 = 1.644_853_626_951_472_2;
/// PHY-side log-sigma used when only one PHY statistic is given.
pub const DEFAULT_PHY_SIGMA: f64 = 0.35;
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StagePlan {
    /// PHY-centric time split uniformly at random across stages.
    #[default]
    Uniform,
    /// Fixed fractions of the PHY-centric time for the listed stages
    /// (`"FROM->TO"`); unlisted stages share the remainder.
    Shares { shares: BTreeMap<String, f64> },
    /// Cell acquisition: PBCH->SIB1 takes a fraction drawn from `share`, the
    /// SIB1-to-camping span lasts a duration drawn from `camp_ms`.
    Acquisition { share: [f64; 2], camp_ms: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub mechanism: MechanismKind,
    #[serde(default)]
    pub median_phy: Option<f64>,
    pub amp_ratio: f64,
    pub rel_variability: f64,
    #[serde(default)]
    pub mean_phy: Option<f64>,
    #[serde(default)]
    pub t95_phy: Option<f64>,
    pub count: usize,
    #[serde(default)]
    pub stages: StagePlan,
}

impl CalibrationTarget {
    fn new(mechanism: MechanismKind, median_phy: f64, amp_ratio: f64, rel_variability: f64, count: usize) -> Self {
        Self {
            mechanism,
            median_phy: Some(median_phy),
            amp_ratio,
            rel_variability,
            mean_phy: None,
            t95_phy: None,
            count,
            stages: StagePlan::Uniform,
        }
    }
}

fn acquisition() -> StagePlan {
    StagePlan::Acquisition {
        share: [0.80, 0.95],
        camp_ms: [1.0, 3.0],
    }
}

/// Published per-mechanism targets: amplification and variability per id,
/// BWP's 6.25 ms PHY median, CA's 1225 ms PHY mean and the corpus counts
/// (1,600 executions). Other PHY medians follow the relative speeds between
/// mechanisms (BWP 45% faster than LTE HO and 85% faster than NR HO, LTE 71%
/// and 68% faster than NR for baseline and R&R, EN-DC at 29 ms).
pub fn default_targets() -> Vec<CalibrationTarget> {
    use MechanismKind::*;
    let bwp = 6.25;
    let rr_lte = 12.0;
    let base_lte = 29.0;
    let mut ca = CalibrationTarget::new(Ca, 0.0, 0.9, 3.15, 49);
    ca.median_phy = None;
    ca.mean_phy = Some(1225.0);
    let mut out = vec![
        CalibrationTarget::new(Bwp, bwp, 328.5, 5.68, 458),
        ca,
        CalibrationTarget::new(Endc, 29.0, 2.0, 0.50, 302),
        CalibrationTarget::new(HoLte, bwp / (1.0 - 0.45), 1.0, 0.63, 287),
        CalibrationTarget::new(HoNr, bwp / (1.0 - 0.85), 1.3, 0.46, 287),
        CalibrationTarget::new(RrLte, rr_lte, 11.7, 0.10, 6),
        CalibrationTarget::new(RrNr, rr_lte / (1.0 - 0.68), 3.6, 0.15, 5),
        CalibrationTarget::new(BaselineLte, base_lte, 8.4, 0.94, 103),
        CalibrationTarget::new(BaselineNr, base_lte / (1.0 - 0.71), 5.1, 0.69, 103),
    ];
    for t in &mut out {
        if matches!(t.mechanism, RrLte | RrNr | BaselineLte | BaselineNr) {
            t.stages = acquisition();
        }
    }
    out
}

/// Variant of the default targets for policy comparisons: PHY-centric
/// latency of HO, EN-DC and R&R is pinned relative to BWP so that
/// mean_BWP / mean_LTE-HO = 0.149 and T95_BWP / T95_LTE-HO = 0.103, EN-DC at
/// 0.358 / 0.346 of LTE HO, NR HO at 1.5x, LTE R&R at 1.25x / 1.40x and NR R&R
/// at 1.5x / 1.748x. Every mechanism gets `count` executions.
pub fn tuned_reduction_targets(count: usize) -> Vec<CalibrationTarget> {
    use MechanismKind::*;
    let base = default_targets();
    let bwp = base.iter().find(|t| t.mechanism == Bwp).expect("BWP target");
    let fit_bwp = fit(bwp, Feasibility::Strict).expect("BWP target is feasible").0;
    let bwp_mean = fit_bwp.median_phy * (fit_bwp.sigma_phy * fit_bwp.sigma_phy / 2.0).exp();
    let bwp_t95 = fit_bwp.median_phy * (P95_Z * fit_bwp.sigma_phy).exp();
    let ho_mean = bwp_mean / 0.149;
    let ho_t95 = bwp_t95 / 0.103;
    let pinned = |m: MechanismKind, mean_x: f64, t95_x: f64| -> (MechanismKind, f64, f64) { (m, ho_mean * mean_x, ho_t95 * t95_x) };
    let table = [
        pinned(HoLte, 1.0, 1.0),
        pinned(Endc, 0.358, 0.346),
        pinned(HoNr, 1.5, 1.5),
        pinned(RrLte, 1.25, 1.40),
        pinned(RrNr, 1.5, 1.748),
    ];
    base.into_iter()
        .map(|mut t| {
            t.count = count;
            if let Some(&(_, mean, t95)) = table.iter().find(|(m, _, _)| *m == t.mechanism) {
                let s = sigma_from_mean_t95(mean, t95).expect("pinned targets are log-normal");
                t.median_phy = None;
                t.mean_phy = Some(mean);
                t.t95_phy = Some(t95);
                t.amp_ratio = 1.0;
                t.rel_variability = 2.0 * (IQR_Z * s).sinh();
            }
            t
        })
        .collect()
}

/// Log-sigma of a log-normal with the given mean and 95th percentile (the
/// smaller root; `None` when no log-normal has that pair).
pub fn sigma_from_mean_t95(mean: f64, t95: f64) -> Option<f64> {
    let disc = P95_Z * P95_Z - 2.0 * (t95 / mean).ln();
    (disc >= 0.0).then(|| P95_Z - disc.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    /// Infeasible targets are an error.
    Strict,
    /// Infeasible targets are replaced by the closest achievable ones and reported.
    #[default]
    Closest,
}

/// Log-normal parameters realized for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTarget {
    pub mechanism: MechanismKind,
    pub median_phy: f64,
    pub sigma_phy: f64,
    pub median_rrc_phy: f64,
    pub sigma_rrc_phy: f64,
    pub amp_ratio: f64,
    pub rel_variability: f64,
    pub count: usize,
}

/// A target that cannot be met, with what is generated instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Infeasible {
    pub mechanism: MechanismKind,
    pub reason: String,
    pub requested_amp_ratio: f64,
    pub achievable_amp_ratio: f64,
    pub requested_sigma_phy: Option<f64>,
    pub achievable_sigma_phy: f64,
    pub achievable_median_phy: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatagenError {
    #[error("invalid target for {0}: {1}")]
    InvalidTarget(MechanismKind, String),
    #[error("INFEASIBLE_TARGET: {}", .0.iter().map(|i| format!("{}: {}", i.mechanism, i.reason)).collect::<Vec<_>>().join("; "))]
    InfeasibleTarget(Vec<Infeasible>),
}

impl DatagenError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidTarget(..) => "INVALID_TARGET",
            Self::InfeasibleTarget(_) => "INFEASIBLE_TARGET",
        }
    }
}

fn positive(x: Option<f64>) -> bool {
    x.map_or(true, |v| v.is_finite() && v > 0.0)
}

fn validate(t: &CalibrationTarget) -> Result<(), DatagenError> {
    let bad = |msg: &str| Err(DatagenError::InvalidTarget(t.mechanism, msg.into()));
    if !(t.amp_ratio.is_finite() && t.amp_ratio > 0.0) {
        return bad("amp_ratio must be positive");
    }
    if !(t.rel_variability.is_finite() && t.rel_variability >= 0.0) {
        return bad("rel_variability must be non-negative");
    }
    if !positive(t.median_phy) || !positive(t.mean_phy) || !positive(t.t95_phy) {
        return bad("PHY statistics must be positive");
    }
    if t.median_phy.is_none() && t.mean_phy.is_none() && t.t95_phy.is_none() {
        return bad("one of median_phy, mean_phy, t95_phy is required");
    }
    if t.count == 0 {
        return bad("count must be positive");
    }
    let stages = stage_labels(t.mechanism);
    match &t.stages {
        StagePlan::Uniform => {}
        StagePlan::Shares { shares } => {
            let mut sum = 0.0;
            for (label, f) in shares {
                if !stages.iter().any(|s| s.to_string() == *label) {
                    return bad(&format!("{label} is not a stage of this mechanism"));
                }
                if !(f.is_finite() && *f >= 0.0) {
                    return bad("stage shares must be non-negative");
                }
                sum += f;
            }
            if sum > 1.0 + TOL {
                return bad("stage shares sum above 1");
            }
            if shares.len() == stages.len() && (sum - 1.0).abs() > TOL {
                return bad("shares for every stage must sum to 1");
            }
        }
        StagePlan::Acquisition { share, camp_ms } => {
            if !(0.0 < share[0] && share[0] <= share[1] && share[1] < 1.0) {
                return bad("acquisition share range must lie in (0, 1)");
            }
            if !(0.0 < camp_ms[0] && camp_ms[0] <= camp_ms[1]) {
                return bad("camping duration range must be positive");
            }
            let acq = StageLabel::new(MilestoneKind::PbchMibDecode, MilestoneKind::Sib1Acq);
            if !stages.contains(&acq) {
                return bad("acquisition plan needs a PBCH->SIB1 stage");
            }
        }
    }
    Ok(())
}

/// Solves the log-normal parameters for a target.
pub fn fit(t: &CalibrationTarget, mode: Feasibility) -> Result<(FittedTarget, Option<Infeasible>), DatagenError> {
    validate(t)?;
    let mut reasons = Vec::new();
    let sigma_rrc = (t.rel_variability / 2.0).asinh() / IQR_Z;
    let mut amp = t.amp_ratio;
    if amp < 1.0 {
        reasons.push(format!(
            "amplification {amp} is below 1, but RRC-to-PHY latency contains the PHY-centric latency"
        ));
        amp = 1.0;
    }
    let band = amp.ln() / IQR_Z;
    let (lo, hi) = ((sigma_rrc - band).max(0.0), sigma_rrc + band);

    // PHY log-sigma implied by two given statistics, if any
    let requested = match (t.median_phy, t.mean_phy, t.t95_phy) {
        (Some(m), Some(mean), _) => Some(if mean >= m { (2.0 * (mean / m).ln()).sqrt() } else { -1.0 }),
        (Some(m), None, Some(t95)) => Some((t95 / m).ln() / P95_Z),
        (None, Some(mean), Some(t95)) => Some(sigma_from_mean_t95(mean, t95).unwrap_or(-1.0)),
        _ => None,
    };
    let sigma_phy = match requested {
        Some(s) if s < 0.0 => {
            reasons.push("no log-normal matches the given PHY statistics".into());
            DEFAULT_PHY_SIGMA.clamp(lo, hi)
        }
        Some(s) if s < lo - TOL || s > hi + TOL => {
            reasons.push(format!(
                "PHY log-sigma {s:.4} is outside [{lo:.4}, {hi:.4}] allowed by amplification {amp} and variability {}",
                t.rel_variability
            ));
            s.clamp(lo, hi)
        }
        Some(s) => s.clamp(lo, hi),
        None => DEFAULT_PHY_SIGMA.clamp(lo, hi),
    };
    let median_phy = match (t.median_phy, t.mean_phy, t.t95_phy) {
        (Some(m), _, _) => m,
        (None, Some(mean), _) => mean / (sigma_phy * sigma_phy / 2.0).exp(),
        (None, None, Some(t95)) => t95 / (P95_Z * sigma_phy).exp(),
        (None, None, None) => unreachable!("validated"),
    };
    let fitted = FittedTarget {
        mechanism: t.mechanism,
        median_phy,
        sigma_phy,
        median_rrc_phy: amp * median_phy,
        sigma_rrc_phy: sigma_rrc,
        amp_ratio: amp,
        rel_variability: t.rel_variability,
        count: t.count,
    };
    if reasons.is_empty() {
        return Ok((fitted, None));
    }
    let issue = Infeasible {
        mechanism: t.mechanism,
        reason: reasons.join("; "),
        requested_amp_ratio: t.amp_ratio,
        achievable_amp_ratio: amp,
        requested_sigma_phy: requested.filter(|s| *s >= 0.0),
        achievable_sigma_phy: sigma_phy,
        achievable_median_phy: median_phy,
    };
    match mode {
        Feasibility::Strict => Err(DatagenError::InfeasibleTarget(vec![issue])),
        Feasibility::Closest => Ok((fitted, Some(issue))),
    }
}

fn stage_labels(m: MechanismKind) -> Vec<StageLabel> {
    m.template()[1..].windows(2).map(|w| StageLabel::new(w[0], w[1])).collect()
}

/// Splits `total` into `k` parts at uniformly random cut points.
fn random_split<R: Rng>(rng: &mut R, total: f64, k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(k);
    for c in cuts.into_iter().chain(std::iter::once(1.0)) {
        out.push((c - prev) * total);
        prev = c;
    }
    out
}

fn stage_durations<R: Rng>(rng: &mut R, m: MechanismKind, plan: &StagePlan, t_phy: f64) -> Vec<f64> {
    let labels = stage_labels(m);
    match plan {
        StagePlan::Uniform => random_split(rng, t_phy, labels.len()),
        StagePlan::Shares { shares } => {
            let fixed: Vec<Option<f64>> = labels.iter().map(|l| shares.get(&l.to_string()).copied()).collect();
            let free = fixed.iter().filter(|f| f.is_none()).count();
            let rest = (1.0 - fixed.iter().flatten().sum::<f64>()).max(0.0) * t_phy;
            let mut split = random_split(rng, rest, free).into_iter();
            fixed
                .into_iter()
                .map(|f| f.map_or_else(|| split.next().unwrap_or(0.0), |f| f * t_phy))
                .collect()
        }
        StagePlan::Acquisition { share, camp_ms } => {
            let acq_label = StageLabel::new(MilestoneKind::PbchMibDecode, MilestoneKind::Sib1Acq);
            let idx = labels.iter().position(|l| *l == acq_label).expect("validated");
            let s = rng.random_range(share[0]..=share[1]);
            let camp_draw = rng.random_range(camp_ms[0]..=camp_ms[1]);
            let (pre, acq, camp) = if idx == 0 {
                let camp = ((1.0 - s) * t_phy).clamp(camp_ms[0], camp_ms[1]).min(t_phy);
                (0.0, t_phy - camp, camp)
            } else {
                let acq = s * t_phy;
                let camp = camp_draw.min(t_phy - acq);
                (t_phy - acq - camp, acq, camp)
            };
            let mut out = random_split(rng, pre, idx);
            out.push(acq);
            out.extend(random_split(rng, camp, labels.len() - idx - 1));
            out
        }
    }
}

/// One generated execution before it is laid out on a device clock.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawnExecution {
    pub mechanism: MechanismKind,
    pub t_react_ms: f64,
    pub t_phy_ms: f64,
    pub stages_ms: Vec<f64>,
}

/// Draws the executions for one fitted target from its own stream.
pub fn draw(fitted: &FittedTarget, plan: &StagePlan, seed: u64) -> Vec<DrawnExecution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + fitted.mechanism as u64);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let n = fitted.count;
    let mut zs: Vec<f64> = (0..n)
        .map(|i| {
            let u = (i as f64 + rng.random::<f64>()) / n as f64;
            normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
        })
        .collect();
    zs.shuffle(&mut rng);
    zs.into_iter()
        .map(|z| {
            let rrc = fitted.median_rrc_phy * (fitted.sigma_rrc_phy * z).exp();
            let phy = (fitted.median_phy * (fitted.sigma_phy * z).exp()).min(rrc);
            DrawnExecution {
                mechanism: fitted.mechanism,
                t_react_ms: rrc - phy,
                t_phy_ms: phy,
                stages_ms: stage_durations(&mut rng, fitted.mechanism, plan, phy),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenOptions {
    pub feasibility: Feasibility,
    pub devices: usize,
    /// Multiplier on every target count.
    pub scale: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            feasibility: Feasibility::Closest,
            devices: 4,
            scale: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub events: Vec<TraceEvent>,
    pub fitted: Vec<FittedTarget>,
    pub issues: Vec<Infeasible>,
    pub executions: usize,
}

/// Generates a trace: executions of all targets shuffled across devices,
/// each device with its own clock and idle gaps of 100-1000 ms, lines merged
/// by timestamp.
pub fn generate(targets: &[CalibrationTarget], seed: u64, opts: GenOptions) -> Result<Corpus, DatagenError> {
    let mut fitted = Vec::new();
    let mut issues = Vec::new();
    let mut errors = Vec::new();
    let mut drawn = Vec::new();
    for t in targets {
        let mut t = t.clone();
        t.count *= opts.scale.max(1);
        match fit(&t, opts.feasibility) {
            Ok((f, issue)) => {
                drawn.extend(draw(&f, &t.stages, seed));
                issues.extend(issue);
                fitted.push(f);
            }
            Err(DatagenError::InfeasibleTarget(v)) => errors.extend(v),
            Err(e) => return Err(e),
        }
    }
    if !errors.is_empty() {
        return Err(DatagenError::InfeasibleTarget(errors));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    drawn.shuffle(&mut rng);
    let devices = opts.devices.max(1);
    let mut clocks = vec![0.0f64; devices];
    // (ts, device, per-device order, event)
    let mut lines: Vec<(f64, usize, usize, TraceEvent)> = Vec::new();
    let mut order = vec![0usize; devices];
    for d in &drawn {
        let dev = rng.random_range(0..devices);
        let t0 = clocks[dev] + rng.random_range(100.0..1000.0);
        let template = d.mechanism.template();
        let mut ts = vec![t0, t0 + d.t_react_ms];
        for s in &d.stages_ms {
            ts.push(ts[ts.len() - 1] + s);
        }
        debug_assert_eq!(ts.len(), template.len());
        for (k, t) in template.iter().zip(&ts) {
            let hint = k.is_trigger().then_some(d.mechanism);
            let e = TraceEvent::new(*t, *k, hint, format!("ue-{dev}"), 0).expect("timestamps are non-negative");
            lines.push((*t, dev, order[dev], e));
            order[dev] += 1;
        }
        clocks[dev] = ts[ts.len() - 1];
    }
    lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let events = lines
        .into_iter()
        .enumerate()
        .map(|(i, (_, _, _, mut e))| {
            e.raw_seq = i as u64 + 1;
            e
        })
        .collect();
    Ok(Corpus {
        events,
        fitted,
        issues,
        executions: drawn.len(),
    })
}
