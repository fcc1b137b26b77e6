//! Disruption score, cross-mechanism normalization, argmin selection and the
//! static baseline policies.
//!
//! The score of mechanism `m` is
//!
//! ```text
//! D_m = [lambda * t95_m + (1 - lambda) * mean_m] * (1 + mu * V_m)
//! ```
//!
//! where every component is min-max normalized over the candidate set. The
//! selected mechanism minimizes `D_m`; ties resolve to the lexicographically
//! smallest id.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Family, MechanismKind};
use crate::profiling::ProfileStore;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("NO_FEASIBLE_MECHANISM: no eligible mechanism in scenario `{0}`")]
    NoFeasibleMechanism(String),
    #[error("FIXED_MECHANISM_UNAVAILABLE: {0} is not available in scenario `{1}`")]
    FixedMechanismUnavailable(String, String),
    #[error("NON_FINITE_INPUT: score components must be finite and non-negative")]
    NonFiniteInput,
    #[error("EMPTY_CANDIDATES: nothing to normalize")]
    EmptyCandidates,
    #[error("INVALID_PARAMS: lambda and mu must lie in [0, 1]")]
    InvalidParams,
    #[error("INVALID_SCENARIO: {0}")]
    InvalidScenario(String),
}

impl PolicyError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::NoFeasibleMechanism(_) => "NO_FEASIBLE_MECHANISM",
            Self::FixedMechanismUnavailable(..) => "FIXED_MECHANISM_UNAVAILABLE",
            Self::NonFiniteInput => "NON_FINITE_INPUT",
            Self::EmptyCandidates => "EMPTY_CANDIDATES",
            Self::InvalidParams => "INVALID_PARAMS",
            Self::InvalidScenario(_) => "INVALID_SCENARIO",
        }
    }
}

/// Tail/mean tradeoff (`lambda`) and variability weight (`mu`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PolicyParams {
    lambda: f64,
    mu: f64,
}

#[derive(Deserialize)]
struct RawParams {
    lambda: f64,
    mu: f64,
}

impl TryFrom<RawParams> for PolicyParams {
    type Error = PolicyError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        Self::new(raw.lambda, raw.mu)
    }
}

impl PolicyParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self, PolicyError> {
        let unit = 0.0..=1.0;
        if !unit.contains(&lambda) || !unit.contains(&mu) {
            return Err(PolicyError::InvalidParams);
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// The sweep grid {0, 0.25, 0.5, 0.75, 1} for both parameters.
pub const GRID_STEPS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

pub fn parameter_grid() -> Vec<PolicyParams> {
    let mut out = Vec::with_capacity(25);
    for &lambda in &GRID_STEPS {
        for &mu in &GRID_STEPS {
            out.push(PolicyParams { lambda, mu });
        }
    }
    out
}

/// Named feasibility constraint for a spectrum activation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    name: String,
    allowed: BTreeSet<MechanismKind>,
}

#[derive(Deserialize)]
struct RawScenario {
    name: String,
    allowed: BTreeSet<MechanismKind>,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = PolicyError;

    fn try_from(raw: RawScenario) -> Result<Self, Self::Error> {
        Self::new(raw.name, raw.allowed)
    }
}

pub const CANONICAL_SCENARIOS: [&str; 5] =
    ["unconstrained", "no-BWP", "mobility-only", "LTE-only", "HO-or-BWP"];

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        allowed: impl IntoIterator<Item = MechanismKind>,
    ) -> Result<Self, PolicyError> {
        let name = name.into();
        let allowed: BTreeSet<_> = allowed.into_iter().collect();
        if allowed.is_empty() {
            return Err(PolicyError::InvalidScenario(alloc::format!("`{name}` allows nothing")));
        }
        if let Some(b) = allowed.iter().find(|m| m.is_baseline()) {
            return Err(PolicyError::InvalidScenario(alloc::format!(
                "`{name}` lists reference procedure {b}"
            )));
        }
        Ok(Self { name, allowed })
    }

    /// One of the five canonical scenarios, matched case-insensitively.
    pub fn canonical(name: &str) -> Option<Self> {
        use MechanismKind::*;
        let key = name.to_ascii_lowercase();
        let (canon, allowed): (&str, Vec<MechanismKind>) = match key.as_str() {
            "unconstrained" => ("unconstrained", MechanismKind::SELECTABLE.to_vec()),
            "no-bwp" => (
                "no-BWP",
                MechanismKind::SELECTABLE.into_iter().filter(|m| *m != Bwp).collect(),
            ),
            "mobility-only" => ("mobility-only", alloc::vec![HoNr, HoLte, RrNr, RrLte]),
            "lte-only" => ("LTE-only", alloc::vec![HoLte, RrLte]),
            "ho-or-bwp" => ("HO-or-BWP", alloc::vec![HoNr, HoLte, Bwp]),
            _ => return None,
        };
        Some(Self {
            name: canon.to_string(),
            allowed: allowed.into_iter().collect(),
        })
    }

    pub fn all_canonical() -> Vec<Self> {
        CANONICAL_SCENARIOS
            .iter()
            .filter_map(|n| Self::canonical(n))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn allowed(&self) -> &BTreeSet<MechanismKind> {
        &self.allowed
    }

    pub fn allows(&self, m: MechanismKind) -> bool {
        self.allowed.contains(&m)
    }
}

/// Unnormalized inputs to the score, read from a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawComponents {
    pub mean_phy: f64,
    pub t95_phy: f64,
    pub variability: f64,
}

impl RawComponents {
    fn is_valid(&self) -> bool {
        [self.mean_phy, self.t95_phy, self.variability]
            .iter()
            .all(|x| x.is_finite() && *x >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreComponents {
    pub raw_mean_phy: f64,
    pub raw_t95_phy: f64,
    pub raw_variability: f64,
    pub norm_mean: f64,
    pub norm_t95: f64,
    pub norm_variability: f64,
}

fn min_max(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn scale(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Per-component min-max normalization over the given candidates. A
/// component shared by all candidates normalizes to 0.
pub fn normalize(
    candidates: &[(MechanismKind, RawComponents)],
) -> Result<Vec<(MechanismKind, ScoreComponents)>, PolicyError> {
    normalize_against(candidates, candidates)
}

/// Normalizes `candidates` using the ranges spanned by `reference`.
fn normalize_against(
    candidates: &[(MechanismKind, RawComponents)],
    reference: &[(MechanismKind, RawComponents)],
) -> Result<Vec<(MechanismKind, ScoreComponents)>, PolicyError> {
    if candidates.is_empty() || reference.is_empty() {
        return Err(PolicyError::EmptyCandidates);
    }
    if candidates.iter().chain(reference).any(|(_, r)| !r.is_valid()) {
        return Err(PolicyError::NonFiniteInput);
    }
    let (mlo, mhi) = min_max(reference.iter().map(|(_, r)| r.mean_phy));
    let (tlo, thi) = min_max(reference.iter().map(|(_, r)| r.t95_phy));
    let (vlo, vhi) = min_max(reference.iter().map(|(_, r)| r.variability));
    Ok(candidates
        .iter()
        .map(|(m, r)| {
            (
                *m,
                ScoreComponents {
                    raw_mean_phy: r.mean_phy,
                    raw_t95_phy: r.t95_phy,
                    raw_variability: r.variability,
                    norm_mean: scale(r.mean_phy, mlo, mhi),
                    norm_t95: scale(r.t95_phy, tlo, thi),
                    norm_variability: scale(r.variability, vlo, vhi),
                },
            )
        })
        .collect())
}

pub fn disruption_score(c: &ScoreComponents, params: PolicyParams) -> f64 {
    let latency = params.lambda * c.norm_t95 + (1.0 - params.lambda) * c.norm_mean;
    latency * (1.0 + params.mu * c.norm_variability)
}

/// Which mechanisms the normalization ranges are taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeOver {
    /// Only the scenario's eligible candidates.
    #[default]
    Scenario,
    /// Every eligible selectable mechanism, whether or not the scenario allows it.
    All,
}

impl FromStr for NormalizeOver {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scenario" => Ok(Self::Scenario),
            "all" => Ok(Self::All),
            other => Err(PolicyError::InvalidScenario(alloc::format!("normalize-over `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    AlwaysBwp,
    AlwaysHo,
    MinMean,
    MinT95,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [Self::AlwaysBwp, Self::AlwaysHo, Self::MinMean, Self::MinT95];

    pub fn name(self) -> &'static str {
        match self {
            Self::AlwaysBwp => "always_bwp",
            Self::AlwaysHo => "always_ho",
            Self::MinMean => "min_mean",
            Self::MinT95 => "min_t95",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
            .ok_or_else(|| PolicyError::InvalidScenario(alloc::format!("unknown baseline `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "baseline", rename_all = "snake_case")]
pub enum DecisionRule {
    Polaris,
    Baseline(BaselineKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub mechanism: MechanismKind,
    pub components: ScoreComponents,
    pub score: f64,
}

/// Full trace of one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub rule: DecisionRule,
    pub scenario: String,
    pub params: Option<PolicyParams>,
    pub normalize_over: NormalizeOver,
    pub candidates: Vec<CandidateScore>,
    pub selected: MechanismKind,
    pub tie_broken: bool,
}

fn raw_components(store: &ProfileStore, m: MechanismKind) -> Option<RawComponents> {
    let p = store.get(m)?;
    Some(RawComponents {
        mean_phy: p.mean_phy,
        t95_phy: p.t95_phy,
        variability: p.rel_variability?,
    })
}

fn eligible_in(store: &ProfileStore, scenario: &Scenario) -> Vec<(MechanismKind, RawComponents)> {
    scenario
        .allowed()
        .iter()
        .filter(|m| store.is_eligible(**m))
        .filter_map(|m| raw_components(store, *m).map(|r| (*m, r)))
        .collect()
}

/// Lowest score wins; equal scores go to the smallest id. Candidates arrive
/// sorted by id.
fn argmin(scored: &[CandidateScore]) -> (MechanismKind, bool) {
    let best = scored
        .iter()
        .map(|c| c.score)
        .fold(f64::INFINITY, f64::min);
    let mut minimizers = scored.iter().filter(|c| c.score == best);
    let first = minimizers.next().map(|c| c.mechanism).unwrap_or(scored[0].mechanism);
    (first, minimizers.next().is_some())
}

pub fn select(
    store: &ProfileStore,
    scenario: &Scenario,
    params: PolicyParams,
) -> Result<PolicyDecision, PolicyError> {
    select_with(store, scenario, params, NormalizeOver::Scenario)
}

pub fn select_with(
    store: &ProfileStore,
    scenario: &Scenario,
    params: PolicyParams,
    over: NormalizeOver,
) -> Result<PolicyDecision, PolicyError> {
    let candidates = eligible_in(store, scenario);
    if candidates.is_empty() {
        return Err(PolicyError::NoFeasibleMechanism(scenario.name().into()));
    }
    let reference = match over {
        NormalizeOver::Scenario => candidates.clone(),
        NormalizeOver::All => {
            let all = Scenario::canonical("unconstrained").expect("canonical scenario");
            eligible_in(store, &all)
        }
    };
    let scored: Vec<CandidateScore> = normalize_against(&candidates, &reference)?
        .into_iter()
        .map(|(mechanism, components)| CandidateScore {
            mechanism,
            score: disruption_score(&components, params),
            components,
        })
        .collect();
    let (selected, tie_broken) = argmin(&scored);
    Ok(PolicyDecision {
        rule: DecisionRule::Polaris,
        scenario: scenario.name().into(),
        params: Some(params),
        normalize_over: over,
        candidates: scored,
        selected,
        tie_broken,
    })
}

pub fn baseline_select(
    store: &ProfileStore,
    scenario: &Scenario,
    kind: BaselineKind,
) -> Result<PolicyDecision, PolicyError> {
    let eligible = eligible_in(store, scenario);
    let unavailable = |what: &str| {
        PolicyError::FixedMechanismUnavailable(what.into(), scenario.name().into())
    };
    let pool: Vec<(MechanismKind, RawComponents)> = match kind {
        BaselineKind::AlwaysBwp => {
            let pool: Vec<_> = eligible.into_iter().filter(|(m, _)| *m == MechanismKind::Bwp).collect();
            if pool.is_empty() {
                return Err(unavailable("BWP"));
            }
            pool
        }
        BaselineKind::AlwaysHo => {
            let pool: Vec<_> = eligible.into_iter().filter(|(m, _)| m.family() == Family::Ho).collect();
            if pool.is_empty() {
                return Err(unavailable("HO"));
            }
            pool
        }
        BaselineKind::MinMean | BaselineKind::MinT95 => {
            if eligible.is_empty() {
                return Err(PolicyError::NoFeasibleMechanism(scenario.name().into()));
            }
            eligible
        }
    };
    let scored: Vec<CandidateScore> = normalize(&pool)?
        .into_iter()
        .map(|(mechanism, components)| CandidateScore {
            mechanism,
            score: match kind {
                BaselineKind::MinT95 => components.raw_t95_phy,
                // always-HO resolves to the faster HO variant
                _ => components.raw_mean_phy,
            },
            components,
        })
        .collect();
    let (selected, tie_broken) = argmin(&scored);
    Ok(PolicyDecision {
        rule: DecisionRule::Baseline(kind),
        scenario: scenario.name().into(),
        params: None,
        normalize_over: NormalizeOver::Scenario,
        candidates: scored,
        selected,
        tie_broken,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiling::{LatencySample, StoreConfig};
    use alloc::vec;

    fn raw(mean: f64, t95: f64, v: f64) -> RawComponents {
        RawComponents { mean_phy: mean, t95_phy: t95, variability: v }
    }

    #[test]
    fn normalize_two_and_three_points() {
        let two = normalize(&[(MechanismKind::Bwp, raw(10.0, 1.0, 1.0)), (MechanismKind::Ca, raw(40.0, 1.0, 1.0))]).unwrap();
        assert_eq!(two[0].1.norm_mean, 0.0);
        assert_eq!(two[1].1.norm_mean, 1.0);
        // shared value degenerates to 0
        assert_eq!(two[0].1.norm_t95, 0.0);
        assert_eq!(two[1].1.norm_t95, 0.0);

        let three = normalize(&[
            (MechanismKind::Bwp, raw(10.0, 0.0, 0.0)),
            (MechanismKind::Ca, raw(25.0, 0.0, 0.0)),
            (MechanismKind::Endc, raw(40.0, 0.0, 0.0)),
        ])
        .unwrap();
        let means: Vec<f64> = three.iter().map(|c| c.1.norm_mean).collect();
        assert_eq!(means, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_single_candidate_is_zero() {
        let one = normalize(&[(MechanismKind::HoNr, raw(41.0, 60.0, 0.4))]).unwrap();
        let c = one[0].1;
        assert_eq!((c.norm_mean, c.norm_t95, c.norm_variability), (0.0, 0.0, 0.0));
    }

    #[test]
    fn normalize_rejects_non_finite() {
        assert_eq!(
            normalize(&[(MechanismKind::Bwp, raw(f64::NAN, 1.0, 1.0))]),
            Err(PolicyError::NonFiniteInput)
        );
        assert_eq!(
            normalize(&[(MechanismKind::Bwp, raw(1.0, f64::INFINITY, 1.0))]),
            Err(PolicyError::NonFiniteInput)
        );
        assert_eq!(normalize(&[]), Err(PolicyError::EmptyCandidates));
    }

    fn comps(mean: f64, t95: f64, var: f64) -> ScoreComponents {
        ScoreComponents {
            raw_mean_phy: 0.0,
            raw_t95_phy: 0.0,
            raw_variability: 0.0,
            norm_mean: mean,
            norm_t95: t95,
            norm_variability: var,
        }
    }

    #[test]
    fn score_degenerate_cases() {
        let c = comps(0.3, 0.8, 0.5);
        assert_eq!(disruption_score(&c, PolicyParams::new(1.0, 0.0).unwrap()), 0.8);
        assert_eq!(disruption_score(&c, PolicyParams::new(0.0, 0.0).unwrap()), 0.3);
    }

    #[test]
    fn score_hand_evaluated() {
        let p = PolicyParams::new(0.5, 1.0).unwrap();
        assert_eq!(disruption_score(&comps(0.0, 0.0, 1.0), p), 0.0);
        assert_eq!(disruption_score(&comps(1.0, 1.0, 0.0), p), 1.0);
    }

    #[test]
    fn params_bounds_are_inclusive() {
        assert!(PolicyParams::new(0.0, 1.0).is_ok());
        assert!(PolicyParams::new(1.0, 0.0).is_ok());
        assert_eq!(PolicyParams::new(-0.01, 0.5), Err(PolicyError::InvalidParams));
        assert_eq!(PolicyParams::new(0.5, 1.01), Err(PolicyError::InvalidParams));
        assert_eq!(PolicyParams::new(f64::NAN, 0.5), Err(PolicyError::InvalidParams));
        assert_eq!(parameter_grid().len(), 25);
    }

    #[test]
    fn canonical_scenarios() {
        let all = Scenario::all_canonical();
        assert_eq!(all.len(), 5);
        let lte = Scenario::canonical("lte-only").unwrap();
        assert_eq!(lte.allowed().len(), 2);
        assert!(lte.allows(MechanismKind::HoLte) && lte.allows(MechanismKind::RrLte));
        let no_bwp = Scenario::canonical("no-BWP").unwrap();
        assert!(!no_bwp.allows(MechanismKind::Bwp));
        assert_eq!(no_bwp.allowed().len(), 6);
        assert!(Scenario::canonical("everything").is_none());
        assert!(Scenario::new("x", []).is_err());
        assert!(Scenario::new("x", [MechanismKind::BaselineNr]).is_err());
    }

    fn store_with(entries: &[(MechanismKind, &[f64])]) -> ProfileStore {
        let mut samples = Vec::new();
        for (m, xs) in entries {
            for x in *xs {
                samples.push((*m, LatencySample { t_phy_ms: *x, t_rrc_phy_ms: *x * 2.0, stages: Vec::new() }));
            }
        }
        ProfileStore::new(StoreConfig { window: 1024, min_n: 3 }).refresh_samples(&samples)
    }

    #[test]
    fn single_allowed_mechanism_is_selected_without_tie() {
        let store = store_with(&[(MechanismKind::HoLte, &[10.0, 11.0, 12.0]), (MechanismKind::Bwp, &[1.0, 2.0, 3.0])]);
        let s = Scenario::new("only-ho", [MechanismKind::HoLte]).unwrap();
        let d = select(&store, &s, PolicyParams::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(d.selected, MechanismKind::HoLte);
        assert!(!d.tie_broken);
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let xs: &[f64] = &[5.0, 6.0, 7.0];
        let store = store_with(&[(MechanismKind::HoNr, xs), (MechanismKind::HoLte, xs), (MechanismKind::Endc, xs)]);
        let s = Scenario::canonical("unconstrained").unwrap();
        let d = select(&store, &s, PolicyParams::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(d.selected, MechanismKind::Endc);
        assert!(d.tie_broken);
    }

    #[test]
    fn no_feasible_mechanism() {
        let store = store_with(&[(MechanismKind::Bwp, &[1.0, 2.0, 3.0]), (MechanismKind::HoLte, &[1.0])]);
        let s = Scenario::canonical("LTE-only").unwrap();
        let err = select(&store, &s, PolicyParams::new(0.5, 0.5).unwrap()).unwrap_err();
        assert_eq!(err.code(), "NO_FEASIBLE_MECHANISM");
        assert_eq!(baseline_select(&store, &s, BaselineKind::MinMean).unwrap_err().code(), "NO_FEASIBLE_MECHANISM");
    }

    #[test]
    fn always_bwp_unavailable_without_bwp() {
        let store = store_with(&[(MechanismKind::Bwp, &[1.0, 2.0, 3.0]), (MechanismKind::HoLte, &[4.0, 5.0, 6.0])]);
        let s = Scenario::canonical("no-BWP").unwrap();
        let err = baseline_select(&store, &s, BaselineKind::AlwaysBwp).unwrap_err();
        assert_eq!(err.code(), "FIXED_MECHANISM_UNAVAILABLE");
        let ok = baseline_select(&store, &Scenario::canonical("unconstrained").unwrap(), BaselineKind::AlwaysBwp).unwrap();
        assert_eq!(ok.selected, MechanismKind::Bwp);
    }

    #[test]
    fn always_ho_picks_faster_variant() {
        let store = store_with(&[(MechanismKind::HoNr, &[40.0, 42.0, 44.0]), (MechanismKind::HoLte, &[10.0, 11.0, 90.0])]);
        let s = Scenario::canonical("mobility-only").unwrap();
        assert_eq!(baseline_select(&store, &s, BaselineKind::AlwaysHo).unwrap().selected, MechanismKind::HoLte);
        // LTE-only without an eligible HO profile
        let s2 = Scenario::new("rr", [MechanismKind::RrLte]).unwrap();
        assert_eq!(baseline_select(&store, &s2, BaselineKind::AlwaysHo).unwrap_err().code(), "FIXED_MECHANISM_UNAVAILABLE");
    }

    #[test]
    fn min_mean_and_min_t95_use_raw_values() {
        let store = store_with(&[(MechanismKind::HoNr, &[40.0, 42.0, 44.0]), (MechanismKind::HoLte, &[10.0, 11.0, 90.0])]);
        let s = Scenario::canonical("mobility-only").unwrap();
        // means: HO_NR 42, HO_LTE 37 ; t95: HO_NR 43.8, HO_LTE 82.1
        assert_eq!(baseline_select(&store, &s, BaselineKind::MinMean).unwrap().selected, MechanismKind::HoLte);
        assert_eq!(baseline_select(&store, &s, BaselineKind::MinT95).unwrap().selected, MechanismKind::HoNr);
        let one = Scenario::new("one", [MechanismKind::HoNr]).unwrap();
        assert_eq!(baseline_select(&store, &one, BaselineKind::MinT95).unwrap().selected, MechanismKind::HoNr);
    }

    #[test]
    fn normalize_over_all_uses_global_ranges() {
        let store = store_with(&[
            (MechanismKind::Bwp, &[1.0, 2.0, 3.0]),
            (MechanismKind::HoLte, &[10.0, 11.0, 12.0]),
            (MechanismKind::HoNr, &[20.0, 21.0, 22.0]),
        ]);
        let s = Scenario::canonical("mobility-only").unwrap();
        let p = PolicyParams::new(0.0, 0.0).unwrap();
        let local = select_with(&store, &s, p, NormalizeOver::Scenario).unwrap();
        let global = select_with(&store, &s, p, NormalizeOver::All).unwrap();
        assert_eq!(local.candidates[0].components.norm_mean, 0.0);
        assert!(global.candidates[0].components.norm_mean > 0.0);
        assert_eq!(local.selected, global.selected);
    }
}
