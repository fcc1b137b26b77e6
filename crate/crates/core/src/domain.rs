//! Mechanism and milestone vocabulary shared by every stage of the pipeline.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Radio access technology a mechanism operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Rat {
    Nr,
    Lte,
    Dual,
}

/// Mechanism family. Policy scenarios speak in ids; families group the
/// LTE/NR variants of the same procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Bwp,
    Ca,
    Endc,
    Ho,
    Rr,
    Baseline,
}

/// Steering mechanism (or reference procedure) identifier.
///
/// Variants are declared in lexicographic order of their string ids so the
/// derived `Ord` is the tie-break order used by the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "BASELINE_LTE")]
    BaselineLte,
    #[serde(rename = "BASELINE_NR")]
    BaselineNr,
    #[serde(rename = "BWP")]
    Bwp,
    #[serde(rename = "CA")]
    Ca,
    #[serde(rename = "ENDC")]
    Endc,
    #[serde(rename = "HO_LTE")]
    HoLte,
    #[serde(rename = "HO_NR")]
    HoNr,
    #[serde(rename = "RR_LTE")]
    RrLte,
    #[serde(rename = "RR_NR")]
    RrNr,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 9] = [
        MechanismKind::BaselineLte,
        MechanismKind::BaselineNr,
        MechanismKind::Bwp,
        MechanismKind::Ca,
        MechanismKind::Endc,
        MechanismKind::HoLte,
        MechanismKind::HoNr,
        MechanismKind::RrLte,
        MechanismKind::RrNr,
    ];

    /// Mechanisms the policy may choose from (everything but the baselines).
    pub const SELECTABLE: [MechanismKind; 7] = [
        MechanismKind::Bwp,
        MechanismKind::Ca,
        MechanismKind::Endc,
        MechanismKind::HoLte,
        MechanismKind::HoNr,
        MechanismKind::RrLte,
        MechanismKind::RrNr,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Self::BaselineLte => "BASELINE_LTE",
            Self::BaselineNr => "BASELINE_NR",
            Self::Bwp => "BWP",
            Self::Ca => "CA",
            Self::Endc => "ENDC",
            Self::HoLte => "HO_LTE",
            Self::HoNr => "HO_NR",
            Self::RrLte => "RR_LTE",
            Self::RrNr => "RR_NR",
        }
    }

    pub fn rat(self) -> Rat {
        match self {
            Self::BaselineLte | Self::HoLte | Self::RrLte => Rat::Lte,
            Self::BaselineNr | Self::Bwp | Self::Ca | Self::HoNr | Self::RrNr => Rat::Nr,
            Self::Endc => Rat::Dual,
        }
    }

    pub fn family(self) -> Family {
        match self {
            Self::BaselineLte | Self::BaselineNr => Family::Baseline,
            Self::Bwp => Family::Bwp,
            Self::Ca => Family::Ca,
            Self::Endc => Family::Endc,
            Self::HoLte | Self::HoNr => Family::Ho,
            Self::RrLte | Self::RrNr => Family::Rr,
        }
    }

    pub fn from_parts(rat: Rat, family: Family) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.rat() == rat && m.family() == family)
    }

    pub fn is_baseline(self) -> bool {
        self.family() == Family::Baseline
    }

    /// Human-readable label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Self::BaselineLte => "LTE Baseline",
            Self::BaselineNr => "NR Baseline",
            Self::Bwp => "BWP",
            Self::Ca => "CA",
            Self::Endc => "EN-DC",
            Self::HoLte => "LTE HO",
            Self::HoNr => "NR HO",
            Self::RrLte => "LTE R&R",
            Self::RrNr => "NR R&R",
        }
    }

    /// Ordered milestone template: the RRC trigger followed by the observable
    /// modem milestones, the last one being the completion milestone.
    pub fn template(self) -> &'static [MilestoneKind] {
        use MilestoneKind::*;
        match self {
            Self::HoLte | Self::HoNr => &[RrcTrigger, HoStart, TargetSync, SchedResume],
            Self::Bwp => &[RrcTrigger, ConfigStart, BwpApply, ConfigComplete],
            Self::RrLte | Self::RrNr => &[RrcTrigger, PbchMibDecode, Sib1Acq, SCriteriaPass],
            Self::Ca => &[RrcTrigger, ScellConfig, SccConfig, SccActivate, ScellMeas],
            Self::Endc => &[RrcTrigger, NrSyncAcq, NrRrcReconf, NrCarrierAct, NrMeasConfirm],
            Self::BaselineNr => &[RrcTrigger, SsbDetect, PbchMibDecode, Sib1Acq, SCriteriaPass],
            Self::BaselineLte => &[RrcTrigger, PbchMibDecode, Sib1Acq, PdcchDecode, SCriteriaPass],
        }
    }

    pub fn completion(self) -> MilestoneKind {
        let t = self.template();
        t[t.len() - 1]
    }

    /// What the trigger message is for this mechanism.
    pub fn trigger_label(self) -> &'static str {
        match self {
            Self::BaselineLte | Self::BaselineNr => "initial connection",
            Self::Bwp => "RRCReconfiguration (BWP update)",
            Self::Ca => "RRCReconfiguration (SCell)",
            Self::Endc => "RRCReconfiguration (NR secondary node)",
            Self::HoLte | Self::HoNr => "RRCReconfiguration (mobilityControlInfo)",
            Self::RrLte | Self::RrNr => "RRCRelease (redirectedCarrierInfo)",
        }
    }
}

/// Execution template of a mechanism. Total over the enumeration.
pub fn execution_template(mechanism: MechanismKind) -> &'static [MilestoneKind] {
    mechanism.template()
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mechanism id")]
pub struct UnknownMechanism;

impl FromStr for MechanismKind {
    type Err = UnknownMechanism;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or(UnknownMechanism)
    }
}

/// Modem logging layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Layer {
    Ml1,
    Ll1,
    L2,
    Rrc,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ml1 => "ML1",
            Self::Ll1 => "LL1",
            Self::L2 => "L2",
            Self::Rrc => "RRC",
        }
    }
}

impl FromStr for Layer {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ML1" => Ok(Self::Ml1),
            "LL1" => Ok(Self::Ll1),
            "L2" => Ok(Self::L2),
            "RRC" => Ok(Self::Rrc),
            _ => Err(()),
        }
    }
}

/// Closed milestone vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MilestoneKind {
    RrcTrigger,
    SsbDetect,
    PbchMibDecode,
    #[serde(rename = "SIB1_ACQ")]
    Sib1Acq,
    PdcchDecode,
    SCriteriaPass,
    ConfigStart,
    BwpApply,
    ConfigComplete,
    ScellConfig,
    SccConfig,
    SccActivate,
    ScellMeas,
    NrSyncAcq,
    NrRrcReconf,
    NrCarrierAct,
    NrMeasConfirm,
    HoStart,
    TargetSync,
    SchedResume,
}

impl MilestoneKind {
    pub const ALL: [MilestoneKind; 20] = [
        MilestoneKind::RrcTrigger,
        MilestoneKind::SsbDetect,
        MilestoneKind::PbchMibDecode,
        MilestoneKind::Sib1Acq,
        MilestoneKind::PdcchDecode,
        MilestoneKind::SCriteriaPass,
        MilestoneKind::ConfigStart,
        MilestoneKind::BwpApply,
        MilestoneKind::ConfigComplete,
        MilestoneKind::ScellConfig,
        MilestoneKind::SccConfig,
        MilestoneKind::SccActivate,
        MilestoneKind::ScellMeas,
        MilestoneKind::NrSyncAcq,
        MilestoneKind::NrRrcReconf,
        MilestoneKind::NrCarrierAct,
        MilestoneKind::NrMeasConfirm,
        MilestoneKind::HoStart,
        MilestoneKind::TargetSync,
        MilestoneKind::SchedResume,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Self::RrcTrigger => "RRC_TRIGGER",
            Self::SsbDetect => "SSB_DETECT",
            Self::PbchMibDecode => "PBCH_MIB_DECODE",
            Self::Sib1Acq => "SIB1_ACQ",
            Self::PdcchDecode => "PDCCH_DECODE",
            Self::SCriteriaPass => "S_CRITERIA_PASS",
            Self::ConfigStart => "CONFIG_START",
            Self::BwpApply => "BWP_APPLY",
            Self::ConfigComplete => "CONFIG_COMPLETE",
            Self::ScellConfig => "SCELL_CONFIG",
            Self::SccConfig => "SCC_CONFIG",
            Self::SccActivate => "SCC_ACTIVATE",
            Self::ScellMeas => "SCELL_MEAS",
            Self::NrSyncAcq => "NR_SYNC_ACQ",
            Self::NrRrcReconf => "NR_RRC_RECONF",
            Self::NrCarrierAct => "NR_CARRIER_ACT",
            Self::NrMeasConfirm => "NR_MEAS_CONFIRM",
            Self::HoStart => "HO_START",
            Self::TargetSync => "TARGET_SYNC",
            Self::SchedResume => "SCHED_RESUME",
        }
    }

    /// Logging layer the milestone is reported on.
    pub fn layer(self) -> Layer {
        match self {
            Self::RrcTrigger => Layer::Rrc,
            // cell search, sync, measurements, S-criteria
            Self::SsbDetect
            | Self::SCriteriaPass
            | Self::ScellMeas
            | Self::NrSyncAcq
            | Self::NrMeasConfirm
            | Self::TargetSync => Layer::Ml1,
            // control channel decoding and scheduling
            Self::PbchMibDecode | Self::Sib1Acq | Self::PdcchDecode | Self::SchedResume => {
                Layer::Ll1
            }
            // MAC configuration and activation
            Self::ConfigStart
            | Self::BwpApply
            | Self::ConfigComplete
            | Self::ScellConfig
            | Self::SccConfig
            | Self::SccActivate
            | Self::NrRrcReconf
            | Self::NrCarrierAct
            | Self::HoStart => Layer::L2,
        }
    }

    pub fn is_trigger(self) -> bool {
        self == Self::RrcTrigger
    }
}

impl fmt::Display for MilestoneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown milestone code")]
pub struct UnknownMilestone;

impl FromStr for MilestoneKind {
    type Err = UnknownMilestone;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.code() == s)
            .ok_or(UnknownMilestone)
    }
}

/// A (from, to) milestone pair naming one execution stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StageLabel {
    pub from: MilestoneKind,
    pub to: MilestoneKind,
}

impl StageLabel {
    pub const fn new(from: MilestoneKind, to: MilestoneKind) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for StageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}
