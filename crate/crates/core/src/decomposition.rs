//! Split of RRC-to-PHY completion latency into modem reaction delay and
//! PHY-centric execution, with per-stage attribution.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::{MilestoneKind, StageLabel};
use crate::trace::SteeringExecution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub label: StageLabel,
    pub duration_ms: f64,
}

/// Latency triple for one execution.
///
/// `t_rrc_phy_ms` is stored as `t_phy_ms + t_react_ms`, so the identity holds
/// bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyDecomposition {
    pub t_rrc_phy_ms: f64,
    pub t_phy_ms: f64,
    pub t_react_ms: f64,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StageError {
    #[error("STAGE_ABSENT: the requested milestone pair is not a stage of this execution")]
    StageAbsent,
    #[error("ZERO_PHY: the execution has no PHY-centric duration to attribute")]
    ZeroPhy,
}

impl StageError {
    pub fn code(self) -> &'static str {
        match self {
            Self::StageAbsent => "STAGE_ABSENT",
            Self::ZeroPhy => "ZERO_PHY",
        }
    }
}

/// T_react = first PHY activation - trigger, T_PHY = completion - first PHY
/// activation, T_RRC-PHY = their sum.
pub fn decompose(exec: &SteeringExecution) -> LatencyDecomposition {
    let t_phy_ms = exec.tf_ms - exec.first_phy_ms;
    let t_react_ms = exec.first_phy_ms - exec.t0_ms;
    let stages = exec.milestones[1..]
        .windows(2)
        .map(|w| Stage {
            label: StageLabel::new(w[0].kind, w[1].kind),
            duration_ms: w[1].ts_ms - w[0].ts_ms,
        })
        .collect();
    LatencyDecomposition {
        t_rrc_phy_ms: t_phy_ms + t_react_ms,
        t_phy_ms,
        t_react_ms,
        stages,
    }
}

impl LatencyDecomposition {
    pub fn stage(&self, from: MilestoneKind, to: MilestoneKind) -> Option<&Stage> {
        self.stages.iter().find(|s| s.label == StageLabel::new(from, to))
    }

    /// Summed duration of the consecutive stages running from `from` to `to`
    /// (e.g. SIB1 acquisition to camping across an intermediate PDCCH decode).
    pub fn span_ms(&self, from: MilestoneKind, to: MilestoneKind) -> Option<f64> {
        let start = self.stages.iter().position(|s| s.label.from == from)?;
        let mut total = 0.0;
        for s in &self.stages[start..] {
            total += s.duration_ms;
            if s.label.to == to {
                return Some(total);
            }
        }
        None
    }

    pub fn stage_sum_ms(&self) -> f64 {
        self.stages.iter().map(|s| s.duration_ms).sum()
    }
}

/// Fraction of the PHY-centric execution spent in the `from -> to` stage.
pub fn stage_share(
    decomp: &LatencyDecomposition,
    from: MilestoneKind,
    to: MilestoneKind,
) -> Result<f64, StageError> {
    let stage = decomp.stage(from, to).ok_or(StageError::StageAbsent)?;
    if decomp.t_phy_ms <= 0.0 {
        return Err(StageError::ZeroPhy);
    }
    Ok((stage.duration_ms / decomp.t_phy_ms).clamp(0.0, 1.0))
}

/// Same stage, measured against the full RRC-to-PHY completion latency.
pub fn stage_share_of_completion(
    decomp: &LatencyDecomposition,
    from: MilestoneKind,
    to: MilestoneKind,
) -> Result<f64, StageError> {
    let stage = decomp.stage(from, to).ok_or(StageError::StageAbsent)?;
    if decomp.t_rrc_phy_ms <= 0.0 {
        return Err(StageError::ZeroPhy);
    }
    Ok((stage.duration_ms / decomp.t_rrc_phy_ms).clamp(0.0, 1.0))
}
