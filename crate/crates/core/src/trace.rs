//! Trace events and their segmentation into steering executions.
//!
//! Segmentation runs one state machine per device. An execution opens at an
//! `RRC_TRIGGER` carrying a mechanism hint and closes at the mechanism's
//! completion milestone; everything in between is matched against the
//! mechanism template.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{MechanismKind, MilestoneKind};

/// One timestamped milestone read from a trace log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub ts_ms: f64,
    pub milestone: MilestoneKind,
    pub mechanism_hint: Option<MechanismKind>,
    pub device_id: String,
    /// Line number in the source file (1-based).
    pub raw_seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EventError {
    #[error("NEGATIVE_TS: timestamp must be finite and non-negative")]
    NegativeTs,
}

impl TraceEvent {
    pub fn new(
        ts_ms: f64,
        milestone: MilestoneKind,
        mechanism_hint: Option<MechanismKind>,
        device_id: impl Into<String>,
        raw_seq: u64,
    ) -> Result<Self, EventError> {
        if !ts_ms.is_finite() || ts_ms < 0.0 {
            return Err(EventError::NegativeTs);
        }
        Ok(Self {
            ts_ms,
            milestone,
            mechanism_hint,
            device_id: device_id.into(),
            raw_seq,
        })
    }
}

/// A milestone accepted into an execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Milestone {
    pub kind: MilestoneKind,
    pub ts_ms: f64,
}

/// A validated milestone sequence for one mechanism run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringExecution {
    pub device_id: String,
    pub mechanism: MechanismKind,
    pub t0_ms: f64,
    pub first_phy_ms: f64,
    pub tf_ms: f64,
    pub milestones: Vec<Milestone>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExecutionError {
    #[error("execution needs a trigger and a completion milestone")]
    TooShort,
    #[error("first milestone is not RRC_TRIGGER")]
    MissingTrigger,
    #[error("last milestone is not the mechanism's completion milestone")]
    MissingCompletion,
    #[error("milestones do not follow the mechanism template")]
    TemplateMismatch,
    #[error("milestone timestamps decrease")]
    OutOfOrder,
    #[error("completion coincides with the trigger")]
    ZeroDuration,
    #[error("timestamp must be finite and non-negative")]
    BadTimestamp,
}

impl SteeringExecution {
    /// Validates and builds an execution from its accepted milestones.
    pub fn new(
        device_id: impl Into<String>,
        mechanism: MechanismKind,
        milestones: Vec<Milestone>,
    ) -> Result<Self, ExecutionError> {
        if milestones.len() < 2 {
            return Err(ExecutionError::TooShort);
        }
        if milestones.iter().any(|m| !m.ts_ms.is_finite() || m.ts_ms < 0.0) {
            return Err(ExecutionError::BadTimestamp);
        }
        let first = milestones[0];
        let last = milestones[milestones.len() - 1];
        if first.kind != MilestoneKind::RrcTrigger {
            return Err(ExecutionError::MissingTrigger);
        }
        if last.kind != mechanism.completion() {
            return Err(ExecutionError::MissingCompletion);
        }
        let template = mechanism.template();
        let mut pos = 0usize;
        for m in &milestones[1..] {
            match template.iter().position(|k| *k == m.kind) {
                Some(j) if j > pos => pos = j,
                _ => return Err(ExecutionError::TemplateMismatch),
            }
        }
        if milestones.windows(2).any(|w| w[1].ts_ms < w[0].ts_ms) {
            return Err(ExecutionError::OutOfOrder);
        }
        if last.ts_ms <= first.ts_ms {
            return Err(ExecutionError::ZeroDuration);
        }
        Ok(Self {
            device_id: device_id.into(),
            mechanism,
            t0_ms: first.ts_ms,
            first_phy_ms: milestones[1].ts_ms,
            tf_ms: last.ts_ms,
            milestones,
        })
    }

    /// Re-emits the execution as trace events, numbering lines from `first_seq`.
    pub fn to_events(&self, first_seq: u64) -> Vec<TraceEvent> {
        self.milestones
            .iter()
            .enumerate()
            .map(|(i, m)| TraceEvent {
                ts_ms: m.ts_ms,
                milestone: m.kind,
                mechanism_hint: m.kind.is_trigger().then_some(self.mechanism),
                device_id: self.device_id.clone(),
                raw_seq: first_seq + i as u64,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestMode {
    Strict,
    #[default]
    Lenient,
}

/// Closed set of reasons an execution (or a line) can be rejected for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectReason {
    OutOfOrder,
    UnknownMilestone,
    MissingCompletion,
    TemplateMismatch,
    NestedTrigger,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            Self::OutOfOrder => "OUT_OF_ORDER",
            Self::UnknownMilestone => "UNKNOWN_MILESTONE",
            Self::MissingCompletion => "MISSING_COMPLETION",
            Self::TemplateMismatch => "TEMPLATE_MISMATCH",
            Self::NestedTrigger => "NESTED_TRIGGER",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub device_id: String,
    pub first_line: u64,
    pub last_line: u64,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub mode: IngestMode,
    pub events_read: u64,
    pub executions_ok: u64,
    pub executions_rejected: u64,
    /// Execution-level rejects.
    pub rejects: Vec<Reject>,
    /// Lines skipped on their own (unknown milestone codes outside an open
    /// execution, or anywhere in lenient mode).
    pub skipped: Vec<Reject>,
    pub events_in_executions: u64,
    /// Non-template events dropped from accepted executions (lenient only).
    pub events_dropped: u64,
    pub events_in_rejects: u64,
    pub events_idle: u64,
}

/// An input item handed to the segmenter: either a parsed event or a line
/// whose milestone code is outside the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentInput {
    Event(TraceEvent),
    UnknownMilestone { device_id: String, raw_seq: u64 },
}

#[derive(Debug)]
struct OpenExecution {
    mechanism: MechanismKind,
    pos: usize,
    milestones: Vec<Milestone>,
    first_line: u64,
    last_line: u64,
    events: u64,
    dropped: u64,
}

impl OpenExecution {
    fn last_ts(&self) -> f64 {
        self.milestones[self.milestones.len() - 1].ts_ms
    }
}

/// Incremental segmenter. Feeding the same events in any chunking yields
/// the same output.
#[derive(Debug)]
pub struct Segmenter {
    mode: IngestMode,
    open: BTreeMap<String, OpenExecution>,
    executions: Vec<(SteeringExecution, u64)>,
    report: IngestReport,
    last_seq: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("raw_seq {got} does not follow {prev}")]
pub struct SequenceError {
    pub prev: u64,
    pub got: u64,
}

impl Segmenter {
    pub fn new(mode: IngestMode) -> Self {
        Self {
            mode,
            open: BTreeMap::new(),
            executions: Vec::new(),
            report: IngestReport {
                mode,
                ..IngestReport::default()
            },
            last_seq: None,
        }
    }

    fn check_seq(&mut self, seq: u64) -> Result<(), SequenceError> {
        if let Some(prev) = self.last_seq {
            if seq <= prev {
                return Err(SequenceError { prev, got: seq });
            }
        }
        self.last_seq = Some(seq);
        Ok(())
    }

    pub fn push_input(&mut self, input: SegmentInput) -> Result<(), SequenceError> {
        match input {
            SegmentInput::Event(e) => self.push(e),
            SegmentInput::UnknownMilestone { device_id, raw_seq } => {
                self.push_unknown(device_id, raw_seq)
            }
        }
    }

    pub fn push_unknown(&mut self, device_id: String, raw_seq: u64) -> Result<(), SequenceError> {
        self.check_seq(raw_seq)?;
        if self.mode == IngestMode::Strict {
            if let Some(open) = self.open.remove(&device_id) {
                self.reject(&device_id, open.first_line, raw_seq, open.events, RejectReason::UnknownMilestone);
                return Ok(());
            }
        }
        self.report.skipped.push(Reject {
            device_id,
            first_line: raw_seq,
            last_line: raw_seq,
            reason: RejectReason::UnknownMilestone,
        });
        Ok(())
    }

    pub fn push(&mut self, event: TraceEvent) -> Result<(), SequenceError> {
        self.check_seq(event.raw_seq)?;
        self.report.events_read += 1;
        let device = event.device_id.clone();
        match self.open.remove(&device) {
            Some(open) => self.advance(open, event),
            None => self.idle(event),
        }
        Ok(())
    }

    fn idle(&mut self, event: TraceEvent) {
        if !event.milestone.is_trigger() {
            self.report.events_idle += 1;
            return;
        }
        match event.mechanism_hint {
            Some(mechanism) => {
                self.open.insert(
                    event.device_id.clone(),
                    OpenExecution {
                        mechanism,
                        pos: 0,
                        milestones: alloc::vec![Milestone {
                            kind: event.milestone,
                            ts_ms: event.ts_ms,
                        }],
                        first_line: event.raw_seq,
                        last_line: event.raw_seq,
                        events: 1,
                        dropped: 0,
                    },
                );
            }
            None => self.reject(
                &event.device_id,
                event.raw_seq,
                event.raw_seq,
                1,
                RejectReason::TemplateMismatch,
            ),
        }
    }

    fn advance(&mut self, mut open: OpenExecution, event: TraceEvent) {
        let device = event.device_id.clone();
        if event.ts_ms < open.last_ts() {
            self.reject(&device, open.first_line, event.raw_seq, open.events + 1, RejectReason::OutOfOrder);
            return;
        }
        if event.milestone.is_trigger() {
            // preempted: the open execution is abandoned, the new trigger opens another
            self.reject(&device, open.first_line, open.last_line, open.events, RejectReason::NestedTrigger);
            self.idle(event);
            return;
        }
        let template = open.mechanism.template();
        let slot = template.iter().position(|k| *k == event.milestone);
        let strict = self.mode == IngestMode::Strict;
        match slot {
            Some(j) if (strict && j == open.pos + 1) || (!strict && j > open.pos) => {
                open.pos = j;
                open.events += 1;
                open.last_line = event.raw_seq;
                open.milestones.push(Milestone {
                    kind: event.milestone,
                    ts_ms: event.ts_ms,
                });
                if j == template.len() - 1 {
                    self.close(&device, open);
                } else {
                    self.open.insert(device, open);
                }
            }
            _ if strict => {
                self.reject(&device, open.first_line, event.raw_seq, open.events + 1, RejectReason::TemplateMismatch);
            }
            _ => {
                open.events += 1;
                open.dropped += 1;
                open.last_line = event.raw_seq;
                self.open.insert(device, open);
            }
        }
    }

    fn close(&mut self, device: &str, open: OpenExecution) {
        match SteeringExecution::new(device, open.mechanism, open.milestones) {
            Ok(exec) => {
                self.report.executions_ok += 1;
                self.report.events_in_executions += open.events;
                self.report.events_dropped += open.dropped;
                self.executions.push((exec, open.first_line));
            }
            // only a zero-length execution can fail here; it is reported as non-advancing time
            Err(_) => self.reject(device, open.first_line, open.last_line, open.events, RejectReason::OutOfOrder),
        }
    }

    fn reject(&mut self, device: &str, first_line: u64, last_line: u64, events: u64, reason: RejectReason) {
        self.report.executions_rejected += 1;
        self.report.events_in_rejects += events;
        self.report.rejects.push(Reject {
            device_id: device.into(),
            first_line,
            last_line,
            reason,
        });
    }

    /// Closes out open executions and returns results ordered by device, then
    /// trigger time.
    pub fn finish(mut self) -> (Vec<SteeringExecution>, IngestReport) {
        let open = core::mem::take(&mut self.open);
        for (device, o) in open {
            self.reject(&device, o.first_line, o.last_line, o.events, RejectReason::MissingCompletion);
        }
        self.executions.sort_by(|(a, la), (b, lb)| {
            a.device_id
                .cmp(&b.device_id)
                .then(a.t0_ms.total_cmp(&b.t0_ms))
                .then(la.cmp(lb))
        });
        self.report.rejects.sort_by_key(|r| (r.first_line, r.last_line));
        self.report.skipped.sort_by_key(|r| r.first_line);
        let execs = self.executions.into_iter().map(|(e, _)| e).collect();
        (execs, self.report)
    }
}

/// Segments an ordered event list in one call.
pub fn segment_executions(
    events: &[TraceEvent],
    mode: IngestMode,
) -> Result<(Vec<SteeringExecution>, IngestReport), SequenceError> {
    let mut seg = Segmenter::new(mode);
    for e in events {
        seg.push(e.clone())?;
    }
    Ok(seg.finish())
}
