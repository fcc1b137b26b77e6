//! JSON-lines trace format.
//!
//! One object per line: `ts_ms` (number), `layer` and `event` (strings) are
//! required; `mech` and `dev` are optional, `dev` defaulting to `"default"`.
//! Unknown keys are ignored.

use std::io::{BufRead, Write};

use polaris_core::domain::{Layer, MechanismKind, MilestoneKind};
use polaris_core::trace::{IngestMode, IngestReport, SegmentInput, Segmenter, SteeringExecution, TraceEvent};
use serde::{Deserialize, Serialize};

pub const DEFAULT_DEVICE: &str = "default";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("MALFORMED_LINE: {0}")]
    Malformed(String),
    #[error("UNKNOWN_MILESTONE: {code}")]
    UnknownMilestone { code: String, device_id: String },
    #[error("NEGATIVE_TS: {0}")]
    NegativeTs(f64),
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Malformed(_) => "MALFORMED_LINE",
            Self::UnknownMilestone { .. } => "UNKNOWN_MILESTONE",
            Self::NegativeTs(_) => "NEGATIVE_TS",
        }
    }
}

#[derive(Deserialize)]
struct RawLine {
    ts_ms: f64,
    layer: String,
    event: String,
    #[serde(default)]
    mech: Option<String>,
    #[serde(default)]
    dev: Option<String>,
}

#[derive(Serialize)]
struct OutLine<'a> {
    ts_ms: f64,
    layer: &'static str,
    event: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    mech: Option<&'static str>,
    dev: &'a str,
}

/// Parses one trace line. `raw_seq` is the 1-based line number.
pub fn parse_trace_line(line: &str, raw_seq: u64) -> Result<TraceEvent, ParseError> {
    let raw: RawLine = serde_json::from_str(line).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let device_id = raw.dev.unwrap_or_else(|| DEFAULT_DEVICE.to_string());
    let milestone: MilestoneKind = raw.event.parse().map_err(|_| ParseError::UnknownMilestone {
        code: raw.event.clone(),
        device_id: device_id.clone(),
    })?;
    let layer: Layer = raw
        .layer
        .parse()
        .map_err(|_| ParseError::Malformed(format!("unknown layer {:?}", raw.layer)))?;
    if layer != milestone.layer() {
        return Err(ParseError::Malformed(format!(
            "{} is logged on {}, not {}",
            milestone.code(),
            milestone.layer().as_str(),
            layer.as_str()
        )));
    }
    let mechanism_hint = raw
        .mech
        .map(|m| m.parse::<MechanismKind>().map_err(|_| ParseError::Malformed(format!("unknown mechanism {m:?}"))))
        .transpose()?;
    if !raw.ts_ms.is_finite() || raw.ts_ms < 0.0 {
        return Err(ParseError::NegativeTs(raw.ts_ms));
    }
    TraceEvent::new(raw.ts_ms, milestone, mechanism_hint, device_id, raw_seq).map_err(|_| ParseError::NegativeTs(raw.ts_ms))
}

pub fn format_trace_line(event: &TraceEvent) -> String {
    let line = OutLine {
        ts_ms: event.ts_ms,
        layer: event.milestone.layer().as_str(),
        event: event.milestone.code(),
        mech: event.mechanism_hint.map(MechanismKind::id),
        dev: &event.device_id,
    };
    serde_json::to_string(&line).expect("trace line serializes")
}

pub fn write_trace<W: Write>(mut out: W, events: &[TraceEvent]) -> std::io::Result<()> {
    for e in events {
        writeln!(out, "{}", format_trace_line(e))?;
    }
    out.flush()
}

/// Fatal ingest failure.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {source}")]
    Parse { line: u64, source: ParseError },
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses and segments a whole trace. Blank lines are skipped but still
/// counted for line numbering. Unknown milestone codes go to the segmenter
/// (a skip or, in strict mode, a reject); other parse errors abort.
pub fn ingest<R: BufRead>(reader: R, mode: IngestMode) -> Result<(Vec<SteeringExecution>, IngestReport), IngestError> {
    let mut seg = Segmenter::new(mode);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let seq = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let input = match parse_trace_line(&line, seq) {
            Ok(e) => SegmentInput::Event(e),
            Err(ParseError::UnknownMilestone { device_id, .. }) => SegmentInput::UnknownMilestone { device_id, raw_seq: seq },
            Err(source) => return Err(IngestError::Parse { line: seq, source }),
        };
        seg.push_input(input).expect("line numbers increase");
    }
    Ok(seg.finish())
}

pub fn ingest_str(text: &str, mode: IngestMode) -> Result<(Vec<SteeringExecution>, IngestReport), IngestError> {
    ingest(text.as_bytes(), mode)
}
