//! JSON-lines trace format.
//!
//! Each line is one event:
//!
//! ```text
//! {"type":"loc","lat":41.44,"lon":2.16,"accuracy_m":35.0,"t_ms":1418723204000,"wifi":true}
//! {"type":"act","label":"on_foot","t_ms":1418723205000}
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ActivityLabel, LocationSample, ModelError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceEvent {
    Location(LocationSample),
    Activity { label: ActivityLabel, timestamp_ms: i64 },
}

impl TraceEvent {
    pub fn timestamp_ms(&self) -> i64 {
        match self {
            TraceEvent::Location(s) => s.timestamp_ms,
            TraceEvent::Activity { timestamp_ms, .. } => *timestamp_ms,
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("reading trace: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Loc {
        lat: f64,
        lon: f64,
        accuracy_m: f64,
        t_ms: i64,
        wifi: bool,
    },
    Act {
        label: String,
        t_ms: i64,
    },
}

fn parse_line(text: &str) -> Result<TraceEvent, String> {
    let line: Line = serde_json::from_str(text).map_err(|e| e.to_string())?;
    match line {
        Line::Loc {
            lat,
            lon,
            accuracy_m,
            t_ms,
            wifi,
        } => LocationSample::new(lat, lon, accuracy_m, t_ms, wifi)
            .map(TraceEvent::Location)
            .map_err(|e: ModelError| e.to_string()),
        Line::Act { label, t_ms } => {
            let label: ActivityLabel = label.parse().map_err(|e: ModelError| e.to_string())?;
            if !label.is_raw() {
                return Err(format!("activity label {label} cannot come from the recognizer"));
            }
            Ok(TraceEvent::Activity {
                label,
                timestamp_ms: t_ms,
            })
        }
    }
}

/// Parses a whole trace. Blank lines are skipped; line numbers in errors are
/// 1-based.
pub fn read_trace(reader: impl BufRead) -> Result<Vec<TraceEvent>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line).map_err(|reason| TraceError::Parse { line: i + 1, reason })?);
    }
    Ok(out)
}

pub fn write_trace(mut writer: impl Write, events: &[TraceEvent]) -> std::io::Result<()> {
    for event in events {
        let line = match *event {
            TraceEvent::Location(s) => Line::Loc {
                lat: s.latitude,
                lon: s.longitude,
                accuracy_m: s.accuracy,
                t_ms: s.timestamp_ms,
                wifi: s.wifi_enabled,
            },
            TraceEvent::Activity { label, timestamp_ms } => Line::Act {
                label: label.as_str().to_string(),
                t_ms: timestamp_ms,
            },
        };
        serde_json::to_writer(&mut writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
