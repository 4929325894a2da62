//! Daily segment files, user identity and upload.
//!
//! A segment file is a JSON object with one `segments` array:
//!
//! ```text
//! {
//!  "segments": [
//!   {
//!    "activity": "on_foot",
//!    "distance (m)": 49.69776445992602,
//!    "duration (s)": 142,
//!    "speed (Km/h)": 1.2599432...,
//!    "first time": "09:46:44",
//!    "last time": "09:49:07",
//!    "location": [41.441145, 2.1659081, "09:46:44", ...]
//!   }
//!  ]
//! }
//! ```
//!
//! Times carry no date: the date comes from the file name (`DD-MM-YYYY.json`).

mod identity;
mod totals;
mod upload;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use chrono::NaiveDate;
use chrono::{DateTime, FixedOffset, NaiveTime};
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{ActivityLabel, LocationSample, ModelError, Segment, SegmentParts};

pub use identity::{generate_identity, generate_identity_from_os, sha256_hex, UserIdentity};
pub use totals::{DailyTotalsStore, CSV_HEADER};
pub use upload::{upload, UploadBackend, UploadReceipt};

/// Accuracy given to fixes read back from a file, which does not store it.
pub const PLACEHOLDER_ACCURACY_M: f64 = 1.0;

pub const SPEED_KEY: &str = "speed (Km/h)";
const SPEED_KEY_BACKSLASH: &str = "speed (Km\\h)";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("segment {index}: missing key \"{key}\"")]
    MissingKey { index: usize, key: &'static str },
    #[error("segment {index}: {reason}")]
    Format { index: usize, reason: String },
    #[error("segment {index}: {source}")]
    Invalid {
        index: usize,
        #[source]
        source: ModelError,
    },
    #[error("not a segments file: {0}")]
    NotSegments(String),
    #[error("invalid user id: {0}")]
    InvalidIdentity(String),
    #[error("upload to {target} failed: {reason}")]
    Upload { target: String, reason: String },
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WriteOptions {
    /// Offset from UTC of the wall-clock times written, in seconds.
    pub utc_offset_s: i32,
    /// One line instead of single-space indentation.
    pub compact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadOptions {
    /// Date of the file. When absent it is taken from a `DD-MM-YYYY` file
    /// name prefix, falling back to 1970-01-01.
    pub date: Option<NaiveDate>,
    pub utc_offset_s: i32,
}

fn offset(seconds: i32) -> FixedOffset {
    FixedOffset::east_opt(seconds).unwrap_or_else(|| FixedOffset::east_opt(0).expect("zero offset"))
}

/// `HH:MM:SS` wall-clock time of an epoch timestamp.
pub fn format_time(timestamp_ms: i64, utc_offset_s: i32) -> String {
    let utc = DateTime::from_timestamp_millis(timestamp_ms).unwrap_or_default();
    utc.with_timezone(&offset(utc_offset_s)).format("%H:%M:%S").to_string()
}

/// `DD-MM-YYYY.json`
pub fn daily_file_name(date: NaiveDate) -> String {
    format!("{}.json", date.format("%d-%m-%Y"))
}

/// Name of the device-side history copy, `DD-MM-YYYYlocation_segment.json`.
pub fn device_file_name(date: NaiveDate) -> String {
    format!("{}location_segment.json", date.format("%d-%m-%Y"))
}

/// `base_dir/<id>/DD-MM-YYYY.json`
pub fn daily_path(base_dir: &Path, identity: &UserIdentity, date: NaiveDate) -> PathBuf {
    base_dir.join(identity.as_str()).join(daily_file_name(date))
}

/// Parses a `DD-MM-YYYY` day.
pub fn parse_day(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text, "%d-%m-%Y").ok()
}

/// The date encoded at the start of a daily file name, if any.
pub fn date_from_file_name(path: &Path) -> Option<NaiveDate> {
    parse_day(path.file_name()?.to_str()?.get(..10)?)
}

#[derive(Serialize)]
struct SegmentRecord<'a> {
    activity: &'a str,
    #[serde(rename = "distance (m)")]
    distance: f64,
    #[serde(rename = "duration (s)")]
    duration: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<&'a str>,
    #[serde(rename = "speed (Km/h)")]
    speed: f64,
    #[serde(rename = "first time")]
    first_time: String,
    #[serde(rename = "last time")]
    last_time: String,
    location: Vec<Value>,
}

#[derive(Serialize)]
struct FileRecord<'a> {
    segments: Vec<SegmentRecord<'a>>,
}

/// Renders segments in the daily file format.
pub fn segments_to_json(segments: &[Segment], options: &WriteOptions) -> String {
    let off = options.utc_offset_s;
    let records = segments
        .iter()
        .map(|seg| SegmentRecord {
            activity: seg.activity().as_str(),
            distance: seg.total_distance(),
            duration: seg.total_duration(),
            line: seg.line(),
            speed: seg.average_speed(),
            first_time: format_time(seg.first_location().timestamp_ms, off),
            last_time: format_time(seg.last_location().timestamp_ms, off),
            location: seg
                .location_points()
                .iter()
                .flat_map(|p| [p.latitude.into(), p.longitude.into(), format_time(p.timestamp_ms, off).into()])
                .collect(),
        })
        .collect();
    let file = FileRecord { segments: records };
    if options.compact {
        return serde_json::to_string(&file).expect("segment records always serialize");
    }
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, serde_json::ser::PrettyFormatter::with_indent(b" "));
    file.serialize(&mut ser).expect("segment records always serialize");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Rewrites `path` with the given segments, holding an exclusive lock on
/// the file while writing.
pub fn write_segments(path: &Path, segments: &[Segment]) -> Result<(), StoreError> {
    write_segments_with(path, segments, &WriteOptions::default())
}

pub fn write_segments_with(path: &Path, segments: &[Segment], options: &WriteOptions) -> Result<(), StoreError> {
    let text = segments_to_json(segments, options);
    let err = |e| StoreError::io(path, e);
    let mut file = File::options().create(true).write(true).truncate(false).open(path).map_err(err)?;
    file.lock().map_err(err)?;
    file.set_len(0).map_err(err)?;
    file.write_all(text.as_bytes()).map_err(err)?;
    file.flush().map_err(err)?;
    Ok(())
}

pub fn read_segments(path: &Path) -> Result<Vec<Segment>, StoreError> {
    read_segments_with(path, &ReadOptions::default())
}

pub fn read_segments_with(path: &Path, options: &ReadOptions) -> Result<Vec<Segment>, StoreError> {
    let text = std::fs::read_to_string(path).map_err(|e| StoreError::io(path, e))?;
    let options = ReadOptions {
        date: options.date.or_else(|| date_from_file_name(path)),
        ..*options
    };
    parse_segments(&text, &options).map_err(|e| match e {
        StoreError::Json { source, .. } => StoreError::Json {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

/// Parses a segment file. Both `speed (Km/h)` and the backslash spelling
/// `speed (Km\h)` are accepted, the latter even when written unescaped.
pub fn parse_segments(text: &str, options: &ReadOptions) -> Result<Vec<Segment>, StoreError> {
    let fixed;
    let text = if text.contains("(Km\\h)\"") && !text.contains("(Km\\\\h)") {
        fixed = text.replace("(Km\\h)", "(Km\\\\h)");
        fixed.as_str()
    } else {
        text
    };
    let root: Value = serde_json::from_str(text).map_err(|source| StoreError::Json {
        path: "<input>".into(),
        source,
    })?;
    let items = root
        .get("segments")
        .and_then(Value::as_array)
        .ok_or_else(|| StoreError::NotSegments("expected an object with a \"segments\" array".into()))?;
    let date = options.date.unwrap_or_default();
    let off = offset(options.utc_offset_s);
    items
        .iter()
        .enumerate()
        .map(|(index, item)| {
            let obj = item.as_object().ok_or(StoreError::Format {
                index,
                reason: "segment is not an object".into(),
            })?;
            parse_segment(index, obj, date, off)
        })
        .collect()
}

fn parse_segment(index: usize, obj: &Map<String, Value>, date: NaiveDate, off: FixedOffset) -> Result<Segment, StoreError> {
    let get = |key: &'static str| obj.get(key).ok_or(StoreError::MissingKey { index, key });
    let bad = |reason: String| StoreError::Format { index, reason };
    let number = |key: &'static str| get(key)?.as_f64().ok_or_else(|| bad(format!("\"{key}\" is not a number")));
    let text = |key: &'static str| get(key)?.as_str().ok_or_else(|| bad(format!("\"{key}\" is not text")));

    let activity: ActivityLabel = text("activity")?
        .parse()
        .map_err(|source| StoreError::Invalid { index, source })?;
    let distance = number("distance (m)")?;
    let duration = get("duration (s)")?
        .as_i64()
        .ok_or_else(|| bad("\"duration (s)\" is not an integer".into()))?;
    let speed = match obj.get(SPEED_KEY).or_else(|| obj.get(SPEED_KEY_BACKSLASH)) {
        Some(v) => v.as_f64().ok_or_else(|| bad(format!("\"{SPEED_KEY}\" is not a number")))?,
        None => return Err(StoreError::MissingKey { index, key: SPEED_KEY }),
    };
    let line = match obj.get("line") {
        Some(v) if activity.is_transit() => {
            Some(v.as_str().ok_or_else(|| bad("\"line\" is not text".into()))?.to_string())
        }
        _ => None,
    };

    let day_start = |t: &str| -> Result<i64, StoreError> {
        let time = NaiveTime::parse_from_str(t, "%H:%M:%S").map_err(|e| bad(format!("time \"{t}\": {e}")))?;
        date.and_time(time)
            .and_local_timezone(off)
            .single()
            .map(|dt| dt.timestamp_millis())
            .ok_or_else(|| bad(format!("time \"{t}\" does not exist")))
    };
    let first_ms = day_start(text("first time")?)?;
    // A segment running past midnight: later times that read earlier than the
    // first belong to the next day.
    let resolve = |t: &str| -> Result<i64, StoreError> {
        let ms = day_start(t)?;
        Ok(if ms < first_ms { ms + 86_400_000 } else { ms })
    };
    let last_ms = resolve(text("last time")?)?;

    let flat = get("location")?
        .as_array()
        .ok_or_else(|| bad("\"location\" is not an array".into()))?;
    if flat.len() % 3 != 0 {
        return Err(bad(format!("location array length {} is not a multiple of 3", flat.len())));
    }
    let sample = |lat: f64, lon: f64, t: i64| {
        LocationSample::new(lat, lon, PLACEHOLDER_ACCURACY_M, t, false).map_err(|source| StoreError::Invalid { index, source })
    };
    let mut points = Vec::with_capacity(flat.len() / 3);
    for triple in flat.chunks(3) {
        let lat = triple[0].as_f64().ok_or_else(|| bad("location latitude is not a number".into()))?;
        let lon = triple[1].as_f64().ok_or_else(|| bad("location longitude is not a number".into()))?;
        let t = triple[2].as_str().ok_or_else(|| bad("location time is not text".into()))?;
        points.push(sample(lat, lon, resolve(t)?)?);
    }
    let (first_pos, last_pos) = match (points.first(), points.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(bad("empty location array".into())),
    };
    Segment::new(SegmentParts {
        activity,
        first_location: sample(first_pos.latitude, first_pos.longitude, first_ms)?,
        last_location: sample(last_pos.latitude, last_pos.longitude, last_ms)?,
        total_distance: distance,
        total_duration: duration,
        average_speed: speed,
        line,
        location_points: points,
    })
    .map_err(|source| StoreError::Invalid { index, source })
}
