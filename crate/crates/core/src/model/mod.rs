//! Domain types shared by the pipeline, the transit matcher, metrics and the
//! segment store.

mod config;
mod network;
mod segment;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use config::PipelineConfig;
pub use network::{
    load_schedule, parse_schedule, validate_network, ScheduleTrip, StationRecord, StopPoint, TrainStop,
    TransitNetwork, VehicleType,
};
pub use segment::{Segment, SegmentParts};
pub(crate) use network::same_name;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("accuracy must be positive and finite, got {0}")]
    InvalidAccuracy(f64),
    #[error("unknown activity label `{0}`")]
    UnknownLabel(String),
    #[error("invalid segment: {0}")]
    InvalidSegment(String),
    #[error("invalid schedule trip for line {line}: {reason}")]
    InvalidTrip { line: String, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

pub(crate) fn check_coordinate(lat: f64, lon: f64) -> Result<(), ModelError> {
    if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
        Ok(())
    } else {
        Err(ModelError::InvalidCoordinate { lat, lon })
    }
}

/// One positioning fix.
///
/// `accuracy` is the radius (meters) of 68% confidence reported by the
/// location provider. `timestamp_ms` is milliseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationSample {
    pub latitude: f64,
    pub longitude: f64,
    pub accuracy: f64,
    pub timestamp_ms: i64,
    pub wifi_enabled: bool,
}

impl LocationSample {
    pub fn new(
        latitude: f64,
        longitude: f64,
        accuracy: f64,
        timestamp_ms: i64,
        wifi_enabled: bool,
    ) -> Result<Self, ModelError> {
        check_coordinate(latitude, longitude)?;
        if !(accuracy.is_finite() && accuracy > 0.0) {
            return Err(ModelError::InvalidAccuracy(accuracy));
        }
        Ok(Self {
            latitude,
            longitude,
            accuracy,
            timestamp_ms,
            wifi_enabled,
        })
    }

    /// True when both coordinates are bit-for-bit equal to `other`'s.
    #[allow(clippy::float_cmp)]
    pub fn same_position(&self, other: &LocationSample) -> bool {
        self.latitude == other.latitude && self.longitude == other.longitude
    }
}

/// Activity attached to a segment.
///
/// The first five variants are the coarse labels produced by activity
/// recognition; the transit variants only appear after recognition
/// post-processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivityLabel {
    Still,
    OnFoot,
    Bicycle,
    Vehicle,
    Unknown,
    Metro,
    Bus,
    Tram,
    Train,
}

impl ActivityLabel {
    pub const RAW: [ActivityLabel; 5] = [
        ActivityLabel::Vehicle,
        ActivityLabel::Bicycle,
        ActivityLabel::OnFoot,
        ActivityLabel::Still,
        ActivityLabel::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityLabel::Still => "still",
            ActivityLabel::OnFoot => "on_foot",
            ActivityLabel::Bicycle => "bicycle",
            ActivityLabel::Vehicle => "vehicle",
            ActivityLabel::Unknown => "unknown",
            ActivityLabel::Metro => "metro",
            ActivityLabel::Bus => "bus",
            ActivityLabel::Tram => "tram",
            ActivityLabel::Train => "train",
        }
    }

    /// Labels that raw recognition streams may carry.
    pub fn is_raw(self) -> bool {
        matches!(
            self,
            ActivityLabel::Still
                | ActivityLabel::OnFoot
                | ActivityLabel::Bicycle
                | ActivityLabel::Vehicle
                | ActivityLabel::Unknown
        )
    }

    pub fn is_transit(self) -> bool {
        matches!(
            self,
            ActivityLabel::Metro | ActivityLabel::Bus | ActivityLabel::Tram | ActivityLabel::Train
        )
    }
}

impl fmt::Display for ActivityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActivityLabel {
    type Err = ModelError;

    /// Case-insensitive. `renfe` is accepted as an alias of `train`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let label = match s.to_ascii_lowercase().as_str() {
            "still" => ActivityLabel::Still,
            "on_foot" => ActivityLabel::OnFoot,
            "bicycle" => ActivityLabel::Bicycle,
            "vehicle" => ActivityLabel::Vehicle,
            "unknown" => ActivityLabel::Unknown,
            "metro" => ActivityLabel::Metro,
            "bus" => ActivityLabel::Bus,
            "tram" => ActivityLabel::Tram,
            "train" | "renfe" => ActivityLabel::Train,
            _ => return Err(ModelError::UnknownLabel(s.to_string())),
        };
        Ok(label)
    }
}

impl Serialize for ActivityLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ActivityLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-window tallies of the five coarse activity labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ActivityWindowCounts {
    pub vehicle: u32,
    pub bicycle: u32,
    pub on_foot: u32,
    pub still: u32,
    pub unknown: u32,
}

impl ActivityWindowCounts {
    pub fn total(&self) -> u32 {
        self.vehicle + self.bicycle + self.on_foot + self.still + self.unknown
    }

    /// Count for one raw label; transit labels always read as zero.
    pub fn get(&self, label: ActivityLabel) -> u32 {
        match label {
            ActivityLabel::Vehicle => self.vehicle,
            ActivityLabel::Bicycle => self.bicycle,
            ActivityLabel::OnFoot => self.on_foot,
            ActivityLabel::Still => self.still,
            ActivityLabel::Unknown => self.unknown,
            _ => 0,
        }
    }

    pub(crate) fn slot_mut(&mut self, label: ActivityLabel) -> Option<&mut u32> {
        match label {
            ActivityLabel::Vehicle => Some(&mut self.vehicle),
            ActivityLabel::Bicycle => Some(&mut self.bicycle),
            ActivityLabel::OnFoot => Some(&mut self.on_foot),
            ActivityLabel::Still => Some(&mut self.still),
            ActivityLabel::Unknown => Some(&mut self.unknown),
            _ => None,
        }
    }
}
