//! Activity tallies per window and the dominant-activity estimate.

use thiserror::Error;

use crate::model::{ActivityLabel, ActivityWindowCounts};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActivityError {
    #[error("`{0}` is not a raw activity label")]
    NotRaw(String),
    #[error("unrecognized detected-activity code {0}")]
    UnrecognizedType(i32),
}

/// Activity types reported by the platform recognizer, with their wire codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectedActivityType {
    InVehicle = 0,
    OnBicycle = 1,
    OnFoot = 2,
    Still = 3,
    Unknown = 4,
    Tilting = 5,
}

impl DetectedActivityType {
    pub fn from_code(code: i32) -> Option<Self> {
        Some(match code {
            0 => Self::InVehicle,
            1 => Self::OnBicycle,
            2 => Self::OnFoot,
            3 => Self::Still,
            4 => Self::Unknown,
            5 => Self::Tilting,
            _ => return None,
        })
    }

    /// Raw label text for this type. Tilting reads as still.
    pub fn label_text(self) -> &'static str {
        match self {
            Self::InVehicle => "vehicle",
            Self::OnBicycle => "bicycle",
            Self::OnFoot => "on_foot",
            Self::Still | Self::Tilting => "still",
            Self::Unknown => "unknown",
        }
    }
}

/// Maps a detected-activity code to raw label text.
pub fn map_detected_type(code: i32) -> Result<&'static str, ActivityError> {
    DetectedActivityType::from_code(code)
        .map(DetectedActivityType::label_text)
        .ok_or(ActivityError::UnrecognizedType(code))
}

/// Counts one raw label given as text.
pub fn ingest_label(counts: ActivityWindowCounts, label: &str) -> Result<ActivityWindowCounts, ActivityError> {
    let parsed: ActivityLabel = match label {
        "vehicle" => ActivityLabel::Vehicle,
        "bicycle" => ActivityLabel::Bicycle,
        "on_foot" => ActivityLabel::OnFoot,
        "still" => ActivityLabel::Still,
        "unknown" => ActivityLabel::Unknown,
        other => return Err(ActivityError::NotRaw(other.to_string())),
    };
    ingest(counts, parsed)
}

pub fn ingest(mut counts: ActivityWindowCounts, label: ActivityLabel) -> Result<ActivityWindowCounts, ActivityError> {
    match counts.slot_mut(label) {
        Some(slot) => {
            *slot += 1;
            Ok(counts)
        }
        None => Err(ActivityError::NotRaw(label.as_str().to_string())),
    }
}

/// Tie-break order among labels sharing the maximum count.
pub const PRIORITY: [ActivityLabel; 5] = [
    ActivityLabel::Vehicle,
    ActivityLabel::Bicycle,
    ActivityLabel::OnFoot,
    ActivityLabel::Still,
    ActivityLabel::Unknown,
];

/// The label with the most samples; ties go to the earlier entry of
/// [`PRIORITY`], and a five-way tie (including all zeros) is still.
pub fn estimate(counts: &ActivityWindowCounts) -> ActivityLabel {
    let max = PRIORITY.iter().map(|&l| counts.get(l)).max().unwrap_or(0);
    let mut tied = PRIORITY.iter().copied().filter(|&l| counts.get(l) == max);
    let first = tied.next().unwrap_or(ActivityLabel::Still);
    if tied.count() == PRIORITY.len() - 1 {
        ActivityLabel::Still
    } else {
        first
    }
}
