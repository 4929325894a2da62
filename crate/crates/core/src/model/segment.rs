use super::{ActivityLabel, LocationSample, ModelError};

/// A merged activity interval.
///
/// Fields are private so the invariants checked in [`Segment::new`] hold for
/// every value in circulation: non-negative totals, still segments carrying
/// one point with zero distance and speed, a line only on transit segments,
/// and ordered endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    activity: ActivityLabel,
    first_location: LocationSample,
    last_location: LocationSample,
    total_distance: f64,
    total_duration: i64,
    average_speed: f64,
    line: Option<String>,
    location_points: Vec<LocationSample>,
}

/// Unvalidated constructor input for [`Segment::new`].
#[derive(Debug, Clone)]
pub struct SegmentParts {
    pub activity: ActivityLabel,
    pub first_location: LocationSample,
    pub last_location: LocationSample,
    /// Meters.
    pub total_distance: f64,
    /// Whole seconds.
    pub total_duration: i64,
    /// km/h.
    pub average_speed: f64,
    pub line: Option<String>,
    pub location_points: Vec<LocationSample>,
}

impl Segment {
    pub fn new(parts: SegmentParts) -> Result<Self, ModelError> {
        let seg = Segment {
            activity: parts.activity,
            first_location: parts.first_location,
            last_location: parts.last_location,
            total_distance: parts.total_distance,
            total_duration: parts.total_duration,
            average_speed: parts.average_speed,
            line: parts.line,
            location_points: parts.location_points,
        };
        seg.check()?;
        Ok(seg)
    }

    fn check(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidSegment(msg));
        if self.total_duration < 0 {
            return bad(format!("negative duration {}", self.total_duration));
        }
        if !(self.total_distance.is_finite() && self.total_distance >= 0.0) {
            return bad(format!("distance {} is not a non-negative number", self.total_distance));
        }
        if !(self.average_speed.is_finite() && self.average_speed >= 0.0) {
            return bad(format!("speed {} is not a non-negative number", self.average_speed));
        }
        if self.first_location.timestamp_ms > self.last_location.timestamp_ms {
            return bad("first location is later than last location".into());
        }
        if self.location_points.is_empty() {
            return bad("no location points".into());
        }
        if self.activity == ActivityLabel::Still {
            if self.total_distance != 0.0 || self.average_speed != 0.0 {
                return bad("still segment with non-zero distance or speed".into());
            }
            if self.location_points.len() != 1 {
                return bad(format!(
                    "still segment must hold exactly one point, got {}",
                    self.location_points.len()
                ));
            }
        }
        if self.line.is_some() && !self.activity.is_transit() {
            return bad(format!("line set on a {} segment", self.activity));
        }
        Ok(())
    }

    /// A still segment holding only the most accurate of `samples`.
    ///
    /// Ties keep the earliest sample.
    pub fn still(samples: &[LocationSample], total_duration: i64) -> Result<Self, ModelError> {
        let (first, last) = match (samples.first(), samples.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(ModelError::InvalidSegment("still segment from no samples".into())),
        };
        Segment::new(SegmentParts {
            activity: ActivityLabel::Still,
            first_location: first,
            last_location: last,
            total_distance: 0.0,
            total_duration,
            average_speed: 0.0,
            line: None,
            location_points: vec![most_accurate(samples)],
        })
    }

    pub fn activity(&self) -> ActivityLabel {
        self.activity
    }

    pub fn first_location(&self) -> &LocationSample {
        &self.first_location
    }

    pub fn last_location(&self) -> &LocationSample {
        &self.last_location
    }

    /// Meters.
    pub fn total_distance(&self) -> f64 {
        self.total_distance
    }

    /// Seconds.
    pub fn total_duration(&self) -> i64 {
        self.total_duration
    }

    /// km/h.
    pub fn average_speed(&self) -> f64 {
        self.average_speed
    }

    pub fn line(&self) -> Option<&str> {
        self.line.as_deref()
    }

    pub fn location_points(&self) -> &[LocationSample] {
        &self.location_points
    }

    pub fn into_parts(self) -> SegmentParts {
        SegmentParts {
            activity: self.activity,
            first_location: self.first_location,
            last_location: self.last_location,
            total_distance: self.total_distance,
            total_duration: self.total_duration,
            average_speed: self.average_speed,
            line: self.line,
            location_points: self.location_points,
        }
    }

    /// Folds one more window into a moving segment.
    ///
    /// The running speed is the pairwise mean of the previous running speed
    /// and the window's speed, not a duration-weighted mean.
    pub(crate) fn merge_window(
        &mut self,
        duration: i64,
        distance: f64,
        speed: f64,
        points: &[LocationSample],
    ) {
        debug_assert_ne!(self.activity, ActivityLabel::Still);
        self.total_duration += duration;
        self.total_distance += distance;
        self.average_speed = (self.average_speed + speed) / 2.0;
        if let Some(last) = points.last() {
            self.last_location = *last;
        }
        self.location_points.extend_from_slice(points);
    }

    /// Extends a still segment by one window, keeping the single most
    /// accurate point seen so far.
    pub(crate) fn merge_still_window(&mut self, duration: i64, points: &[LocationSample]) {
        debug_assert_eq!(self.activity, ActivityLabel::Still);
        self.total_duration += duration;
        if let Some(last) = points.last() {
            self.last_location = *last;
        }
        if !points.is_empty() {
            let best = most_accurate(points);
            if best.accuracy < self.location_points[0].accuracy {
                self.location_points[0] = best;
            }
        }
    }

    pub(crate) fn relabel(&mut self, activity: ActivityLabel, line: Option<String>) {
        debug_assert!(activity.is_transit() || line.is_none());
        self.activity = activity;
        self.line = line;
    }
}

fn most_accurate(samples: &[LocationSample]) -> LocationSample {
    let mut best = samples[0];
    for s in &samples[1..] {
        if s.accuracy < best.accuracy {
            best = *s;
        }
    }
    best
}
