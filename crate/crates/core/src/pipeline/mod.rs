//! The location-processing state machine.
//!
//! Samples arrive through [`on_location`] and activity updates through
//! [`on_activity`]. Every `window_seconds` of trace time [`on_window_close`]
//! runs the GPS countdown, the underground (metro) detector and finally the
//! window aggregation of [`apply_window`]. [`Pipeline`] drives all of this
//! from a time-ordered event stream.

pub mod trace;

use serde::Serialize;
use thiserror::Error;

use crate::activity;
use crate::geo::{block_distance_m, path_distance_m};
use crate::model::{
    ActivityLabel, ActivityWindowCounts, LocationSample, PipelineConfig, Segment, SegmentParts, TransitNetwork,
};
use crate::transit::{self, MetroRoute};

pub use trace::{read_trace, write_trace, TraceError, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GpsSignal {
    Enable,
    Disable,
    NoChange,
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("sample at {got} ms arrived after one at {last} ms")]
    OutOfOrder { last: i64, got: i64 },
    #[error("activity label {0} cannot come from the recognizer")]
    NotRaw(ActivityLabel),
}

/// What the underground detector did at a window close.
#[derive(Debug, Clone, PartialEq)]
pub enum UndergroundEvent {
    Entered { loc1: LocationSample },
    Recognized { loc1: LocationSample, loc2: LocationSample, line: String, route: MetroRoute },
    FalsePositive { loc1: LocationSample, loc2: LocationSample },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutcome {
    pub gps: GpsSignal,
    pub underground: Option<UndergroundEvent>,
}

/// Per-window reductions of the buffered fixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    /// Whole seconds between the first and last buffered fix.
    pub duration_s: i64,
    pub block_distance_m: f64,
    pub path_distance_m: f64,
    /// Path distance over duration; zero for a zero-length window.
    pub speed_kmh: f64,
}

impl WindowStats {
    /// `None` for an empty buffer.
    pub fn compute(points: &[LocationSample]) -> Option<Self> {
        let (first, last) = (points.first()?, points.last()?);
        let duration_s = (last.timestamp_ms - first.timestamp_ms) / 1000;
        let path = path_distance_m(points).ok()?;
        let block = block_distance_m(points).ok()?;
        let speed = if duration_s > 0 { path * 3.6 / duration_s as f64 } else { 0.0 };
        Some(WindowStats {
            duration_s,
            block_distance_m: block,
            path_distance_m: path,
            speed_kmh: speed,
        })
    }
}

/// Everything the state machine carries between events.
///
/// The running merge accumulators live in the last element of `segments`,
/// which stays open for merging until a window with another label arrives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineState {
    pub window_buffer: Vec<LocationSample>,
    pub counts: ActivityWindowCounts,
    pub reploc: u32,
    pub badloc: u32,
    pub gps_on: bool,
    pub gps_windows_remaining: u32,
    pub afterbad: bool,
    pub loc1: Option<LocationSample>,
    pub locgood: Vec<LocationSample>,
    /// Most recent good fix, kept across windows.
    pub last_good: Option<LocationSample>,
    pub last_location_ms: Option<i64>,
    pub segments: Vec<Segment>,
}

impl PipelineState {
    pub fn last_activity(&self) -> Option<ActivityLabel> {
        self.segments.last().map(Segment::activity)
    }

    fn enable_gps(&mut self, config: &PipelineConfig) -> GpsSignal {
        self.gps_on = true;
        self.gps_windows_remaining = config.gps_max_windows;
        GpsSignal::Enable
    }
}

/// Counts one recognizer update towards the current window.
pub fn on_activity(state: &mut PipelineState, label: ActivityLabel) -> Result<(), PipelineError> {
    state.counts = activity::ingest(state.counts, label).map_err(|_| PipelineError::NotRaw(label))?;
    Ok(())
}

/// Ingests one location fix and decides whether GPS should change state.
pub fn on_location(
    state: &mut PipelineState,
    sample: LocationSample,
    config: &PipelineConfig,
) -> Result<GpsSignal, PipelineError> {
    if let Some(last) = state.last_location_ms {
        if sample.timestamp_ms < last {
            return Err(PipelineError::OutOfOrder {
                last,
                got: sample.timestamp_ms,
            });
        }
    }
    state.last_location_ms = Some(sample.timestamp_ms);

    if sample.accuracy < config.good_accuracy_m {
        state.last_good = Some(sample);
        if state.afterbad {
            if !state.locgood.last().is_some_and(|p| p.same_position(&sample)) {
                state.locgood.push(sample);
            }
            return Ok(GpsSignal::NoChange);
        }
        if let Some(prev) = state.window_buffer.last() {
            if prev.same_position(&sample) {
                state.reploc += 1;
            } else {
                state.reploc = 0;
            }
        }
        state.window_buffer.push(sample);
        let moving = state.counts.vehicle > 1 || state.counts.on_foot > 2;
        if state.reploc > config.reploc_trigger && !state.gps_on && moving {
            return Ok(state.enable_gps(config));
        }
    } else if sample.accuracy < config.bad_accuracy_m {
        if sample.wifi_enabled && !state.gps_on {
            return Ok(state.enable_gps(config));
        }
    } else if sample.accuracy > config.bad_accuracy_m && sample.wifi_enabled {
        state.badloc += 1;
    }
    Ok(GpsSignal::NoChange)
}

/// Closes the current window.
pub fn on_window_close(state: &mut PipelineState, config: &PipelineConfig, network: &TransitNetwork) -> WindowOutcome {
    let mut gps = GpsSignal::NoChange;
    if state.gps_on {
        state.gps_windows_remaining = state.gps_windows_remaining.saturating_sub(1);
        if state.gps_windows_remaining == 0 {
            state.gps_on = false;
            gps = GpsSignal::Disable;
        }
    }

    if state.badloc > config.badloc_trigger && !state.afterbad {
        if let Some(loc1) = state.last_good {
            state.afterbad = true;
            state.loc1 = Some(loc1);
            state.locgood.clear();
            reset_window(state);
            return WindowOutcome {
                gps,
                underground: Some(UndergroundEvent::Entered { loc1 }),
            };
        }
    }

    let mut underground = None;
    if state.afterbad {
        if state.locgood.len() <= 2 {
            reset_window(state);
            return WindowOutcome { gps, underground };
        }
        let loc1 = state.loc1.expect("afterbad implies loc1");
        let loc2 = state.locgood[0];
        underground = Some(match transit::recognize_metro(&loc1, &loc2, network, config) {
            Some((route, line)) => {
                state.segments.push(metro_segment(&loc1, &loc2, &route, &line));
                UndergroundEvent::Recognized { loc1, loc2, line, route }
            }
            None => UndergroundEvent::FalsePositive { loc1, loc2 },
        });
        state.badloc = 0;
        state.afterbad = false;
        state.loc1 = None;
        state.window_buffer = std::mem::take(&mut state.locgood);
    }

    let estimated = activity::estimate(&state.counts);
    let points = std::mem::take(&mut state.window_buffer);
    apply_window(state, estimated, &points, config);
    reset_window(state);
    WindowOutcome { gps, underground }
}

fn reset_window(state: &mut PipelineState) {
    state.window_buffer.clear();
    state.counts = ActivityWindowCounts::default();
}

/// The metro segment between the fixes around a blackout. Every traced
/// station carries `loc1`'s time except the last endpoint, which carries
/// `loc2`'s.
pub fn metro_segment(loc1: &LocationSample, loc2: &LocationSample, route: &MetroRoute, line: &str) -> Segment {
    let at = |lat: f64, lon: f64, t: i64| LocationSample {
        latitude: lat,
        longitude: lon,
        accuracy: loc1.accuracy,
        timestamp_ms: t,
        wifi_enabled: loc1.wifi_enabled,
    };
    let points: Vec<LocationSample> = route
        .stations
        .iter()
        .map(|s| at(s.latitude, s.longitude, loc1.timestamp_ms))
        .collect();
    let first = points[0];
    let end = route.stations.last().expect("routes are non-empty");
    let last = at(end.latitude, end.longitude, loc2.timestamp_ms.max(loc1.timestamp_ms));
    let distance = route.distance_m();
    let duration = (last.timestamp_ms - first.timestamp_ms) / 1000;
    let speed = if duration > 0 { distance * 3.6 / duration as f64 } else { 0.0 };
    Segment::new(SegmentParts {
        activity: ActivityLabel::Metro,
        first_location: first,
        last_location: last,
        total_distance: distance,
        total_duration: duration,
        average_speed: speed,
        line: Some(line.to_string()),
        location_points: points,
    })
    .expect("metro segment fields are valid by construction")
}

/// Folds one window into the segment list.
///
/// Still windows (and on-foot windows that stayed inside the block radius)
/// keep only their most accurate fix. A vehicle window right after on-foot
/// must beat the on-foot speed limit to open its own segment. A window with
/// the same label as the open segment merges into it; anything else opens a
/// new segment. Empty windows change nothing.
pub fn apply_window(
    state: &mut PipelineState,
    estimated: ActivityLabel,
    points: &[LocationSample],
    config: &PipelineConfig,
) {
    let Some(stats) = WindowStats::compute(points) else { return };
    let previous = state.last_activity();

    let still = estimated == ActivityLabel::Still
        || (estimated == ActivityLabel::OnFoot && stats.block_distance_m <= config.block_radius_m);
    if still {
        match state.segments.last_mut() {
            Some(seg) if seg.activity() == ActivityLabel::Still => seg.merge_still_window(stats.duration_s, points),
            _ => state
                .segments
                .push(Segment::still(points, stats.duration_s).expect("non-empty window")),
        }
        return;
    }

    let slow_after_walk = estimated == ActivityLabel::Vehicle
        && previous == Some(ActivityLabel::OnFoot)
        && stats.speed_kmh <= config.max_on_foot_speed_kmh;
    if slow_after_walk || previous == Some(estimated) {
        let seg = state.segments.last_mut().expect("previous label implies a segment");
        seg.merge_window(stats.duration_s, stats.path_distance_m, stats.speed_kmh, points);
        return;
    }

    state.segments.push(
        Segment::new(SegmentParts {
            activity: estimated,
            first_location: points[0],
            last_location: *points.last().expect("non-empty window"),
            total_distance: stats.path_distance_m,
            total_duration: stats.duration_s,
            average_speed: stats.speed_kmh,
            line: None,
            location_points: points.to_vec(),
        })
        .expect("window fields are valid by construction"),
    );
}

/// One entry of the pipeline's output log.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEntry {
    Gps { t_ms: i64, signal: GpsSignal },
    UndergroundEntered { t_ms: i64 },
    MetroRecognized { t_ms: i64, line: String, stations: Vec<String> },
    MetroFalsePositive { t_ms: i64 },
    UnresolvedUnderground { t_ms: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub segments: Vec<Segment>,
    pub log: Vec<LogEntry>,
}

/// Drives the state machine from a time-ordered event stream, closing a
/// window at every `window_seconds` boundary counted from the first event.
#[derive(Debug)]
pub struct Pipeline<'a> {
    config: PipelineConfig,
    network: &'a TransitNetwork,
    state: PipelineState,
    next_close_ms: Option<i64>,
    last_event_ms: Option<i64>,
    log: Vec<LogEntry>,
}

impl<'a> Pipeline<'a> {
    pub fn new(config: PipelineConfig, network: &'a TransitNetwork) -> Self {
        Pipeline {
            config,
            network,
            state: PipelineState::default(),
            next_close_ms: None,
            last_event_ms: None,
            log: Vec::new(),
        }
    }

    pub fn state(&self) -> &PipelineState {
        &self.state
    }

    pub fn gps_on(&self) -> bool {
        self.state.gps_on
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    fn window_ms(&self) -> i64 {
        i64::from(self.config.window_seconds) * 1000
    }

    fn close_window(&mut self, at_ms: i64) {
        let outcome = on_window_close(&mut self.state, &self.config, self.network);
        if outcome.gps != GpsSignal::NoChange {
            self.log.push(LogEntry::Gps {
                t_ms: at_ms,
                signal: outcome.gps,
            });
        }
        match outcome.underground {
            Some(UndergroundEvent::Entered { .. }) => self.log.push(LogEntry::UndergroundEntered { t_ms: at_ms }),
            Some(UndergroundEvent::Recognized { line, route, .. }) => self.log.push(LogEntry::MetroRecognized {
                t_ms: at_ms,
                line,
                stations: route.stations.into_iter().map(|s| s.name).collect(),
            }),
            Some(UndergroundEvent::FalsePositive { .. }) => {
                self.log.push(LogEntry::MetroFalsePositive { t_ms: at_ms })
            }
            None => {}
        }
    }

    /// Closes every window whose boundary lies at or before `t_ms`.
    pub fn advance_to(&mut self, t_ms: i64) {
        let window = self.window_ms();
        let next = *self.next_close_ms.get_or_insert(t_ms + window);
        let mut next = next;
        while next <= t_ms {
            self.close_window(next);
            next += window;
        }
        self.next_close_ms = Some(next);
    }

    /// Feeds one event, returning the GPS decision it caused.
    pub fn push(&mut self, event: TraceEvent) -> Result<GpsSignal, PipelineError> {
        let t = event.timestamp_ms();
        if let Some(last) = self.last_event_ms {
            if t < last {
                return Err(PipelineError::OutOfOrder { last, got: t });
            }
        }
        self.advance_to(t);
        self.last_event_ms = Some(t);
        match event {
            TraceEvent::Activity { label, .. } => {
                on_activity(&mut self.state, label)?;
                Ok(GpsSignal::NoChange)
            }
            TraceEvent::Location(sample) => {
                let signal = on_location(&mut self.state, sample, &self.config)?;
                if signal != GpsSignal::NoChange {
                    self.log.push(LogEntry::Gps { t_ms: t, signal });
                }
                Ok(signal)
            }
        }
    }

    /// Closes the final window. An underground episode still unresolved at
    /// the end of the trace becomes a plain vehicle window from the last
    /// fix before it through the fixes recovered since.
    pub fn finish(mut self) -> PipelineOutput {
        if let Some(t) = self.last_event_ms {
            let at = self.next_close_ms.unwrap_or(t);
            self.close_window(at);
            if self.state.afterbad {
                let loc1 = self.state.loc1.take().expect("afterbad implies loc1");
                let recovered = std::mem::take(&mut self.state.locgood);
                self.state.afterbad = false;
                self.log.push(LogEntry::UnresolvedUnderground { t_ms: at });
                if !recovered.is_empty() {
                    let mut points = vec![loc1];
                    points.extend(recovered);
                    apply_window(&mut self.state, ActivityLabel::Vehicle, &points, &self.config);
                }
            }
        }
        PipelineOutput {
            segments: self.state.segments,
            log: self.log,
        }
    }
}

/// Runs a whole trace through a fresh pipeline.
pub fn run(
    events: &[TraceEvent],
    config: &PipelineConfig,
    network: &TransitNetwork,
) -> Result<PipelineOutput, PipelineError> {
    let mut pipeline = Pipeline::new(config.clone(), network);
    for event in events {
        pipeline.push(*event)?;
    }
    Ok(pipeline.finish())
}
