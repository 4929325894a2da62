//! Deterministic synthetic traces.
//!
//! A [`Scenario`] is a list of legs, each a travel mode along a polyline in
//! one radio environment. [`generate`] walks the timeline emitting activity
//! updates every 5 s and location fixes every 20 s, switching to GPS cadence
//! whenever a pipeline run alongside the generator asks for GPS. The same
//! scenario always yields the same trace.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::distance_m;
use crate::model::{
    ActivityLabel, LocationSample, PipelineConfig, ScheduleTrip, TransitNetwork, VehicleType,
};
use crate::pipeline::{Pipeline, TraceEvent};

/// Delay between a GPS enable and the first satellite fix.
pub const GPS_WARMUP_MS: i64 = 30_000;

/// Location fixes are offset from the activity grid by this much so no two
/// events share a timestamp.
pub const LOCATION_PHASE_MS: i64 = 2_500;

/// Default start: 2014-12-16 08:00:00 UTC.
pub const DEFAULT_START_MS: i64 = 1_418_716_800_000;

pub const PRESETS: [&str; 5] = ["journey1", "journey2", "journey3", "journey4", "journey5"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Walk,
    Bicycle,
    Car,
    Bus,
    Tram,
    Train,
    Metro,
    Still,
}

impl Mode {
    /// What the activity recognizer reports for this mode.
    pub fn coarse_label(self) -> ActivityLabel {
        match self {
            Mode::Walk => ActivityLabel::OnFoot,
            Mode::Bicycle => ActivityLabel::Bicycle,
            Mode::Car | Mode::Bus | Mode::Tram | Mode::Train | Mode::Metro => ActivityLabel::Vehicle,
            Mode::Still => ActivityLabel::Still,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    /// City streets with Wi-Fi positioning, block-level accuracy.
    WifiUrban,
    /// Wi-Fi off; the provider repeats its last fix until GPS delivers.
    NoWifiRoad,
    /// No Wi-Fi hotspots and no sky: accuracy worse than 1 km.
    Underground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub mode: Mode,
    /// `[lat, lon]` waypoints. A still leg may leave this empty to stay where
    /// the previous leg ended.
    #[serde(default)]
    pub polyline: Vec<[f64; 2]>,
    /// Ignored for still legs.
    #[serde(default)]
    pub speed_kmh: f64,
    pub environment: Environment,
    /// Route name for bus and tram legs, used by [`Scenario::timetable`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<String>,
    /// Length of a still leg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start_epoch_ms: i64,
    pub legs: Vec<Leg>,
    /// Probability of mislabeling each activity update.
    #[serde(default)]
    pub activity_noise: f64,
    /// Scatter fixes around the true position.
    #[serde(default = "default_true")]
    pub location_noise: bool,
    pub weight_kg: f64,
}

fn default_start() -> i64 {
    DEFAULT_START_MS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Error, PartialEq)]
pub enum SimulateError {
    #[error("unknown preset `{0}` (expected one of journey1..journey5)")]
    UnknownPreset(String),
    #[error("leg {leg}: {reason}")]
    InvalidLeg { leg: usize, reason: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

fn polyline_length_m(points: &[[f64; 2]]) -> f64 {
    points.windows(2).map(|w| distance_m(w[0][0], w[0][1], w[1][0], w[1][1])).sum()
}

/// Start and end (epoch ms) of one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegTiming {
    pub start_ms: i64,
    pub end_ms: i64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SimulateError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| SimulateError::InvalidScenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        if self.legs.is_empty() {
            return Err(SimulateError::InvalidScenario("no legs".into()));
        }
        if !(0.0..=1.0).contains(&self.activity_noise) {
            return Err(SimulateError::InvalidScenario(format!(
                "activity_noise {} is not a probability",
                self.activity_noise
            )));
        }
        if !(self.weight_kg.is_finite() && self.weight_kg > 0.0) {
            return Err(SimulateError::InvalidScenario(format!("weight {} kg is not positive", self.weight_kg)));
        }
        for (i, leg) in self.legs.iter().enumerate() {
            let bad = |reason: String| Err(SimulateError::InvalidLeg { leg: i, reason });
            for p in &leg.polyline {
                if crate::model::check_coordinate(p[0], p[1]).is_err() {
                    return bad(format!("waypoint {p:?} out of range"));
                }
            }
            if leg.mode == Mode::Still {
                if leg.duration_s.is_none_or(|d| d == 0) {
                    return bad("still legs need a positive duration_s".into());
                }
                if i == 0 && leg.polyline.is_empty() {
                    return bad("a leading still leg needs a position".into());
                }
                continue;
            }
            if leg.polyline.len() < 2 || polyline_length_m(&leg.polyline) <= 0.0 {
                return bad("moving legs need a polyline of positive length".into());
            }
            if !(leg.speed_kmh.is_finite() && leg.speed_kmh > 0.0) {
                return bad(format!("speed {} km/h is not positive", leg.speed_kmh));
            }
        }
        Ok(())
    }

    /// When each leg starts and ends.
    pub fn timeline(&self) -> Vec<LegTiming> {
        let mut t = self.start_epoch_ms;
        self.legs
            .iter()
            .map(|leg| {
                let ms = match leg.mode {
                    Mode::Still => i64::from(leg.duration_s.unwrap_or(0)) * 1000,
                    _ => (polyline_length_m(&leg.polyline) / (leg.speed_kmh / 3.6) * 1000.0).round() as i64,
                };
                let timing = LegTiming {
                    start_ms: t,
                    end_ms: t + ms,
                };
                t += ms;
                timing
            })
            .collect()
    }

    /// One trip per bus or tram leg with a line, stop to stop, on the
    /// scripted times.
    pub fn timetable(&self) -> Vec<ScheduleTrip> {
        self.legs
            .iter()
            .zip(self.timeline())
            .filter_map(|(leg, timing)| {
                let vehicle_type = match leg.mode {
                    Mode::Bus => VehicleType::Bus,
                    Mode::Tram => VehicleType::Tram,
                    _ => return None,
                };
                let line = leg.line.as_ref()?;
                let (a, b) = (leg.polyline.first()?, leg.polyline.last()?);
                ScheduleTrip::new(
                    vehicle_type,
                    line.clone(),
                    (a[0], a[1]),
                    (b[0], b[1]),
                    timing.start_ms.div_euclid(1000),
                    timing.end_ms.div_euclid(1000),
                )
                .ok()
            })
            .collect()
    }
}

/// Position at `fraction` of the way along a polyline, by distance.
fn along(points: &[[f64; 2]], fraction: f64) -> (f64, f64) {
    let total = polyline_length_m(points);
    let mut remaining = fraction.clamp(0.0, 1.0) * total;
    for w in points.windows(2) {
        let d = distance_m(w[0][0], w[0][1], w[1][0], w[1][1]);
        if remaining <= d && d > 0.0 {
            let f = remaining / d;
            return (w[0][0] + (w[1][0] - w[0][0]) * f, w[0][1] + (w[1][1] - w[0][1]) * f);
        }
        remaining -= d;
    }
    let last = points[points.len() - 1];
    (last[0], last[1])
}

struct Generator<'a> {
    scenario: &'a Scenario,
    timeline: Vec<LegTiming>,
    /// Where each leg stands still (still legs) or ends (moving legs).
    anchors: Vec<(f64, f64)>,
    rng: ChaCha8Rng,
    last_fix: Option<LocationSample>,
}

impl Generator<'_> {
    fn leg_at(&self, t: i64) -> usize {
        self.timeline.iter().position(|lt| t < lt.end_ms).unwrap_or(self.timeline.len() - 1)
    }

    fn true_position(&self, leg: usize, t: i64) -> (f64, f64) {
        let l = &self.scenario.legs[leg];
        if l.mode == Mode::Still {
            return self.anchors[leg];
        }
        let lt = self.timeline[leg];
        let span = (lt.end_ms - lt.start_ms).max(1) as f64;
        along(&l.polyline, (t - lt.start_ms) as f64 / span)
    }

    fn activity(&mut self, leg: usize) -> ActivityLabel {
        let label = self.scenario.legs[leg].mode.coarse_label();
        if self.scenario.activity_noise > 0.0 && self.rng.random_bool(self.scenario.activity_noise) {
            let others: Vec<ActivityLabel> = ActivityLabel::RAW.into_iter().filter(|l| *l != label).collect();
            return others[self.rng.random_range(0..others.len())];
        }
        label
    }

    fn scatter(&mut self, (lat, lon): (f64, f64), accuracy: f64) -> (f64, f64) {
        if !self.scenario.location_noise {
            return (lat, lon);
        }
        let normal = Normal::new(0.0, accuracy / 2.0).expect("positive sigma");
        let r: f64 = normal.sample(&mut self.rng).abs();
        let bearing = self.rng.random_range(0.0..std::f64::consts::TAU);
        let dlat = (r * bearing.cos() / crate::geo::EARTH_RADIUS_M).to_degrees();
        let dlon = (r * bearing.sin() / (crate::geo::EARTH_RADIUS_M * lat.to_radians().cos())).to_degrees();
        ((lat + dlat).clamp(-90.0, 90.0), (lon + dlon).clamp(-180.0, 180.0))
    }

    fn fresh(&mut self, pos: (f64, f64), acc_range: (f64, f64), t: i64, wifi: bool) -> LocationSample {
        let accuracy = self.rng.random_range(acc_range.0..acc_range.1);
        let (lat, lon) = self.scatter(pos, accuracy);
        LocationSample::new(lat, lon, accuracy, t, wifi).expect("generated fixes are valid")
    }

    fn location(&mut self, leg: usize, t: i64, gps_ready: bool) -> LocationSample {
        let pos = self.true_position(leg, t);
        let repeat = |last: Option<LocationSample>, wifi: bool, accuracy: Option<f64>| {
            last.map(|p| LocationSample {
                timestamp_ms: t,
                wifi_enabled: wifi,
                accuracy: accuracy.unwrap_or(p.accuracy),
                ..p
            })
        };
        let sample = match self.scenario.legs[leg].environment {
            Environment::Underground => {
                let accuracy = self.rng.random_range(1001.0..3000.0);
                repeat(self.last_fix, true, Some(accuracy))
                    .unwrap_or_else(|| LocationSample::new(pos.0, pos.1, accuracy, t, true).expect("valid fix"))
            }
            env if gps_ready => self.fresh(pos, (5.0, 15.0), t, env == Environment::WifiUrban),
            Environment::WifiUrban => self.fresh(pos, (30.0, 150.0), t, true),
            Environment::NoWifiRoad => match repeat(self.last_fix, false, None) {
                Some(s) if s.accuracy < 1000.0 => s,
                _ => self.fresh(pos, (30.0, 150.0), t, false),
            },
        };
        self.last_fix = Some(sample);
        sample
    }
}

/// Generates the trace of `scenario` with the default pipeline settings.
pub fn generate(scenario: &Scenario) -> Result<Vec<TraceEvent>, SimulateError> {
    generate_with(scenario, &PipelineConfig::default())
}

/// Generates a trace. Location cadence follows the GPS state of a pipeline
/// fed with the trace as it is produced.
pub fn generate_with(scenario: &Scenario, config: &PipelineConfig) -> Result<Vec<TraceEvent>, SimulateError> {
    scenario.validate()?;
    let timeline = scenario.timeline();
    let mut anchors = Vec::with_capacity(scenario.legs.len());
    for (i, leg) in scenario.legs.iter().enumerate() {
        let anchor = match (leg.mode, leg.polyline.first(), leg.polyline.last()) {
            (Mode::Still, Some(p), _) => (p[0], p[1]),
            (Mode::Still, None, _) => anchors[i - 1],
            (_, _, Some(p)) => (p[0], p[1]),
            _ => unreachable!("validated"),
        };
        anchors.push(anchor);
    }
    let end_ms = timeline.last().map_or(scenario.start_epoch_ms, |lt| lt.end_ms);

    let network = TransitNetwork::default();
    let mut pipeline = Pipeline::new(config.clone(), &network);
    let mut gen = Generator {
        scenario,
        timeline,
        anchors,
        rng: ChaCha8Rng::seed_from_u64(scenario.seed),
        last_fix: None,
    };

    let act_step = i64::from(config.activity_interval_seconds.max(1)) * 1000;
    let loc_step = i64::from(config.location_interval_seconds.max(1)) * 1000;
    let gps_step = i64::from(config.gps_interval_seconds.max(1)) * 1000;
    let mut next_act = scenario.start_epoch_ms;
    let mut next_loc = scenario.start_epoch_ms + LOCATION_PHASE_MS;
    let mut gps_since: Option<i64> = None;
    let mut last_t = i64::MIN;
    let mut events = Vec::new();

    loop {
        let t = next_act.min(next_loc);
        if t >= end_ms {
            break;
        }
        let leg = gen.leg_at(t);
        let event = if next_act <= next_loc {
            next_act += act_step;
            TraceEvent::Activity {
                label: gen.activity(leg),
                timestamp_ms: t,
            }
        } else {
            let t = t.max(last_t + 1);
            pipeline.advance_to(t);
            if !pipeline.gps_on() {
                gps_since = None;
            }
            let ready = gps_since.is_some_and(|s| t >= s + GPS_WARMUP_MS);
            next_loc = t + if ready { gps_step } else { loc_step };
            TraceEvent::Location(gen.location(leg, t, ready))
        };
        last_t = event.timestamp_ms();
        pipeline.push(event).expect("generated events are ordered and valid");
        if pipeline.gps_on() && gps_since.is_none() {
            gps_since = Some(last_t);
            next_loc = next_loc.min(last_t + GPS_WARMUP_MS);
        }
        events.push(event);
    }
    Ok(events)
}

/// Waypoints heading from `from` on `bearing_deg` for `length_m`.
fn heading(from: (f64, f64), bearing_deg: f64, length_m: f64) -> [f64; 2] {
    let b = bearing_deg.to_radians();
    let dlat = (length_m * b.cos() / crate::geo::EARTH_RADIUS_M).to_degrees();
    let dlon = (length_m * b.sin() / (crate::geo::EARTH_RADIUS_M * from.0.to_radians().cos())).to_degrees();
    [from.0 + dlat, from.1 + dlon]
}

fn moving(mode: Mode, polyline: Vec<[f64; 2]>, duration_s: u32, environment: Environment) -> Leg {
    let speed_kmh = polyline_length_m(&polyline) * 3.6 / f64::from(duration_s);
    Leg {
        mode,
        polyline,
        speed_kmh,
        environment,
        line: None,
        duration_s: None,
    }
}

fn bus(line: &str, polyline: Vec<[f64; 2]>, duration_s: u32) -> Leg {
    Leg {
        line: Some(line.into()),
        ..moving(Mode::Bus, polyline, duration_s, Environment::WifiUrban)
    }
}

fn still(duration_s: u32) -> Leg {
    Leg {
        mode: Mode::Still,
        polyline: Vec::new(),
        speed_kmh: 0.0,
        environment: Environment::WifiUrban,
        line: None,
        duration_s: Some(duration_s),
    }
}

fn still_at(p: [f64; 2], duration_s: u32) -> Leg {
    Leg {
        polyline: vec![p],
        ..still(duration_s)
    }
}

fn walk(polyline: Vec<[f64; 2]>, duration_s: u32) -> Leg {
    moving(Mode::Walk, polyline, duration_s, Environment::WifiUrban)
}

fn metro_ride(network: &TransitNetwork, line: &str, from: &str, to: &str, duration_s: u32) -> Leg {
    let order = &network.line_orders[line];
    let i = order.iter().position(|n| n == from).expect("preset station");
    let j = order.iter().position(|n| n == to).expect("preset station");
    let names: Vec<&String> = if i <= j { order[i..=j].iter().collect() } else { order[j..=i].iter().rev().collect() };
    let polyline = names
        .into_iter()
        .map(|n| {
            let s = network.station(line, n).expect("preset station");
            [s.latitude, s.longitude]
        })
        .collect();
    Leg {
        line: Some(line.into()),
        ..moving(Mode::Metro, polyline, duration_s, Environment::Underground)
    }
}

fn station(network: &TransitNetwork, line: &str, name: &str) -> [f64; 2] {
    let s = network.station(line, name).expect("preset station");
    [s.latitude, s.longitude]
}

/// Built-in journeys. Leg lengths are whole multiples of the two-minute
/// window so every window sees a single mode.
pub fn preset(name: &str) -> Result<Scenario, SimulateError> {
    let scenario = |legs: Vec<Leg>| Scenario {
        seed: 1,
        start_epoch_ms: DEFAULT_START_MS,
        legs,
        activity_noise: 0.0,
        location_noise: true,
        weight_kg: 70.0,
    };
    let s = match name {
        // Car to the office district, then two bus rides.
        "journey1" => {
            let home = [41.3890, 2.1130];
            let office = heading((home[0], home[1]), 60.0, 5000.0);
            let stop_a = heading((office[0], office[1]), 90.0, 300.0);
            let stop_b = heading((stop_a[0], stop_a[1]), 20.0, 3000.0);
            let stop_c = heading((stop_b[0], stop_b[1]), 300.0, 300.0);
            let stop_d = heading((stop_c[0], stop_c[1]), 200.0, 2400.0);
            let end = heading((stop_d[0], stop_d[1]), 150.0, 300.0);
            scenario(vec![
                still_at(home, 240),
                moving(Mode::Car, vec![home, office], 600, Environment::WifiUrban),
                walk(vec![office, stop_a], 240),
                still(240),
                bus("V15", vec![stop_a, stop_b], 720),
                walk(vec![stop_b, stop_c], 240),
                still(240),
                bus("H12", vec![stop_c, stop_d], 600),
                walk(vec![stop_d, end], 240),
            ])
        }
        // Metro round trip Canyelles - Lesseps on L3.
        "journey2" => {
            let net = TransitNetwork::barcelona_fixture();
            let canyelles = station(&net, "L3", "Canyelles");
            let lesseps = station(&net, "L3", "Lesseps");
            let home = heading((canyelles[0], canyelles[1]), 80.0, 300.0);
            let work = heading((lesseps[0], lesseps[1]), 280.0, 300.0);
            scenario(vec![
                walk(vec![home, canyelles], 240),
                metro_ride(&net, "L3", "Canyelles", "Lesseps", 720),
                walk(vec![lesseps, work], 240),
                still(1200),
                walk(vec![work, lesseps], 240),
                metro_ride(&net, "L3", "Lesseps", "Canyelles", 720),
                walk(vec![canyelles, home], 240),
            ])
        }
        // Bus round trip.
        "journey3" => {
            let stop_a = [41.3980, 2.1600];
            let stop_b = heading((stop_a[0], stop_a[1]), 45.0, 3500.0);
            let dest = heading((stop_b[0], stop_b[1]), 0.0, 300.0);
            scenario(vec![
                still_at(stop_a, 240),
                bus("V17", vec![stop_a, stop_b], 840),
                walk(vec![stop_b, dest], 240),
                still(1200),
                walk(vec![dest, stop_b], 240),
                still(240),
                bus("V17", vec![stop_b, stop_a], 840),
            ])
        }
        // Walk only.
        "journey4" => {
            let start = [41.3870, 2.1700];
            let corner = heading((start[0], start[1]), 30.0, 1200.0);
            let end = heading((corner[0], corner[1]), 120.0, 1050.0);
            scenario(vec![walk(vec![start, corner, end], 1800)])
        }
        // Car on an open road without Wi-Fi: the provider repeats its last
        // fix until GPS warms up.
        "journey5" => {
            let start = [41.5200, 2.0300];
            let mid = heading((start[0], start[1]), 10.0, 8000.0);
            let end = heading((mid[0], mid[1]), 70.0, 8000.0);
            scenario(vec![
                moving(Mode::Car, vec![start, mid, end], 1200, Environment::NoWifiRoad),
                Leg {
                    environment: Environment::NoWifiRoad,
                    ..still(240)
                },
            ])
        }
        other => return Err(SimulateError::UnknownPreset(other.to_string())),
    };
    Ok(s)
}
