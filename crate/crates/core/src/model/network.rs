//! Station databases, per-line station orders and the bus/tram schedule.
//!
//! The station database is a JSON object with a `metro` array of
//! `{id, line, name, connections, lat, lon}` records and a `renfe` array of
//! `{line, lat, lon}` train stops. Coordinates are stored as decimal text but
//! plain JSON numbers are accepted too. The line-order file maps each metro
//! line to its station names in running order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{check_coordinate, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub id: String,
    pub line: String,
    pub name: String,
    /// Hyphen-separated connecting lines, possibly empty.
    #[serde(default)]
    pub connections: String,
    #[serde(rename = "lat", serialize_with = "coord_text", deserialize_with = "coord_any")]
    pub latitude: f64,
    #[serde(rename = "lon", serialize_with = "coord_text", deserialize_with = "coord_any")]
    pub longitude: f64,
}

impl StationRecord {
    pub fn connection_lines(&self) -> impl Iterator<Item = &str> {
        self.connections.split('-').map(str::trim).filter(|s| !s.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStop {
    pub line: String,
    #[serde(rename = "lat", serialize_with = "coord_text", deserialize_with = "coord_any")]
    pub latitude: f64,
    #[serde(rename = "lon", serialize_with = "coord_text", deserialize_with = "coord_any")]
    pub longitude: f64,
}

fn coord_text<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn coord_any<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Coord {
        Num(f64),
        Text(String),
    }
    match Coord::deserialize(d)? {
        Coord::Num(v) => Ok(v),
        Coord::Text(t) => t.trim().parse().map_err(serde::de::Error::custom),
    }
}

/// Metro stations, their per-line running order, and train stops.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitNetwork {
    pub metro_stations: Vec<StationRecord>,
    pub line_orders: BTreeMap<String, Vec<String>>,
    pub train_stops: Vec<TrainStop>,
}

#[derive(Deserialize, Serialize)]
struct StationFile {
    #[serde(default)]
    metro: Vec<StationRecord>,
    #[serde(default)]
    renfe: Vec<TrainStop>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lines: Option<BTreeMap<String, Vec<String>>>,
}

fn read_text(path: &Path) -> Result<String, ModelError> {
    fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, ModelError> {
    serde_json::from_str(text).map_err(|source| ModelError::Json {
        path: path.display().to_string(),
        source,
    })
}

impl TransitNetwork {
    /// Parses a station database and a line-order document.
    pub fn from_json(stations: &str, lines: Option<&str>) -> Result<Self, serde_json::Error> {
        let file: StationFile = serde_json::from_str(stations)?;
        let line_orders = match lines {
            Some(text) => serde_json::from_str(text)?,
            None => file.lines.unwrap_or_default(),
        };
        Ok(TransitNetwork {
            metro_stations: file.metro,
            line_orders,
            train_stops: file.renfe,
        })
    }

    pub fn from_files(stations: &Path, lines: &Path) -> Result<Self, ModelError> {
        let stations_text = read_text(stations)?;
        let lines_text = read_text(lines)?;
        let file: StationFile = parse_json(stations, &stations_text)?;
        let line_orders = parse_json(lines, &lines_text)?;
        Ok(TransitNetwork {
            metro_stations: file.metro,
            line_orders,
            train_stops: file.renfe,
        })
    }

    /// Loads a network from either a directory holding `stations.json` and
    /// `lines.json`, or a single station database whose optional `lines` key
    /// carries the line orders.
    pub fn load(path: &Path) -> Result<Self, ModelError> {
        if path.is_dir() {
            return Self::from_files(&path.join("stations.json"), &path.join("lines.json"));
        }
        let text = read_text(path)?;
        let file: StationFile = parse_json(path, &text)?;
        Ok(TransitNetwork {
            metro_stations: file.metro,
            line_orders: file.lines.unwrap_or_default(),
            train_stops: file.renfe,
        })
    }

    /// Station database JSON (without line orders).
    pub fn stations_json(&self) -> String {
        let file = StationFile {
            metro: self.metro_stations.clone(),
            renfe: self.train_stops.clone(),
            lines: None,
        };
        serde_json::to_string_pretty(&file).expect("station records always serialize")
    }

    /// Barcelona L3/L5 metro and a handful of commuter-rail stops, bundled
    /// for tests, presets and examples.
    pub fn barcelona_fixture() -> Self {
        Self::from_json(
            include_str!("../../fixtures/network/stations.json"),
            Some(include_str!("../../fixtures/network/lines.json")),
        )
        .expect("bundled network fixture parses")
    }

    /// The record for `name` on `line`, compared case-insensitively.
    pub fn station(&self, line: &str, name: &str) -> Option<&StationRecord> {
        self.metro_stations
            .iter()
            .find(|s| s.line == line && s.name.eq_ignore_ascii_case(name))
            .or_else(|| {
                self.metro_stations
                    .iter()
                    .find(|s| s.line == line && s.name.to_lowercase() == name.to_lowercase())
            })
    }

    /// Lines (in map order) whose running order contains `name`.
    pub fn lines_serving(&self, name: &str) -> Vec<&str> {
        self.line_orders
            .iter()
            .filter(|(_, names)| names.iter().any(|n| same_name(n, name)))
            .map(|(line, _)| line.as_str())
            .collect()
    }
}

pub(crate) fn same_name(a: &str, b: &str) -> bool {
    a == b || a.to_lowercase() == b.to_lowercase()
}

/// Lists every broken [`TransitNetwork`] invariant; empty when the network is
/// consistent.
pub fn validate_network(network: &TransitNetwork) -> Vec<String> {
    let mut violations = Vec::new();
    let mut seen: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for s in &network.metro_stations {
        *seen.entry((s.line.as_str(), s.name.as_str())).or_default() += 1;
        if check_coordinate(s.latitude, s.longitude).is_err() {
            violations.push(format!(
                "station {} ({}) on line {}: coordinates out of range",
                s.name, s.id, s.line
            ));
        }
    }
    for ((line, name), count) in &seen {
        if *count > 1 {
            violations.push(format!("line {line}: station {name} has {count} records"));
        }
    }
    for (line, names) in &network.line_orders {
        for name in names {
            let matches = network
                .metro_stations
                .iter()
                .filter(|s| &s.line == line && &s.name == name)
                .count();
            if matches == 0 {
                violations.push(format!("line {line}: station {name} has no record"));
            }
        }
    }
    for t in &network.train_stops {
        if check_coordinate(t.latitude, t.longitude).is_err() {
            violations.push(format!("train stop on line {}: coordinates out of range", t.line));
        }
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VehicleType {
    Bus,
    Tram,
}

impl VehicleType {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleType::Bus => "bus",
            VehicleType::Tram => "tram",
        }
    }
}

impl Serialize for VehicleType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for VehicleType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match text.to_ascii_lowercase().as_str() {
            "bus" => Ok(VehicleType::Bus),
            "tram" => Ok(VehicleType::Tram),
            other => Err(serde::de::Error::custom(format!("unknown vehicle type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopPoint {
    pub lat: f64,
    pub lon: f64,
}

/// One scheduled bus or tram trip between two stops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTrip {
    pub vehicle_type: VehicleType,
    pub line: String,
    pub origin_stop: StopPoint,
    pub destination_stop: StopPoint,
    /// Epoch seconds.
    pub departure_epoch: i64,
    /// Epoch seconds.
    pub arrival_epoch: i64,
}

impl ScheduleTrip {
    pub fn new(
        vehicle_type: VehicleType,
        line: impl Into<String>,
        origin: (f64, f64),
        destination: (f64, f64),
        departure_epoch: i64,
        arrival_epoch: i64,
    ) -> Result<Self, ModelError> {
        let trip = ScheduleTrip {
            vehicle_type,
            line: line.into(),
            origin_stop: StopPoint { lat: origin.0, lon: origin.1 },
            destination_stop: StopPoint { lat: destination.0, lon: destination.1 },
            departure_epoch,
            arrival_epoch,
        };
        trip.check()?;
        Ok(trip)
    }

    fn check(&self) -> Result<(), ModelError> {
        let fail = |reason: String| ModelError::InvalidTrip { line: self.line.clone(), reason };
        if self.departure_epoch >= self.arrival_epoch {
            return Err(fail(format!(
                "departure {} is not before arrival {}",
                self.departure_epoch, self.arrival_epoch
            )));
        }
        for stop in [self.origin_stop, self.destination_stop] {
            check_coordinate(stop.lat, stop.lon).map_err(|e| fail(e.to_string()))?;
        }
        Ok(())
    }
}

/// Parses a schedule document: a JSON array of trips.
pub fn parse_schedule(text: &str) -> Result<Vec<ScheduleTrip>, ModelError> {
    let trips: Vec<ScheduleTrip> = serde_json::from_str(text).map_err(|source| ModelError::Json {
        path: "<schedule>".into(),
        source,
    })?;
    for trip in &trips {
        trip.check()?;
    }
    Ok(trips)
}

pub fn load_schedule(path: &Path) -> Result<Vec<ScheduleTrip>, ModelError> {
    let text = read_text(path)?;
    let trips: Vec<ScheduleTrip> = parse_json(path, &text)?;
    for trip in &trips {
        trip.check()?;
    }
    Ok(trips)
}
