//! Transit classification of vehicle and underground intervals.
//!
//! Metro episodes are traced over the station network between the stations
//! nearest to the fixes before and after the blackout. Vehicle segments are
//! then tested against the bus/tram schedule and finally against train stops.

use crate::geo::{distance_m, station_path_distance_m};
use crate::model::same_name;
use crate::model::{
    ActivityLabel, LocationSample, PipelineConfig, ScheduleTrip, Segment, StationRecord, TransitNetwork,
    VehicleType,
};

/// Metro transfers allowed on one traced route.
pub const MAX_TRANSFERS: usize = 2;

/// A traced metro ride.
#[derive(Debug, Clone, PartialEq)]
pub struct MetroRoute {
    /// Each ridden line with the station names visited on it, in riding order.
    pub line_sequence: Vec<(String, Vec<String>)>,
    /// Every traversed station, once each, in riding order.
    pub stations: Vec<StationRecord>,
    pub transfers: usize,
}

impl MetroRoute {
    pub fn first_line(&self) -> &str {
        &self.line_sequence[0].0
    }

    pub fn station_names(&self) -> Vec<&str> {
        self.stations.iter().map(|s| s.name.as_str()).collect()
    }

    /// Route length over station coordinates.
    pub fn distance_m(&self) -> f64 {
        let coords: Vec<(f64, f64)> = self.stations.iter().map(|s| (s.latitude, s.longitude)).collect();
        station_path_distance_m(&coords)
    }
}

/// Closest metro station within `radius_m`; exact ties keep database order.
pub fn nearest_station(lat: f64, lon: f64, radius_m: f64, network: &TransitNetwork) -> Option<&StationRecord> {
    let mut best: Option<(&StationRecord, f64)> = None;
    for station in &network.metro_stations {
        let d = distance_m(lat, lon, station.latitude, station.longitude);
        if d > radius_m {
            continue;
        }
        if best.is_none_or(|(_, best_d)| d < best_d) {
            best = Some((station, d));
        }
    }
    best.map(|(s, _)| s)
}

/// Traces the metro ride between the fixes around an underground blackout.
///
/// Returns `None` (a false positive) when either endpoint has no station in
/// range, both resolve to the same station name, or no route with at most
/// [`MAX_TRANSFERS`] transfers connects them.
pub fn recognize_metro(
    loc1: &LocationSample,
    loc2: &LocationSample,
    network: &TransitNetwork,
    config: &PipelineConfig,
) -> Option<(MetroRoute, String)> {
    let radius = config.station_search_radius_m;
    let origin = nearest_station(loc1.latitude, loc1.longitude, radius, network)?;
    let destination = nearest_station(loc2.latitude, loc2.longitude, radius, network)?;
    if same_name(&origin.name, &destination.name) {
        return None;
    }
    let route = shortest_route(&origin.name, &destination.name, network, config)?;
    let line = route.first_line().to_string();
    Some((route, line))
}

/// Shortest route between two station names. Lines serving both names are
/// walked directly; otherwise every combination of up to [`MAX_TRANSFERS`]
/// transfers is enumerated and the shortest by path distance wins, fewer
/// transfers breaking ties.
pub fn shortest_route(
    origin: &str,
    destination: &str,
    network: &TransitNetwork,
    config: &PipelineConfig,
) -> Option<MetroRoute> {
    let direct: Vec<MetroRoute> = network
        .lines_serving(origin)
        .into_iter()
        .filter(|line| network.lines_serving(destination).contains(line))
        .filter_map(|line| build_route(&[(line.to_string(), origin.to_string(), destination.to_string())], network))
        .collect();
    if !direct.is_empty() {
        return pick_shortest(direct);
    }
    pick_shortest(enumerate_routes(origin, destination, network, config))
}

fn pick_shortest(routes: Vec<MetroRoute>) -> Option<MetroRoute> {
    let mut best: Option<(MetroRoute, f64)> = None;
    for route in routes {
        let d = route.distance_m();
        let better = match &best {
            None => true,
            Some((b, bd)) => d < *bd || (d == *bd && route.transfers < b.transfers),
        };
        if better {
            best = Some((route, d));
        }
    }
    best.map(|(r, _)| r)
}

/// Every route with at most [`MAX_TRANSFERS`] transfers between the two
/// names, in enumeration order.
pub fn enumerate_routes(
    origin: &str,
    destination: &str,
    network: &TransitNetwork,
    config: &PipelineConfig,
) -> Vec<MetroRoute> {
    let mut out = Vec::new();
    for start in network.lines_serving(origin) {
        let mut legs = Vec::new();
        extend_routes(start, origin, destination, &mut legs, network, config, &mut out);
    }
    out
}

type Leg = (String, String, String);

fn extend_routes(
    line: &str,
    entry: &str,
    destination: &str,
    legs: &mut Vec<Leg>,
    network: &TransitNetwork,
    config: &PipelineConfig,
    out: &mut Vec<MetroRoute>,
) {
    if network.lines_serving(destination).contains(&line) {
        legs.push((line.to_string(), entry.to_string(), destination.to_string()));
        if let Some(route) = build_route(legs, network) {
            out.push(route);
        }
        legs.pop();
    }
    if legs.len() == MAX_TRANSFERS {
        return;
    }
    for next in network.line_orders.keys() {
        if next == line || legs.iter().any(|(l, _, _)| l == next) {
            continue;
        }
        for (exit, next_entry) in interchanges(line, next, network, config) {
            if same_name(&exit, entry) {
                continue;
            }
            legs.push((line.to_string(), entry.to_string(), exit));
            extend_routes(next, &next_entry, destination, legs, network, config, out);
            legs.pop();
        }
    }
}

/// Transfer points from line `a` to line `b`, as (name on `a`, name on `b`).
///
/// A station name present in both running orders is an interchange. A
/// station on `a` whose connections list `b` also links to the nearest `b`
/// station within the station search radius.
pub fn interchanges(a: &str, b: &str, network: &TransitNetwork, config: &PipelineConfig) -> Vec<(String, String)> {
    let (Some(a_names), Some(b_names)) = (network.line_orders.get(a), network.line_orders.get(b)) else {
        return Vec::new();
    };
    let mut out: Vec<(String, String)> = Vec::new();
    for name in a_names {
        if let Some(other) = b_names.iter().find(|n| same_name(n, name)) {
            out.push((name.clone(), other.clone()));
            continue;
        }
        let Some(record) = network.station(a, name) else { continue };
        if !record.connection_lines().any(|l| l == b) {
            continue;
        }
        let nearest = b_names
            .iter()
            .filter_map(|n| network.station(b, n))
            .map(|s| (s, distance_m(record.latitude, record.longitude, s.latitude, s.longitude)))
            .filter(|(_, d)| *d <= config.station_search_radius_m)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((s, _)) = nearest {
            out.push((name.clone(), s.name.clone()));
        }
    }
    out
}

fn leg_names(line_order: &[String], from: &str, to: &str) -> Option<Vec<String>> {
    let i = line_order.iter().position(|n| same_name(n, from))?;
    let j = line_order.iter().position(|n| same_name(n, to))?;
    let names = if i <= j {
        line_order[i..=j].to_vec()
    } else {
        line_order[j..=i].iter().rev().cloned().collect()
    };
    Some(names)
}

fn build_route(legs: &[Leg], network: &TransitNetwork) -> Option<MetroRoute> {
    let mut line_sequence = Vec::with_capacity(legs.len());
    let mut stations: Vec<StationRecord> = Vec::new();
    for (line, from, to) in legs {
        let names = leg_names(network.line_orders.get(line)?, from, to)?;
        for name in &names {
            let record = network.station(line, name)?;
            if stations.last().is_some_and(|prev| same_name(&prev.name, &record.name)) {
                continue;
            }
            stations.push(record.clone());
        }
        line_sequence.push((line.clone(), names));
    }
    if stations.is_empty() {
        return None;
    }
    Some(MetroRoute {
        transfers: line_sequence.len() - 1,
        line_sequence,
        stations,
    })
}

/// The first trip (schedule order) whose stops lie near both endpoints and
/// whose times fall inside the departure and arrival margins.
pub fn find_trip<'a>(
    origin: &LocationSample,
    destination: &LocationSample,
    departure_epoch_s: i64,
    arrival_epoch_s: i64,
    schedule: &'a [ScheduleTrip],
    config: &PipelineConfig,
) -> Option<&'a ScheduleTrip> {
    let radius = config.schedule_match_radius_m;
    schedule.iter().find(|trip| {
        distance_m(origin.latitude, origin.longitude, trip.origin_stop.lat, trip.origin_stop.lon) <= radius
            && distance_m(destination.latitude, destination.longitude, trip.destination_stop.lat, trip.destination_stop.lon)
                <= radius
            && (trip.departure_epoch - departure_epoch_s).abs() < i64::from(config.departure_margin_s)
            && (trip.arrival_epoch - arrival_epoch_s).abs() < i64::from(config.arrival_margin_s)
    })
}

pub fn match_bus_or_tram(
    origin: &LocationSample,
    destination: &LocationSample,
    departure_epoch_s: i64,
    arrival_epoch_s: i64,
    schedule: &[ScheduleTrip],
    config: &PipelineConfig,
) -> Option<VehicleType> {
    find_trip(origin, destination, departure_epoch_s, arrival_epoch_s, schedule, config).map(|t| t.vehicle_type)
}

fn nearest_train_line(lat: f64, lon: f64, network: &TransitNetwork, radius_m: f64) -> Option<&str> {
    let mut best: Option<(&str, f64)> = None;
    for stop in &network.train_stops {
        let d = distance_m(stop.latitude, stop.longitude, lat, lon);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((stop.line.as_str(), d));
        }
    }
    best.filter(|(_, d)| *d < radius_m).map(|(line, _)| line)
}

/// The shared line of the train stops nearest to both endpoints, if both are
/// close enough.
pub fn match_train(
    origin: &LocationSample,
    destination: &LocationSample,
    network: &TransitNetwork,
    config: &PipelineConfig,
) -> Option<String> {
    let radius = config.train_station_radius_m;
    let a = nearest_train_line(origin.latitude, origin.longitude, network, radius)?;
    let b = nearest_train_line(destination.latitude, destination.longitude, network, radius)?;
    (a == b).then(|| a.to_string())
}

/// Relabels vehicle segments as bus, tram or train where the schedule or the
/// train stops explain them. Other segments and the segment count are left
/// untouched.
pub fn post_process(
    mut segments: Vec<Segment>,
    schedule: &[ScheduleTrip],
    network: &TransitNetwork,
    config: &PipelineConfig,
) -> Vec<Segment> {
    for i in 0..segments.len() {
        if segments[i].activity() != ActivityLabel::Vehicle {
            continue;
        }
        let origin = match i.checked_sub(1).map(|p| &segments[p]) {
            Some(prev) if prev.activity() != ActivityLabel::Still => *prev.first_location(),
            _ => *segments[i].first_location(),
        };
        let destination = *segments[i].last_location();
        let departure = origin.timestamp_ms.div_euclid(1000);
        let arrival = destination.timestamp_ms.div_euclid(1000);

        let trip = if departure < arrival {
            find_trip(&origin, &destination, departure, arrival, schedule, config)
        } else {
            None
        };
        if let Some(trip) = trip {
            let label = match trip.vehicle_type {
                VehicleType::Bus => ActivityLabel::Bus,
                VehicleType::Tram => ActivityLabel::Tram,
            };
            segments[i].relabel(label, Some(trip.line.clone()));
        } else if let Some(line) = match_train(&origin, &destination, network, config) {
            segments[i].relabel(ActivityLabel::Train, Some(line));
        }
    }
    segments
}
