//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use chrono::{NaiveDate, NaiveTime};
use proptest::prelude::*;
use transmode::geo::station_path_distance_m;
use transmode::model::{ScheduleTrip, SegmentParts, VehicleType};
use transmode::{ActivityLabel, LocationSample, Segment, TransitNetwork};

pub const GOLDEN_DISTANCE_M: f64 = 49.69776445992602;
pub const GOLDEN_DURATION_S: i64 = 142;
pub const GOLDEN_SPEED_KMH: f64 = 1.2599432;
pub const METRO_DISTANCE_M: f64 = 2270.152587890625;

pub fn golden_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 12, 16).unwrap()
}

pub fn epoch_ms(time: &str) -> i64 {
    let (hms, frac) = time.split_once('.').unwrap_or((time, "0"));
    let t = NaiveTime::parse_from_str(hms, "%H:%M:%S").unwrap();
    golden_day().and_time(t).and_utc().timestamp_millis() + frac.parse::<i64>().unwrap() * 10i64.pow(3 - frac.len() as u32)
}

/// The six recorded on-foot fixes. The file prints whole seconds; the first
/// fix is taken late in its second so that the millisecond span truncates
/// to the recorded 142 s.
pub fn golden_fixes() -> Vec<LocationSample> {
    [
        (41.441145, 2.1659081, "09:46:44.900"),
        (41.4410568, 2.1660705, "09:47:11"),
        (41.441012, 2.1661082, "09:47:32"),
        (41.4409738, 2.1661926, "09:48:13"),
        (41.440959, 2.1662142, "09:48:34"),
        (41.4410113, 2.1663986, "09:49:07"),
    ]
    .iter()
    .map(|&(lat, lon, t)| LocationSample::new(lat, lon, 20.0, epoch_ms(t), true).unwrap())
    .collect()
}

pub fn near(net: &TransitNetwork, line: &str, name: &str, t_ms: i64) -> LocationSample {
    let s = net.station(line, name).unwrap();
    LocationSample::new(s.latitude, s.longitude, 20.0, t_ms, true).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

/// Activity estimation exactly as the original switch over the number of
/// tied maxima. Argument order: on_foot, bicycle, still, vehicle, unknown.
pub fn estimate_oracle(on_foot: u32, bicycle: u32, still: u32, vehicle: u32, unknown: u32) -> ActivityLabel {
    let values = [on_foot, bicycle, still, vehicle, unknown];
    let top = *values.iter().max().unwrap();
    let max: Vec<usize> = (0..5).filter(|&i| values[i] == top).collect();
    let to_activity = |i: usize| match i {
        0 => ActivityLabel::OnFoot,
        1 => ActivityLabel::Bicycle,
        2 => ActivityLabel::Still,
        3 => ActivityLabel::Vehicle,
        _ => ActivityLabel::Unknown,
    };
    let has = |i: usize| max.contains(&i);
    match max.len() {
        1 => to_activity(max[0]),
        2 => {
            if has(3) {
                to_activity(3)
            } else if has(1) {
                to_activity(1)
            } else if has(0) {
                to_activity(0)
            } else {
                to_activity(2)
            }
        }
        3 => {
            if has(3) {
                to_activity(3)
            } else if has(1) {
                to_activity(1)
            } else {
                to_activity(0)
            }
        }
        4 => {
            if has(3) {
                to_activity(3)
            } else {
                to_activity(1)
            }
        }
        _ => to_activity(2),
    }
}

/// Plain linear scan over the schedule using a haversine distance.
pub fn schedule_oracle(
    origin: (f64, f64),
    dest: (f64, f64),
    dep: i64,
    arr: i64,
    schedule: &[ScheduleTrip],
) -> Option<VehicleType> {
    for trip in schedule {
        let near_o = haversine_m(origin, (trip.origin_stop.lat, trip.origin_stop.lon)) <= 200.0;
        let near_d = haversine_m(dest, (trip.destination_stop.lat, trip.destination_stop.lon)) <= 200.0;
        if near_o && near_d && (trip.departure_epoch - dep).abs() < 300 && (trip.arrival_epoch - arr).abs() < 180 {
            return Some(trip.vehicle_type);
        }
    }
    None
}

pub fn haversine_m(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
    let dp = p2 - p1;
    let dl = (b.1 - a.1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6_371_000.0 * h.sqrt().asin()
}

/// Every station sequence from `from` to `to` riding at most three lines,
/// changing only where two lines share a station name.
pub fn route_oracle(net: &TransitNetwork, from: &str, to: &str) -> Vec<Vec<(f64, f64)>> {
    fn slice(order: &[String], a: &str, b: &str) -> Option<Vec<String>> {
        let i = order.iter().position(|n| n == a)?;
        let j = order.iter().position(|n| n == b)?;
        Some(if i <= j { order[i..=j].to_vec() } else { order[j..=i].iter().rev().cloned().collect() })
    }
    let mut out = Vec::new();
    let lines: Vec<&String> = net.line_orders.keys().collect();
    // Queue of (lines used, station path as (line, name), current station).
    type Partial = (Vec<String>, Vec<(String, String)>);
    let mut queue: Vec<Partial> = lines
        .iter()
        .filter(|l| net.line_orders[**l].iter().any(|n| n == from))
        .map(|l| (vec![(*l).clone()], vec![((*l).clone(), from.to_string())]))
        .collect();
    while let Some((used, path)) = queue.pop() {
        let line = used.last().unwrap().clone();
        let here = path.last().unwrap().1.clone();
        let order = &net.line_orders[&line];
        if let Some(names) = slice(order, &here, to) {
            let mut full = path.clone();
            full.extend(names.into_iter().skip(1).map(|n| (line.clone(), n)));
            out.push(full.iter().map(|(l, n)| {
                let s = net.station(l, n).unwrap();
                (s.latitude, s.longitude)
            }).collect());
        }
        if used.len() == 3 {
            continue;
        }
        for next in &lines {
            if used.contains(next) {
                continue;
            }
            for name in order {
                if name == &here || !net.line_orders[*next].contains(name) {
                    continue;
                }
                let names = slice(order, &here, name).unwrap();
                let mut p = path.clone();
                p.extend(names.into_iter().skip(1).map(|n| (line.clone(), n)));
                let mut u = used.clone();
                u.push((*next).clone());
                queue.push((u, p));
            }
        }
    }
    out
}

pub fn oracle_best_distance(net: &TransitNetwork, from: &str, to: &str) -> Option<f64> {
    route_oracle(net, from, to)
        .iter()
        .map(|coords| {
            let mut dedup = coords.clone();
            dedup.dedup();
            station_path_distance_m(&dedup)
        })
        .min_by(f64::total_cmp)
}

prop_compose! {
    pub fn arb_sample(base_ms: i64)(
        lat in 41.30f64..41.50,
        lon in 2.05f64..2.25,
        acc in 1.0f64..500.0,
        dt in 0i64..3_600_000,
    ) -> LocationSample {
        LocationSample::new(lat, lon, acc, base_ms + dt, true).unwrap()
    }
}

pub fn arb_segment() -> impl Strategy<Value = Segment> {
    let base = epoch_ms("06:00:00");
    (
        prop::sample::select(vec![
            ActivityLabel::OnFoot,
            ActivityLabel::Bicycle,
            ActivityLabel::Vehicle,
            ActivityLabel::Unknown,
            ActivityLabel::Still,
            ActivityLabel::Metro,
            ActivityLabel::Bus,
            ActivityLabel::Tram,
            ActivityLabel::Train,
        ]),
        prop::collection::vec(arb_sample(base), 1..8),
        0.0f64..50_000.0,
        0i64..20_000,
        0.0f64..120.0,
        "[A-Z][0-9]{1,2}",
    )
        .prop_map(|(activity, mut points, distance, duration, speed, line)| {
            points.sort_by_key(|p| p.timestamp_ms);
            let still = activity == ActivityLabel::Still;
            let first = points[0];
            let last = *points.last().unwrap();
            if still {
                points.truncate(1);
            }
            Segment::new(SegmentParts {
                activity,
                first_location: first,
                last_location: last,
                total_distance: if still { 0.0 } else { distance },
                total_duration: duration,
                average_speed: if still { 0.0 } else { speed },
                line: activity.is_transit().then_some(line),
                location_points: points,
            })
            .unwrap()
        })
}

pub fn arb_trip() -> impl Strategy<Value = ScheduleTrip> {
    (
        prop::bool::ANY,
        (41.38f64..41.40, 2.15f64..2.17),
        (41.38f64..41.40, 2.15f64..2.17),
        0i64..2000,
        1i64..2000,
    )
        .prop_map(|(tram, o, d, dep, len)| {
            let vt = if tram { VehicleType::Tram } else { VehicleType::Bus };
            ScheduleTrip::new(vt, "X1", o, d, 10_000 + dep, 10_000 + dep + len).unwrap()
        })
}
