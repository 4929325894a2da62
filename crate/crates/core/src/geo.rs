//! Distances, path lengths and speeds.
//!
//! Window statistics use an equirectangular approximation on a spherical
//! Earth. Traced metro routes use the WGS84 ellipsoidal distance, computed
//! in single precision the way handset location APIs report it.

use thiserror::Error;

use crate::model::LocationSample;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("a path needs at least one point")]
    EmptyPath,
    #[error("speed is undefined for a zero-length interval")]
    ZeroDuration,
}

/// Equirectangular distance in meters between two points given in degrees.
pub fn distance_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    distance_with_radius_m(lat1, lon1, lat2, lon2, EARTH_RADIUS_M)
}

pub fn distance_with_radius_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64, radius_m: f64) -> f64 {
    let (lat1, lon1) = (lat1.to_radians(), lon1.to_radians());
    let (lat2, lon2) = (lat2.to_radians(), lon2.to_radians());
    let x = (lon2 - lon1) * ((lat1 + lat2) / 2.0).cos();
    let y = lat1 - lat2;
    (x * x + y * y).sqrt() * radius_m
}

fn sample_distance(a: &LocationSample, b: &LocationSample) -> f64 {
    distance_m(a.latitude, a.longitude, b.latitude, b.longitude)
}

/// Sum of distances between consecutive points.
pub fn path_distance_m(points: &[LocationSample]) -> Result<f64, GeoError> {
    if points.is_empty() {
        return Err(GeoError::EmptyPath);
    }
    Ok(points.windows(2).map(|w| sample_distance(&w[0], &w[1])).sum())
}

/// Distance between the first and last point only.
pub fn block_distance_m(points: &[LocationSample]) -> Result<f64, GeoError> {
    match (points.first(), points.last()) {
        (Some(first), Some(last)) => Ok(sample_distance(first, last)),
        _ => Err(GeoError::EmptyPath),
    }
}

/// km/h from meters and seconds.
pub fn average_speed_kmh(distance_m: f64, duration_s: f64) -> Result<f64, GeoError> {
    if duration_s == 0.0 {
        return Err(GeoError::ZeroDuration);
    }
    Ok(distance_m * 3.6 / duration_s)
}

const WGS84_A: f64 = 6_378_137.0;
const WGS84_B: f64 = 6_356_752.314_2;
const VINCENTY_MAX_ITERS: usize = 20;

/// Ellipsoidal (WGS84, Vincenty inverse) distance in meters, rounded to
/// `f32`.
pub fn ellipsoidal_distance_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f32 {
    let (lat1, lon1) = (lat1.to_radians(), lon1.to_radians());
    let (lat2, lon2) = (lat2.to_radians(), lon2.to_radians());

    let f = (WGS84_A - WGS84_B) / WGS84_A;
    let a_sq_minus_b_sq_over_b_sq = (WGS84_A * WGS84_A - WGS84_B * WGS84_B) / (WGS84_B * WGS84_B);

    let l = lon2 - lon1;
    let u1 = ((1.0 - f) * lat1.tan()).atan();
    let u2 = ((1.0 - f) * lat2.tan()).atan();
    let (sin_u1, cos_u1) = u1.sin_cos();
    let (sin_u2, cos_u2) = u2.sin_cos();
    let cos_u1_cos_u2 = cos_u1 * cos_u2;
    let sin_u1_sin_u2 = sin_u1 * sin_u2;

    let mut a = 0.0;
    let mut sigma = 0.0;
    let mut delta_sigma = 0.0;
    let mut lambda = l;
    for _ in 0..VINCENTY_MAX_ITERS {
        let lambda_orig = lambda;
        let (sin_lambda, cos_lambda) = lambda.sin_cos();
        let t1 = cos_u2 * sin_lambda;
        let t2 = cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lambda;
        let sin_sq_sigma = t1 * t1 + t2 * t2;
        let sin_sigma = sin_sq_sigma.sqrt();
        let cos_sigma = sin_u1_sin_u2 + cos_u1_cos_u2 * cos_lambda;
        sigma = sin_sigma.atan2(cos_sigma);
        let sin_alpha = if sin_sigma == 0.0 { 0.0 } else { cos_u1_cos_u2 * sin_lambda / sin_sigma };
        let cos_sq_alpha = 1.0 - sin_alpha * sin_alpha;
        let cos_2sm = if cos_sq_alpha == 0.0 {
            0.0
        } else {
            cos_sigma - 2.0 * sin_u1_sin_u2 / cos_sq_alpha
        };

        let u_sq = cos_sq_alpha * a_sq_minus_b_sq_over_b_sq;
        a = 1.0 + (u_sq / 16384.0) * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)));
        let b = (u_sq / 1024.0) * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)));
        let c = (f / 16.0) * cos_sq_alpha * (4.0 + f * (4.0 - 3.0 * cos_sq_alpha));
        let cos_2sm_sq = cos_2sm * cos_2sm;
        delta_sigma = b
            * sin_sigma
            * (cos_2sm
                + (b / 4.0)
                    * (cos_sigma * (-1.0 + 2.0 * cos_2sm_sq)
                        - (b / 6.0)
                            * cos_2sm
                            * (-3.0 + 4.0 * sin_sigma * sin_sigma)
                            * (-3.0 + 4.0 * cos_2sm_sq)));

        lambda = l
            + (1.0 - c)
                * f
                * sin_alpha
                * (sigma + c * sin_sigma * (cos_2sm + c * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)));

        let delta = if lambda == 0.0 { 0.0 } else { (lambda - lambda_orig) / lambda };
        if delta.abs() < 1.0e-12 {
            break;
        }
    }
    (WGS84_B * a * (sigma - delta_sigma)) as f32
}

/// Length of a station-to-station polyline, accumulated in `f32` from
/// [`ellipsoidal_distance_m`] legs.
pub fn station_path_distance_m(points: &[(f64, f64)]) -> f64 {
    let total: f32 = points
        .windows(2)
        .map(|w| ellipsoidal_distance_m(w[0].0, w[0].1, w[1].0, w[1].1))
        .sum();
    f64::from(total)
}
