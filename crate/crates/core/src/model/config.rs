use serde::{Deserialize, Serialize};

use super::ModelError;

/// Tunable constants of the whole pipeline.
///
/// A JSON config file may set any subset of these fields by name; missing
/// fields keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Length of one aggregation window (segment cycle).
    pub window_seconds: u32,
    /// Location cadence with the balanced-power provider.
    pub location_interval_seconds: u32,
    /// Location cadence while GPS is on.
    pub gps_interval_seconds: u32,
    pub activity_interval_seconds: u32,
    /// Fixes strictly better than this are "good".
    pub good_accuracy_m: f64,
    /// Fixes worse than this (with Wi-Fi on) count as underground.
    pub bad_accuracy_m: f64,
    /// On-foot windows that end closer than this to where they began are still.
    pub block_radius_m: f64,
    /// Minimum window speed to open a vehicle segment right after on-foot.
    pub max_on_foot_speed_kmh: f64,
    pub station_search_radius_m: f64,
    pub schedule_match_radius_m: f64,
    pub departure_margin_s: u32,
    pub arrival_margin_s: u32,
    pub train_station_radius_m: f64,
    /// Window closes GPS stays on after each enable.
    pub gps_max_windows: u32,
    pub badloc_trigger: u32,
    pub reploc_trigger: u32,
    pub earth_radius_m: f64,
    pub co2_g_per_km: f64,
    pub met_slow: f64,
    pub met_fast: f64,
    pub met_speed_threshold_kmh: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_seconds: 120,
            location_interval_seconds: 20,
            gps_interval_seconds: 5,
            activity_interval_seconds: 5,
            good_accuracy_m: 200.0,
            bad_accuracy_m: 1000.0,
            block_radius_m: 100.0,
            max_on_foot_speed_kmh: 10.0,
            station_search_radius_m: 150.0,
            schedule_match_radius_m: 200.0,
            departure_margin_s: 300,
            arrival_margin_s: 180,
            train_station_radius_m: 100.0,
            gps_max_windows: 2,
            badloc_trigger: 4,
            reploc_trigger: 2,
            earth_radius_m: 6_371_000.0,
            co2_g_per_km: 140.0,
            met_slow: 2.3,
            met_fast: 2.9,
            met_speed_threshold_kmh: 2.7,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let cfg: PipelineConfig = serde_json::from_str(text)
            .map_err(|e| ModelError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ints = [
            ("window_seconds", self.window_seconds),
            ("location_interval_seconds", self.location_interval_seconds),
            ("gps_interval_seconds", self.gps_interval_seconds),
            ("activity_interval_seconds", self.activity_interval_seconds),
            ("departure_margin_s", self.departure_margin_s),
            ("arrival_margin_s", self.arrival_margin_s),
            ("gps_max_windows", self.gps_max_windows),
            ("badloc_trigger", self.badloc_trigger),
            ("reploc_trigger", self.reploc_trigger),
        ];
        for (name, v) in ints {
            if v == 0 {
                return Err(ModelError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        let floats = [
            ("good_accuracy_m", self.good_accuracy_m),
            ("bad_accuracy_m", self.bad_accuracy_m),
            ("block_radius_m", self.block_radius_m),
            ("max_on_foot_speed_kmh", self.max_on_foot_speed_kmh),
            ("station_search_radius_m", self.station_search_radius_m),
            ("schedule_match_radius_m", self.schedule_match_radius_m),
            ("train_station_radius_m", self.train_station_radius_m),
            ("earth_radius_m", self.earth_radius_m),
            ("co2_g_per_km", self.co2_g_per_km),
            ("met_slow", self.met_slow),
            ("met_fast", self.met_fast),
            ("met_speed_threshold_kmh", self.met_speed_threshold_kmh),
        ];
        for (name, v) in floats {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.good_accuracy_m >= self.bad_accuracy_m {
            return Err(ModelError::InvalidConfig(
                "good_accuracy_m must be below bad_accuracy_m".into(),
            ));
        }
        Ok(())
    }
}
