//! Calories burned walking and CO₂ saved by riding transit instead of a car.

use crate::model::{ActivityLabel, PipelineConfig, Segment};

/// MET value for a walking speed.
pub fn met_for_speed(speed_kmh: f64, config: &PipelineConfig) -> f64 {
    if speed_kmh < config.met_speed_threshold_kmh {
        config.met_slow
    } else {
        config.met_fast
    }
}

/// Energy spent over `duration_s` at `speed_kmh`; 1 MET is 1 kcal per kg per hour.
pub fn calories_kcal(duration_s: f64, speed_kmh: f64, weight_kg: f64, config: &PipelineConfig) -> f64 {
    met_for_speed(speed_kmh, config) * weight_kg * duration_s / 3600.0
}

/// Car emissions avoided over `distance_m`.
pub fn co2_saved_g(distance_m: f64, config: &PipelineConfig) -> f64 {
    config.co2_g_per_km * distance_m / 1000.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DailyTotals {
    pub kcal: f64,
    pub co2_g: f64,
}

impl std::ops::Add for DailyTotals {
    type Output = DailyTotals;

    fn add(self, rhs: DailyTotals) -> DailyTotals {
        DailyTotals {
            kcal: self.kcal + rhs.kcal,
            co2_g: self.co2_g + rhs.co2_g,
        }
    }
}

/// Calories over on-foot segments and CO₂ over metro, bus, tram and train
/// segments. Vehicle and bicycle segments count towards neither.
pub fn daily_totals(segments: &[Segment], weight_kg: f64, config: &PipelineConfig) -> DailyTotals {
    segments.iter().fold(DailyTotals::default(), |acc, seg| {
        let one = match seg.activity() {
            ActivityLabel::OnFoot => DailyTotals {
                kcal: calories_kcal(seg.total_duration() as f64, seg.average_speed(), weight_kg, config),
                co2_g: 0.0,
            },
            a if a.is_transit() => DailyTotals {
                kcal: 0.0,
                co2_g: co2_saved_g(seg.total_distance(), config),
            },
            _ => DailyTotals::default(),
        };
        acc + one
    })
}
