use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::metrics::DailyTotals;

pub const CSV_HEADER: &str = "date,kcal,co2_g";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Entry {
    kcal: f64,
    co2_g: f64,
}

/// Per-day calorie and CO₂ totals, persisted as a JSON map keyed by ISO date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DailyTotalsStore {
    days: BTreeMap<NaiveDate, Entry>,
}

impl DailyTotalsStore {
    /// An empty store when the file does not exist yet.
    pub fn load(path: &Path) -> Result<Self, StoreError> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text).map_err(|source| StoreError::Json {
                path: path.display().to_string(),
                source,
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(StoreError::io(path, e)),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let text = serde_json::to_string_pretty(self).expect("totals always serialize");
        std::fs::write(path, text).map_err(|e| StoreError::io(path, e))
    }

    /// Replaces the totals of `date`.
    pub fn set(&mut self, date: NaiveDate, totals: DailyTotals) {
        self.days.insert(
            date,
            Entry {
                kcal: totals.kcal,
                co2_g: totals.co2_g,
            },
        );
    }

    pub fn get(&self, date: NaiveDate) -> Option<DailyTotals> {
        self.days.get(&date).map(|e| DailyTotals {
            kcal: e.kcal,
            co2_g: e.co2_g,
        })
    }

    /// Header plus one `date,kcal,co2_g` row per day, oldest first.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for (date, e) in &self.days {
            out.push_str(&format!("{},{},{}\n", date.format("%d-%m-%Y"), e.kcal, e.co2_g));
        }
        out
    }
}
