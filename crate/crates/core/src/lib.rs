//! Transport-mode inference from location and activity traces.
//!
//! Raw location fixes and coarse recognizer labels go through the
//! [`pipeline`] state machine, which emits merged [`model::Segment`]s.
//! [`transit`] then relabels vehicle segments as bus, tram or train, and
//! recognizes metro rides from underground blackouts. [`metrics`] turns
//! segments into calories and CO₂, [`store`] reads and writes the daily
//! segment files, and [`simulate`] produces synthetic traces.

pub mod activity;
pub mod geo;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod simulate;
pub mod store;
pub mod transit;

pub use model::{ActivityLabel, LocationSample, PipelineConfig, Segment, TransitNetwork};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/windows.md")]
    mod windows {}
    #[doc = include_str!("../../../book/src/underground.md")]
    mod underground {}
    #[doc = include_str!("../../../book/src/schedules.md")]
    mod schedules {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
}
