//! Multi-zone thermal simulation of low-temperature hydronic radiant panel
//! heating, with season energy, exergy, CO₂ and cost accounting.
//!
//! The usual pipeline is [`model::load_building`] → [`plant::size_boiler`] →
//! [`simulate::run_heating_season`] → [`metrics::MetricsReport::from_season`].

// `!(x > 0.0)` is used on purpose so NaN fails validation; index loops walk
// several parallel arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod metrics;
pub mod model;
pub mod plant;
pub mod reference;
pub mod simulate;
pub mod weather;

pub use error::{Diagnostic, Error, Result};
pub use model::{BuildingModel, PanelSystemKind};
