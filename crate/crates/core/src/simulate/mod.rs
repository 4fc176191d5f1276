//! Transient simulation of the building and its panel heating.

pub mod conduction;
pub mod engine;
pub mod panel;
pub mod radiation;
mod season;
pub mod zone;

pub use conduction::{conduction_step, discretize, FaceCondition, NodeGrid, Tridiagonal};
pub use engine::{Control, Engine, StepFlows, StepInputs};
pub use panel::{effectiveness, panel_exchange, WaterLoop};
pub use radiation::{radiant_exchange, star_coefficients, RadiantFace};
pub use season::{run_heating_season, SeasonOptions};
pub use zone::{thermostat, zone_air_step, AirBalance};

use serde::{Deserialize, Serialize};

use crate::model::{Orientation, PanelSystemKind};

/// Totals of one calendar month of a season run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyTotals {
    pub year: i32,
    pub month: u32,
    /// Heat delivered by the panels, J.
    pub delivered: f64,
    /// J
    pub gas_energy: f64,
    /// J
    pub electricity: f64,
    /// J
    pub exergy: f64,
}

/// Season sums of every heat flow crossing the building boundary, J.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub delivered: f64,
    pub solar: f64,
    pub gains: f64,
    pub envelope_loss: f64,
    pub infiltration_loss: f64,
    pub storage_change: f64,
}

impl EnergyBalance {
    pub fn add(&mut self, f: &StepFlows, dt: f64) {
        self.delivered += f.delivered * dt;
        self.solar += f.solar * dt;
        self.gains += f.gains * dt;
        self.envelope_loss += f.envelope_loss * dt;
        self.infiltration_loss += f.infiltration_loss * dt;
        self.storage_change += f.storage_change;
    }

    /// Sources minus sinks minus storage, J.
    pub fn residual(&self) -> f64 {
        self.delivered + self.solar + self.gains
            - self.envelope_loss
            - self.infiltration_loss
            - self.storage_change
    }

    /// Residual as a fraction of delivered heat.
    pub fn relative_residual(&self) -> f64 {
        if self.delivered > 0.0 {
            self.residual().abs() / self.delivered
        } else {
            self.residual().abs()
        }
    }
}

/// Mean January temperature of a zone's air.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneMean {
    pub zone: String,
    /// °C
    pub air: f64,
    /// Heat delivered to the zone over the season, J.
    pub delivered: f64,
}

/// Mean January temperature of a surface's inside face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMean {
    pub surface: String,
    pub zone: String,
    pub orientation: Orientation,
    /// Opaque wall facing the outdoor air.
    pub exterior_wall: bool,
    /// °C
    pub inside_face: f64,
}

/// Outcome of a heating season run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonResult {
    pub system: PanelSystemKind,
    /// s
    pub timestep: f64,
    pub steps: usize,
    /// Heat delivered by the panels, J.
    pub delivered: f64,
    /// J
    pub gas_energy: f64,
    /// J
    pub electricity: f64,
    /// J
    pub exergy: f64,
    /// Time the pump ran, s.
    pub pump_runtime: f64,
    /// Pump electrical power while running, W.
    pub pump_power: f64,
    /// Highest step-mean plant output, W.
    pub peak_load: f64,
    /// Boiler output limit used during the run, W.
    pub boiler_capacity: Option<f64>,
    pub monthly: Vec<MonthlyTotals>,
    pub balance: EnergyBalance,
    pub zones: Vec<ZoneMean>,
    pub surfaces: Vec<SurfaceMean>,
    /// Steps in which a running circuit returned water outside the range
    /// between its coolest slab and its supply.
    pub return_violations: usize,
}

impl SeasonResult {
    /// J
    pub fn january_exergy(&self) -> f64 {
        self.monthly.iter().filter(|m| m.month == 1).map(|m| m.exergy).sum()
    }

    /// Area-unweighted mean of the zones' January air temperatures, °C.
    pub fn january_mean_air(&self) -> f64 {
        self.zones.iter().map(|z| z.air).sum::<f64>() / self.zones.len().max(1) as f64
    }
}
