//! Per-system results of a comparison run.

use std::fs;
use std::path::Path;

use panelsim::metrics::{CostBreakdown, CostMode};
use panelsim::PanelSystemKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// File name of the serialized report inside an output directory.
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Human-readable weather source.
    pub weather: String,
    pub cost_mode: CostMode,
    /// One entry per simulated system, in the order requested.
    pub systems: Vec<SystemReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system: PanelSystemKind,
    /// s
    pub timestep: f64,
    /// Heat delivered by the panels, GJ.
    pub delivered_gj: f64,
    pub gas_gj: f64,
    pub electricity_gj: f64,
    pub primary_energy_gj: f64,
    pub boiler_kw: f64,
    pub co2_kg: f64,
    /// €
    pub cost: CostBreakdown,
    pub january_exergy_gj: f64,
    /// Season energy balance residual as a fraction of delivered heat.
    pub balance_residual: f64,
    pub zones: Vec<ZoneTemperature>,
    pub surfaces: Vec<SurfaceTemperature>,
}

/// Mean January air temperature of a zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneTemperature {
    pub zone: String,
    /// °C
    pub setpoint: f64,
    /// °C
    pub air: f64,
}

/// Mean January temperature of a surface's inside face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTemperature {
    pub surface: String,
    pub zone: String,
    /// Opaque wall facing the outdoor air.
    pub exterior_wall: bool,
    /// °C
    pub inside_face: f64,
}

impl ComparisonReport {
    pub fn system(&self, kind: PanelSystemKind) -> Option<&SystemReport> {
        self.systems.iter().find(|s| s.system == kind)
    }

    /// Write the report as JSON into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(REPORT_FILE);
        let doc = serde_json::to_string_pretty(self).map_err(|source| CliError::Json {
            path: path.clone(),
            source,
        })?;
        fs::write(&path, doc + "\n").map_err(CliError::io(&path))
    }

    /// Read a report written by [`ComparisonReport::save`].
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(REPORT_FILE);
        let doc = fs::read_to_string(&path).map_err(CliError::io(&path))?;
        serde_json::from_str(&doc).map_err(|source| CliError::Json { path, source })
    }
}
