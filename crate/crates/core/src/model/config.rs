//! Serde mirror of the building configuration document.
//!
//! The document is JSON with exactly eight top-level keys; anything not
//! listed here is rejected. The versioned JSON Schema lives in
//! `schema/building-config.v1.json` at the repository root.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Orientation, PanelSystemKind};
use crate::metrics::{FactorSet, TariffSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingConfig {
    pub materials: Vec<MaterialDef>,
    pub constructions: Vec<ConstructionDef>,
    pub zones: Vec<ZoneDef>,
    pub surfaces: Vec<SurfaceDef>,
    pub panel_system: PanelSystemDef,
    #[serde(default)]
    pub plant: PlantParams,
    #[serde(default)]
    pub tariffs: TariffsDef,
    #[serde(default)]
    pub simulation: SimulationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDef {
    pub name: String,
    /// W/(m·K)
    pub conductivity: f64,
    /// kg/m³
    pub density: f64,
    /// J/(kg·K)
    pub specific_heat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDef {
    pub material: String,
    /// m
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlazingDef {
    /// Whole-window U-value including surface films, W/(m²K).
    pub u_value: f64,
    #[serde(default = "default_shgc")]
    pub solar_heat_gain_coefficient: f64,
}

fn default_shgc() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionDef {
    pub name: String,
    /// Outside to inside.
    #[serde(default)]
    pub layers: Vec<LayerDef>,
    #[serde(default = "default_inside_film")]
    pub inside_film_resistance: f64,
    #[serde(default = "default_outside_film")]
    pub outside_film_resistance: f64,
    /// Layer whose outside-facing boundary carries the pipes, per panel system.
    #[serde(default)]
    pub panel_layers: BTreeMap<PanelSystemKind, usize>,
    #[serde(default)]
    pub glazing: Option<GlazingDef>,
}

fn default_inside_film() -> f64 {
    0.13
}

fn default_outside_film() -> f64 {
    0.04
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneDef {
    pub id: String,
    pub name: String,
    /// m²
    pub floor_area: f64,
    /// m³
    pub air_volume: f64,
    #[serde(default = "default_setpoint")]
    pub setpoint: f64,
    #[serde(default = "default_ach")]
    pub infiltration_ach: f64,
    /// Convective internal gains, W.
    #[serde(default)]
    pub internal_gains: f64,
}

fn default_setpoint() -> f64 {
    20.0
}

fn default_ach() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryDef {
    Outdoor,
    Ground,
    Adiabatic,
    AdjacentZone(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDef {
    pub id: String,
    pub zone: String,
    /// m²
    pub area: f64,
    pub orientation: Orientation,
    pub construction: String,
    pub boundary: BoundaryDef,
    #[serde(default = "default_emissivity")]
    pub emissivity: f64,
}

fn default_emissivity() -> f64 {
    0.9
}

/// Installed pipe length per panel system, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipeLengths {
    pub floor: f64,
    pub wall: f64,
    pub ceiling: f64,
    #[serde(rename = "floor-ceiling")]
    pub floor_ceiling: f64,
}

impl Default for PipeLengths {
    fn default() -> Self {
        Self {
            floor: 1267.0,
            wall: 1007.0,
            ceiling: 1068.0,
            floor_ceiling: 634.0,
        }
    }
}

impl PipeLengths {
    pub fn get(&self, kind: PanelSystemKind) -> f64 {
        match kind {
            PanelSystemKind::Floor => self.floor,
            PanelSystemKind::Wall => self.wall,
            PanelSystemKind::Ceiling => self.ceiling,
            PanelSystemKind::FloorCeiling => self.floor_ceiling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelSystemDef {
    pub kind: PanelSystemKind,
    #[serde(default)]
    pub pipe_lengths: PipeLengths,
}

/// Hydronic plant parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// Panel supply water temperature, °C.
    pub inlet_temperature: f64,
    /// Boiler efficiency on a lower-heating-value basis.
    pub boiler_efficiency: f64,
    /// Pipe-to-slab conductance per metre of pipe, W/(m·K).
    pub pipe_conductance: f64,
    /// Supply/return difference at design load, K. Sets the circuit flows.
    pub design_delta_t: f64,
    /// J/(kg·K)
    pub water_specific_heat: f64,
    /// kg/m³
    pub water_density: f64,
    /// Circulator pressure rise at design flow, Pa.
    pub pump_head: f64,
    /// Wire-to-water efficiency of the circulator.
    pub pump_efficiency: f64,
    /// Temperature of the soil node under ground floors, °C.
    pub ground_temperature: f64,
    /// Outdoor temperature of the sizing day, °C.
    pub design_outdoor_temperature: f64,
    /// Boiler output limit applied during season runs, kW. Sized when absent.
    pub nominal_power_kw: Option<f64>,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            inlet_temperature: 37.0,
            boiler_efficiency: 0.90,
            pipe_conductance: 7.0,
            design_delta_t: 7.0,
            water_specific_heat: 4186.0,
            water_density: 1000.0,
            pump_head: 5_000.0,
            pump_efficiency: 0.40,
            ground_temperature: 10.0,
            design_outdoor_temperature: -15.0,
            nominal_power_kw: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TariffsDef {
    pub schedule: TariffSchedule,
    pub factors: FactorSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Location {
    /// Degrees north.
    pub latitude: f64,
    /// Degrees east.
    pub longitude: f64,
    /// m above sea level.
    pub elevation: f64,
}

impl Default for Location {
    fn default() -> Self {
        // Kragujevac
        Self {
            latitude: 44.0,
            longitude: 20.0 + 55.0 / 60.0,
            elevation: 209.0,
        }
    }
}

/// Interior convection coefficients, W/(m²K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvectionCoefficients {
    /// Warm floor or cool ceiling.
    pub upward: f64,
    /// Warm ceiling or cool floor.
    pub downward: f64,
    pub wall: f64,
    pub window: f64,
    /// Outdoor-side combined film used when a construction has none, W/(m²K).
    pub exterior: f64,
}

impl Default for ConvectionCoefficients {
    fn default() -> Self {
        Self {
            upward: 4.0,
            downward: 1.0,
            wall: 3.1,
            window: 3.6,
            exterior: 25.0,
        }
    }
}

/// Vertical-to-horizontal irradiance ratio per facade orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrientationFactors {
    pub north: f64,
    pub east: f64,
    pub south: f64,
    pub west: f64,
}

impl Default for OrientationFactors {
    fn default() -> Self {
        Self {
            north: 0.2,
            east: 0.4,
            south: 0.6,
            west: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationParams {
    /// s
    pub timestep: f64,
    /// Target control-volume thickness, m.
    pub node_size: f64,
    /// Thermostat half band, K.
    pub deadband: f64,
    pub location: Location,
    pub convection: ConvectionCoefficients,
    pub solar_orientation_factors: OrientationFactors,
    /// Check the aggregate areas and pipe lengths of the shipped reference house.
    pub check_reference_aggregates: bool,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            timestep: 600.0,
            node_size: 0.01,
            deadband: 0.5,
            location: Location::default(),
            convection: ConvectionCoefficients::default(),
            solar_orientation_factors: OrientationFactors::default(),
            check_reference_aggregates: false,
        }
    }
}
