//! Building description: materials, constructions, zones, surfaces and the
//! hydronic panel layout.

pub mod config;
mod panels;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{BuildingConfig, Location, PipeLengths, PlantParams, SimulationParams};
pub use panels::{resolve_panels, Branch, Circuit, PanelSystem};
pub use validate::validate;

use crate::error::{Error, Result};
use crate::metrics::{FactorSet, TariffSchedule};

/// Interior film resistance used to split a glazing U-value, m²K/W.
pub const GLAZING_INSIDE_FILM: f64 = 0.13;
/// Exterior film resistance used to split a glazing U-value, m²K/W.
pub const GLAZING_OUTSIDE_FILM: f64 = 0.04;

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialLayer {
    pub name: String,
    /// m
    pub thickness: f64,
    /// W/(m·K)
    pub conductivity: f64,
    /// kg/m³
    pub density: f64,
    /// J/(kg·K)
    pub specific_heat: f64,
}

impl MaterialLayer {
    pub fn resistance(&self) -> f64 {
        self.thickness / self.conductivity
    }
}

/// Massless window descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Glazing {
    pub u_value: f64,
    pub solar_heat_gain_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub name: String,
    /// Outside to inside. Empty for glazing.
    pub layers: Vec<MaterialLayer>,
    /// m²K/W
    pub inside_film_resistance: f64,
    /// m²K/W
    pub outside_film_resistance: f64,
    pub panel_layers: BTreeMap<PanelSystemKind, usize>,
    pub glazing: Option<Glazing>,
}

impl Construction {
    pub fn layered(
        name: impl Into<String>,
        layers: Vec<MaterialLayer>,
        inside_film_resistance: f64,
        outside_film_resistance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            layers,
            inside_film_resistance,
            outside_film_resistance,
            panel_layers: BTreeMap::new(),
            glazing: None,
        }
    }

    pub fn glazing(name: impl Into<String>, u_value: f64, shgc: f64) -> Self {
        Self {
            name: name.into(),
            layers: Vec::new(),
            inside_film_resistance: GLAZING_INSIDE_FILM,
            outside_film_resistance: GLAZING_OUTSIDE_FILM,
            panel_layers: BTreeMap::new(),
            glazing: Some(Glazing {
                u_value,
                solar_heat_gain_coefficient: shgc,
            }),
        }
    }

    pub fn is_glazing(&self) -> bool {
        self.glazing.is_some()
    }
}

/// Overall heat transfer coefficient including both surface films, W/(m²K).
///
/// Glazing returns its stored U-value unchanged.
pub fn compute_u_value(c: &Construction) -> f64 {
    if let Some(g) = c.glazing {
        return g.u_value;
    }
    let layers: f64 = c.layers.iter().map(MaterialLayer::resistance).sum();
    1.0 / (c.outside_film_resistance + layers + c.inside_film_resistance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "floor")]
    Floor,
    #[serde(rename = "ceiling")]
    Ceiling,
    #[serde(rename = "wall-N")]
    WallNorth,
    #[serde(rename = "wall-E")]
    WallEast,
    #[serde(rename = "wall-S")]
    WallSouth,
    #[serde(rename = "wall-W")]
    WallWest,
    #[serde(rename = "internal")]
    Internal,
}

impl Orientation {
    pub fn is_wall(self) -> bool {
        matches!(
            self,
            Orientation::WallNorth
                | Orientation::WallEast
                | Orientation::WallSouth
                | Orientation::WallWest
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Outdoor,
    Ground,
    AdjacentZone(usize),
    Adiabatic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub id: String,
    /// Index of the zone the inside face belongs to.
    pub zone: usize,
    /// m²
    pub area: f64,
    pub orientation: Orientation,
    pub construction: usize,
    pub boundary: Boundary,
    pub emissivity: f64,
    /// Layer hosting embedded pipes for the active panel system.
    pub panel_layer_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: String,
    pub name: String,
    /// m²
    pub floor_area: f64,
    /// m³
    pub air_volume: f64,
    /// °C
    pub setpoint: f64,
    /// 1/h
    pub infiltration_ach: f64,
    /// W
    pub internal_gains: f64,
    /// Surfaces whose inside face belongs to this zone.
    pub surfaces: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PanelSystemKind {
    #[serde(rename = "floor")]
    Floor,
    #[serde(rename = "wall")]
    Wall,
    #[serde(rename = "ceiling")]
    Ceiling,
    #[serde(rename = "floor-ceiling")]
    FloorCeiling,
}

impl PanelSystemKind {
    pub const ALL: [PanelSystemKind; 4] = [
        PanelSystemKind::Floor,
        PanelSystemKind::Wall,
        PanelSystemKind::Ceiling,
        PanelSystemKind::FloorCeiling,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PanelSystemKind::Floor => "floor",
            PanelSystemKind::Wall => "wall",
            PanelSystemKind::Ceiling => "ceiling",
            PanelSystemKind::FloorCeiling => "floor-ceiling",
        }
    }
}

impl fmt::Display for PanelSystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PanelSystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PanelSystemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown panel system '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildingModel {
    pub zones: Vec<Zone>,
    pub surfaces: Vec<Surface>,
    pub constructions: Vec<Construction>,
    pub panel_system: PanelSystem,
    pub pipe_lengths: PipeLengths,
    pub plant: PlantParams,
    pub tariffs: TariffSchedule,
    pub factors: FactorSet,
    pub simulation: SimulationParams,
}

impl BuildingModel {
    /// Resolve names into indices and place panels. Does not validate.
    pub fn from_config(cfg: &BuildingConfig) -> Result<Self> {
        let materials: HashMap<&str, &config::MaterialDef> = cfg
            .materials
            .iter()
            .map(|m| (m.name.as_str(), m))
            .collect();

        let mut constructions = Vec::with_capacity(cfg.constructions.len());
        for def in &cfg.constructions {
            let mut layers = Vec::with_capacity(def.layers.len());
            for layer in &def.layers {
                let m = materials.get(layer.material.as_str()).ok_or_else(|| {
                    Error::UnknownReference {
                        kind: "material",
                        name: layer.material.clone(),
                        referrer: format!("construction '{}'", def.name),
                    }
                })?;
                layers.push(MaterialLayer {
                    name: m.name.clone(),
                    thickness: layer.thickness,
                    conductivity: m.conductivity,
                    density: m.density,
                    specific_heat: m.specific_heat,
                });
            }
            let glazing = def.glazing.as_ref().map(|g| Glazing {
                u_value: g.u_value,
                solar_heat_gain_coefficient: g.solar_heat_gain_coefficient,
            });
            if glazing.is_some() && !layers.is_empty() {
                return Err(Error::Schema {
                    path: format!("constructions.{}", def.name),
                    message: "glazing constructions cannot also declare layers".into(),
                });
            }
            constructions.push(Construction {
                name: def.name.clone(),
                layers,
                inside_film_resistance: def.inside_film_resistance,
                outside_film_resistance: def.outside_film_resistance,
                panel_layers: def.panel_layers.clone(),
                glazing,
            });
        }
        let construction_index: HashMap<&str, usize> = constructions
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.as_str(), i))
            .collect();

        let mut zones: Vec<Zone> = cfg
            .zones
            .iter()
            .map(|z| Zone {
                id: z.id.clone(),
                name: z.name.clone(),
                floor_area: z.floor_area,
                air_volume: z.air_volume,
                setpoint: z.setpoint,
                infiltration_ach: z.infiltration_ach,
                internal_gains: z.internal_gains,
                surfaces: Vec::new(),
            })
            .collect();
        let zone_index: HashMap<&str, usize> = cfg
            .zones
            .iter()
            .enumerate()
            .map(|(i, z)| (z.id.as_str(), i))
            .collect();

        let mut surfaces = Vec::with_capacity(cfg.surfaces.len());
        for (i, def) in cfg.surfaces.iter().enumerate() {
            let referrer = || format!("surface '{}'", def.id);
            let zone = *zone_index
                .get(def.zone.as_str())
                .ok_or_else(|| Error::UnknownReference {
                    kind: "zone",
                    name: def.zone.clone(),
                    referrer: referrer(),
                })?;
            let construction = *construction_index
                .get(def.construction.as_str())
                .ok_or_else(|| Error::UnknownReference {
                    kind: "construction",
                    name: def.construction.clone(),
                    referrer: referrer(),
                })?;
            let boundary = match &def.boundary {
                config::BoundaryDef::Outdoor => Boundary::Outdoor,
                config::BoundaryDef::Ground => Boundary::Ground,
                config::BoundaryDef::Adiabatic => Boundary::Adiabatic,
                config::BoundaryDef::AdjacentZone(id) => Boundary::AdjacentZone(
                    *zone_index
                        .get(id.as_str())
                        .ok_or_else(|| Error::UnknownReference {
                            kind: "zone",
                            name: id.clone(),
                            referrer: referrer(),
                        })?,
                ),
            };
            zones[zone].surfaces.push(i);
            surfaces.push(Surface {
                id: def.id.clone(),
                zone,
                area: def.area,
                orientation: def.orientation,
                construction,
                boundary,
                emissivity: def.emissivity,
                panel_layer_index: None,
            });
        }

        let mut model = BuildingModel {
            zones,
            surfaces,
            constructions,
            panel_system: PanelSystem::empty(cfg.panel_system.kind),
            pipe_lengths: cfg.panel_system.pipe_lengths,
            plant: cfg.plant.clone(),
            tariffs: cfg.tariffs.schedule.clone(),
            factors: cfg.tariffs.factors,
            simulation: cfg.simulation.clone(),
        };
        model.place_panels(cfg.panel_system.kind)?;
        Ok(model)
    }

    /// Copy of this model with a different panel system installed.
    pub fn with_panel_system(&self, kind: PanelSystemKind) -> Result<Self> {
        let mut m = self.clone();
        m.place_panels(kind)?;
        Ok(m)
    }

    fn place_panels(&mut self, kind: PanelSystemKind) -> Result<()> {
        let system = resolve_panels(self, kind, self.pipe_lengths.get(kind))?;
        for s in &mut self.surfaces {
            s.panel_layer_index = None;
        }
        for circuit in &system.circuits {
            for b in &circuit.branches {
                self.surfaces[b.surface].panel_layer_index = Some(b.layer);
            }
        }
        self.panel_system = system;
        Ok(())
    }

    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.id == id)
    }

    pub fn surface_index(&self, id: &str) -> Option<usize> {
        self.surfaces.iter().position(|s| s.id == id)
    }

    pub fn construction_of(&self, s: &Surface) -> &Construction {
        &self.constructions[s.construction]
    }

    /// Surfaces with a face in zone `z`: the zone's own surfaces plus the
    /// back faces of surfaces whose outside is adjacent to it.
    pub fn enclosure(&self, z: usize) -> Vec<(usize, Face)> {
        let mut faces: Vec<(usize, Face)> = self.zones[z]
            .surfaces
            .iter()
            .map(|&s| (s, Face::Inside))
            .collect();
        for (i, s) in self.surfaces.iter().enumerate() {
            if s.boundary == Boundary::AdjacentZone(z) {
                faces.push((i, Face::Outside));
            }
        }
        faces
    }

    /// Opaque exterior wall area plus window area, m².
    pub fn gross_exterior_wall_area(&self) -> f64 {
        self.surfaces
            .iter()
            .filter(|s| s.orientation.is_wall() && s.boundary == Boundary::Outdoor)
            .map(|s| s.area)
            .sum()
    }

    pub fn window_area(&self) -> f64 {
        self.surfaces
            .iter()
            .filter(|s| self.constructions[s.construction].is_glazing())
            .map(|s| s.area)
            .sum()
    }

    pub fn living_area(&self) -> f64 {
        self.zones.iter().map(|z| z.floor_area).sum()
    }

    /// Infiltration conductance of a zone, W/K.
    pub fn infiltration_conductance(&self, z: usize) -> f64 {
        let zone = &self.zones[z];
        AIR_DENSITY * AIR_SPECIFIC_HEAT * zone.air_volume * zone.infiltration_ach / 3600.0
    }

    /// Steady transmission plus infiltration loss of a zone at the design
    /// outdoor temperature, W. Interzone and adiabatic surfaces carry no loss.
    pub fn static_design_load(&self, z: usize) -> f64 {
        let zone = &self.zones[z];
        let t_out = self.plant.design_outdoor_temperature;
        let t_ground = self.plant.ground_temperature;
        let mut load = self.infiltration_conductance(z) * (zone.setpoint - t_out);
        for &si in &zone.surfaces {
            let s = &self.surfaces[si];
            let u = compute_u_value(self.construction_of(s));
            load += match s.boundary {
                Boundary::Outdoor => u * s.area * (zone.setpoint - t_out),
                Boundary::Ground => u * s.area * (zone.setpoint - t_ground),
                _ => 0.0,
            };
        }
        load.max(0.0)
    }
}

/// Which face of a surface is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Inside,
    Outside,
}

pub const AIR_DENSITY: f64 = 1.2;
pub const AIR_SPECIFIC_HEAT: f64 = 1005.0;

/// Parse a configuration document, reporting the JSON path of any schema error.
pub fn parse_config(doc: &str) -> Result<BuildingConfig> {
    let de = &mut serde_json::Deserializer::from_str(doc);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

/// Parse, link and validate a building configuration document.
pub fn load_building(doc: &str) -> Result<BuildingModel> {
    let cfg = parse_config(doc)?;
    let model = BuildingModel::from_config(&cfg)?;
    let diagnostics = validate(&model);
    if !diagnostics.is_empty() {
        return Err(Error::Validation(diagnostics));
    }
    Ok(model)
}

pub fn load_building_file(path: impl AsRef<Path>) -> Result<BuildingModel> {
    let path = path.as_ref();
    let doc = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_building(&doc)
}
