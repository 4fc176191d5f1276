//! Runs one or more panel systems through sizing, the season and the metrics.

use std::fs;
use std::path::{Path, PathBuf};

use panelsim::metrics::{CostMode, MetricsReport};
use panelsim::model::load_building_file;
use panelsim::plant::size_boiler;
use panelsim::simulate::{run_heating_season, SeasonOptions};
use panelsim::weather::{load_weather_csv, synthesize_climate, ClimateParams, DesignDay, WeatherSeries};
use panelsim::{BuildingModel, PanelSystemKind};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::report::{ComparisonReport, SurfaceTemperature, SystemReport, ZoneTemperature};

#[derive(Debug, Clone, PartialEq)]
pub enum WeatherSource {
    File(PathBuf),
    /// One year of synthetic weather from this seed.
    Synthetic(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// Building configuration document.
    pub config: PathBuf,
    pub weather: WeatherSource,
    pub systems: Vec<PanelSystemKind>,
    pub out: PathBuf,
    /// Overrides the configured time step, s.
    pub timestep: Option<f64>,
    pub cost_mode: CostMode,
    /// Run the systems on a thread pool.
    pub parallel: bool,
}

impl ScenarioSpec {
    fn check(&self) -> Result<()> {
        if self.systems.is_empty() {
            return Err(CliError::Scenario("no panel system selected".into()));
        }
        if let Some(dt) = self.timestep {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(CliError::Scenario(format!("time step must be positive, got {dt}")));
            }
        }
        Ok(())
    }
}

/// Simulate every selected system and save the report into the output
/// directory. The directory is checked for writability before any work.
pub fn run_scenarios(spec: &ScenarioSpec) -> Result<ComparisonReport> {
    spec.check()?;
    ensure_writable(&spec.out)?;
    let base = load_building_file(&spec.config).map_err(CliError::core("building configuration"))?;
    let (weather, label) = match &spec.weather {
        WeatherSource::File(p) => (
            load_weather_csv(p).map_err(CliError::core("weather"))?,
            p.display().to_string(),
        ),
        WeatherSource::Synthetic(seed) => (
            synthesize_climate(*seed, &ClimateParams::default()).map_err(CliError::core("weather"))?,
            format!("synthetic seed {seed}"),
        ),
    };

    let run = |&kind: &PanelSystemKind| run_system(&base, &weather, kind, spec);
    let systems = if spec.parallel {
        spec.systems.par_iter().map(run).collect::<Result<Vec<_>>>()?
    } else {
        spec.systems.iter().map(run).collect::<Result<Vec<_>>>()?
    };

    let report = ComparisonReport {
        weather: label,
        cost_mode: spec.cost_mode,
        systems,
    };
    report.save(&spec.out)?;
    Ok(report)
}

fn run_system(
    base: &BuildingModel,
    weather: &WeatherSeries,
    kind: PanelSystemKind,
    spec: &ScenarioSpec,
) -> Result<SystemReport> {
    let ctx = || format!("{kind} system");
    let mut model = base.with_panel_system(kind).map_err(CliError::core(ctx()))?;
    if let Some(dt) = spec.timestep {
        model.simulation.timestep = dt;
    }
    let boiler_kw = match model.plant.nominal_power_kw {
        Some(kw) => kw,
        None => {
            let day = DesignDay::new(model.plant.design_outdoor_temperature);
            size_boiler(&model, &day).map_err(CliError::core(format!("sizing the {kind} boiler")))?
        }
    };
    let opts = SeasonOptions {
        timestep: model.simulation.timestep,
        boiler_capacity: Some(boiler_kw * 1000.0),
    };
    let season = run_heating_season(&model, weather, &opts).map_err(CliError::core(ctx()))?;
    let metrics = MetricsReport::from_season(&season, &model.factors, &model.tariffs, spec.cost_mode)
        .map_err(CliError::core(ctx()))?;

    let zones = season
        .zones
        .iter()
        .zip(&model.zones)
        .map(|(z, def)| ZoneTemperature {
            zone: z.zone.clone(),
            setpoint: def.setpoint,
            air: z.air,
        })
        .collect();
    let surfaces = season
        .surfaces
        .iter()
        .map(|s| SurfaceTemperature {
            surface: s.surface.clone(),
            zone: s.zone.clone(),
            exterior_wall: s.exterior_wall,
            inside_face: s.inside_face,
        })
        .collect();

    Ok(SystemReport {
        system: kind,
        timestep: season.timestep,
        delivered_gj: season.delivered / 1e9,
        gas_gj: metrics.gas_gj,
        electricity_gj: metrics.electricity_gj,
        primary_energy_gj: metrics.primary_energy_gj,
        boiler_kw,
        co2_kg: metrics.co2_kg,
        cost: metrics.cost,
        january_exergy_gj: metrics.january_exergy_gj,
        balance_residual: season.balance.relative_residual(),
        zones,
        surfaces,
    })
}

/// Create `dir` if needed and prove a file can be written in it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let probe = dir.join(".panelsim-write-check");
    fs::write(&probe, b"").map_err(CliError::io(&probe))?;
    fs::remove_file(&probe).map_err(CliError::io(&probe))
}
