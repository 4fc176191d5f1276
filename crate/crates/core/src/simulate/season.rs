//! Heating season driver.

use chrono::Datelike;

use super::engine::{Control, Engine, StepInputs};
use super::radiation::KELVIN;
use super::{EnergyBalance, MonthlyTotals, SeasonResult, SurfaceMean, ZoneMean};
use crate::error::{Error, Result};
use crate::metrics::carnot_factor;
use crate::model::{Boundary, BuildingModel, Face};
use crate::plant::{gas_energy, pump_electricity, Boiler, Pump};
use crate::weather::{heating_season_filter, WeatherSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonOptions {
    /// s; must divide the weather step.
    pub timestep: f64,
    /// Boiler output limit, W.
    pub boiler_capacity: Option<f64>,
}

impl SeasonOptions {
    pub fn from_model(model: &BuildingModel) -> Self {
        Self {
            timestep: model.simulation.timestep,
            boiler_capacity: model.plant.nominal_power_kw.map(|kw| kw * 1000.0),
        }
    }
}

/// Step the building through the heating season contained in `weather`.
///
/// Weather values are held constant over each record. The building starts
/// from the steady state for the first record with ideally controlled
/// supply temperatures; thermostats then switch each circuit at the fixed
/// supply temperature.
pub fn run_heating_season(
    model: &BuildingModel,
    weather: &WeatherSeries,
    opts: &SeasonOptions,
) -> Result<SeasonResult> {
    let season = heating_season_filter(weather)?;
    let dt = opts.timestep;
    let record_step = season.step() as f64;
    if !(dt > 0.0) {
        return Err(Error::Configuration(format!("time step must be positive, got {dt}")));
    }
    let substeps = (record_step / dt).round();
    if substeps < 1.0 || (substeps * dt - record_step).abs() > 1e-9 * record_step {
        return Err(Error::Configuration(format!(
            "time step {dt} s does not divide the weather step {record_step} s"
        )));
    }
    let substeps = substeps as usize;
    if let Some(cap) = opts.boiler_capacity {
        if !(cap > 0.0) {
            return Err(Error::Configuration(format!("boiler capacity must be positive, got {cap} W")));
        }
    }

    let plant = &model.plant;
    let boiler = Boiler::new(plant.boiler_efficiency, opts.boiler_capacity.unwrap_or(0.0) / 1000.0)?;
    let mut engine = Engine::new(model)?;
    // a constant-speed circulator sized for the boiler's design flow
    let pump_flow = match opts.boiler_capacity {
        Some(cap) => cap / (plant.water_specific_heat * plant.design_delta_t),
        None => engine.design_flow(),
    };
    let mut pump = Pump::for_flow(pump_flow, plant)?;
    let supply = plant.inlet_temperature;

    let first = season.records()[0];
    engine.settle(first.dry_bulb, first.global_horizontal, Control::Ideal { max_supply: supply })?;
    engine.reset_thermostats();

    let nz = model.zones.len();
    let ns = model.surfaces.len();
    let floor_area: Vec<f64> = model.zones.iter().map(|z| z.floor_area).collect();
    let mut zone_heat = vec![0.0; nz];
    let mut jan_air = vec![0.0; nz];
    let mut jan_face = vec![0.0; ns];
    let mut jan_steps = 0usize;

    let control = Control::Thermostat {
        supply,
        capacity: opts.boiler_capacity,
    };
    let mut monthly: Vec<MonthlyTotals> = Vec::new();
    let mut balance = EnergyBalance::default();
    let mut delivered = 0.0;
    let mut gas = 0.0;
    let mut exergy = 0.0;
    let mut peak: f64 = 0.0;
    let mut steps = 0usize;
    let mut return_violations = 0usize;

    for rec in season.records() {
        let (year, month) = (rec.timestamp.year(), rec.timestamp.month());
        if monthly.last().is_none_or(|m| (m.year, m.month) != (year, month)) {
            monthly.push(MonthlyTotals {
                year,
                month,
                delivered: 0.0,
                gas_energy: 0.0,
                electricity: 0.0,
                exergy: 0.0,
            });
        }
        let inputs = StepInputs {
            outdoor: rec.dry_bulb,
            global_horizontal: rec.global_horizontal,
            dt: Some(dt),
        };
        for _ in 0..substeps {
            engine.update_thermostats(model.simulation.deadband);
            let flows = engine.step(&inputs, control)?;
            balance.add(&flows, dt);
            steps += 1;

            let heat = flows.delivered.max(0.0) * dt;
            let step_gas = gas_energy(heat, &boiler)?;
            peak = peak.max(flows.delivered);

            let mut step_exergy = 0.0;
            let mut running = false;
            for c in engine.circuits() {
                if c.heat <= 0.0 {
                    continue;
                }
                running = true;
                let share = c.heat * dt / heat;
                step_exergy += share * step_gas * carnot_factor(c.supply + KELVIN, c.ret + KELVIN, rec.dry_bulb + KELVIN);
                let served_area: f64 = c.served.iter().map(|&z| floor_area[z]).sum();
                for &z in &c.served {
                    zone_heat[z] += c.heat * dt * floor_area[z] / served_area;
                }
                let coolest = c
                    .branches
                    .iter()
                    .filter_map(|&s| engine.panel_temperature(s))
                    .fold(f64::INFINITY, f64::min);
                let tol = 1e-6;
                if c.ret > c.supply + tol || c.ret < coolest - tol {
                    return_violations += 1;
                }
            }
            let runtime = if running { dt } else { 0.0 };
            pump.runtime += runtime;
            let step_el = pump_electricity(runtime, &pump)?;

            delivered += heat;
            gas += step_gas;
            exergy += step_exergy;
            let m = monthly.last_mut().expect("month entry pushed above");
            m.delivered += heat;
            m.gas_energy += step_gas;
            m.electricity += step_el;
            m.exergy += step_exergy;

            if month == 1 {
                jan_steps += 1;
                for (z, acc) in jan_air.iter_mut().enumerate() {
                    *acc += engine.air_temperature(z);
                }
                for (s, acc) in jan_face.iter_mut().enumerate() {
                    *acc += engine.face_temperature(s, Face::Inside);
                }
            }
        }
    }

    let jan = jan_steps.max(1) as f64;
    let zones = model
        .zones
        .iter()
        .enumerate()
        .map(|(z, zone)| ZoneMean {
            zone: zone.id.clone(),
            air: if jan_steps > 0 { jan_air[z] / jan } else { f64::NAN },
            delivered: zone_heat[z],
        })
        .collect();
    let surfaces = model
        .surfaces
        .iter()
        .enumerate()
        .map(|(s, surf)| SurfaceMean {
            surface: surf.id.clone(),
            zone: model.zones[surf.zone].id.clone(),
            orientation: surf.orientation,
            exterior_wall: surf.orientation.is_wall()
                && surf.boundary == Boundary::Outdoor
                && !model.construction_of(surf).is_glazing(),
            inside_face: if jan_steps > 0 { jan_face[s] / jan } else { f64::NAN },
        })
        .collect();

    Ok(SeasonResult {
        system: model.panel_system.kind,
        timestep: dt,
        steps,
        delivered,
        gas_energy: gas,
        electricity: pump_electricity(pump.runtime, &pump)?,
        exergy,
        pump_runtime: pump.runtime,
        pump_power: pump.electrical_power_when_on,
        peak_load: peak,
        boiler_capacity: opts.boiler_capacity,
        monthly,
        balance,
        zones,
        surfaces,
        return_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_building;
    use crate::weather::{WeatherMetadata, WeatherRecord};
    use chrono::{Duration, NaiveDate};

    const BOX_ROOM: &str = include_str!("../../tests/fixtures/box_room.json");

    fn constant_year(dry_bulb: f64) -> WeatherSeries {
        let start = NaiveDate::from_ymd_opt(2011, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let records = (0..365 * 24)
            .map(|h| WeatherRecord {
                timestamp: start + Duration::hours(h),
                dry_bulb,
                global_horizontal: 0.0,
                wind_speed: 0.0,
            })
            .collect();
        WeatherSeries::new(records, 3600, WeatherMetadata::default()).unwrap()
    }

    fn opts(timestep: f64, boiler_capacity: Option<f64>) -> SeasonOptions {
        SeasonOptions {
            timestep,
            boiler_capacity,
        }
    }

    #[test]
    fn step_must_divide_the_weather_step() {
        let m = load_building(BOX_ROOM).unwrap();
        let w = constant_year(0.0);
        for dt in [0.0, -600.0, 700.0, 7200.0] {
            assert!(matches!(run_heating_season(&m, &w, &opts(dt, None)), Err(Error::Configuration(_))), "{dt}");
        }
    }

    #[test]
    fn capacity_must_be_positive() {
        let m = load_building(BOX_ROOM).unwrap();
        let w = constant_year(0.0);
        assert!(run_heating_season(&m, &w, &opts(3600.0, Some(0.0))).is_err());
    }

    #[test]
    fn options_follow_the_model() {
        let mut m = load_building(BOX_ROOM).unwrap();
        m.plant.nominal_power_kw = Some(4.2);
        let o = SeasonOptions::from_model(&m);
        assert_eq!(o.timestep, 600.0);
        assert_eq!(o.boiler_capacity, Some(4200.0));
    }

    #[test]
    fn months_and_january_statistics_are_recorded() {
        let m = load_building(BOX_ROOM).unwrap();
        let r = run_heating_season(&m, &constant_year(0.0), &opts(3600.0, None)).unwrap();
        let months: Vec<u32> = r.monthly.iter().map(|m| m.month).collect();
        assert_eq!(months, vec![10, 11, 12, 1, 2, 3, 4]);
        // Oct 15 to Apr 15 inclusive of both days
        assert_eq!(r.steps, 183 * 24);
        assert_eq!(r.zones.len(), 1);
        assert!((r.january_mean_air() - 20.0).abs() < 0.6);
        let monthly: f64 = r.monthly.iter().map(|m| m.gas_energy).sum();
        assert!((monthly - r.gas_energy).abs() <= 1e-9 * r.gas_energy);
        assert!(r.exergy > 0.0 && r.exergy < r.gas_energy);
        assert_eq!(r.return_violations, 0);
    }
}
