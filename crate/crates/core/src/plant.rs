//! Gas boiler, circulation pump and boiler sizing.

use crate::error::{Error, Result};
use crate::model::{BuildingModel, PlantParams};
use crate::simulate::{Control, Engine, StepInputs};
use crate::weather::DesignDay;

/// Non-condensing gas boiler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boiler {
    /// Lower-heating-value basis, in (0, 1].
    pub efficiency: f64,
    /// kW
    pub nominal_power: f64,
}

impl Boiler {
    pub fn new(efficiency: f64, nominal_power: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::Configuration(format!(
                "boiler efficiency must lie in (0, 1], got {efficiency}"
            )));
        }
        if !(nominal_power >= 0.0) {
            return Err(Error::Configuration(format!(
                "boiler power must be non-negative, got {nominal_power} kW"
            )));
        }
        Ok(Self {
            efficiency,
            nominal_power,
        })
    }
}

/// Constant-speed circulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pump {
    /// W
    pub electrical_power_when_on: f64,
    /// Accumulated running time, s.
    pub runtime: f64,
}

impl Pump {
    pub fn new(electrical_power_when_on: f64) -> Result<Self> {
        if !(electrical_power_when_on > 0.0) || !electrical_power_when_on.is_finite() {
            return Err(Error::Configuration(format!(
                "pump power must be positive, got {electrical_power_when_on} W"
            )));
        }
        Ok(Self {
            electrical_power_when_on,
            runtime: 0.0,
        })
    }

    /// Pump moving `mass_flow` kg/s against the plant's head.
    pub fn for_flow(mass_flow: f64, plant: &PlantParams) -> Result<Self> {
        Self::new(mass_flow * plant.pump_head / (plant.water_density * plant.pump_efficiency))
    }
}

/// Fuel energy for `delivered` joules of heat, J.
pub fn gas_energy(delivered: f64, boiler: &Boiler) -> Result<f64> {
    if !(delivered >= 0.0) {
        return Err(Error::Domain(format!(
            "delivered heat must be non-negative, got {delivered} J"
        )));
    }
    Ok(delivered / boiler.efficiency)
}

/// Electricity drawn over `runtime` seconds, J.
pub fn pump_electricity(runtime: f64, pump: &Pump) -> Result<f64> {
    if !(runtime >= 0.0) {
        return Err(Error::Domain(format!("runtime must be non-negative, got {runtime} s")));
    }
    Ok(pump.electrical_power_when_on * runtime)
}

const MAX_DESIGN_CYCLES: usize = 30;
const CYCLE_TOLERANCE: f64 = 1e-4;

/// Nominal boiler output, kW, rounded up to 0.01 kW.
///
/// The building starts from the steady state at the design temperature and
/// repeats the design day with ideally modulated supply temperatures until
/// the daily delivered heat settles. The peak of the last day is returned.
pub fn size_boiler(model: &BuildingModel, day: &DesignDay) -> Result<f64> {
    let dt = model.simulation.timestep;
    if !(dt > 0.0) || !(day.duration > 0.0) {
        return Err(Error::Configuration("design day needs a positive duration and step".into()));
    }
    let steps = (day.duration / dt).round().max(1.0) as usize;
    let control = Control::Ideal {
        max_supply: model.plant.inlet_temperature,
    };
    let mut engine = Engine::new(model)?;
    engine.settle(day.dry_bulb, 0.0, control)?;
    let inputs = StepInputs {
        outdoor: day.dry_bulb,
        global_horizontal: 0.0,
        dt: Some(dt),
    };

    let mut previous: Option<f64> = None;
    for _ in 0..MAX_DESIGN_CYCLES {
        let mut energy = 0.0;
        let mut peak: f64 = 0.0;
        for _ in 0..steps {
            let f = engine.step(&inputs, control)?;
            energy += f.delivered * dt;
            peak = peak.max(f.delivered);
        }
        if let Some(prev) = previous {
            if (energy - prev).abs() <= CYCLE_TOLERANCE * energy.abs().max(1.0) {
                return Ok(round_up_kw(peak));
            }
        }
        previous = Some(energy);
    }
    Err(Error::NonConvergent {
        cycles: MAX_DESIGN_CYCLES,
    })
}

/// W to kW, rounded up to 0.01 kW with a little slack for round-off.
fn round_up_kw(watts: f64) -> f64 {
    let kw = watts / 1000.0;
    ((kw - 1e-6) * 100.0).ceil().max(0.0) / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gas_is_heat_over_efficiency() {
        let b = Boiler::new(0.9, 10.0).unwrap();
        assert_eq!(gas_energy(0.0, &b).unwrap(), 0.0);
        assert!((gas_energy(9e9, &b).unwrap() - 10e9).abs() < 1e-3);
        assert!(gas_energy(-1.0, &b).is_err());
    }

    #[test]
    fn pump_energy() {
        let p = Pump::new(90.0).unwrap();
        assert_eq!(pump_electricity(0.0, &p).unwrap(), 0.0);
        let e = pump_electricity(1000.0 * 3600.0, &p).unwrap();
        assert!((e / 1e9 - 0.324).abs() < 1e-12);
        assert!(Pump::new(0.0).is_err());
    }

    #[test]
    fn invalid_boiler_rejected() {
        assert!(Boiler::new(0.0, 1.0).is_err());
        assert!(Boiler::new(1.1, 1.0).is_err());
    }

    #[test]
    fn rounding_up() {
        assert_eq!(round_up_kw(3500.0), 3.5);
        assert_eq!(round_up_kw(3500.0000001), 3.5);
        assert_eq!(round_up_kw(3501.0), 3.51);
        assert_eq!(round_up_kw(0.0), 0.0);
    }
}
