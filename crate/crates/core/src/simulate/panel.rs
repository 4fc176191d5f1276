//! Heat exchange between circulating water and the slab around the pipes.

use crate::error::{Error, Result};

/// State of one hydronic circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterLoop {
    /// Inlet (supply) temperature, °C.
    pub supply: f64,
    /// Return temperature, °C. Equal to `supply` while no heat is exchanged.
    pub ret: f64,
    /// kg/s
    pub mass_flow: f64,
    /// J/(kg·K)
    pub specific_heat: f64,
    /// Pipe-to-slab conductance, W/K.
    pub ua: f64,
    pub on: bool,
}

/// ε = 1 − exp(−UA / (ṁ·cp)) for a pipe in a slab at uniform temperature.
pub fn effectiveness(ua: f64, capacity_rate: f64) -> f64 {
    if capacity_rate <= 0.0 {
        return 1.0;
    }
    -(-ua / capacity_rate).exp_m1()
}

impl WaterLoop {
    /// Slab conductance seen by the water, ṁ·cp·ε, W/K.
    pub fn conductance(&self) -> f64 {
        let rate = self.mass_flow * self.specific_heat;
        rate * effectiveness(self.ua, rate)
    }
}

/// Heat delivered to the slab and the resulting return temperature.
///
/// A loop that is off, or whose slab is warmer than the water, delivers
/// nothing and returns water at the inlet temperature.
pub fn panel_exchange(lp: &WaterLoop, slab: f64) -> Result<(f64, f64)> {
    if !(lp.ua > 0.0) {
        return Err(Error::Configuration(format!(
            "pipe conductance must be positive, got {} W/K",
            lp.ua
        )));
    }
    if !slab.is_finite() {
        return Err(Error::Numerical(format!("slab temperature is {slab}")));
    }
    if !lp.on || !(lp.mass_flow > 0.0) {
        return Ok((0.0, lp.supply));
    }
    let rate = lp.mass_flow * lp.specific_heat;
    let q = rate * effectiveness(lp.ua, rate) * (lp.supply - slab);
    if q <= 0.0 {
        return Ok((0.0, lp.supply));
    }
    Ok((q, lp.supply - q / rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(ua: f64) -> WaterLoop {
        WaterLoop {
            supply: 37.0,
            ret: 37.0,
            mass_flow: 0.1,
            specific_heat: 4186.0,
            ua,
            on: true,
        }
    }

    #[test]
    fn infinite_exchanger_returns_at_slab_temperature() {
        let (q, ret) = panel_exchange(&lp(1e9), 25.0).unwrap();
        assert!((ret - 25.0).abs() < 1e-9);
        assert!((q - 418.6 * 12.0).abs() < 1e-6);
    }

    #[test]
    fn unit_ntu_effectiveness() {
        let e = effectiveness(418.6, 418.6);
        assert!((e - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((e - 0.632).abs() < 1e-3);
    }

    #[test]
    fn no_driving_force_no_heat() {
        assert_eq!(panel_exchange(&lp(100.0), 37.0).unwrap(), (0.0, 37.0));
        assert_eq!(panel_exchange(&lp(100.0), 40.0).unwrap(), (0.0, 37.0));
    }

    #[test]
    fn zero_ua_is_a_configuration_error() {
        assert!(matches!(panel_exchange(&lp(0.0), 20.0), Err(Error::Configuration(_))));
    }

    #[test]
    fn return_lies_between_slab_and_supply() {
        for ua in [1.0, 50.0, 400.0, 5000.0] {
            let (_, ret) = panel_exchange(&lp(ua), 24.0).unwrap();
            assert!((24.0..=37.0).contains(&ret), "ua {ua}: {ret}");
        }
    }
}
