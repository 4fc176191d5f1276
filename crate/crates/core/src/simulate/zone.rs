//! Zone air node and thermostat.

/// Everything acting on a zone air node except face convection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirBalance {
    /// ρ·cp·V, J/K.
    pub capacity: f64,
    /// Infiltration conductance, W/K.
    pub infiltration: f64,
    /// °C
    pub outdoor: f64,
    /// Convective gains, W.
    pub gains: f64,
}

/// Backward-Euler update of the air temperature over `dt` seconds.
///
/// `convective` lists (h·A in W/K, face temperature in °C) for every face
/// in the zone, held at their end-of-step values.
pub fn zone_air_step(air: f64, balance: &AirBalance, convective: &[(f64, f64)], dt: f64) -> f64 {
    let store = balance.capacity / dt;
    let mut diag = store + balance.infiltration;
    let mut rhs = store * air + balance.infiltration * balance.outdoor + balance.gains;
    for &(ha, t) in convective {
        diag += ha;
        rhs += ha * t;
    }
    rhs / diag
}

/// Hysteresis control: on below `setpoint − deadband`, off above
/// `setpoint + deadband`, unchanged in between.
pub fn thermostat(air: f64, setpoint: f64, deadband: f64, was_on: bool) -> bool {
    if air < setpoint - deadband {
        true
    } else if air > setpoint + deadband {
        false
    } else {
        was_on
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermostat_band() {
        assert!(thermostat(18.0, 20.0, 0.5, false));
        assert!(!thermostat(20.6, 20.0, 0.5, true));
        assert!(thermostat(20.0, 20.0, 0.5, true));
        assert!(!thermostat(20.0, 20.0, 0.5, false));
    }

    #[test]
    fn air_equilibrium() {
        let b = AirBalance { capacity: 5e4, infiltration: 0.0, outdoor: 20.0, gains: 0.0 };
        assert_eq!(zone_air_step(20.0, &b, &[(10.0, 20.0), (4.0, 20.0)], 600.0), 20.0);
    }

    #[test]
    fn infiltration_cools() {
        let b = AirBalance { capacity: 5e4, infiltration: 15.0, outdoor: 0.0, gains: 0.0 };
        let mut t = 20.0;
        for _ in 0..10 {
            let next = zone_air_step(t, &b, &[], 600.0);
            assert!(next < t);
            t = next;
        }
    }

    #[test]
    fn steady_state_with_gains() {
        // one exterior face of conductance UA held at outdoor temperature
        let b = AirBalance { capacity: 5e4, infiltration: 0.0, outdoor: -5.0, gains: 500.0 };
        let mut t = 0.0;
        for _ in 0..2000 {
            t = zone_air_step(t, &b, &[(25.0, -5.0)], 600.0);
        }
        assert!((t - (-5.0 + 500.0 / 25.0)).abs() < 1e-9);
    }
}
