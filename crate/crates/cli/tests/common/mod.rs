#![allow(dead_code)]

use panelsim::metrics::{CostBreakdown, CostMode};
use panelsim::PanelSystemKind;
use panelsim_cli::{ComparisonReport, SurfaceTemperature, SystemReport, ZoneTemperature};

pub const BOX_ROOM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/box_room.json");

pub fn system(kind: PanelSystemKind, scale: f64) -> SystemReport {
    SystemReport {
        system: kind,
        timestep: 600.0,
        delivered_gj: 40.123_456 * scale,
        gas_gj: 44.581_617 * scale,
        electricity_gj: 0.087_654 * scale,
        primary_energy_gj: 50.555_555 * scale,
        boiler_kw: 9.876 * scale,
        co2_kg: 2_512.345 * scale,
        cost: CostBreakdown {
            gas: 600.004 * scale,
            electricity: 5.555 * scale,
            total: 605.559 * scale,
        },
        january_exergy_gj: 1.234_567 * scale,
        balance_residual: 1e-12,
        zones: vec![
            ZoneTemperature { zone: "Z01".into(), setpoint: 20.0, air: 19.96 },
            ZoneTemperature { zone: "Z02".into(), setpoint: 20.0, air: 18.24 },
        ],
        surfaces: vec![
            SurfaceTemperature { surface: "Z01-N".into(), zone: "Z01".into(), exterior_wall: true, inside_face: 17.04 },
            SurfaceTemperature { surface: "Z01-F".into(), zone: "Z01".into(), exterior_wall: false, inside_face: 26.5 },
        ],
    }
}

pub fn sample_report() -> ComparisonReport {
    ComparisonReport {
        weather: "synthetic seed 1".into(),
        cost_mode: CostMode::Billing,
        systems: PanelSystemKind::ALL
            .iter()
            .enumerate()
            .map(|(i, &k)| system(k, 1.0 + 0.1 * i as f64))
            .collect(),
    }
}
