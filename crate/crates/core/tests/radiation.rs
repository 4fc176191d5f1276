//! Longwave exchange inside randomised enclosures.

use panelsim::simulate::radiation::{radiant_coefficient, KELVIN, STEFAN_BOLTZMANN};
use panelsim::simulate::{radiant_exchange, RadiantFace};
use proptest::prelude::*;

fn arb_face() -> impl Strategy<Value = RadiantFace> {
    (0.2..60.0f64, 0.05..=1.0f64, -20.0..70.0f64).prop_map(|(area, emissivity, temperature)| RadiantFace {
        area,
        emissivity,
        temperature,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fluxes_cancel_over_the_enclosure(faces in prop::collection::vec(arb_face(), 2..14)) {
        let q = radiant_exchange(&faces).unwrap();
        let gross: f64 = q.iter().map(|x| x.abs()).sum();
        let net: f64 = q.iter().sum();
        prop_assert!(net.abs() <= 1e-9 * gross.max(1e-300) || gross == 0.0);
    }

    #[test]
    fn hottest_face_loses_and_coldest_gains(faces in prop::collection::vec(arb_face(), 2..14)) {
        let q = radiant_exchange(&faces).unwrap();
        let (hot, _) = faces.iter().enumerate().fold((0, f64::MIN), |b, (i, f)| if f.temperature > b.1 { (i, f.temperature) } else { b });
        let (cold, _) = faces.iter().enumerate().fold((0, f64::MAX), |b, (i, f)| if f.temperature < b.1 { (i, f.temperature) } else { b });
        let gross: f64 = q.iter().map(|x| x.abs()).sum();
        prop_assert!(q[hot] >= -1e-9 * gross);
        prop_assert!(q[cold] <= 1e-9 * gross);
    }
}

#[test]
fn two_black_faces_exchange_at_the_linearised_rate() {
    // 30 °C and 20 °C, 1 m² each: mean 25 °C = 298.15 K
    let faces = [
        RadiantFace { area: 1.0, emissivity: 1.0, temperature: 30.0 },
        RadiantFace { area: 1.0, emissivity: 1.0, temperature: 20.0 },
    ];
    let q = radiant_exchange(&faces).unwrap();
    let h = 4.0 * STEFAN_BOLTZMANN * (25.0 + KELVIN).powi(3);
    assert!((h - 6.01).abs() < 0.01, "{h}");
    assert!((q[0] - h * 10.0).abs() < 1e-9);
    assert!((q[0] + q[1]).abs() < 1e-12);
    assert!((radiant_coefficient(1.0, 25.0) - h).abs() < 1e-12);
}
