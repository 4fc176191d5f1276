//! Linearised longwave exchange inside a zone through a mean radiant
//! temperature star node.

use crate::error::{Error, Result};

pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;
pub const KELVIN: f64 = 273.15;

/// One face of an enclosure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiantFace {
    /// m²
    pub area: f64,
    pub emissivity: f64,
    /// °C
    pub temperature: f64,
}

/// 4·ε·σ·T̄³, W/(m²K), with `mean` in °C.
pub fn radiant_coefficient(emissivity: f64, mean: f64) -> f64 {
    4.0 * emissivity * STEFAN_BOLTZMANN * (mean + KELVIN).powi(3)
}

/// Star conductance per m² of each face, W/(m²K).
///
/// Each face couples to the star node with its linearised coefficient,
/// divided by 1 − Aε/ΣAε so that a face does not exchange with itself
/// through the star. The mean temperature is the area-weighted face mean.
pub fn star_coefficients(faces: &[RadiantFace]) -> Result<Vec<f64>> {
    if faces.len() < 2 {
        return Err(Error::Configuration(format!(
            "radiant enclosure needs at least two faces, got {}",
            faces.len()
        )));
    }
    let area: f64 = faces.iter().map(|f| f.area).sum();
    let weight: f64 = faces.iter().map(|f| f.area * f.emissivity).sum();
    let mean = faces.iter().map(|f| f.area * f.temperature).sum::<f64>() / area;
    faces
        .iter()
        .map(|f| {
            let own = f.area * f.emissivity / weight;
            if own >= 1.0 - 1e-9 {
                return Err(Error::Configuration(
                    "one face carries the whole radiant enclosure".into(),
                ));
            }
            Ok(radiant_coefficient(f.emissivity, mean) / (1.0 - own))
        })
        .collect()
}

/// Net longwave heat leaving each face, W. Positive means the face loses heat.
///
/// Fluxes add up to zero over the enclosure; the rounding residual is
/// returned to the faces in proportion to their area.
pub fn radiant_exchange(faces: &[RadiantFace]) -> Result<Vec<f64>> {
    let h = star_coefficients(faces)?;
    let g: Vec<f64> = faces.iter().zip(&h).map(|(f, h)| f.area * h).collect();
    let star = faces.iter().zip(&g).map(|(f, g)| g * f.temperature).sum::<f64>() / g.iter().sum::<f64>();
    let mut q: Vec<f64> = faces
        .iter()
        .zip(&g)
        .map(|(f, g)| g * (f.temperature - star))
        .collect();
    let residual: f64 = q.iter().sum();
    let area: f64 = faces.iter().map(|f| f.area).sum();
    for (qi, f) in q.iter_mut().zip(faces) {
        *qi -= residual * f.area / area;
    }
    Ok(q)
}
