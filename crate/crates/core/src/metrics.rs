//! Primary energy, exergy, CO₂ emission and operating cost of a heating season.
//!
//! Energies are in GJ throughout this module, temperatures in kelvin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conversion and emission factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorSet {
    /// Primary energy per unit of delivered electricity (Serbian mix).
    pub primary_energy_factor: f64,
    /// kg CO₂ per GJ of natural gas.
    pub co2_natural_gas: f64,
    /// kg CO₂ per GJ of electricity.
    pub co2_electricity: f64,
    /// Natural gas heating value, kJ/m³.
    pub gas_heating_value: f64,
}

impl Default for FactorSet {
    fn default() -> Self {
        Self {
            primary_energy_factor: 3.61,
            co2_natural_gas: 56.1,
            co2_electricity: 206.53,
            gas_heating_value: 33_338.0,
        }
    }
}

impl FactorSet {
    pub fn check(&self) -> Vec<String> {
        [
            ("primary energy factor", self.primary_energy_factor),
            ("natural gas emission factor", self.co2_natural_gas),
            ("electricity emission factor", self.co2_electricity),
            ("gas heating value", self.gas_heating_value),
        ]
        .into_iter()
        .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
        .map(|(what, v)| format!("{what} must be positive, got {v}"))
        .collect()
    }

    /// m³ of gas per GJ.
    pub fn gas_volume_per_gj(&self) -> f64 {
        1.0e6 / self.gas_heating_value
    }
}

/// One block of the monthly electricity tariff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tier {
    pub name: String,
    /// Upper bound of the block in monthly kWh; `None` for the last block.
    pub up_to_kwh: Option<f64>,
    /// €/kWh
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TariffSchedule {
    pub electricity_tiers: Vec<Tier>,
    /// €/m³
    pub gas_price: f64,
    /// Correction applied to the metered gas volume.
    pub gas_correction: f64,
    /// Fixed gas meter reading fee, € per month.
    pub gas_meter_fee: f64,
}

impl Default for TariffSchedule {
    fn default() -> Self {
        Self {
            electricity_tiers: vec![
                Tier {
                    name: "green".into(),
                    up_to_kwh: Some(350.0),
                    price: 0.059,
                },
                Tier {
                    name: "blue".into(),
                    up_to_kwh: Some(1600.0),
                    price: 0.089,
                },
                Tier {
                    name: "red".into(),
                    up_to_kwh: None,
                    price: 0.177,
                },
            ],
            gas_price: 0.41,
            gas_correction: 1.068,
            gas_meter_fee: 0.012,
        }
    }
}

impl TariffSchedule {
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.electricity_tiers.is_empty() {
            out.push("at least one electricity tier is required".to_string());
        }
        let mut prev = 0.0;
        for (i, t) in self.electricity_tiers.iter().enumerate() {
            if !(t.price >= 0.0) {
                out.push(format!("tier '{}' has a negative price", t.name));
            }
            let last = i + 1 == self.electricity_tiers.len();
            match t.up_to_kwh {
                Some(b) if !(b > prev) => {
                    out.push(format!("tier '{}' bound {b} is not above {prev}", t.name))
                }
                Some(b) => prev = b,
                None if !last => out.push(format!("only the last tier may be unbounded ('{}')", t.name)),
                None => {}
            }
        }
        for (what, v) in [
            ("gas price", self.gas_price),
            ("gas correction", self.gas_correction),
            ("gas meter fee", self.gas_meter_fee),
        ] {
            if !(v >= 0.0) {
                out.push(format!("{what} must be non-negative, got {v}"));
            }
        }
        out
    }

    /// Block-tariff bill for one month of electricity, €.
    pub fn electricity_bill(&self, kwh: f64) -> f64 {
        let mut lower = 0.0;
        let mut bill = 0.0;
        for t in &self.electricity_tiers {
            let upper = t.up_to_kwh.unwrap_or(f64::INFINITY);
            bill += (kwh.min(upper) - lower).max(0.0) * t.price;
            lower = upper;
            if kwh <= upper {
                break;
            }
        }
        bill
    }
}

fn non_negative(what: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be a non-negative number, got {v}")))
    }
}

/// `E_ng + R·E_el`, GJ.
pub fn primary_energy(e_ng: f64, e_el: f64, f: &FactorSet) -> Result<f64> {
    non_negative("gas energy", e_ng)?;
    non_negative("electricity", e_el)?;
    Ok(e_ng + f.primary_energy_factor * e_el)
}

/// `g_ng·E_ng + g_el·E_el`, kg CO₂.
pub fn co2_emission(e_ng: f64, e_el: f64, f: &FactorSet) -> Result<f64> {
    non_negative("gas energy", e_ng)?;
    non_negative("electricity", e_el)?;
    Ok(f.co2_natural_gas * e_ng + f.co2_electricity * e_el)
}

/// Gas-fed heat delivered to one room during one evaluation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomExergy {
    /// GJ
    pub gas_energy: f64,
    /// K
    pub supply: f64,
    /// K
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExergyInputs {
    pub rooms: Vec<RoomExergy>,
    /// Reference (dead-state) temperature, K.
    pub reference: f64,
}

/// Carnot factor of heat supplied at the mean of `supply` and `ret` against
/// `reference`, clamped at zero when the water is not above the reference.
pub fn carnot_factor(supply: f64, ret: f64, reference: f64) -> f64 {
    (1.0 - reference / (0.5 * (supply + ret))).max(0.0)
}

/// Exergy of the heat supplied over one interval, GJ.
pub fn exergy(inputs: &ExergyInputs) -> Result<f64> {
    if !(inputs.reference > 0.0) {
        return Err(Error::Domain(format!(
            "reference temperature must be positive kelvin, got {}",
            inputs.reference
        )));
    }
    let mut total = 0.0;
    for r in &inputs.rooms {
        if !(r.supply > 0.0 && r.ret > 0.0) {
            return Err(Error::Domain(format!(
                "water temperatures must be positive kelvin, got {} / {}",
                r.supply, r.ret
            )));
        }
        non_negative("room gas energy", r.gas_energy)?;
        total += carnot_factor(r.supply, r.ret, inputs.reference) * r.gas_energy;
    }
    Ok(total)
}

/// Split `e_ng` over rooms in proportion to their delivered heat. The last
/// room with non-zero heat absorbs the rounding so the parts add up to `e_ng`.
pub fn apportion_gas(delivered: &[f64], e_ng: f64) -> Result<Vec<f64>> {
    non_negative("gas energy", e_ng)?;
    for &q in delivered {
        non_negative("room heat", q)?;
    }
    let total: f64 = delivered.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("cannot apportion gas over rooms with no delivered heat".into()));
    }
    let mut parts: Vec<f64> = delivered.iter().map(|q| e_ng * q / total).collect();
    if let Some(last) = delivered.iter().rposition(|&q| q > 0.0) {
        let others: f64 = parts
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != last)
            .map(|(_, p)| p)
            .sum();
        parts[last] = e_ng - others;
    }
    Ok(parts)
}

/// How the gas correction and meter fee enter the bill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CostMode {
    /// Correction on the gas volume, meter fee per month, block tariff on electricity.
    #[default]
    Billing,
    /// `f_ng·E_ng + k·m1·f_el·E_el`, with `f_el·E_el` the block-tariff electricity bill.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub gas: f64,
    pub electricity: f64,
    pub total: f64,
}

/// Season operating cost, €.
pub fn operating_cost(
    e_ng: f64,
    monthly_el_kwh: &[f64],
    season_months: u32,
    t: &TariffSchedule,
    f: &FactorSet,
    mode: CostMode,
) -> Result<CostBreakdown> {
    non_negative("gas energy", e_ng)?;
    for &kwh in monthly_el_kwh {
        non_negative("monthly electricity", kwh)?;
    }
    let electricity: f64 = monthly_el_kwh.iter().map(|&k| t.electricity_bill(k)).sum();
    let volume = e_ng * f.gas_volume_per_gj();
    let (gas, electricity) = match mode {
        CostMode::Billing => (
            t.gas_correction * t.gas_price * volume + t.gas_meter_fee * f64::from(season_months),
            electricity,
        ),
        CostMode::Printed => (
            t.gas_price * volume,
            t.gas_correction * t.gas_meter_fee * electricity,
        ),
    };
    Ok(CostBreakdown {
        gas,
        electricity,
        total: gas + electricity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyMetrics {
    pub year: i32,
    pub month: u32,
    pub gas_gj: f64,
    pub electricity_gj: f64,
    pub exergy_gj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub gas_gj: f64,
    pub electricity_gj: f64,
    pub primary_energy_gj: f64,
    pub exergy_gj: f64,
    pub january_exergy_gj: f64,
    pub co2_kg: f64,
    pub cost: CostBreakdown,
    pub monthly: Vec<MonthlyMetrics>,
}

impl MetricsReport {
    pub fn from_season(
        season: &crate::simulate::SeasonResult,
        f: &FactorSet,
        t: &TariffSchedule,
        mode: CostMode,
    ) -> Result<Self> {
        let gas_gj = season.gas_energy / 1e9;
        let electricity_gj = season.electricity / 1e9;
        let monthly_kwh: Vec<f64> = season.monthly.iter().map(|m| m.electricity / 3.6e6).collect();
        let months = u32::try_from(season.monthly.len()).unwrap_or(u32::MAX);
        Ok(Self {
            gas_gj,
            electricity_gj,
            primary_energy_gj: primary_energy(gas_gj, electricity_gj, f)?,
            exergy_gj: season.exergy / 1e9,
            january_exergy_gj: season.january_exergy() / 1e9,
            co2_kg: co2_emission(gas_gj, electricity_gj, f)?,
            cost: operating_cost(gas_gj, &monthly_kwh, months, t, f, mode)?,
            monthly: season
                .monthly
                .iter()
                .map(|m| MonthlyMetrics {
                    year: m.year,
                    month: m.month,
                    gas_gj: m.gas_energy / 1e9,
                    electricity_gj: m.electricity / 1e9,
                    exergy_gj: m.exergy / 1e9,
                })
                .collect(),
        })
    }
}
