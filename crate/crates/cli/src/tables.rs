//! CSV tables of a comparison report, one per chart.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::report::ComparisonReport;

/// A formatted table. Cells hold the exact text written to the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// Index of the column called `name`.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// Energies in GJ.
fn gj(v: f64) -> String {
    format!("{v:.3}")
}

/// Temperatures in °C.
fn celsius(v: f64) -> String {
    format!("{v:.1}")
}

/// Money in €.
fn euro(v: f64) -> String {
    format!("{v:.2}")
}

fn kw(v: f64) -> String {
    format!("{v:.2}")
}

fn kg(v: f64) -> String {
    format!("{v:.1}")
}

/// Build the seven tables of `report`, in a fixed order.
pub fn build_tables(report: &ComparisonReport) -> Result<Vec<Table>> {
    if report.systems.is_empty() {
        return Err(CliError::EmptyReport);
    }
    let per_system = |name, header: Vec<&'static str>, f: &dyn Fn(&crate::report::SystemReport) -> Vec<String>| Table {
        name,
        header,
        rows: report
            .systems
            .iter()
            .map(|s| {
                let mut row = vec![s.system.to_string()];
                row.extend(f(s));
                row
            })
            .collect(),
    };

    let energy = per_system(
        "energy",
        vec!["system", "delivered_gj", "gas_gj", "electricity_gj", "primary_energy_gj"],
        &|s| vec![gj(s.delivered_gj), gj(s.gas_gj), gj(s.electricity_gj), gj(s.primary_energy_gj)],
    );
    let cost = per_system(
        "cost",
        vec!["system", "gas_eur", "electricity_eur", "total_eur"],
        &|s| vec![euro(s.cost.gas), euro(s.cost.electricity), euro(s.cost.total)],
    );
    let boiler = per_system("boiler", vec!["system", "boiler_kw"], &|s| vec![kw(s.boiler_kw)]);
    let co2 = per_system("co2", vec!["system", "co2_kg"], &|s| vec![kg(s.co2_kg)]);
    let exergy = per_system("january_exergy", vec!["system", "january_exergy_gj"], &|s| {
        vec![gj(s.january_exergy_gj)]
    });

    let mut air = Table {
        name: "room_air",
        header: vec!["system", "zone", "setpoint_c", "air_c"],
        rows: Vec::new(),
    };
    let mut faces = Table {
        name: "surface_temperatures",
        header: vec!["system", "surface", "zone", "exterior_wall", "inside_face_c"],
        rows: Vec::new(),
    };
    for s in &report.systems {
        for z in &s.zones {
            air.rows.push(vec![s.system.to_string(), z.zone.clone(), celsius(z.setpoint), celsius(z.air)]);
        }
        for f in &s.surfaces {
            faces.rows.push(vec![
                s.system.to_string(),
                f.surface.clone(),
                f.zone.clone(),
                f.exterior_wall.to_string(),
                celsius(f.inside_face),
            ]);
        }
    }

    Ok(vec![energy, cost, boiler, co2, exergy, air, faces])
}

/// Write the tables of `report` as CSV files into `dir`. Returns their paths.
pub fn emit_tables(report: &ComparisonReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let tables = build_tables(report)?;
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    tables.iter().map(|t| write_table(t, dir)).collect()
}

fn write_table(t: &Table, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(t.file_name());
    let csv_err = |source| CliError::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(&t.header).map_err(csv_err)?;
    for row in &t.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(&path))?;
    Ok(path)
}
