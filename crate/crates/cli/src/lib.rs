//! Scenario runner and report writer for panelsim: runs panel systems
//! end to end and writes CSV tables and SVG charts of the comparison.

pub mod charts;
pub mod error;
pub mod report;
pub mod scenario;
pub mod tables;

pub use charts::emit_charts;
pub use error::{CliError, Result};
pub use report::{ComparisonReport, SurfaceTemperature, SystemReport, ZoneTemperature, REPORT_FILE};
pub use scenario::{ensure_writable, run_scenarios, ScenarioSpec, WeatherSource};
pub use tables::{build_tables, emit_tables, Table};
