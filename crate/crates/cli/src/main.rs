use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use panelsim::metrics::CostMode;
use panelsim::PanelSystemKind;
use panelsim_cli::{
    emit_charts, emit_tables, run_scenarios, CliError, ComparisonReport, ScenarioSpec, WeatherSource,
};

/// Seed used by `compare` when no weather is given.
const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "panelsim", version, about = "Radiant panel heating season simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one panel system.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_system)]
        system: PanelSystemKind,
        #[command(flatten)]
        weather: WeatherArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Simulate all four panel systems and compare them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, required = true)]
        all_systems: bool,
        #[command(flatten)]
        weather: WeatherArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Run the systems concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Write tables or charts from a saved report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct WeatherArgs {
    /// Weather CSV file.
    #[arg(long)]
    weather: Option<PathBuf>,
    /// Generate one synthetic year from this seed.
    #[arg(long)]
    synthetic_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Time step override, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Bill with the cost formula exactly as printed instead of the billing reading.
    #[arg(long)]
    strict_eq4: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Charts,
}

fn parse_system(s: &str) -> Result<PanelSystemKind, String> {
    s.parse().map_err(|e: panelsim::Error| e.to_string())
}

impl WeatherArgs {
    fn source(self, default_seed: Option<u64>) -> Result<WeatherSource, CliError> {
        match (self.weather, self.synthetic_seed.or(default_seed)) {
            (Some(p), _) => Ok(WeatherSource::File(p)),
            (None, Some(seed)) => Ok(WeatherSource::Synthetic(seed)),
            (None, None) => Err(CliError::Scenario(
                "one of --weather or --synthetic-seed is required".into(),
            )),
        }
    }
}

fn spec(
    config: PathBuf,
    systems: Vec<PanelSystemKind>,
    weather: WeatherSource,
    run: RunArgs,
    parallel: bool,
) -> ScenarioSpec {
    ScenarioSpec {
        config,
        weather,
        systems,
        out: run.out,
        timestep: run.dt,
        cost_mode: if run.strict_eq4 {
            CostMode::Printed
        } else {
            CostMode::Billing
        },
        parallel,
    }
}

fn simulate_and_write(spec: &ScenarioSpec) -> Result<(), CliError> {
    let report = run_scenarios(spec)?;
    emit_tables(&report, &spec.out)?;
    emit_charts(&report, &spec.out)?;
    for s in &report.systems {
        println!(
            "{:<14} gas {:>8.3} GJ  electricity {:>6.3} GJ  primary {:>8.3} GJ  boiler {:>6.2} kW  CO2 {:>8.1} kg  cost {:>8.2} EUR",
            s.system.as_str(),
            s.gas_gj,
            s.electricity_gj,
            s.primary_energy_gj,
            s.boiler_kw,
            s.co2_kg,
            s.cost.total
        );
    }
    println!("results written to {}", spec.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            system,
            weather,
            run,
        } => {
            let source = weather.source(None)?;
            simulate_and_write(&spec(config, vec![system], source, run, false))
        }
        Command::Compare {
            config,
            all_systems: _,
            weather,
            run,
            parallel,
        } => {
            let source = weather.source(Some(DEFAULT_SEED))?;
            simulate_and_write(&spec(config, PanelSystemKind::ALL.to_vec(), source, run, parallel))
        }
        Command::Report { input, format } => {
            let report = ComparisonReport::load(&input)?;
            let written = match format {
                Format::Csv => emit_tables(&report, &input)?,
                Format::Charts => emit_charts(&report, &input)?,
            };
            for p in written {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
