//! Command-line entry point.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use evcharge_core::PricingRegime;

use crate::config::{load_scenario, Model, Scenario, SweepVariable};
use crate::monopoly::run_monopolist_suite;
use crate::sweep::{run_delta_sweep, run_mandate_sweep, SweepOutput};
use crate::table::{emit_csv, Table};

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNCONVERGED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "evcharge",
    version,
    about = "Charger investment equilibria and policy sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Scenario file.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV destination; overrides `output` in the scenario, stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Evaluate only this pricing regime.
    #[arg(long, value_parser = parse_regime)]
    pub regime: Option<PricingRegime>,
    /// Add equilibrium certificate columns.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One row per mandate level and pricing regime.
    SweepMandate(RunArgs),
    /// One row per endowment, policy combination and pricing regime.
    SweepDelta(RunArgs),
    /// Stochastic-demand monopolist.
    Monopolist {
        #[command(flatten)]
        args: RunArgs,
        /// Append best-case profit on a 0.001 capacity grid.
        #[arg(long)]
        profile: bool,
    },
    /// Check a scenario file and report the first problem.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_regime(name: &str) -> Result<PricingRegime, String> {
    PricingRegime::from_name(name).ok_or_else(|| {
        format!("expected one of two-price, optimal-single, naive-single, got `{name}`")
    })
}

fn load(path: &PathBuf) -> Result<Scenario, u8> {
    let text = std::fs::read_to_string(path).map_err(|err| {
        eprintln!("error: cannot read {}: {err}", path.display());
        EXIT_CONFIG
    })?;
    load_scenario(&text).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_CONFIG
    })
}

fn write(table: &Table, args: &RunArgs, scenario: &Scenario) -> Result<(), u8> {
    let path = args.output.as_ref().or(scenario.output.as_ref());
    emit_csv(table, path.map(PathBuf::as_path)).map_err(|err| {
        eprintln!("error: cannot write output: {err}");
        EXIT_IO
    })
}

fn competitive_run(
    args: &RunArgs,
    run: fn(
        &crate::config::CompetitiveScenario,
        bool,
    ) -> Result<SweepOutput, crate::sweep::SweepError>,
) -> Result<u8, u8> {
    let scenario = load(&args.config)?;
    let Model::Competitive(mut competitive) = scenario.model.clone() else {
        eprintln!("error: this subcommand needs `model = competitive`");
        return Err(EXIT_CONFIG);
    };
    if let Some(regime) = args.regime {
        competitive.pricing = vec![regime];
    }
    let output = run(&competitive, args.oracle).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_CONFIG
    })?;
    write(&output.table, args, &scenario)?;
    let failures = output.failures();
    if failures > 0 {
        eprintln!(
            "{failures} of {} rows did not converge",
            output.results.len()
        );
        return Ok(EXIT_UNCONVERGED);
    }
    Ok(EXIT_OK)
}

fn monopolist_run(args: &RunArgs, profile: bool) -> Result<u8, u8> {
    let scenario = load(&args.config)?;
    let Model::Monopolist(monopolist) = &scenario.model else {
        eprintln!("error: this subcommand needs `model = monopolist`");
        return Err(EXIT_CONFIG);
    };
    if args.regime.is_some() {
        eprintln!("error: --regime applies to the competitive model only");
        return Err(EXIT_CONFIG);
    }
    let output = run_monopolist_suite(monopolist, profile).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_CONFIG
    })?;
    write(&output.table, args, &scenario)?;
    Ok(EXIT_OK)
}

fn validate(path: &PathBuf) -> Result<u8, u8> {
    let scenario = load(path)?;
    match &scenario.model {
        Model::Competitive(c) => {
            let points = match c.sweep {
                SweepVariable::None => 1,
                _ => c.grid.points().len(),
            };
            println!(
                "ok: competitive scenario, sweep {} over {points} point(s), {} pricing regime(s)",
                c.sweep.name(),
                c.pricing.len()
            );
        }
        Model::Monopolist(m) => {
            println!(
                "ok: monopolist scenario, {} realization(s)",
                m.distribution.len()
            );
        }
    }
    Ok(EXIT_OK)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::SweepMandate(args) => competitive_run(args, run_mandate_sweep),
        Command::SweepDelta(args) => competitive_run(args, run_delta_sweep),
        Command::Monopolist { args, profile } => monopolist_run(args, *profile),
        Command::Validate { config } => validate(config),
    };
    result.unwrap_or_else(|code| code)
}
