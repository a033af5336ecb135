//! `dhtwin` command-line interface.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on runtime errors.
//! Diagnostics go to standard error; results are written to files only.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use dhtwin::forecast::fit_solar;
use dhtwin::runner::{
    builtin_scenario, compare, run_scenario, write_generated_data, write_report, ControllerKind, ForecastMode,
    KpiReport, ScenarioConfig,
};
use dhtwin::timeseries::{read_csv, Unit};

#[derive(Parser, Debug)]
#[command(name = "dhtwin", version, about = "District-heating plant digital twin")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Controller {
    Rbc,
    Mpc,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Built-in scenario (A, B or C) or path to a JSON config.
    #[arg(long, value_parser = parse_scenario)]
    scenario: ScenarioConfig,
    #[arg(long, value_enum)]
    controller: Option<Controller>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Use actual solar production as the forecast.
    #[arg(long)]
    perfect_forecast: bool,
    /// Add on/off binaries with minimum-load constraints to the MPC.
    #[arg(long)]
    commitment: bool,
    /// Override the period start (ISO-8601, UTC).
    #[arg(long)]
    start: Option<String>,
    /// Override the period end, exclusive.
    #[arg(long)]
    end: Option<String>,
    /// Write every MPC problem to this directory.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one closed-loop scenario and write its outputs.
    Simulate(SimulateArgs),
    /// Relative differences between two KPI files.
    Compare {
        kpi_a: PathBuf,
        kpi_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the affine solar model on measured series.
    FitSolar {
        #[arg(long)]
        irradiance: PathBuf,
        #[arg(long)]
        ambient: PathBuf,
        #[arg(long)]
        production: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic scenario's inputs as CSV files.
    GenData {
        /// Built-in scenario name or path to a JSON config.
        #[arg(long, value_parser = parse_scenario)]
        spec: ScenarioConfig,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write plot-ready tables for a finished run into `<run>/report/`.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
}

fn parse_scenario(s: &str) -> Result<ScenarioConfig, String> {
    if let Some(c) = builtin_scenario(s) {
        return Ok(c);
    }
    let path = Path::new(s);
    if path.is_file() {
        return ScenarioConfig::from_file(path).map_err(|e| e.to_string());
    }
    Err(format!(
        "`{s}` is neither a built-in scenario (A, B, C) nor a config file"
    ))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let SimulateArgs {
        scenario: mut cfg,
        controller,
        out,
        seed,
        perfect_forecast,
        commitment,
        start,
        end,
        dump_lp,
    } = args;
    if let Some(c) = controller {
        cfg.controller = match c {
            Controller::Rbc => ControllerKind::Rbc,
            Controller::Mpc => ControllerKind::Mpc,
        };
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if perfect_forecast {
        cfg.forecast = ForecastMode::Perfect;
    }
    if commitment {
        cfg.dispatch.use_commitment = true;
    }
    if let Some(s) = start {
        cfg.period.start = s;
    }
    if let Some(e) = end {
        cfg.period.end = e;
    }
    if let Some(dir) = dump_lp {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        cfg.dispatch.dump_dir = Some(dir);
    }
    let run = run_scenario(&cfg)?;
    run.write(&out)
        .with_context(|| format!("writing outputs to {}", out.display()))?;
    let k = &run.kpi;
    eprintln!(
        "{} {}: {} steps, total cost {:.2} EUR (gas {:.2}, electricity {:.2}), curtailed {:.1} kWh, unmet {:.1} kWh, {:.2} s",
        k.scenario, k.controller, k.steps, k.total_cost, k.cost_gas, k.cost_elec, k.curtailed, k.unmet, k.runtime_seconds
    );
    if k.mpc_fallbacks > 0 {
        eprintln!("warning: {} steps fell back to RBC", k.mpc_fallbacks);
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Compare { kpi_a, kpi_b, out } => {
            let a = KpiReport::read(&kpi_a)?;
            let b = KpiReport::read(&kpi_b)?;
            let report = compare(&a, &b)?;
            fs::write(&out, report.to_csv()).with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
        Command::FitSolar {
            irradiance,
            ambient,
            production,
            out,
        } => {
            let g =
                read_csv(&irradiance, Unit::WattPerSquareMeter).with_context(|| irradiance.display().to_string())?;
            let t = read_csv(&ambient, Unit::DegreeCelsius).with_context(|| ambient.display().to_string())?;
            let p = read_csv(&production, Unit::KiloWatt).with_context(|| production.display().to_string())?;
            let c = fit_solar(&g, &t, &p)?;
            fs::write(&out, serde_json::to_string_pretty(&c)? + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!("P = {} G + {} T + {}", c.a_irradiance, c.b_ambient, c.c_offset);
            Ok(())
        }
        Command::GenData { spec, out } => {
            write_generated_data(&spec, &out)?;
            Ok(())
        }
        Command::Report { run } => {
            write_report(&run)?;
            Ok(())
        }
    }
}

/// Usage line of the subcommand named by `arg`, or of the whole tool.
fn usage_for(arg: Option<String>) -> clap::builder::StyledStr {
    let mut cmd = Cli::command();
    cmd.build();
    match arg.and_then(|a| cmd.find_subcommand_mut(&a).cloned()) {
        Some(mut sub) => sub.render_usage(),
        None => cmd.render_usage(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", usage_for(std::env::args().nth(1)));
            }
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
