//! Closed-loop scenario runs: inputs, controller, plant, KPIs and exports.

pub mod config;
pub mod inputs;
pub mod kpi;

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use crate::control::{mpc_decide, rbc_decide, ControlAction, Measurement, Origin};
use crate::dispatch::{build_problem, extract_plan, DispatchConfig, DispatchError, DispatchPlan, Initial};
use crate::forecast::{make_bundle, ForecastBundle, ForecastError};
use crate::lpsolver::{solve_milp, LpError, SolverOptions, Status};
use crate::plant::{step, PlantError, PlantState, StepRecord};
use crate::timeseries::{
    format_timestamp, format_value, read_csv_table, write_csv_columns, TimeGrid, TimeSeries, TimeSeriesError, Unit,
};

pub use config::{
    builtin_scenario, builtin_scenarios, ControllerKind, DataSource, ForecastMode, Period, ScenarioConfig,
    SyntheticData,
};
pub use inputs::{assemble_inputs, write_generated_data, Inputs};
pub use kpi::{compare, recompute_costs, ComparisonReport, KpiReport};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("input data covers {available} steps, the run needs {needed}")]
    DataExhausted { needed: usize, available: usize },
    #[error("runs cover different periods: {0}")]
    PeriodMismatch(String),
    #[error("invalid KPI file: {0}")]
    KpiParse(String),
    #[error(transparent)]
    Series(#[from] TimeSeriesError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One controller decision, as logged.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRow {
    pub action: ControlAction,
    pub status: Option<Status>,
    pub iterations: u64,
    pub planned_cost: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    /// Grid of the simulated period.
    pub grid: TimeGrid,
    pub records: Vec<StepRecord>,
    pub elec_price: Vec<f64>,
    pub decisions: Vec<DecisionRow>,
    pub kpi: KpiReport,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let started = Instant::now();
    let n = cfg.steps()?;
    let dt = cfg.control_step;
    let inputs = assemble_inputs(cfg)?;
    let actuals = &inputs.actuals;
    let load = actuals.load.values();
    let solar = actuals.solar.values();
    let price = actuals.elec_price.values();
    let grid = actuals.load.grid().subgrid(0, n)?;
    let params = &cfg.plant;

    let mut state = PlantState::new(cfg.initial_energy());
    let mut acc = kpi::KpiAccumulator::new(params.cop, cfg.gas_price, params.loss_k, dt, state.energy);
    let mut records = Vec::with_capacity(n);
    let mut decisions = Vec::with_capacity(n);
    // No step has been observed yet: the first actual values stand in.
    let mut net_load = load[0] - solar[0];

    for i in 0..n {
        let m = Measurement {
            energy: state.energy,
            net_load,
        };
        let row = match cfg.controller {
            ControllerKind::Rbc => DecisionRow {
                action: rbc_decide(&m, params, &cfg.rbc, dt),
                status: None,
                iterations: 0,
                planned_cost: None,
            },
            ControllerKind::Mpc => {
                let bundle = make_bundle(
                    actuals,
                    &inputs.solar_forecast,
                    i,
                    cfg.dispatch.horizon_steps,
                    cfg.gas_price,
                )?;
                let out = mpc_decide(&state, &m, &bundle, params, &cfg.dispatch, &cfg.solver, &cfg.rbc);
                if out.action.origin == Origin::MpcFallback {
                    acc.count_fallback();
                }
                DecisionRow {
                    action: out.action,
                    status: out.status,
                    iterations: out.iterations,
                    planned_cost: out.plan.map(|p| p.planned_cost),
                }
            }
        };
        let before = state.energy;
        let (next, rec) = step(&state, params, &row.action, solar[i], load[i], dt)?;
        acc.add(&rec, price[i], before);
        net_load = rec.p_consumer - rec.p_solar_applied;
        state = next;
        records.push(rec);
        decisions.push(row);
        if (i + 1) % 1000 == 0 {
            log::debug!("{}: step {}/{n}", cfg.name, i + 1);
        }
    }

    let controller = match cfg.controller {
        ControllerKind::Rbc => "RBC",
        ControllerKind::Mpc => "MPC",
    };
    let kpi = acc.finish(
        &cfg.name,
        controller,
        (&format_timestamp(grid.start()), &format_timestamp(grid.end())),
        started.elapsed().as_secs_f64(),
    );
    Ok(RunOutput {
        config: cfg.clone(),
        grid,
        records,
        elec_price: price[..n].to_vec(),
        decisions,
        kpi,
    })
}

fn series(grid: TimeGrid, values: Vec<f64>, unit: Unit) -> Result<TimeSeries, RunError> {
    Ok(TimeSeries::new(grid, values, unit)?)
}

impl RunOutput {
    pub fn step_columns(&self) -> Result<Vec<(&'static str, TimeSeries)>, RunError> {
        let g = self.grid;
        let col = |f: fn(&StepRecord) -> f64| self.records.iter().map(f).collect::<Vec<_>>();
        Ok(vec![
            ("p_hp", series(g, col(|r| r.p_hp_applied), Unit::KiloWatt)?),
            ("p_gb", series(g, col(|r| r.p_gb_applied), Unit::KiloWatt)?),
            ("p_solar", series(g, col(|r| r.p_solar_applied), Unit::KiloWatt)?),
            ("p_consumer", series(g, col(|r| r.p_consumer), Unit::KiloWatt)?),
            ("energy", series(g, col(|r| r.energy_after), Unit::KiloWattHour)?),
            ("curtailed", series(g, col(|r| r.curtailed), Unit::KiloWattHour)?),
            ("unmet", series(g, col(|r| r.unmet), Unit::KiloWattHour)?),
            (
                "elec_price",
                series(g, self.elec_price.clone(), Unit::EurPerKiloWattHour)?,
            ),
        ])
    }

    pub fn decisions_csv(&self) -> String {
        let mut s =
            String::from("timestamp,origin,p_hp_set_kW,p_gb_set_kW,solver_status,solver_iterations,planned_cost_eur\n");
        for (i, d) in self.decisions.iter().enumerate() {
            let status = match (d.action.origin, d.status) {
                (Origin::Rbc, _) => "none".to_string(),
                (_, Some(st)) => st.to_string(),
                (_, None) => "build_error".to_string(),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{status},{},{}",
                format_timestamp(self.grid.timestamp(i)),
                d.action.origin,
                format_value(d.action.p_hp_set),
                format_value(d.action.p_gb_set),
                d.iterations,
                d.planned_cost.map(format_value).unwrap_or_default()
            );
        }
        s
    }

    /// Writes `steps.csv`, `decisions.csv`, `kpi.txt` and `config.json`.
    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        fs::create_dir_all(dir)?;
        let cols = self.step_columns()?;
        let refs: Vec<(&str, &TimeSeries)> = cols.iter().map(|(n, s)| (*n, s)).collect();
        write_csv_columns(&refs, &dir.join("steps.csv"))?;
        fs::write(dir.join("decisions.csv"), self.decisions_csv())?;
        fs::write(dir.join("kpi.txt"), self.kpi.to_kv())?;
        fs::write(dir.join("config.json"), self.config.to_json())?;
        Ok(())
    }
}

/// Full-period dispatch solved once on actual inputs.
#[derive(Clone, Debug)]
pub struct OpenLoop {
    pub status: Status,
    pub plan: Option<DispatchPlan>,
    pub iterations: u64,
}

/// Single-shot optimum over the whole period with perfect knowledge of
/// load, solar and prices. Only practical for short periods: the solver is
/// dense.
pub fn open_loop_optimum(cfg: &ScenarioConfig, solver: &SolverOptions) -> Result<OpenLoop, RunError> {
    cfg.validate()?;
    let n = cfg.steps()?;
    let inputs = assemble_inputs(cfg)?;
    let a = &inputs.actuals;
    let bundle = ForecastBundle::new(
        a.load.slice_window(0, n)?,
        a.solar.slice_window(0, n)?,
        a.elec_price.slice_window(0, n)?,
        cfg.gas_price,
    )?;
    let dispatch = DispatchConfig {
        horizon_steps: n,
        dump_dir: None,
        ..cfg.dispatch.clone()
    };
    let initial = Initial::energy_only(cfg.initial_energy());
    let (problem, layout) = build_problem(&initial, &bundle, &cfg.plant, &dispatch)?;
    let solution = solve_milp(&problem, solver)?;
    let plan = match solution.status {
        Status::Optimal => Some(extract_plan(&solution, &layout, initial.energy)?),
        _ => None,
    };
    Ok(OpenLoop {
        status: solution.status,
        plan,
        iterations: solution.iterations,
    })
}

/// Writes plot-ready tables for a finished run into `<run>/report/`.
pub fn write_report(run_dir: &Path) -> Result<(), RunError> {
    let steps = read_csv_table(&run_dir.join("steps.csv"))?;
    let cfg: ScenarioConfig = serde_json::from_str(&fs::read_to_string(run_dir.join("config.json"))?)
        .map_err(|e| RunError::ConfigInvalid(format!("config.json: {e}")))?;
    let out = run_dir.join("report");
    fs::create_dir_all(&out)?;
    let col = |name: &str, unit: Unit| -> Result<TimeSeries, RunError> {
        let prefix = name
            .strip_suffix(&format!("_{}", unit.suffix()))
            .ok_or_else(|| RunError::KpiParse(format!("bad column {name}")))?;
        Ok(steps.series(prefix, unit)?)
    };
    let hp = col("p_hp_kW", Unit::KiloWatt)?;
    let gb = col("p_gb_kW", Unit::KiloWatt)?;
    let solar = col("p_solar_kW", Unit::KiloWatt)?;
    let consumer = col("p_consumer_kW", Unit::KiloWatt)?;
    write_csv_columns(
        &[
            ("heat_pump", &hp),
            ("gas_boiler", &gb),
            ("solar", &solar),
            ("consumer", &consumer),
        ],
        &out.join("production.csv"),
    )?;
    let energy = col("energy_kWh", Unit::KiloWattHour)?;
    let curtailed = col("curtailed_kWh", Unit::KiloWattHour)?;
    write_csv_columns(
        &[("energy", &energy), ("curtailed", &curtailed)],
        &out.join("storage.csv"),
    )?;
    let price = col("elec_price_eur_per_kWh", Unit::EurPerKiloWattHour)?;
    let hp_heat = price.map(|p| p / cfg.plant.cop)?;
    let gas = TimeSeries::constant(*price.grid(), cfg.gas_price, Unit::EurPerKiloWattHour)?;
    write_csv_columns(
        &[
            ("elec_price", &price),
            ("heat_pump_heat_cost", &hp_heat),
            ("gas_price", &gas),
        ],
        &out.join("prices.csv"),
    )?;

    // Daily heat per source, kWh.
    let dt = steps.grid.step_hours();
    let mut daily = String::from("date,heat_pump_kWh,gas_boiler_kWh,solar_kWh,consumer_kWh,curtailed_kWh\n");
    let mut current: Option<(String, [f64; 5])> = None;
    for i in 0..steps.grid.count() {
        let day = format_timestamp(steps.grid.timestamp(i))[..10].to_string();
        let row = [
            dt * hp.values()[i],
            dt * gb.values()[i],
            dt * solar.values()[i],
            dt * consumer.values()[i],
            curtailed.values()[i],
        ];
        match &mut current {
            Some((d, sums)) if *d == day => sums.iter_mut().zip(row).for_each(|(s, v)| *s += v),
            _ => {
                if let Some((d, sums)) = current.take() {
                    push_daily(&mut daily, &d, &sums);
                }
                current = Some((day, row));
            }
        }
    }
    if let Some((d, sums)) = current {
        push_daily(&mut daily, &d, &sums);
    }
    fs::write(out.join("daily.csv"), daily)?;
    Ok(())
}

fn push_daily(out: &mut String, day: &str, sums: &[f64; 5]) {
    let _ = write!(out, "{day}");
    for v in sums {
        let _ = write!(out, ",{}", format_value(*v));
    }
    out.push('\n');
}
