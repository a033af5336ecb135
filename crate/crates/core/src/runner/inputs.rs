//! Actual inputs and the solar forecast for one run, from synthetic
//! generators or CSV files.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forecast::{fit_solar, predict_solar, Actuals, SolarFitCoefficients};
use crate::timeseries::{
    generate_synthetic, read_csv, read_csv_table, write_csv, write_csv_columns, SyntheticKind, SyntheticSpec, TimeGrid,
    TimeSeries, Unit,
};

use super::config::{DataSource, ForecastMode, ScenarioConfig, SyntheticData};
use super::RunError;

/// Stream id of the measurement noise on solar production.
const SOLAR_NOISE_STREAM: u64 = 5;

/// Weather and reference-field production used for the solar fit.
#[derive(Clone, Debug)]
pub struct TrainingData {
    pub irradiance: TimeSeries,
    pub ambient: TimeSeries,
    pub production: TimeSeries,
}

#[derive(Clone, Debug)]
pub struct Inputs {
    /// Period plus one horizon of lookahead, starting at the period start.
    pub actuals: Actuals,
    pub solar_forecast: TimeSeries,
    pub training: Option<TrainingData>,
    pub coefficients: Option<SolarFitCoefficients>,
}

/// Steps of data the run needs: the period plus one dispatch horizon.
pub fn span_steps(cfg: &ScenarioConfig) -> Result<usize, RunError> {
    Ok(cfg.steps()? + cfg.dispatch.horizon_steps)
}

fn spec(kind: SyntheticKind, peak: f64, seed: u64, noise: f64) -> Result<SyntheticSpec, RunError> {
    SyntheticSpec::new(kind, peak, seed, noise).map_err(|e| RunError::ConfigInvalid(format!("synthetic data: {e}")))
}

fn synthetic(cfg: &ScenarioConfig, data: &SyntheticData) -> Result<Inputs, RunError> {
    let (start, _) = cfg.period.bounds()?;
    let step_s = (cfg.control_step * 3600.0).round() as i64;
    let span = span_steps(cfg)?;
    let per_day = (86_400 / step_s) as usize;
    let train = data.training_days as usize * per_day;
    let full = TimeGrid::new(start - train as i64 * step_s, step_s, train + span)?;
    let run = full.subgrid(train, span)?;

    let irradiance = generate_synthetic(
        &spec(
            SyntheticKind::SolarIrradiance,
            data.irradiance_peak,
            cfg.seed,
            data.noise_fraction,
        )?,
        &full,
    );
    let ambient = generate_synthetic(
        &spec(
            SyntheticKind::AmbientTemp,
            data.ambient_peak,
            cfg.seed,
            data.noise_fraction,
        )?,
        &full,
    );
    let load = generate_synthetic(
        &spec(
            SyntheticKind::HeatLoad,
            data.load_peak_kw,
            cfg.seed,
            data.noise_fraction,
        )?,
        &run,
    );
    let price = generate_synthetic(
        &spec(SyntheticKind::ElecPrice, data.price_peak, cfg.seed, data.noise_fraction)?,
        &run,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SOLAR_NOISE_STREAM);
    let reference: Vec<f64> = irradiance
        .values()
        .iter()
        .zip(ambient.values())
        .map(|(&g, &t)| {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            data.collector.output(data.collector.reference_area, g, t) * (1.0 + data.solar_noise * u)
        })
        .collect();
    let reference = TimeSeries::new(full, reference, Unit::KiloWatt)?;
    let area_scale = cfg.plant.solar_area / data.collector.reference_area;

    let training = TrainingData {
        irradiance: irradiance.slice_window(0, train)?,
        ambient: ambient.slice_window(0, train)?,
        production: reference.slice_window(0, train)?,
    };
    let actual_solar = reference.slice_window(train, span)?.map(|v| v * area_scale)?;
    let (coefficients, solar_forecast) = match cfg.forecast {
        ForecastMode::Perfect => (None, actual_solar.clone()),
        ForecastMode::Fitted => {
            let c = fit_solar(&training.irradiance, &training.ambient, &training.production)?;
            let f = predict_solar(
                &c,
                &irradiance.slice_window(train, span)?,
                &ambient.slice_window(train, span)?,
                area_scale,
            )?;
            (Some(c), f)
        }
    };
    Ok(Inputs {
        actuals: Actuals::new(load, actual_solar, price)?,
        solar_forecast,
        training: Some(training),
        coefficients,
    })
}

fn from_csv(cfg: &ScenarioConfig, actuals_path: &Path, forecast_path: Option<&Path>) -> Result<Inputs, RunError> {
    let (start, _) = cfg.period.bounds()?;
    let span = span_steps(cfg)?;
    let table = read_csv_table(actuals_path)?;
    let step_s = (cfg.control_step * 3600.0).round() as i64;
    if table.grid.step_seconds() != step_s {
        return Err(RunError::ConfigInvalid(format!(
            "{}: data step is {} s, control step is {} s",
            actuals_path.display(),
            table.grid.step_seconds(),
            step_s
        )));
    }
    let first = table.grid.index_of(start).ok_or_else(|| {
        RunError::ConfigInvalid(format!("{}: period start not on the data grid", actuals_path.display()))
    })?;
    let available = table.grid.count() - first;
    if available < span {
        return Err(RunError::DataExhausted {
            needed: span,
            available,
        });
    }
    let window = |s: TimeSeries| s.slice_window(first, span);
    let load = window(table.series("load", Unit::KiloWatt)?)?;
    let solar = window(table.series("solar", Unit::KiloWatt)?)?;
    let price = window(table.series("price", Unit::EurPerKiloWattHour)?)?;

    let solar_forecast = match (cfg.forecast, forecast_path) {
        (ForecastMode::Perfect, _) => solar.clone(),
        (ForecastMode::Fitted, Some(p)) => {
            let f = read_csv(p, Unit::KiloWatt)?;
            let i = f
                .grid()
                .index_of(start)
                .ok_or_else(|| RunError::ConfigInvalid(format!("{}: period start not on the grid", p.display())))?;
            if f.grid().step_seconds() != step_s || f.len() - i < span {
                return Err(RunError::DataExhausted {
                    needed: span,
                    available: f.len() - i,
                });
            }
            f.slice_window(i, span)?
        }
        (ForecastMode::Fitted, None) => {
            return Err(RunError::ConfigInvalid(
                "fitted forecast needs a solar_forecast file".into(),
            ))
        }
    };
    Ok(Inputs {
        actuals: Actuals::new(load, solar, price)?,
        solar_forecast,
        training: None,
        coefficients: None,
    })
}

pub fn assemble_inputs(cfg: &ScenarioConfig) -> Result<Inputs, RunError> {
    match &cfg.data {
        DataSource::Synthetic(d) => synthetic(cfg, d),
        DataSource::Csv {
            actuals,
            solar_forecast,
        } => from_csv(cfg, actuals, solar_forecast.as_deref()),
    }
}

/// Writes a synthetic scenario's inputs as CSV, plus a config that replays
/// them in CSV mode. Returns that config.
pub fn write_generated_data(cfg: &ScenarioConfig, out: &Path) -> Result<ScenarioConfig, RunError> {
    let DataSource::Synthetic(_) = cfg.data else {
        return Err(RunError::ConfigInvalid("gen-data needs a synthetic data source".into()));
    };
    fs::create_dir_all(out)?;
    let inputs = assemble_inputs(cfg)?;
    let a = &inputs.actuals;
    write_csv_columns(
        &[("load", &a.load), ("solar", &a.solar), ("price", &a.elec_price)],
        &out.join("inputs.csv"),
    )?;
    write_csv(&inputs.solar_forecast, &out.join("solar_forecast.csv"))?;
    if let Some(t) = &inputs.training {
        write_csv(&t.irradiance, &out.join("irradiance.csv"))?;
        write_csv(&t.ambient, &out.join("ambient.csv"))?;
        write_csv(&t.production, &out.join("production.csv"))?;
    }
    if let Some(c) = &inputs.coefficients {
        fs::write(
            out.join("coefficients.json"),
            serde_json::to_string_pretty(c).expect("coefficients serialize") + "\n",
        )?;
    }
    let mut replay = cfg.clone();
    replay.data = DataSource::Csv {
        actuals: "inputs.csv".into(),
        solar_forecast: Some("solar_forecast.csv".into()),
    };
    fs::write(out.join("scenario.json"), replay.to_json())?;
    Ok(replay)
}
