//! Scenario configuration, serialized as JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::RbcParams;
use crate::dispatch::DispatchConfig;
use crate::lpsolver::SolverOptions;
use crate::plant::PlantParams;
use crate::timeseries::parse_timestamp;

use super::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "RBC", alias = "rbc")]
    Rbc,
    #[serde(rename = "MPC", alias = "mpc")]
    Mpc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMode {
    /// Solar forecast from the affine fit on weather data.
    Fitted,
    /// Solar forecast equal to the actual production.
    Perfect,
}

/// Flat-plate collector used to synthesize "measured" solar production.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollectorModel {
    /// Area the fitted coefficients refer to, m².
    pub reference_area: f64,
    pub eta0: f64,
    /// Linear heat loss coefficient, W/(m² K).
    pub a1: f64,
    /// Mean collector fluid temperature, °C.
    pub t_mean: f64,
}

impl Default for CollectorModel {
    fn default() -> Self {
        Self {
            reference_area: 70.0,
            eta0: 0.75,
            a1: 3.5,
            t_mean: 45.0,
        }
    }
}

impl CollectorModel {
    /// Thermal output of `area` m² of collector, kW.
    pub fn output(&self, area: f64, irradiance: f64, ambient: f64) -> f64 {
        area * (self.eta0 * irradiance - self.a1 * (self.t_mean - ambient)).max(0.0) / 1000.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticData {
    pub load_peak_kw: f64,
    /// Clear-sky noon irradiance on the collector plane, W/m².
    pub irradiance_peak: f64,
    /// Warmest seasonal daily mean temperature, °C.
    pub ambient_peak: f64,
    pub price_peak: f64,
    /// Noise level of the load, weather and price generators.
    pub noise_fraction: f64,
    /// Multiplicative noise on measured solar production.
    pub solar_noise: f64,
    /// Days of history before the period used to fit the solar model.
    pub training_days: u32,
    pub collector: CollectorModel,
}

impl Default for SyntheticData {
    fn default() -> Self {
        Self {
            load_peak_kw: 140.0,
            irradiance_peak: 700.0,
            ambient_peak: 20.0,
            price_peak: 0.09,
            noise_fraction: 0.2,
            solar_noise: 0.05,
            training_days: 28,
            collector: CollectorModel::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticData),
    /// `actuals` holds `timestamp,load_kW,solar_kW,price_eur_per_kWh`;
    /// `solar_forecast` a `timestamp,value_kW` file on the same grid.
    Csv {
        actuals: PathBuf,
        #[serde(default)]
        solar_forecast: Option<PathBuf>,
    },
}

/// Half-open UTC interval `[start, end)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub start: String,
    pub end: String,
}

impl Period {
    pub fn bounds(&self) -> Result<(i64, i64), RunError> {
        let start = parse_timestamp(&self.start).map_err(RunError::ConfigInvalid)?;
        let end = parse_timestamp(&self.end).map_err(RunError::ConfigInvalid)?;
        Ok((start, end))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub plant: PlantParams,
    pub controller: ControllerKind,
    #[serde(default)]
    pub rbc: RbcParams,
    #[serde(default)]
    pub dispatch: DispatchConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    pub data: DataSource,
    pub forecast: ForecastMode,
    pub period: Period,
    /// Hours.
    pub control_step: f64,
    pub seed: u64,
    /// EUR/kWh.
    pub gas_price: f64,
    /// kWh; half of `e_max` when absent.
    #[serde(default)]
    pub initial_energy: Option<f64>,
}

pub const BENCHMARK_START: &str = "2017-10-01T00:00:00Z";
pub const BENCHMARK_END: &str = "2017-12-26T00:00:00Z";

fn builtin(name: &str, p_gb_max: f64, p_hp_max: f64, solar_area: f64) -> ScenarioConfig {
    let plant = PlantParams::with_capacities(p_gb_max, p_hp_max, solar_area);
    ScenarioConfig {
        name: name.to_string(),
        rbc: RbcParams::for_plant(&plant),
        plant,
        controller: ControllerKind::Rbc,
        dispatch: DispatchConfig::default(),
        solver: SolverOptions::default(),
        data: DataSource::Synthetic(SyntheticData::default()),
        forecast: ForecastMode::Fitted,
        period: Period {
            start: BENCHMARK_START.into(),
            end: BENCHMARK_END.into(),
        },
        control_step: 0.5,
        seed: 1,
        gas_price: 0.065,
        initial_energy: None,
    }
}

/// The three sizings A, B and C over the 86-day benchmark period.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    vec![
        builtin("A", 200.0, 50.0, 70.0),
        builtin("B", 180.0, 70.0, 70.0),
        builtin("C", 200.0, 50.0, 35.0),
    ]
}

pub fn builtin_scenario(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
}

impl ScenarioConfig {
    /// Loads a JSON config; relative CSV paths are resolved against the
    /// config file's directory.
    pub fn from_file(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        let mut cfg: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| RunError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        if let (
            DataSource::Csv {
                actuals,
                solar_forecast,
            },
            Some(base),
        ) = (&mut cfg.data, path.parent())
        {
            *actuals = base.join(&*actuals);
            if let Some(f) = solar_forecast {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Number of control steps in the period.
    pub fn steps(&self) -> Result<usize, RunError> {
        let (start, end) = self.period.bounds()?;
        let step_s = (self.control_step * 3600.0).round() as i64;
        if step_s <= 0 {
            return Err(RunError::ConfigInvalid("control_step must be > 0".into()));
        }
        let span = end - start;
        if span < step_s || span % step_s != 0 {
            return Err(RunError::ConfigInvalid(format!(
                "period must span a positive whole number of {} h steps",
                self.control_step
            )));
        }
        Ok((span / step_s) as usize)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.steps()?;
        self.plant
            .validate()
            .map_err(|e| RunError::ConfigInvalid(format!("plant: {e}")))?;
        self.solver
            .validate()
            .map_err(|e| RunError::ConfigInvalid(format!("solver: {e}")))?;
        if (self.dispatch.dt - self.control_step).abs() > 1e-12 {
            return Err(RunError::ConfigInvalid(format!(
                "dispatch dt {} differs from control_step {}",
                self.dispatch.dt, self.control_step
            )));
        }
        if self.dispatch.horizon_steps == 0 {
            return Err(RunError::ConfigInvalid("dispatch.horizon_steps must be >= 1".into()));
        }
        if !(self.rbc.k_restore > 0.0) {
            return Err(RunError::ConfigInvalid("rbc.k_restore must be > 0".into()));
        }
        if !(self.gas_price > 0.0) {
            return Err(RunError::ConfigInvalid("gas_price must be > 0".into()));
        }
        if let Some(e) = self.initial_energy {
            if !(0.0..=self.plant.e_max).contains(&e) {
                return Err(RunError::ConfigInvalid(format!(
                    "initial_energy {e} outside [0, e_max]"
                )));
            }
        }
        if let DataSource::Csv {
            solar_forecast: None, ..
        } = self.data
        {
            if self.forecast == ForecastMode::Fitted {
                return Err(RunError::ConfigInvalid(
                    "csv data with a fitted forecast needs a solar_forecast file".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy.unwrap_or(0.5 * self.plant.e_max)
    }
}
