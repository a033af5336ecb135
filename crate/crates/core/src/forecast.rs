//! Solar production model and the forecast bundle handed to the MPC.
//!
//! Load and prices are forecast perfectly (the bundle slices the actual
//! series); solar comes from an affine fit on tilted irradiance and ambient
//! temperature, so it is the only imperfect forecast.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::{TimeSeries, TimeSeriesError, Unit};

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("design matrix is rank deficient ({0})")]
    RankDeficient(&'static str),
    #[error("series are not on the same time grid")]
    GridMismatch,
    #[error("need at least 3 samples, got {0}")]
    TooFewPoints(usize),
    #[error("invalid forecast bundle: {0}")]
    InvalidBundle(String),
    #[error(transparent)]
    Series(#[from] TimeSeriesError),
}

/// `P = a * G + b * T + c`, kW.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolarFitCoefficients {
    /// kW per W/m².
    pub a_irradiance: f64,
    /// kW per °C.
    pub b_ambient: f64,
    /// kW.
    pub c_offset: f64,
}

impl SolarFitCoefficients {
    pub fn eval(&self, irradiance: f64, ambient: f64) -> f64 {
        self.a_irradiance * irradiance + self.b_ambient * ambient + self.c_offset
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Gaussian elimination with partial pivoting on a 3x3 system. `scale` is
/// the magnitude of the matrix diagonal; pivots below `1e-10 * scale` mean
/// the columns are (numerically) dependent.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3], scale: f64) -> Option<[f64; 3]> {
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            let pivot = a[col];
            for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least-squares affine fit on raw samples.
///
/// Columns are centered and scaled before the normal equations are formed,
/// which keeps `X'X` well conditioned for irradiance in the hundreds and
/// temperatures near zero.
pub fn fit_affine(
    irradiance: &[f64],
    ambient: &[f64],
    production: &[f64],
) -> Result<SolarFitCoefficients, ForecastError> {
    let n = production.len();
    if irradiance.len() != n || ambient.len() != n {
        return Err(ForecastError::GridMismatch);
    }
    if n < 3 {
        return Err(ForecastError::TooFewPoints(n));
    }
    let (mg, sg) = mean_std(irradiance);
    let (mt, st) = mean_std(ambient);
    if sg == 0.0 {
        return Err(ForecastError::RankDeficient("irradiance is constant"));
    }
    if st == 0.0 {
        return Err(ForecastError::RankDeficient("ambient temperature is constant"));
    }

    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for i in 0..n {
        let row = [1.0, (irradiance[i] - mg) / sg, (ambient[i] - mt) / st];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
            aty[r] += row[r] * production[i];
        }
    }
    let beta = solve3(ata, aty, n as f64).ok_or(ForecastError::RankDeficient(
        "irradiance and ambient temperature are collinear",
    ))?;
    let a = beta[1] / sg;
    let b = beta[2] / st;
    Ok(SolarFitCoefficients {
        a_irradiance: a,
        b_ambient: b,
        c_offset: beta[0] - a * mg - b * mt,
    })
}

pub fn fit_solar(
    irradiance: &TimeSeries,
    ambient: &TimeSeries,
    production: &TimeSeries,
) -> Result<SolarFitCoefficients, ForecastError> {
    if irradiance.grid() != production.grid() || ambient.grid() != production.grid() {
        return Err(ForecastError::GridMismatch);
    }
    fit_affine(irradiance.values(), ambient.values(), production.values())
}

/// Predicted solar power for a field `area_scale` times the fitted one,
/// clipped at zero.
pub fn predict_solar(
    coeffs: &SolarFitCoefficients,
    irradiance: &TimeSeries,
    ambient: &TimeSeries,
    area_scale: f64,
) -> Result<TimeSeries, ForecastError> {
    if irradiance.grid() != ambient.grid() {
        return Err(ForecastError::GridMismatch);
    }
    let values = irradiance
        .values()
        .iter()
        .zip(ambient.values())
        .map(|(&g, &t)| (area_scale * coeffs.eval(g, t)).max(0.0))
        .collect();
    Ok(TimeSeries::new(*irradiance.grid(), values, Unit::KiloWatt)?)
}

/// Realized inputs over the whole simulation span.
#[derive(Clone, Debug)]
pub struct Actuals {
    pub load: TimeSeries,
    pub solar: TimeSeries,
    pub elec_price: TimeSeries,
}

impl Actuals {
    pub fn new(load: TimeSeries, solar: TimeSeries, elec_price: TimeSeries) -> Result<Self, ForecastError> {
        if load.grid() != solar.grid() || load.grid() != elec_price.grid() {
            return Err(ForecastError::GridMismatch);
        }
        Ok(Self {
            load,
            solar,
            elec_price,
        })
    }
}

/// What the MPC sees over one horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastBundle {
    pub load: TimeSeries,
    pub solar: TimeSeries,
    pub elec_price: TimeSeries,
    /// Constant gas price, EUR/kWh.
    pub gas_price: f64,
}

impl ForecastBundle {
    pub fn new(
        load: TimeSeries,
        solar: TimeSeries,
        elec_price: TimeSeries,
        gas_price: f64,
    ) -> Result<Self, ForecastError> {
        if load.grid() != solar.grid() || load.grid() != elec_price.grid() {
            return Err(ForecastError::GridMismatch);
        }
        if solar.values().iter().any(|&v| v < 0.0) {
            return Err(ForecastError::InvalidBundle("negative solar forecast".into()));
        }
        if elec_price.values().iter().any(|&v| v <= 0.0) || !(gas_price > 0.0) {
            return Err(ForecastError::InvalidBundle("prices must be positive".into()));
        }
        Ok(Self {
            load,
            solar,
            elec_price,
            gas_price,
        })
    }

    pub fn len(&self) -> usize {
        self.load.len()
    }

    pub fn is_empty(&self) -> bool {
        self.load.is_empty()
    }
}

/// Bundle for `[start, start + length)`: actual load and prices, predicted solar.
pub fn make_bundle(
    actuals: &Actuals,
    solar_predicted: &TimeSeries,
    start: usize,
    length: usize,
    gas_price: f64,
) -> Result<ForecastBundle, ForecastError> {
    if solar_predicted.grid() != actuals.load.grid() {
        return Err(ForecastError::GridMismatch);
    }
    ForecastBundle::new(
        actuals.load.slice_window(start, length)?,
        solar_predicted.slice_window(start, length)?,
        actuals.elec_price.slice_window(start, length)?,
        gas_price,
    )
}
