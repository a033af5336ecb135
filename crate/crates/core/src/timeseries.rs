//! Uniformly sampled time series, CSV ingestion and synthetic input generators.
//!
//! Every series lives on a [`TimeGrid`]: a start instant (UTC seconds), a
//! fixed step and a point count. There is no irregular sampling; inputs that
//! are not uniformly spaced are rejected at the boundary.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const SECONDS_PER_HOUR: f64 = 3600.0;
const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Error)]
pub enum TimeSeriesError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("series has {values} values but grid has {count} points")]
    LengthMismatch { values: usize, count: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("non-uniform grid: row {row} spacing {found_s} s differs from {expected_s} s")]
    NonUniformGrid { row: usize, expected_s: i64, found_s: i64 },
    #[error("parse error at row {row}: {message}")]
    ParseError { row: usize, message: String },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("unit mismatch: expected {expected}, file declares {found}")]
    UnitMismatch { expected: Unit, found: String },
    #[error("series are not on the same time grid")]
    GridMismatch,
    #[error("window [{start}, {start}+{length}) out of range for {count} points")]
    OutOfRange { start: usize, length: usize, count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TimeSeriesError>;

/// Physical unit carried by a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "kW")]
    KiloWatt,
    #[serde(rename = "kWh")]
    KiloWattHour,
    #[serde(rename = "eur_per_kWh")]
    EurPerKiloWattHour,
    #[serde(rename = "W_per_m2")]
    WattPerSquareMeter,
    #[serde(rename = "degC")]
    DegreeCelsius,
}

impl Unit {
    pub const ALL: [Unit; 5] = [
        Unit::KiloWatt,
        Unit::KiloWattHour,
        Unit::EurPerKiloWattHour,
        Unit::WattPerSquareMeter,
        Unit::DegreeCelsius,
    ];

    /// Column-header suffix, e.g. `kW` in `value_kW`.
    pub fn suffix(self) -> &'static str {
        match self {
            Unit::KiloWatt => "kW",
            Unit::KiloWattHour => "kWh",
            Unit::EurPerKiloWattHour => "eur_per_kWh",
            Unit::WattPerSquareMeter => "W_per_m2",
            Unit::DegreeCelsius => "degC",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Unit::ALL
            .into_iter()
            .find(|u| u.suffix() == s)
            .ok_or_else(|| format!("unknown unit `{s}`"))
    }
}

/// Uniform sampling grid. Timestamps are whole UTC seconds so that
/// `timestamp(i) = start + i * step` is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TimeGrid {
    start: i64,
    step_seconds: i64,
    count: usize,
}

impl TimeGrid {
    pub fn new(start: i64, step_seconds: i64, count: usize) -> Result<Self> {
        if step_seconds <= 0 {
            return Err(TimeSeriesError::InvalidGrid(format!(
                "step must be positive, got {step_seconds} s"
            )));
        }
        if count == 0 {
            return Err(TimeSeriesError::InvalidGrid("count must be at least 1".into()));
        }
        Ok(Self {
            start,
            step_seconds,
            count,
        })
    }

    /// Builds a grid from a step in hours; the step is rounded to whole seconds.
    pub fn with_step_hours(start: i64, step_hours: f64, count: usize) -> Result<Self> {
        if !(step_hours.is_finite() && step_hours > 0.0) {
            return Err(TimeSeriesError::InvalidGrid(format!(
                "step must be positive, got {step_hours} h"
            )));
        }
        Self::new(start, (step_hours * SECONDS_PER_HOUR).round() as i64, count)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn step_seconds(&self) -> i64 {
        self.step_seconds
    }

    pub fn step_hours(&self) -> f64 {
        self.step_seconds as f64 / SECONDS_PER_HOUR
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn timestamp(&self, i: usize) -> i64 {
        self.start + i as i64 * self.step_seconds
    }

    /// First instant after the last sample.
    pub fn end(&self) -> i64 {
        self.timestamp(self.count)
    }

    /// Index of `ts` on this grid, if it is a grid point.
    pub fn index_of(&self, ts: i64) -> Option<usize> {
        let off = ts - self.start;
        if off < 0 || off % self.step_seconds != 0 {
            return None;
        }
        let i = (off / self.step_seconds) as usize;
        (i < self.count).then_some(i)
    }

    pub fn subgrid(&self, start_index: usize, length: usize) -> Result<Self> {
        if length == 0 || start_index + length > self.count {
            return Err(TimeSeriesError::OutOfRange {
                start: start_index,
                length,
                count: self.count,
            });
        }
        Self::new(self.timestamp(start_index), self.step_seconds, length)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
    unit: Unit,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(TimeSeriesError::LengthMismatch {
                values: values.len(),
                count: grid.count(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(TimeSeriesError::NonFinite(i));
        }
        Ok(Self { grid, values, unit })
    }

    pub fn constant(grid: TimeGrid, value: f64, unit: Unit) -> Result<Self> {
        Self::new(grid, vec![value; grid.count()], unit)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Applies `f` element-wise, keeping grid and unit. Fails if `f` yields a
    /// non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.unit)
    }

    /// Contiguous sub-series `[start_index, start_index + length)`.
    pub fn slice_window(&self, start_index: usize, length: usize) -> Result<Self> {
        let grid = self.grid.subgrid(start_index, length)?;
        Ok(Self {
            grid,
            values: self.values[start_index..start_index + length].to_vec(),
            unit: self.unit,
        })
    }
}

pub fn format_timestamp(ts: i64) -> String {
    match DateTime::<Utc>::from_timestamp(ts, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => ts.to_string(),
    }
}

/// Parses an ISO-8601 timestamp. Inputs without an offset are taken as UTC.
pub fn parse_timestamp(s: &str) -> std::result::Result<i64, String> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp());
        }
    }
    Err(format!("invalid ISO-8601 timestamp `{s}`"))
}

/// Shortest decimal representation that parses back to the identical `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Grid inferred from a list of strictly increasing, uniformly spaced stamps.
fn infer_grid(stamps: &[i64]) -> Result<TimeGrid> {
    if stamps.len() < 2 {
        return Err(TimeSeriesError::ParseError {
            row: stamps.len(),
            message: "at least 2 rows are required to infer the time step".into(),
        });
    }
    let step = stamps[1] - stamps[0];
    if step <= 0 {
        return Err(TimeSeriesError::ParseError {
            row: 2,
            message: "timestamps must be strictly increasing".into(),
        });
    }
    for (i, pair) in stamps.windows(2).enumerate() {
        let d = pair[1] - pair[0];
        if ((d - step) as f64).abs() > 1e-6 * step as f64 {
            return Err(TimeSeriesError::NonUniformGrid {
                row: i + 2,
                expected_s: step,
                found_s: d,
            });
        }
    }
    TimeGrid::new(stamps[0], step, stamps.len())
}

/// Parsed multi-column CSV: one grid, named columns in file order.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub grid: TimeGrid,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Extracts column `<prefix>_<unit>` as a series.
    pub fn series(&self, prefix: &str, unit: Unit) -> Result<TimeSeries> {
        let name = format!("{prefix}_{}", unit.suffix());
        let values = self.column(&name).ok_or_else(|| TimeSeriesError::ParseError {
            row: 0,
            message: format!("missing column `{name}`"),
        })?;
        TimeSeries::new(self.grid, values.to_vec(), unit)
    }
}

/// Reads a `timestamp,<col>,<col>...` CSV. Row numbers in errors are 1-based
/// file lines (the header is line 1).
pub fn read_csv_table(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(TimeSeriesError::EmptyFile)?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.len() < 2 || names[0] != "timestamp" {
        return Err(TimeSeriesError::ParseError {
            row: 1,
            message: "header must start with `timestamp` followed by value columns".into(),
        });
    }
    let ncol = names.len() - 1;
    let mut stamps = Vec::new();
    let mut cols = vec![Vec::new(); ncol];
    for (idx, line) in lines {
        let row = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(TimeSeriesError::ParseError {
                row,
                message: format!("expected {} fields, found {}", names.len(), fields.len()),
            });
        }
        let ts = parse_timestamp(fields[0]).map_err(|message| TimeSeriesError::ParseError { row, message })?;
        stamps.push(ts);
        for (c, field) in fields[1..].iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| TimeSeriesError::ParseError {
                row,
                message: format!("invalid number `{}`", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(TimeSeriesError::ParseError {
                    row,
                    message: "non-finite value".into(),
                });
            }
            cols[c].push(v);
        }
    }
    if stamps.is_empty() {
        return Err(TimeSeriesError::EmptyFile);
    }
    let grid = infer_grid(&stamps)?;
    Ok(CsvTable {
        grid,
        columns: names[1..].iter().map(|s| s.to_string()).zip(cols).collect(),
    })
}

/// Reads a single-series `timestamp,value_<unit>` file.
pub fn read_csv(path: &Path, expected_unit: Unit) -> Result<TimeSeries> {
    let table = read_csv_table(path)?;
    let (name, values) = &table.columns[0];
    if table.columns.len() != 1 {
        return Err(TimeSeriesError::ParseError {
            row: 1,
            message: format!("expected one value column, found {}", table.columns.len()),
        });
    }
    match name.strip_prefix("value_") {
        Some(u) if u == expected_unit.suffix() => {}
        Some(u) => {
            return Err(TimeSeriesError::UnitMismatch {
                expected: expected_unit,
                found: u.to_string(),
            })
        }
        None => {
            return Err(TimeSeriesError::ParseError {
                row: 1,
                message: format!("value column must be named `value_<unit>`, found `{name}`"),
            })
        }
    }
    TimeSeries::new(table.grid, values.clone(), expected_unit)
}

/// Writes aligned series as `timestamp,<name>_<unit>,...`.
pub fn write_csv_columns(columns: &[(&str, &TimeSeries)], path: &Path) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(TimeSeriesError::InvalidGrid("no series to write".into()));
    };
    let grid = *first.grid();
    if columns.iter().any(|(_, s)| *s.grid() != grid) {
        return Err(TimeSeriesError::GridMismatch);
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    write!(out, "timestamp")?;
    for (name, s) in columns {
        write!(out, ",{name}_{}", s.unit().suffix())?;
    }
    writeln!(out)?;
    for i in 0..grid.count() {
        write!(out, "{}", format_timestamp(grid.timestamp(i)))?;
        for (_, s) in columns {
            write!(out, ",{}", format_value(s.values()[i]))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    write_csv_columns(&[("value", series)], path)
}

/// Which synthetic profile to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    HeatLoad,
    SolarIrradiance,
    AmbientTemp,
    ElecPrice,
}

impl SyntheticKind {
    pub fn unit(self) -> Unit {
        match self {
            SyntheticKind::HeatLoad => Unit::KiloWatt,
            SyntheticKind::SolarIrradiance => Unit::WattPerSquareMeter,
            SyntheticKind::AmbientTemp => Unit::DegreeCelsius,
            SyntheticKind::ElecPrice => Unit::EurPerKiloWattHour,
        }
    }

    fn stream(self) -> u64 {
        match self {
            SyntheticKind::HeatLoad => 1,
            SyntheticKind::SolarIrradiance => 2,
            SyntheticKind::AmbientTemp => 3,
            SyntheticKind::ElecPrice => 4,
        }
    }
}

/// Parameters of a synthetic profile.
///
/// `peak` is in the unit of the kind: the series maximum for heat load, the
/// clear-sky noon irradiance, the warmest seasonal daily mean for ambient
/// temperature and the evening price peak for electricity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub peak: f64,
    pub seed: u64,
    pub noise_fraction: f64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, peak: f64, seed: u64, noise_fraction: f64) -> Result<Self> {
        if !(peak.is_finite() && peak > 0.0) {
            return Err(TimeSeriesError::InvalidGrid(format!("peak must be > 0, got {peak}")));
        }
        if !(0.0..1.0).contains(&noise_fraction) {
            return Err(TimeSeriesError::InvalidGrid(format!(
                "noise_fraction must be in [0, 1), got {noise_fraction}"
            )));
        }
        Ok(Self {
            kind,
            peak,
            seed,
            noise_fraction,
        })
    }
}

/// Random draws keyed by (seed, kind, UTC day). Generator identity is
/// ChaCha8 with the seed as key and `kind * 2^32 + day` as stream, so a
/// day's draws do not depend on where the grid starts.
fn day_rng(seed: u64, kind: SyntheticKind, day: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind.stream() << 32) ^ (day as u64 & 0xFFFF_FFFF));
    rng
}

fn bump(hour: f64, center: f64, width: f64) -> f64 {
    (-((hour - center) / width).powi(2)).exp()
}

fn day_of_year(ts: i64) -> f64 {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|d| chrono::Datelike::ordinal0(&d) as f64)
        .unwrap_or(0.0)
}

fn hour_of_day(ts: i64) -> f64 {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|d| d.num_seconds_from_midnight() as f64 / SECONDS_PER_HOUR)
        .unwrap_or(0.0)
}

/// Deterministic synthetic profile for `spec` on `grid`.
///
/// * heat load: heating-season envelope times a morning/evening double peak,
///   rescaled so the series maximum equals `peak` and the minimum is at least
///   `0.1 * peak`;
/// * irradiance: half-sine between 06:00 and 18:00 UTC times a daily cloud
///   factor in `[0.2, 1]`, zero at night;
/// * ambient temperature: seasonal mean plus a daily sinusoid (minimum 05:00,
///   maximum 17:00);
/// * electricity price: base plus morning and evening highs with noise,
///   floored at 5% of `peak`.
pub fn generate_synthetic(spec: &SyntheticSpec, grid: &TimeGrid) -> TimeSeries {
    let n = grid.count();
    let mut values = Vec::with_capacity(n);
    let mut day = i64::MIN;
    let mut rng = day_rng(spec.seed, spec.kind, 0);
    let mut day_factor = 1.0;
    let noise = spec.noise_fraction;

    for i in 0..n {
        let ts = grid.timestamp(i);
        let d = ts.div_euclid(SECONDS_PER_DAY);
        if d != day {
            day = d;
            rng = day_rng(spec.seed, spec.kind, d);
            day_factor = match spec.kind {
                SyntheticKind::SolarIrradiance => rng.gen_range(0.2..=1.0),
                _ => rng.gen_range(-1.0..=1.0),
            };
        }
        let u: f64 = rng.gen_range(-1.0..=1.0);
        let h = hour_of_day(ts);
        let doy = day_of_year(ts);
        let season = (2.0 * std::f64::consts::PI * (doy - 15.0) / 365.0).cos();

        let v = match spec.kind {
            SyntheticKind::HeatLoad => {
                let envelope = 0.55 + 0.45 * season;
                let shape = 0.6 + 0.4 * bump(h, 7.5, 1.5) + 0.3 * bump(h, 19.0, 2.0) - 0.15 * bump(h, 3.0, 2.0);
                envelope * (1.0 + 0.3 * noise * day_factor) * shape * (1.0 + 0.2 * noise * u)
            }
            SyntheticKind::SolarIrradiance => {
                if h > 6.0 && h < 18.0 {
                    let clear = (std::f64::consts::PI * (h - 6.0) / 12.0).sin();
                    let cloud = (day_factor * (1.0 + noise * u)).clamp(0.2, 1.0);
                    spec.peak * clear * cloud
                } else {
                    0.0
                }
            }
            SyntheticKind::AmbientTemp => {
                // Seasonal mean peaks in late July.
                let seasonal = (2.0 * std::f64::consts::PI * (doy - 200.0) / 365.0).cos();
                let mean = spec.peak * (0.45 + 0.55 * seasonal);
                let daily = -(2.0 * std::f64::consts::PI * (h - 5.0) / 24.0).cos();
                mean + 4.0 * daily + 3.0 * noise * day_factor + 0.5 * noise * u
            }
            SyntheticKind::ElecPrice => {
                let shape = 0.55 + 0.3 * bump(h, 8.0, 1.5) + 0.45 * bump(h, 19.0, 1.5);
                (spec.peak * shape * (1.0 + noise * (0.5 * day_factor + 0.5 * u))).max(0.05 * spec.peak)
            }
        };
        values.push(v);
    }

    if spec.kind == SyntheticKind::HeatLoad {
        let max = values.iter().copied().fold(f64::MIN, f64::max);
        let min = values.iter().copied().fold(f64::MAX, f64::min);
        let span = max - min;
        for v in &mut values {
            let x = if span > 0.0 { (*v - min) / span } else { 1.0 };
            // Affine map of [min, max] onto [0.1 peak, peak].
            *v = spec.peak * (0.1 + 0.9 * x);
        }
    }

    TimeSeries {
        grid: *grid,
        values,
        unit: spec.kind.unit(),
    }
}
