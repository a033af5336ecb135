//! Key performance indicators of a run and run-to-run comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::plant::StepRecord;
use crate::timeseries::{format_value, CsvTable};

use super::RunError;

#[derive(Clone, Debug, PartialEq)]
pub struct KpiReport {
    pub scenario: String,
    pub controller: String,
    pub period_start: String,
    pub period_end: String,
    pub steps: usize,
    pub step_hours: f64,
    /// EUR.
    pub total_cost: f64,
    pub cost_gas: f64,
    pub cost_elec: f64,
    /// Heat produced, kWh.
    pub energy_total: f64,
    pub energy_gb: f64,
    pub energy_hp: f64,
    pub energy_solar: f64,
    pub share_gb: f64,
    pub share_hp: f64,
    pub share_solar: f64,
    /// Solar heat discarded plus storage overflow, kWh.
    pub curtailed: f64,
    pub unmet: f64,
    pub energy_consumer: f64,
    pub energy_loss: f64,
    pub overflow: f64,
    pub storage_initial: f64,
    pub storage_final: f64,
    pub mpc_fallbacks: usize,
    /// Wall-clock time; kept out of the KPI file so reruns are byte-identical.
    pub runtime_seconds: f64,
}

/// Running sums over applied powers.
#[derive(Clone, Debug)]
pub struct KpiAccumulator {
    cop: f64,
    gas_price: f64,
    loss_k: f64,
    dt: f64,
    storage_initial: f64,
    storage_final: f64,
    steps: usize,
    cost_gas: f64,
    cost_elec: f64,
    energy_gb: f64,
    energy_hp: f64,
    energy_solar: f64,
    energy_consumer: f64,
    energy_loss: f64,
    curtailed: f64,
    unmet: f64,
    overflow: f64,
    mpc_fallbacks: usize,
}

impl KpiAccumulator {
    pub fn new(cop: f64, gas_price: f64, loss_k: f64, dt: f64, storage_initial: f64) -> Self {
        Self {
            cop,
            gas_price,
            loss_k,
            dt,
            storage_initial,
            storage_final: storage_initial,
            steps: 0,
            cost_gas: 0.0,
            cost_elec: 0.0,
            energy_gb: 0.0,
            energy_hp: 0.0,
            energy_solar: 0.0,
            energy_consumer: 0.0,
            energy_loss: 0.0,
            curtailed: 0.0,
            unmet: 0.0,
            overflow: 0.0,
            mpc_fallbacks: 0,
        }
    }

    /// `energy_before` is the storage content at the start of the step.
    pub fn add(&mut self, rec: &StepRecord, elec_price: f64, energy_before: f64) {
        let dt = self.dt;
        self.cost_elec += dt * elec_price * rec.p_hp_applied / self.cop;
        self.cost_gas += dt * self.gas_price * rec.p_gb_applied;
        self.energy_hp += dt * rec.p_hp_applied;
        self.energy_gb += dt * rec.p_gb_applied;
        self.energy_solar += dt * rec.p_solar_applied;
        self.energy_consumer += dt * rec.p_consumer;
        self.energy_loss += dt * self.loss_k * energy_before;
        self.curtailed += rec.curtailed;
        self.unmet += rec.unmet;
        self.overflow += rec.overflow;
        self.storage_final = rec.energy_after;
        self.steps += 1;
    }

    pub fn count_fallback(&mut self) {
        self.mpc_fallbacks += 1;
    }

    pub fn finish(&self, scenario: &str, controller: &str, period: (&str, &str), runtime_seconds: f64) -> KpiReport {
        let energy_total = self.energy_gb + self.energy_hp + self.energy_solar;
        let share = |e: f64| if energy_total > 0.0 { e / energy_total } else { 0.0 };
        KpiReport {
            scenario: scenario.to_string(),
            controller: controller.to_string(),
            period_start: period.0.to_string(),
            period_end: period.1.to_string(),
            steps: self.steps,
            step_hours: self.dt,
            total_cost: self.cost_gas + self.cost_elec,
            cost_gas: self.cost_gas,
            cost_elec: self.cost_elec,
            energy_total,
            energy_gb: self.energy_gb,
            energy_hp: self.energy_hp,
            energy_solar: self.energy_solar,
            share_gb: share(self.energy_gb),
            share_hp: share(self.energy_hp),
            share_solar: share(self.energy_solar),
            curtailed: self.curtailed,
            unmet: self.unmet,
            energy_consumer: self.energy_consumer,
            energy_loss: self.energy_loss,
            overflow: self.overflow,
            storage_initial: self.storage_initial,
            storage_final: self.storage_final,
            mpc_fallbacks: self.mpc_fallbacks,
            runtime_seconds,
        }
    }
}

/// Indicators compared between runs, in file order.
pub const INDICATORS: [&str; 12] = [
    "total_cost",
    "cost_gas",
    "cost_elec",
    "energy_total",
    "energy_gb",
    "energy_hp",
    "energy_solar",
    "share_gb",
    "share_hp",
    "share_solar",
    "curtailed",
    "unmet",
];

impl KpiReport {
    pub fn indicator(&self, name: &str) -> Option<f64> {
        Some(match name {
            "total_cost" => self.total_cost,
            "cost_gas" => self.cost_gas,
            "cost_elec" => self.cost_elec,
            "energy_total" => self.energy_total,
            "energy_gb" => self.energy_gb,
            "energy_hp" => self.energy_hp,
            "energy_solar" => self.energy_solar,
            "share_gb" => self.share_gb,
            "share_hp" => self.share_hp,
            "share_solar" => self.share_solar,
            "curtailed" => self.curtailed,
            "unmet" => self.unmet,
            "energy_consumer" => self.energy_consumer,
            "energy_loss" => self.energy_loss,
            "overflow" => self.overflow,
            "storage_initial" => self.storage_initial,
            "storage_final" => self.storage_final,
            _ => return None,
        })
    }

    /// Storage balance residual: initial + produced + unmet - consumed -
    /// losses - overflow - final. Zero up to rounding.
    pub fn energy_residual(&self) -> f64 {
        self.storage_initial + self.energy_total + self.unmet
            - self.energy_consumer
            - self.energy_loss
            - self.overflow
            - self.storage_final
    }

    /// Magnitude the residual is compared against.
    pub fn energy_scale(&self) -> f64 {
        (self.storage_initial + self.energy_total + self.energy_consumer).max(1.0)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario={}", self.scenario);
        let _ = writeln!(s, "controller={}", self.controller);
        let _ = writeln!(s, "period_start={}", self.period_start);
        let _ = writeln!(s, "period_end={}", self.period_end);
        let _ = writeln!(s, "steps={}", self.steps);
        let _ = writeln!(s, "step_hours={}", format_value(self.step_hours));
        for name in INDICATORS.iter().chain(&[
            "energy_consumer",
            "energy_loss",
            "overflow",
            "storage_initial",
            "storage_final",
        ]) {
            let _ = writeln!(
                s,
                "{name}={}",
                format_value(self.indicator(name).expect("known indicator"))
            );
        }
        let _ = writeln!(s, "mpc_fallbacks={}", self.mpc_fallbacks);
        s
    }

    pub fn from_kv(text: &str) -> Result<Self, RunError> {
        let mut r = KpiReport {
            scenario: String::new(),
            controller: String::new(),
            period_start: String::new(),
            period_end: String::new(),
            steps: 0,
            step_hours: 0.0,
            total_cost: 0.0,
            cost_gas: 0.0,
            cost_elec: 0.0,
            energy_total: 0.0,
            energy_gb: 0.0,
            energy_hp: 0.0,
            energy_solar: 0.0,
            share_gb: 0.0,
            share_hp: 0.0,
            share_solar: 0.0,
            curtailed: 0.0,
            unmet: 0.0,
            energy_consumer: 0.0,
            energy_loss: 0.0,
            overflow: 0.0,
            storage_initial: 0.0,
            storage_final: 0.0,
            mpc_fallbacks: 0,
            runtime_seconds: 0.0,
        };
        let mut seen_period = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| RunError::KpiParse(format!("line {}: expected key=value", i + 1)))?;
            let num = || {
                v.parse::<f64>()
                    .map_err(|_| RunError::KpiParse(format!("line {}: invalid number `{v}`", i + 1)))
            };
            let int = || {
                v.parse::<usize>()
                    .map_err(|_| RunError::KpiParse(format!("line {}: invalid integer `{v}`", i + 1)))
            };
            match k {
                "scenario" => r.scenario = v.to_string(),
                "controller" => r.controller = v.to_string(),
                "period_start" => {
                    r.period_start = v.to_string();
                    seen_period = true;
                }
                "period_end" => r.period_end = v.to_string(),
                "steps" => r.steps = int()?,
                "mpc_fallbacks" => r.mpc_fallbacks = int()?,
                "step_hours" => r.step_hours = num()?,
                "total_cost" => r.total_cost = num()?,
                "cost_gas" => r.cost_gas = num()?,
                "cost_elec" => r.cost_elec = num()?,
                "energy_total" => r.energy_total = num()?,
                "energy_gb" => r.energy_gb = num()?,
                "energy_hp" => r.energy_hp = num()?,
                "energy_solar" => r.energy_solar = num()?,
                "share_gb" => r.share_gb = num()?,
                "share_hp" => r.share_hp = num()?,
                "share_solar" => r.share_solar = num()?,
                "curtailed" => r.curtailed = num()?,
                "unmet" => r.unmet = num()?,
                "energy_consumer" => r.energy_consumer = num()?,
                "energy_loss" => r.energy_loss = num()?,
                "overflow" => r.overflow = num()?,
                "storage_initial" => r.storage_initial = num()?,
                "storage_final" => r.storage_final = num()?,
                _ => log::debug!("ignoring unknown KPI key `{k}`"),
            }
        }
        if !seen_period {
            return Err(RunError::KpiParse("missing period_start".into()));
        }
        Ok(r)
    }

    pub fn read(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::KpiParse(format!("{}: {e}", path.display())))?;
        Self::from_kv(&text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorDiff {
    pub name: &'static str,
    pub value_a: f64,
    pub value_b: f64,
    /// `100 (b - a) / a`; `None` when `a` is zero.
    pub relative_pct: Option<f64>,
}

impl IndicatorDiff {
    /// Relative percentage, or the absolute delta for a zero reference.
    pub fn difference(&self) -> f64 {
        self.relative_pct.unwrap_or(self.value_b - self.value_a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<IndicatorDiff>,
}

impl ComparisonReport {
    pub fn get(&self, name: &str) -> Option<&IndicatorDiff> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("indicator,value_a,value_b,difference,flag\n");
        for r in &self.rows {
            let flag = if r.relative_pct.is_some() {
                "relative_pct"
            } else {
                "absolute_zero_reference"
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{flag}",
                r.name,
                format_value(r.value_a),
                format_value(r.value_b),
                format_value(r.difference())
            );
        }
        s
    }
}

/// Per-indicator change from `a` to `b`. Both runs must cover the same period.
pub fn compare(a: &KpiReport, b: &KpiReport) -> Result<ComparisonReport, RunError> {
    if a.period_start != b.period_start || a.period_end != b.period_end || a.steps != b.steps {
        return Err(RunError::PeriodMismatch(format!(
            "{}..{} ({} steps) vs {}..{} ({} steps)",
            a.period_start, a.period_end, a.steps, b.period_start, b.period_end, b.steps
        )));
    }
    let rows = INDICATORS
        .iter()
        .map(|&name| {
            let va = a.indicator(name).expect("known indicator");
            let vb = b.indicator(name).expect("known indicator");
            IndicatorDiff {
                name,
                value_a: va,
                value_b: vb,
                relative_pct: (va != 0.0).then(|| 100.0 * (vb - va) / va),
            }
        })
        .collect();
    Ok(ComparisonReport { rows })
}

/// Gas and electricity cost recomputed from an exported step table.
pub fn recompute_costs(steps: &CsvTable, cop: f64, gas_price: f64) -> Result<(f64, f64), RunError> {
    let col = |name: &str| {
        steps
            .column(name)
            .ok_or_else(|| RunError::KpiParse(format!("step table lacks `{name}`")))
    };
    let hp = col("p_hp_kW")?;
    let gb = col("p_gb_kW")?;
    let price = col("elec_price_eur_per_kWh")?;
    let dt = steps.grid.step_hours();
    let mut gas = 0.0;
    let mut elec = 0.0;
    for i in 0..hp.len() {
        elec += dt * price[i] * hp[i] / cop;
        gas += dt * gas_price * gb[i];
    }
    Ok((gas, elec))
}
