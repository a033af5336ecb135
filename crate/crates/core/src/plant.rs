//! Discrete-time heat plant and storage simulator.
//!
//! The storage is a single lumped energy node `E` (kWh). One step applies
//!
//! ```text
//! E' = E + dt * (P_hp + P_gb + P_solar - P_consumer) - dt * K * E
//! ```
//!
//! with the commanded powers clamped to capacity and ramp envelopes, solar
//! curtailed while `E >= e_curtail`, shortfall floored at zero (logged as
//! unmet energy) and overflow clamped at `e_max` (logged as curtailed).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::ControlAction;

const WATER_DENSITY_KG_PER_M3: f64 = 1000.0;
const WATER_CP_KJ_PER_KG_K: f64 = 4.186;
const KJ_PER_KWH: f64 = 3600.0;

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("non-finite or invalid input: {0}")]
    NonFiniteInput(&'static str),
    #[error("non-positive input: {0}")]
    NonPositiveInput(&'static str),
    #[error("inconsistent plant parameters: {0}")]
    InconsistentParams(String),
}

/// Usable energy of a water tank of `volume_m3` cycled over `delta_t_k`.
pub fn storage_capacity_from_geometry(volume_m3: f64, delta_t_k: f64) -> Result<f64, PlantError> {
    if !(volume_m3 > 0.0) {
        return Err(PlantError::NonPositiveInput("volume"));
    }
    if !(delta_t_k > 0.0) {
        return Err(PlantError::NonPositiveInput("delta_t"));
    }
    Ok(volume_m3 * WATER_DENSITY_KG_PER_M3 * WATER_CP_KJ_PER_KG_K * delta_t_k / KJ_PER_KWH)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    /// Gas boiler thermal capacity, kW.
    pub p_gb_max: f64,
    /// Heat pump condenser-side capacity, kW.
    pub p_hp_max: f64,
    /// Heat out per electricity in.
    pub cop: f64,
    pub e_min: f64,
    pub e_max: f64,
    /// Solar is forced to zero while the storage holds at least this much.
    pub e_curtail: f64,
    /// Storage loss coefficient, 1/h.
    pub loss_k: f64,
    /// Heat pump ramp limit, kW/h. `None` means unlimited.
    #[serde(default)]
    pub ramp_hp: Option<f64>,
    #[serde(default)]
    pub ramp_gb: Option<f64>,
    /// Solar collector area, m².
    pub solar_area: f64,
}

impl PlantParams {
    /// Storage and physics defaults with the given unit capacities: a 40 m³
    /// tank cycled over 20 K, `e_min = 0.2 e_max`, `e_curtail = 0.95 e_max`,
    /// `K = 0.005 /h`, COP 3.
    pub fn with_capacities(p_gb_max: f64, p_hp_max: f64, solar_area: f64) -> Self {
        let e_max = storage_capacity_from_geometry(40.0, 20.0).expect("positive geometry");
        Self {
            p_gb_max,
            p_hp_max,
            cop: 3.0,
            e_min: 0.2 * e_max,
            e_max,
            e_curtail: 0.95 * e_max,
            loss_k: 0.005,
            ramp_hp: None,
            ramp_gb: None,
            solar_area,
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let all = [
            self.p_gb_max,
            self.p_hp_max,
            self.cop,
            self.e_min,
            self.e_max,
            self.e_curtail,
            self.loss_k,
            self.solar_area,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(PlantError::NonFiniteInput("plant parameter"));
        }
        if !(0.0 < self.e_min && self.e_min < self.e_curtail && self.e_curtail <= self.e_max) {
            return Err(PlantError::InconsistentParams(format!(
                "need 0 < e_min < e_curtail <= e_max, got {} / {} / {}",
                self.e_min, self.e_curtail, self.e_max
            )));
        }
        if !(self.p_gb_max > 0.0 && self.p_hp_max > 0.0 && self.cop > 0.0) {
            return Err(PlantError::InconsistentParams(
                "capacities and COP must be positive".into(),
            ));
        }
        if self.loss_k < 0.0 || self.solar_area < 0.0 {
            return Err(PlantError::InconsistentParams(
                "loss_k and solar_area must be non-negative".into(),
            ));
        }
        for r in [self.ramp_hp, self.ramp_gb].into_iter().flatten() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(PlantError::InconsistentParams("ramp limits must be >= 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// Storage energy, kWh.
    pub energy: f64,
    pub p_hp_prev: f64,
    pub p_gb_prev: f64,
    pub cum_curtailed: f64,
    pub cum_unmet: f64,
    pub step_index: u64,
}

impl PlantState {
    pub fn new(energy: f64) -> Self {
        Self {
            energy,
            p_hp_prev: 0.0,
            p_gb_prev: 0.0,
            cum_curtailed: 0.0,
            cum_unmet: 0.0,
            step_index: 0,
        }
    }
}

/// What the plant actually did during one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub p_hp_applied: f64,
    pub p_gb_applied: f64,
    pub p_solar_applied: f64,
    pub p_consumer: f64,
    pub energy_after: f64,
    /// Solar not admitted plus any overflow clamped at `e_max`, kWh.
    pub curtailed: f64,
    /// Consumer energy that could not be delivered, kWh.
    pub unmet: f64,
    /// Part of `curtailed` removed by the `e_max` clamp, kWh.
    pub overflow: f64,
}

/// Opaque copy of a plant state, restorable later.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot(PlantState);

pub fn snapshot(state: &PlantState) -> Snapshot {
    Snapshot(state.clone())
}

pub fn restore(snapshot: &Snapshot) -> PlantState {
    snapshot.0.clone()
}

fn apply_limits(command: f64, prev: f64, p_max: f64, ramp: Option<f64>, dt: f64) -> f64 {
    let mut p = command;
    if let Some(r) = ramp {
        p = p.clamp(prev - r * dt, prev + r * dt);
    }
    p.clamp(0.0, p_max)
}

/// Advances the plant by `dt` hours.
pub fn step(
    state: &PlantState,
    params: &PlantParams,
    action: &ControlAction,
    p_solar_avail: f64,
    p_consumer: f64,
    dt: f64,
) -> Result<(PlantState, StepRecord), PlantError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(PlantError::NonFiniteInput("dt"));
    }
    if !(p_solar_avail.is_finite() && p_solar_avail >= 0.0) {
        return Err(PlantError::NonFiniteInput("p_solar_avail"));
    }
    if !(p_consumer.is_finite() && p_consumer >= 0.0) {
        return Err(PlantError::NonFiniteInput("p_consumer"));
    }
    if !(action.p_hp_set.is_finite() && action.p_gb_set.is_finite()) {
        return Err(PlantError::NonFiniteInput("action"));
    }

    let p_hp = apply_limits(action.p_hp_set, state.p_hp_prev, params.p_hp_max, params.ramp_hp, dt);
    let p_gb = apply_limits(action.p_gb_set, state.p_gb_prev, params.p_gb_max, params.ramp_gb, dt);

    let e = state.energy;
    let mut p_solar = if e < params.e_curtail { p_solar_avail } else { 0.0 };
    let balance = |solar: f64| e + dt * (p_hp + p_gb + solar - p_consumer) - dt * params.loss_k * e;

    let mut e_next = balance(p_solar);
    let mut overflow = 0.0;
    if e_next > params.e_max {
        if p_solar > 0.0 {
            p_solar = 0.0;
            e_next = balance(0.0);
        }
        if e_next > params.e_max {
            overflow = e_next - params.e_max;
            e_next = params.e_max;
        }
    }
    let mut unmet = 0.0;
    if e_next < 0.0 {
        unmet = -e_next;
        e_next = 0.0;
    }
    let curtailed = (p_solar_avail - p_solar) * dt + overflow;

    let record = StepRecord {
        p_hp_applied: p_hp,
        p_gb_applied: p_gb,
        p_solar_applied: p_solar,
        p_consumer,
        energy_after: e_next,
        curtailed,
        unmet,
        overflow,
    };
    let next = PlantState {
        energy: e_next,
        p_hp_prev: p_hp,
        p_gb_prev: p_gb,
        cum_curtailed: state.cum_curtailed + curtailed,
        cum_unmet: state.cum_unmet + unmet,
        step_index: state.step_index + 1,
    };
    Ok((next, record))
}
