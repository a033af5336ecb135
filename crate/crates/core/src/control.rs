//! Rule-based and model-predictive controllers. Both only emit power
//! setpoints; clamping to ramps and capacities happens in the plant.

use std::fmt;
use std::fs;

use serde::{Deserialize, Serialize};

use crate::dispatch::{build_problem, extract_plan, DispatchConfig, DispatchPlan, Initial};
use crate::forecast::ForecastBundle;
use crate::lpsolver::{format::write_problem, solve_milp, SolverOptions, Status};
use crate::plant::{PlantParams, PlantState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    #[serde(rename = "RBC")]
    Rbc,
    #[serde(rename = "MPC")]
    Mpc,
    #[serde(rename = "MPC_FALLBACK")]
    MpcFallback,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Rbc => "RBC",
            Origin::Mpc => "MPC",
            Origin::MpcFallback => "MPC_FALLBACK",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlAction {
    pub p_hp_set: f64,
    pub p_gb_set: f64,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RbcParams {
    /// Energy floor below which the restore term kicks in, kWh.
    pub e_min: f64,
    /// Restore power per kWh of deficit, 1/h.
    pub k_restore: f64,
    /// Caps the target so a single step cannot push the storage past `e_max`.
    pub cap_overcharge: bool,
}

impl Default for RbcParams {
    fn default() -> Self {
        Self {
            e_min: PlantParams::with_capacities(1.0, 1.0, 0.0).e_min,
            k_restore: 0.5,
            cap_overcharge: true,
        }
    }
}

impl RbcParams {
    pub fn for_plant(params: &PlantParams) -> Self {
        Self {
            e_min: params.e_min,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    /// Stored energy, kWh.
    pub energy: f64,
    /// Consumer demand minus solar over the last completed step, kW.
    pub net_load: f64,
}

/// Heat pump covers the base load, the boiler tops up, and a proportional
/// restore term pulls the storage back above `e_min`.
pub fn rbc_decide(m: &Measurement, params: &PlantParams, rbc: &RbcParams, dt: f64) -> ControlAction {
    let deficit = (rbc.e_min - m.energy).max(0.0);
    let mut target = m.net_load.max(0.0) + rbc.k_restore * deficit;
    if rbc.cap_overcharge {
        target = target.min((m.net_load + (params.e_max - m.energy) / dt).max(0.0));
    }
    let p_hp = target.min(params.p_hp_max);
    let p_gb = (target - p_hp).min(params.p_gb_max);
    ControlAction {
        p_hp_set: p_hp,
        p_gb_set: p_gb,
        origin: Origin::Rbc,
    }
}

/// Telemetry for one MPC decision.
#[derive(Clone, Debug, PartialEq)]
pub struct MpcOutcome {
    pub action: ControlAction,
    pub plan: Option<DispatchPlan>,
    /// `None` when the problem could not even be built.
    pub status: Option<Status>,
    pub iterations: u64,
}

/// Solves the horizon dispatch from the current state and applies its first
/// step. Any failure falls back to [`rbc_decide`].
pub fn mpc_decide(
    state: &PlantState,
    m: &Measurement,
    bundle: &ForecastBundle,
    params: &PlantParams,
    dispatch: &DispatchConfig,
    solver: &SolverOptions,
    rbc: &RbcParams,
) -> MpcOutcome {
    let initial = Initial {
        energy: state.energy,
        p_hp_prev: state.p_hp_prev,
        p_gb_prev: state.p_gb_prev,
    };
    let fallback = |status: Option<Status>, iterations: u64| {
        let mut action = rbc_decide(m, params, rbc, dispatch.dt);
        action.origin = Origin::MpcFallback;
        MpcOutcome {
            action,
            plan: None,
            status,
            iterations,
        }
    };

    let (problem, layout) = match build_problem(&initial, bundle, params, dispatch) {
        Ok(v) => v,
        Err(e) => {
            log::warn!("step {}: dispatch not built ({e}), using RBC", state.step_index);
            return fallback(None, 0);
        }
    };
    if let Some(dir) = &dispatch.dump_dir {
        let path = dir.join(format!("step_{:05}.lp", state.step_index));
        if let Err(e) = fs::write(&path, write_problem(&problem)) {
            log::warn!("could not write {}: {e}", path.display());
        }
    }
    let solution = match solve_milp(&problem, solver) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("step {}: solver error ({e}), using RBC", state.step_index);
            return fallback(None, 0);
        }
    };
    match extract_plan(&solution, &layout, state.energy) {
        Ok(plan) => MpcOutcome {
            action: ControlAction {
                p_hp_set: plan.p_hp[0].clamp(0.0, params.p_hp_max),
                p_gb_set: plan.p_gb[0].clamp(0.0, params.p_gb_max),
                origin: Origin::Mpc,
            },
            plan: Some(plan),
            status: Some(solution.status),
            iterations: solution.iterations,
        },
        Err(e) => {
            log::warn!("step {}: {e}, using RBC", state.step_index);
            fallback(Some(solution.status), solution.iterations)
        }
    }
}
