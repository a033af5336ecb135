//! Receding-horizon dispatch as a linear (optionally mixed-binary) program.
//!
//! For a horizon of `N` steps the decision variables are, per step `k`,
//! the heat pump and boiler powers `P_hp,k`, `P_gb,k` and the storage energy
//! at the end of the step `E_{k+1}`. The storage follows the same explicit
//! Euler update as the plant:
//!
//! ```text
//! E_{k+1} = (1 - K dt) E_k + dt (P_hp,k + P_gb,k + S_k - L_k)
//! ```
//!
//! with `E_0` the measured energy folded into the first row. The objective
//! is the operating cost `sum_k dt (price_k P_hp,k / COP + gas P_gb,k)`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecast::ForecastBundle;
use crate::lpsolver::{LpProblem, LpSolution, Relation, Status};
use crate::plant::PlantParams;

/// Tolerance for the plan self-check against the rebuilt dynamics, kWh.
pub const PLAN_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum DispatchError {
    #[error("forecast covers {available} steps but the horizon needs {needed}")]
    HorizonTooLong { needed: usize, available: usize },
    #[error("inconsistent parameters: {0}")]
    InconsistentParams(String),
    #[error("solver status is {0}, not optimal")]
    NotOptimal(Status),
    #[error("plan energy at step {step} deviates {deviation} kWh from the dynamics")]
    InconsistentPlan { step: usize, deviation: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DispatchConfig {
    pub horizon_steps: usize,
    /// Step length, hours.
    pub dt: f64,
    /// Adds on/off binaries with minimum-load rows.
    pub use_commitment: bool,
    pub p_hp_min_on: f64,
    pub p_gb_min_on: f64,
    pub terminal_energy_min: Option<f64>,
    /// Loss coefficient used by the planner instead of the plant's.
    pub loss_k_override: Option<f64>,
    /// When set, every MPC problem is dumped to `<dir>/step_<index>.lp`.
    pub dump_dir: Option<PathBuf>,
}

impl Default for DispatchConfig {
    fn default() -> Self {
        Self {
            horizon_steps: 48,
            dt: 0.5,
            use_commitment: false,
            p_hp_min_on: 10.0,
            p_gb_min_on: 20.0,
            terminal_energy_min: None,
            loss_k_override: None,
            dump_dir: None,
        }
    }
}

/// Energy and last applied powers at the start of the horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Initial {
    pub energy: f64,
    pub p_hp_prev: f64,
    pub p_gb_prev: f64,
}

impl Initial {
    pub fn energy_only(energy: f64) -> Self {
        Self {
            energy,
            p_hp_prev: 0.0,
            p_gb_prev: 0.0,
        }
    }
}

/// Maps plan quantities to LP columns and remembers what is needed to
/// rebuild the energy trajectory from the powers.
#[derive(Clone, Debug, PartialEq)]
pub struct DispatchLayout {
    pub steps: usize,
    pub commitment: bool,
    pub dt: f64,
    /// `1 - K dt`.
    pub decay: f64,
    /// `dt (S_k - L_k)` per step, kWh.
    pub forcing: Vec<f64>,
}

impl DispatchLayout {
    pub fn hp(&self, k: usize) -> usize {
        3 * k
    }

    pub fn gb(&self, k: usize) -> usize {
        3 * k + 1
    }

    /// Column of `E_k`, `1 <= k <= steps`.
    pub fn energy(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.steps);
        3 * (k - 1) + 2
    }

    pub fn u_hp(&self, k: usize) -> Option<usize> {
        self.commitment.then(|| 3 * self.steps + 2 * k)
    }

    pub fn u_gb(&self, k: usize) -> Option<usize> {
        self.commitment.then(|| 3 * self.steps + 2 * k + 1)
    }

    /// Energy trajectory implied by the powers, starting at `e0`.
    pub fn rebuild_energy(&self, e0: f64, p_hp: &[f64], p_gb: &[f64]) -> Vec<f64> {
        let mut e = Vec::with_capacity(self.steps + 1);
        e.push(e0);
        for k in 0..self.steps {
            let prev = e[k];
            e.push(self.decay * prev + self.dt * (p_hp[k] + p_gb[k]) + self.forcing[k]);
        }
        e
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispatchPlan {
    pub p_hp: Vec<f64>,
    pub p_gb: Vec<f64>,
    /// `N + 1` entries; `energy[0]` is the measured state.
    pub energy: Vec<f64>,
    pub planned_cost: f64,
}

/// Cost of running the given powers under the bundle's prices.
pub fn plan_cost(bundle: &ForecastBundle, params: &PlantParams, dt: f64, p_hp: &[f64], p_gb: &[f64]) -> f64 {
    let prices = bundle.elec_price.values();
    p_hp.iter()
        .zip(p_gb)
        .zip(prices)
        .map(|((hp, gb), price)| dt * (price * hp / params.cop + bundle.gas_price * gb))
        .sum()
}

fn check_inputs(
    initial: &Initial,
    bundle: &ForecastBundle,
    params: &PlantParams,
    config: &DispatchConfig,
) -> Result<(), DispatchError> {
    let n = config.horizon_steps;
    if n == 0 {
        return Err(DispatchError::InconsistentParams("horizon_steps must be >= 1".into()));
    }
    if !(config.dt.is_finite() && config.dt > 0.0) {
        return Err(DispatchError::InconsistentParams("dt must be > 0".into()));
    }
    if bundle.len() < n {
        return Err(DispatchError::HorizonTooLong {
            needed: n,
            available: bundle.len(),
        });
    }
    if (bundle.load.grid().step_hours() - config.dt).abs() > 1e-9 {
        return Err(DispatchError::InconsistentParams(format!(
            "forecast step {} h differs from dt {} h",
            bundle.load.grid().step_hours(),
            config.dt
        )));
    }
    if !(params.e_min <= params.e_max) {
        return Err(DispatchError::InconsistentParams(format!(
            "e_min {} exceeds e_max {}",
            params.e_min, params.e_max
        )));
    }
    if !(params.p_hp_max >= 0.0 && params.p_gb_max >= 0.0 && params.cop > 0.0) {
        return Err(DispatchError::InconsistentParams(
            "capacities and COP must be positive".into(),
        ));
    }
    if !(initial.energy.is_finite() && initial.energy >= 0.0 && initial.energy <= params.e_max + 1e-9) {
        return Err(DispatchError::InconsistentParams(format!(
            "initial energy {} outside [0, {}]",
            initial.energy, params.e_max
        )));
    }
    if config.use_commitment && (config.p_hp_min_on > params.p_hp_max || config.p_gb_min_on > params.p_gb_max) {
        return Err(DispatchError::InconsistentParams(
            "minimum on-load exceeds capacity".into(),
        ));
    }
    Ok(())
}

/// Builds the horizon LP. Returns the problem and its column layout.
pub fn build_problem(
    initial: &Initial,
    bundle: &ForecastBundle,
    params: &PlantParams,
    config: &DispatchConfig,
) -> Result<(LpProblem, DispatchLayout), DispatchError> {
    check_inputs(initial, bundle, params, config)?;
    let n = config.horizon_steps;
    let dt = config.dt;
    let loss_k = config.loss_k_override.unwrap_or(params.loss_k);
    let decay = 1.0 - loss_k * dt;
    let load = bundle.load.values();
    let solar = bundle.solar.values();
    let price = bundle.elec_price.values();

    let layout = DispatchLayout {
        steps: n,
        commitment: config.use_commitment,
        dt,
        decay,
        forcing: (0..n).map(|k| dt * (solar[k] - load[k])).collect(),
    };

    let mut lp = LpProblem::new();
    for &p in &price[..n] {
        lp.add_var(dt * p / params.cop, 0.0, params.p_hp_max);
        lp.add_var(dt * bundle.gas_price, 0.0, params.p_gb_max);
        lp.add_var(0.0, params.e_min, params.e_max);
    }
    if config.use_commitment {
        for _ in 0..n {
            lp.add_binary(0.0);
            lp.add_binary(0.0);
        }
    }

    for k in 0..n {
        let mut row = vec![(layout.energy(k + 1), 1.0), (layout.hp(k), -dt), (layout.gb(k), -dt)];
        let mut rhs = layout.forcing[k];
        if k == 0 {
            rhs += decay * initial.energy;
        } else {
            row.push((layout.energy(k), -decay));
        }
        lp.add_constraint(row, Relation::Eq, rhs);
    }

    if config.use_commitment {
        for k in 0..n {
            for (p, u, p_min, p_max) in [
                (layout.hp(k), layout.u_hp(k), config.p_hp_min_on, params.p_hp_max),
                (layout.gb(k), layout.u_gb(k), config.p_gb_min_on, params.p_gb_max),
            ] {
                let u = u.expect("commitment layout");
                lp.add_constraint(vec![(p, 1.0), (u, -p_min)], Relation::Ge, 0.0);
                lp.add_constraint(vec![(p, 1.0), (u, -p_max)], Relation::Le, 0.0);
            }
        }
    }

    for (ramp, col, prev) in [
        (params.ramp_hp, 0usize, initial.p_hp_prev),
        (params.ramp_gb, 1usize, initial.p_gb_prev),
    ] {
        let Some(r) = ramp else { continue };
        let limit = r * dt;
        let var = |k: usize| 3 * k + col;
        lp.add_constraint(vec![(var(0), 1.0)], Relation::Le, prev + limit);
        lp.add_constraint(vec![(var(0), 1.0)], Relation::Ge, prev - limit);
        for k in 0..n - 1 {
            lp.add_constraint(vec![(var(k + 1), 1.0), (var(k), -1.0)], Relation::Le, limit);
            lp.add_constraint(vec![(var(k), 1.0), (var(k + 1), -1.0)], Relation::Le, limit);
        }
    }

    if let Some(e_end) = config.terminal_energy_min {
        lp.add_constraint(vec![(layout.energy(n), 1.0)], Relation::Ge, e_end);
    }

    Ok((lp, layout))
}

/// Reads the plan out of an optimal solution and re-verifies the dynamics.
pub fn extract_plan(
    solution: &LpSolution,
    layout: &DispatchLayout,
    state_energy: f64,
) -> Result<DispatchPlan, DispatchError> {
    if solution.status != Status::Optimal {
        return Err(DispatchError::NotOptimal(solution.status));
    }
    let x = solution.x.as_ref().ok_or(DispatchError::NotOptimal(solution.status))?;
    let n = layout.steps;
    let p_hp: Vec<f64> = (0..n).map(|k| x[layout.hp(k)]).collect();
    let p_gb: Vec<f64> = (0..n).map(|k| x[layout.gb(k)]).collect();
    let mut energy = Vec::with_capacity(n + 1);
    energy.push(state_energy);
    energy.extend((1..=n).map(|k| x[layout.energy(k)]));

    let rebuilt = layout.rebuild_energy(state_energy, &p_hp, &p_gb);
    for (step, (a, b)) in energy.iter().zip(&rebuilt).enumerate() {
        let deviation = (a - b).abs();
        if deviation > PLAN_CONSISTENCY_TOL {
            return Err(DispatchError::InconsistentPlan { step, deviation });
        }
    }
    Ok(DispatchPlan {
        p_hp,
        p_gb,
        energy,
        planned_cost: solution.objective_value.unwrap_or(f64::NAN),
    })
}

/// Exhaustive search over a discretized power grid, used as an independent
/// check on the LP for tiny horizons.
pub mod oracle {
    use super::*;

    const TOL: f64 = 1e-9;

    struct Search<'a> {
        n: usize,
        dt: f64,
        decay: f64,
        hp_grid: Vec<f64>,
        gb_grid: Vec<f64>,
        bundle: &'a ForecastBundle,
        params: &'a PlantParams,
        terminal: Option<f64>,
        hp: Vec<f64>,
        gb: Vec<f64>,
        energy: Vec<f64>,
        best: Option<DispatchPlan>,
    }

    impl Search<'_> {
        fn recurse(&mut self, k: usize, cost: f64) {
            if k == self.n {
                if self.terminal.is_some_and(|t| self.energy[k] < t - TOL) {
                    return;
                }
                if self.best.as_ref().is_none_or(|b| cost < b.planned_cost) {
                    self.best = Some(DispatchPlan {
                        p_hp: self.hp.clone(),
                        p_gb: self.gb.clone(),
                        energy: self.energy.clone(),
                        planned_cost: cost,
                    });
                }
                return;
            }
            let forcing = self.bundle.solar.values()[k] - self.bundle.load.values()[k];
            let price = self.bundle.elec_price.values()[k];
            for i in 0..self.hp_grid.len() {
                for j in 0..self.gb_grid.len() {
                    let (h, g) = (self.hp_grid[i], self.gb_grid[j]);
                    let e = self.decay * self.energy[k] + self.dt * (h + g + forcing);
                    if e < self.params.e_min - TOL || e > self.params.e_max + TOL {
                        continue;
                    }
                    self.hp[k] = h;
                    self.gb[k] = g;
                    self.energy[k + 1] = e;
                    let step_cost = self.dt * (price * h / self.params.cop + self.bundle.gas_price * g);
                    self.recurse(k + 1, cost + step_cost);
                }
            }
        }
    }

    /// Best feasible plan with each unit restricted to `levels` evenly spaced
    /// power values in `[0, p_max]`. Ramp limits and commitment are ignored;
    /// the terminal bound is honored. `None` when no grid plan is feasible.
    pub fn oracle_dispatch(
        state_energy: f64,
        bundle: &ForecastBundle,
        params: &PlantParams,
        config: &DispatchConfig,
        levels: usize,
    ) -> Option<DispatchPlan> {
        let n = config.horizon_steps;
        assert!((1..=4).contains(&n), "oracle is limited to horizons of 1..=4 steps");
        assert!(levels >= 2);
        let grid = |max: f64| (0..levels).map(|i| max * i as f64 / (levels - 1) as f64).collect();
        let mut search = Search {
            n,
            dt: config.dt,
            decay: 1.0 - config.loss_k_override.unwrap_or(params.loss_k) * config.dt,
            hp_grid: grid(params.p_hp_max),
            gb_grid: grid(params.p_gb_max),
            bundle,
            params,
            terminal: config.terminal_energy_min,
            hp: vec![0.0; n],
            gb: vec![0.0; n],
            energy: vec![state_energy; n + 1],
            best: None,
        };
        search.recurse(0, 0.0);
        search.best
    }
}
