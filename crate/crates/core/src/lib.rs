//! Digital twin of a small district-heating plant: a gas boiler, a heat
//! pump and a solar thermal field feeding one storage tank, driven either
//! by a rule-based controller or by receding-horizon MPC over a built-in
//! LP/MILP solver.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dispatch;
pub mod forecast;
pub mod lpsolver;
pub mod plant;
pub mod runner;
pub mod timeseries;

pub use control::{mpc_decide, rbc_decide, ControlAction, Measurement, MpcOutcome, Origin, RbcParams};
pub use dispatch::{DispatchConfig, DispatchError, DispatchPlan};
pub use forecast::{Actuals, ForecastBundle, ForecastError, SolarFitCoefficients};
pub use lpsolver::{LpError, LpProblem, LpSolution, Relation, SolverOptions, Status};
pub use plant::{PlantError, PlantParams, PlantState, StepRecord};
pub use timeseries::{TimeGrid, TimeSeries, TimeSeriesError, Unit};
