//! Embedded linear and mixed-binary programming.
//!
//! [`solve_lp`] is a dense, bounded-variable, two-phase primal simplex.
//! [`solve_milp`] runs best-first branch-and-bound on top of it for binary
//! variables. Problems are always minimizations.

mod branch;
pub mod format;
mod simplex;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use branch::solve_milp;
pub use simplex::solve_lp;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("dimension mismatch: expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    /// Sparse row: `(variable index, coefficient)`.
    pub row: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.row.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min c'x` subject to linear rows, variable bounds and binary flags.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// `(lower, upper)`; either side may be infinite.
    pub bounds: Vec<(f64, f64)>,
    pub integrality: Vec<VarKind>,
}

impl Default for LpProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl LpProblem {
    pub fn new() -> Self {
        Self {
            num_vars: 0,
            objective: Vec::new(),
            constraints: Vec::new(),
            bounds: Vec::new(),
            integrality: Vec::new(),
        }
    }

    /// Adds a continuous variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.bounds.push((lower, upper));
        self.integrality.push(VarKind::Continuous);
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_binary(&mut self, cost: f64) -> usize {
        let j = self.add_var(cost, 0.0, 1.0);
        self.integrality[j] = VarKind::Binary;
        j
    }

    pub fn add_constraint(&mut self, row: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { row, relation, rhs });
    }

    pub fn has_binaries(&self) -> bool {
        self.integrality.contains(&VarKind::Binary)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars;
        if self.objective.len() != n || self.bounds.len() != n || self.integrality.len() != n {
            return Err(LpError::MalformedProblem(format!(
                "num_vars = {n} but objective/bounds/integrality have {}/{}/{} entries",
                self.objective.len(),
                self.bounds.len(),
                self.integrality.len()
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::MalformedProblem(format!("objective[{j}] is not finite")));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::MalformedProblem(format!("bad bounds on x{j}")));
            }
            if self.integrality[j] == VarKind::Binary && (lo < 0.0 || hi > 1.0) {
                return Err(LpError::MalformedProblem(format!(
                    "binary x{j} has bounds [{lo}, {hi}] outside [0, 1]"
                )));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::MalformedProblem(format!("row {i} rhs is not finite")));
            }
            for &(j, a) in &c.row {
                if j >= n {
                    return Err(LpError::MalformedProblem(format!(
                        "row {i} references x{j} but num_vars = {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::MalformedProblem(format!(
                        "row {i} has a non-finite coefficient"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration_limit",
        })
    }
}

/// Position of a structural variable in the final basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    /// Present when optimal, or with an incumbent when a MILP hits a limit.
    pub x: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    /// Simplex pivots and bound flips, summed over all LPs solved.
    pub iterations: u64,
    pub nodes_explored: u64,
    /// Phase-2 reduced costs of the structural variables (optimal LPs only).
    pub reduced_costs: Vec<f64>,
    pub column_status: Vec<ColumnStatus>,
}

impl LpSolution {
    pub(crate) fn without_point(status: Status, iterations: u64) -> Self {
        Self {
            status,
            x: None,
            objective_value: None,
            iterations,
            nodes_explored: 0,
            reduced_costs: Vec::new(),
            column_status: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub int_tol: f64,
    pub max_iterations: u64,
    pub max_nodes: u64,
    pub mip_gap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            int_tol: 1e-6,
            max_iterations: 50_000,
            max_nodes: 10_000,
            mip_gap: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), LpError> {
        if !(self.feas_tol > 0.0 && self.int_tol > 0.0 && self.mip_gap > 0.0) {
            return Err(LpError::MalformedProblem("solver tolerances must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ViolationKind {
    Row(usize),
    LowerBound(usize),
    UpperBound(usize),
    Integrality(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub magnitude: f64,
}

/// Every row, bound and integrality violation of `x` larger than `feas_tol`,
/// largest first. Empty iff `x` is feasible.
pub fn check_solution(problem: &LpProblem, x: &[f64], feas_tol: f64) -> Result<Vec<Violation>, LpError> {
    if x.len() != problem.num_vars {
        return Err(LpError::DimensionMismatch {
            expected: problem.num_vars,
            found: x.len(),
        });
    }
    let mut out = Vec::new();
    for (i, c) in problem.constraints.iter().enumerate() {
        let v = c.violation(x);
        if v > feas_tol || v.is_nan() {
            out.push(Violation {
                kind: ViolationKind::Row(i),
                magnitude: v,
            });
        }
    }
    for (j, (&(lo, hi), &xj)) in problem.bounds.iter().zip(x).enumerate() {
        if lo - xj > feas_tol {
            out.push(Violation {
                kind: ViolationKind::LowerBound(j),
                magnitude: lo - xj,
            });
        }
        if xj - hi > feas_tol {
            out.push(Violation {
                kind: ViolationKind::UpperBound(j),
                magnitude: xj - hi,
            });
        }
        if problem.integrality[j] == VarKind::Binary {
            let frac = (xj - xj.round()).abs();
            if frac > feas_tol {
                out.push(Violation {
                    kind: ViolationKind::Integrality(j),
                    magnitude: frac,
                });
            }
        }
    }
    out.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    Ok(out)
}
