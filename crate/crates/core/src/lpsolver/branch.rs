//! Best-first branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{solve_lp, LpError, LpProblem, LpSolution, SolverOptions, Status, VarKind};

struct Node {
    /// LP bound of the parent; the node cannot do better.
    bound: f64,
    id: u64,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

fn most_fractional(x: &[f64], binaries: &[usize], int_tol: f64) -> Option<usize> {
    let mut best = None;
    let mut best_frac = int_tol;
    for &j in binaries {
        let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if frac > best_frac {
            best_frac = frac;
            best = Some(j);
        }
    }
    best
}

/// Solves `problem` honoring binary flags.
///
/// Nodes are explored best-first by parent LP bound, branching on the most
/// fractional binary. A node is pruned when its bound is within
/// `mip_gap * max(1, |incumbent|)` of the incumbent. Hitting `max_nodes`
/// returns `IterationLimit` with the incumbent, if any, attached.
pub fn solve_milp(problem: &LpProblem, options: &SolverOptions) -> Result<LpSolution, LpError> {
    problem.validate()?;
    options.validate()?;
    let binaries: Vec<usize> = (0..problem.num_vars)
        .filter(|&j| problem.integrality[j] == VarKind::Binary)
        .collect();
    if binaries.is_empty() {
        return solve_lp(problem, options);
    }

    let mut work = problem.clone();
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        fixings: Vec::new(),
    });
    let mut next_id = 1u64;
    let mut incumbent: Option<(f64, LpSolution)> = None;
    let mut iterations = 0u64;
    let mut nodes = 0u64;
    let mut limit_hit = false;
    let mut unbounded = false;

    let cutoff = |inc: &Option<(f64, LpSolution)>| {
        inc.as_ref()
            .map(|(z, _)| z - options.mip_gap * z.abs().max(1.0))
            .unwrap_or(f64::INFINITY)
    };

    while let Some(node) = heap.pop() {
        if node.bound >= cutoff(&incumbent) {
            continue;
        }
        if nodes >= options.max_nodes {
            limit_hit = true;
            break;
        }
        nodes += 1;

        work.bounds.copy_from_slice(&problem.bounds);
        for &(j, v) in &node.fixings {
            work.bounds[j] = (v, v);
        }
        let lp = solve_lp(&work, options)?;
        iterations += lp.iterations;
        match lp.status {
            Status::Optimal => {}
            Status::Infeasible => continue,
            Status::Unbounded => {
                unbounded = true;
                break;
            }
            Status::IterationLimit => {
                limit_hit = true;
                continue;
            }
        }
        let z = lp.objective_value.expect("optimal LP has an objective");
        if z >= cutoff(&incumbent) {
            continue;
        }
        let x = lp.x.as_ref().expect("optimal LP has a point");
        match most_fractional(x, &binaries, options.int_tol) {
            None => {
                let mut sol = lp;
                if let Some(x) = sol.x.as_mut() {
                    for &j in &binaries {
                        x[j] = x[j].round();
                    }
                }
                log::trace!("milp: incumbent {z} at node {nodes}");
                incumbent = Some((z, sol));
            }
            Some(j) => {
                for v in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, v));
                    heap.push(Node {
                        bound: z,
                        id: next_id,
                        fixings,
                    });
                    next_id += 1;
                }
            }
        }
    }

    if unbounded {
        let mut s = LpSolution::without_point(Status::Unbounded, iterations);
        s.nodes_explored = nodes;
        return Ok(s);
    }
    let status_without = if limit_hit {
        Status::IterationLimit
    } else {
        Status::Infeasible
    };
    Ok(match incumbent {
        Some((z, mut sol)) => {
            // Either the node budget ran out or a node LP hit its own limit:
            // the incumbent is unproven.
            sol.status = if limit_hit {
                Status::IterationLimit
            } else {
                Status::Optimal
            };
            sol.objective_value = Some(z);
            sol.iterations = iterations;
            sol.nodes_explored = nodes;
            sol
        }
        None => {
            let mut s = LpSolution::without_point(status_without, iterations);
            s.nodes_explored = nodes;
            s
        }
    })
}
