//! Brute-force reference solvers and instance generators shared by the
//! integration tests. Nothing here calls into the simplex code.

#![allow(dead_code)]

use dhtwin::lpsolver::{LpProblem, Relation, VarKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

/// Dense Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (r, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[col + 1 + r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// One linear constraint `a x (rel) b` in dense form.
#[derive(Clone, Debug)]
struct Dense {
    a: Vec<f64>,
    rel: Relation,
    b: f64,
}

fn dense_constraints(p: &LpProblem) -> Vec<Dense> {
    let n = p.num_vars;
    let mut out = Vec::new();
    for c in &p.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.row {
            a[j] += v;
        }
        out.push(Dense {
            a,
            rel: c.relation,
            b: c.rhs,
        });
    }
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        assert!(lo.is_finite() && hi.is_finite(), "oracle needs a bounded box");
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if lo == hi {
            out.push(Dense {
                a: e,
                rel: Relation::Eq,
                b: lo,
            });
        } else {
            out.push(Dense {
                a: e.clone(),
                rel: Relation::Ge,
                b: lo,
            });
            out.push(Dense {
                a: e,
                rel: Relation::Le,
                b: hi,
            });
        }
    }
    out
}

fn satisfied(d: &Dense, x: &[f64]) -> bool {
    let lhs: f64 = d.a.iter().zip(x).map(|(a, x)| a * x).sum();
    let tol = TOL * (1.0 + d.b.abs() + d.a.iter().map(|v| v.abs()).sum::<f64>());
    match d.rel {
        Relation::Le => lhs <= d.b + tol,
        Relation::Ge => lhs >= d.b - tol,
        Relation::Eq => (lhs - d.b).abs() <= tol,
    }
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Minimum of a box-bounded LP over all basic feasible points. Binaries
/// are treated as continuous in `[0, 1]`. `None` when infeasible.
pub fn vertex_oracle(p: &LpProblem) -> Option<(f64, Vec<f64>)> {
    let n = p.num_vars;
    if n == 0 {
        let ok = p.constraints.iter().all(|c| match c.relation {
            Relation::Le => 0.0 <= c.rhs + TOL,
            Relation::Ge => 0.0 >= c.rhs - TOL,
            Relation::Eq => c.rhs.abs() <= TOL,
        });
        return ok.then(|| (0.0, Vec::new()));
    }
    if p.bounds.iter().any(|(lo, hi)| lo == hi) {
        return eliminate_fixed(p);
    }
    let all = dense_constraints(p);
    // Every vertex is the solution of n linearly independent active
    // constraints; all-zero rows can never be part of such a set.
    let candidates: Vec<&Dense> = all.iter().filter(|d| d.a.iter().any(|&v| v != 0.0)).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    combinations(candidates.len(), n, &mut |idx| {
        let a = idx.iter().map(|&i| candidates[i].a.clone()).collect();
        let b = idx.iter().map(|&i| candidates[i].b).collect();
        let Some(x) = solve_dense(a, b) else { return };
        if all.iter().all(|d| satisfied(d, &x)) {
            let z: f64 = p.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
            if best.as_ref().is_none_or(|(bz, _)| z < *bz) {
                best = Some((z, x));
            }
        }
    });
    best
}

/// Substitutes variables with `lo == hi` into the rows and enumerates the
/// vertices of the remaining problem.
fn eliminate_fixed(p: &LpProblem) -> Option<(f64, Vec<f64>)> {
    let free: Vec<usize> = (0..p.num_vars).filter(|&j| p.bounds[j].0 != p.bounds[j].1).collect();
    let mut slot = vec![usize::MAX; p.num_vars];
    let mut q = LpProblem::new();
    for (k, &j) in free.iter().enumerate() {
        slot[j] = k;
        q.add_var(p.objective[j], p.bounds[j].0, p.bounds[j].1);
    }
    let z0: f64 = (0..p.num_vars)
        .filter(|&j| slot[j] == usize::MAX)
        .map(|j| p.objective[j] * p.bounds[j].0)
        .sum();
    for c in &p.constraints {
        let mut rhs = c.rhs;
        let mut row = Vec::new();
        for &(j, v) in &c.row {
            if slot[j] == usize::MAX {
                rhs -= v * p.bounds[j].0;
            } else {
                row.push((slot[j], v));
            }
        }
        q.add_constraint(row, c.relation, rhs);
    }
    let (z, y) = vertex_oracle(&q)?;
    let mut x: Vec<f64> = p.bounds.iter().map(|b| b.0).collect();
    for (k, &j) in free.iter().enumerate() {
        x[j] = y[k];
    }
    Some((z + z0, x))
}

/// Exact MILP optimum by enumerating every binary assignment and solving the
/// remaining continuous LP with [`vertex_oracle`].
pub fn milp_oracle(p: &LpProblem) -> Option<f64> {
    let bins: Vec<usize> = (0..p.num_vars)
        .filter(|&j| p.integrality[j] == VarKind::Binary)
        .collect();
    assert!(bins.len() <= 16);
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut q = p.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            q.bounds[j] = (v, v);
            q.integrality[j] = VarKind::Continuous;
        }
        if let Some((z, _)) = vertex_oracle(&q) {
            if best.is_none_or(|b| z < b) {
                best = Some(z);
            }
        }
    }
    best
}

fn coef(rng: &mut ChaCha8Rng) -> f64 {
    // One decimal keeps instances away from pathological near-degeneracy.
    (rng.gen_range(-50..=50) as f64) / 10.0
}

fn sparse_row(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<(usize, f64)> {
    let mut row = Vec::new();
    for j in 0..n {
        if rng.gen_bool(density) {
            row.push((j, coef(rng)));
        }
    }
    row
}

/// Box-bounded LP with `n` variables and `m` rows. Rows are built around a
/// random interior point so most instances are feasible; about one in six
/// gets a contradictory extra pair of rows.
pub fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LpProblem {
    let mut p = LpProblem::new();
    let mut x0 = Vec::with_capacity(n);
    for _ in 0..n {
        let hi = rng.gen_range(1..=10) as f64;
        p.add_var(coef(rng), 0.0, hi);
        x0.push(rng.gen_range(0.0..hi));
    }
    for _ in 0..m {
        let row = sparse_row(rng, n, 0.7);
        let act: f64 = row.iter().map(|&(j, a)| a * x0[j]).sum();
        match rng.gen_range(0..6) {
            0 => p.add_constraint(row, Relation::Eq, (act * 10.0).round() / 10.0),
            1 | 2 => p.add_constraint(row, Relation::Ge, (act - rng.gen_range(0.0..3.0) * 10.0).round() / 10.0),
            _ => p.add_constraint(row, Relation::Le, (act + rng.gen_range(0.0..3.0) * 10.0).round() / 10.0),
        }
    }
    if rng.gen_range(0..6) == 0 {
        let j = rng.gen_range(0..n);
        p.add_constraint(vec![(j, 1.0)], Relation::Ge, 6.0);
        p.add_constraint(vec![(j, 1.0)], Relation::Le, 5.0);
    }
    p
}

/// `nb` binaries plus `nc` box-bounded continuous variables.
pub fn random_milp(rng: &mut ChaCha8Rng, nb: usize, nc: usize, m: usize) -> LpProblem {
    let mut p = LpProblem::new();
    for _ in 0..nb {
        p.add_binary(coef(rng));
    }
    for _ in 0..nc {
        p.add_var(coef(rng), 0.0, rng.gen_range(1..=5) as f64);
    }
    let n = nb + nc;
    for _ in 0..m {
        let row = sparse_row(rng, n, 0.6);
        let rhs = (rng.gen_range(-2.0..8.0) * 10.0f64).round() / 10.0;
        let rel = if rng.gen_bool(0.8) { Relation::Le } else { Relation::Ge };
        let rhs = if rel == Relation::Ge { -rhs } else { rhs };
        p.add_constraint(row, rel, rhs);
    }
    p
}

pub struct DispatchCase {
    /// Parameters the planner sees.
    pub planner: dhtwin::PlantParams,
    /// Same plant with its curtailment threshold and capacity just above the
    /// planner's `e_max`, so a replayed plan never triggers plant-only clipping.
    pub plant: dhtwin::PlantParams,
    pub bundle: dhtwin::ForecastBundle,
    pub config: dhtwin::DispatchConfig,
    pub initial: dhtwin::dispatch::Initial,
}

/// Random small dispatch instance with `steps` horizon steps.
pub fn random_dispatch(rng: &mut ChaCha8Rng, steps: usize) -> DispatchCase {
    use dhtwin::timeseries::{TimeGrid, TimeSeries, Unit};

    let mut planner = dhtwin::PlantParams::with_capacities(rng.gen_range(50.0..250.0), rng.gen_range(20.0..80.0), 70.0);
    planner.loss_k = if rng.gen_bool(0.2) {
        0.0
    } else {
        rng.gen_range(0.0..0.02)
    };
    planner.e_min = rng.gen_range(50.0..300.0);
    planner.e_max = planner.e_min + rng.gen_range(100.0..800.0);
    planner.e_curtail = planner.e_max;
    if rng.gen_bool(0.3) {
        planner.ramp_hp = Some(rng.gen_range(20.0..100.0));
    }
    if rng.gen_bool(0.3) {
        planner.ramp_gb = Some(rng.gen_range(50.0..300.0));
    }
    let mut plant = planner.clone();
    plant.e_max += 1.0;
    plant.e_curtail = plant.e_max;

    let grid = TimeGrid::new(1_506_816_000, 1800, steps).unwrap();
    let load: Vec<f64> = (0..steps).map(|_| rng.gen_range(0.0..150.0)).collect();
    let solar: Vec<f64> = (0..steps)
        .map(|_| {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.0..60.0)
            }
        })
        .collect();
    let price: Vec<f64> = (0..steps).map(|_| rng.gen_range(0.02..0.3)).collect();
    let bundle = dhtwin::ForecastBundle::new(
        TimeSeries::new(grid, load, Unit::KiloWatt).unwrap(),
        TimeSeries::new(grid, solar, Unit::KiloWatt).unwrap(),
        TimeSeries::new(grid, price, Unit::EurPerKiloWattHour).unwrap(),
        0.065,
    )
    .unwrap();
    let config = dhtwin::DispatchConfig {
        horizon_steps: steps,
        terminal_energy_min: rng.gen_bool(0.2).then_some(planner.e_min + 10.0),
        ..dhtwin::DispatchConfig::default()
    };
    let initial = dhtwin::dispatch::Initial {
        energy: rng.gen_range(planner.e_min..planner.e_max),
        p_hp_prev: rng.gen_range(0.0..planner.p_hp_max),
        p_gb_prev: rng.gen_range(0.0..planner.p_gb_max),
    };
    DispatchCase {
        planner,
        plant,
        bundle,
        config,
        initial,
    }
}
