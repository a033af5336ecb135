//! Dense bounded-variable primal simplex.
//!
//! Rows are brought to equality form with one slack per inequality
//! (`[0, inf)` for `<=`, `(-inf, 0]` for `>=`). Every row starts with either
//! its slack or an artificial column in the basis, scaled so the initial
//! basis is the identity; phase 1 minimizes the sum of artificials, phase 2
//! the true objective. Nonbasic columns sit at a finite bound (or at zero
//! when free), so variable bounds never become rows.
//!
//! Pricing is Dantzig's largest reduced cost with a Harris two-pass ratio
//! test. After `3 * (rows + cols)` pivots without objective progress the
//! phase switches to Bland's rule with a textbook ratio test.

use super::{ColumnStatus, LpError, LpProblem, LpSolution, Relation, SolverOptions, Status};

const PIVOT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Col {
    Basic(usize),
    Lower,
    Upper,
    /// Free and nonbasic, held at zero.
    Zero,
}

enum Move {
    /// Entering column runs to its opposite bound; basis unchanged.
    Flip(f64),
    /// Entering column replaces the basic variable of `row` after a step `theta`.
    Pivot { row: usize, theta: f64 },
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    m: usize,
    n: usize,
    n_struct: usize,
    first_art: usize,
    /// Current `B^-1 A`, row-major `m x n`.
    t: Vec<f64>,
    /// Row-scaled original matrix and right-hand side (initial basis = I).
    a0: Vec<f64>,
    b0: Vec<f64>,
    init_col: Vec<usize>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<Col>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: u64,
    scratch: Vec<f64>,
    nz: Vec<usize>,
}

impl Tableau {
    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            Col::Lower => self.lower[j],
            Col::Upper => self.upper[j],
            Col::Zero | Col::Basic(_) => 0.0,
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            Col::Basic(r) => self.beta[r],
            _ => self.nonbasic_value(j),
        }
    }

    fn objective(&self) -> f64 {
        (0..self.n)
            .filter(|&j| self.cost[j] != 0.0)
            .map(|j| self.cost[j] * self.value(j))
            .sum()
    }

    fn recompute_reduced_costs(&mut self) {
        let n = self.n;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * n..(i + 1) * n];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// `beta = B^-1 (b - N x_N)`, using the columns of the initial identity basis.
    fn refresh_beta(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut resid = self.b0.clone();
        for j in 0..n {
            if matches!(self.state[j], Col::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for (i, r) in resid.iter_mut().enumerate() {
                    let a = self.a0[i * n + j];
                    if a != 0.0 {
                        *r -= a * v;
                    }
                }
            }
        }
        for k in 0..m {
            let row = &self.t[k * n..(k + 1) * n];
            self.beta[k] = (0..m).map(|i| row[self.init_col[i]] * resid[i]).sum();
        }
    }

    fn choose_entering(&self, bland: bool, exclude_art: bool, dual_tol: f64) -> Option<(usize, f64)> {
        let limit = if exclude_art { self.first_art } else { self.n };
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..limit {
            let dj = self.d[j];
            let dir = match self.state[j] {
                Col::Basic(_) => continue,
                _ if self.lower[j] == self.upper[j] => continue,
                Col::Lower if dj < -dual_tol => 1.0,
                Col::Upper if dj > dual_tol => -1.0,
                Col::Zero if dj.abs() > dual_tol => -dj.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn row_limit(&self, i: usize, a: f64, slack: f64) -> Option<f64> {
        let j = self.basis[i];
        if a > PIVOT_TOL && self.lower[j].is_finite() {
            Some((self.beta[i] - self.lower[j] + slack) / a)
        } else if a < -PIVOT_TOL && self.upper[j].is_finite() {
            Some((self.upper[j] - self.beta[i] + slack) / -a)
        } else {
            None
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, bland: bool, tol: f64) -> Option<Move> {
        let n = self.n;
        let range = self.upper[q] - self.lower[q];
        let mut chosen: Option<(usize, f64)> = None;

        if bland {
            let mut best = f64::INFINITY;
            for i in 0..self.m {
                let a = dir * self.t[i * n + q];
                if let Some(lim) = self.row_limit(i, a, 0.0) {
                    let lim = lim.max(0.0);
                    let better = match chosen {
                        None => true,
                        Some((r, _)) => lim < best - 1e-12 || (lim <= best + 1e-12 && self.basis[i] < self.basis[r]),
                    };
                    if better {
                        best = lim;
                        chosen = Some((i, lim));
                    }
                }
            }
        } else {
            let mut theta_max = f64::INFINITY;
            for i in 0..self.m {
                let a = dir * self.t[i * n + q];
                if let Some(lim) = self.row_limit(i, a, tol) {
                    theta_max = theta_max.min(lim);
                }
            }
            if theta_max.is_finite() {
                let mut best_abs = 0.0;
                for i in 0..self.m {
                    let a = dir * self.t[i * n + q];
                    if let Some(lim) = self.row_limit(i, a, 0.0) {
                        if lim <= theta_max && a.abs() > best_abs {
                            best_abs = a.abs();
                            chosen = Some((i, lim.max(0.0)));
                        }
                    }
                }
            }
        }

        match chosen {
            Some((_, theta)) if range <= theta => Some(Move::Flip(range)),
            Some((row, theta)) => Some(Move::Pivot { row, theta }),
            None if range.is_finite() => Some(Move::Flip(range)),
            None => None,
        }
    }

    fn shift_basics(&mut self, q: usize, delta: f64) {
        let n = self.n;
        for i in 0..self.m {
            let a = self.t[i * n + q];
            if a != 0.0 {
                self.beta[i] -= a * delta;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let piv = self.t[r * n + q];
        self.nz.clear();
        for j in 0..n {
            let v = self.t[r * n + j] / piv;
            self.t[r * n + j] = v;
            self.scratch[j] = v;
            if v != 0.0 {
                self.nz.push(j);
            }
        }
        self.t[r * n + q] = 1.0;
        self.scratch[q] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            for &j in &self.nz {
                row[j] -= f * self.scratch[j];
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &self.nz {
                self.d[j] -= f * self.scratch[j];
            }
        }
        self.d[q] = 0.0;

        self.basis[r] = q;
        self.state[q] = Col::Basic(r);
    }

    fn run_phase(&mut self, opts: &SolverOptions, exclude_art: bool) -> PhaseEnd {
        let stall_limit = 3 * (self.m + self.n);
        let mut bland = false;
        let mut stall = 0usize;
        let mut z = self.objective();
        loop {
            let Some((q, dir)) = self.choose_entering(bland, exclude_art, opts.feas_tol) else {
                return PhaseEnd::Optimal;
            };
            if self.iterations >= opts.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            let Some(mv) = self.ratio_test(q, dir, bland, opts.feas_tol) else {
                return PhaseEnd::Unbounded;
            };
            let dq = self.d[q];
            let theta = match mv {
                Move::Flip(range) => {
                    self.shift_basics(q, dir * range);
                    self.state[q] = if dir > 0.0 { Col::Upper } else { Col::Lower };
                    range
                }
                Move::Pivot { row, theta } => {
                    let delta = dir * theta;
                    let entering_value = self.nonbasic_value(q) + delta;
                    let a = dir * self.t[row * self.n + q];
                    self.shift_basics(q, delta);
                    let leaving = self.basis[row];
                    self.state[leaving] = if a > 0.0 { Col::Lower } else { Col::Upper };
                    self.beta[row] = entering_value;
                    self.pivot(row, q);
                    theta
                }
            };
            self.iterations += 1;

            let dz = dq * dir * theta;
            if dz < -1e-12 * (1.0 + z.abs()) {
                z += dz;
                stall = 0;
            } else {
                stall += 1;
                if stall > stall_limit && !bland {
                    log::debug!("simplex stalled after {} pivots, switching to Bland", self.iterations);
                    bland = true;
                }
            }
        }
    }

    /// Pivots basic artificials (value ~0 after phase 1) out of the basis where
    /// possible; rows where that fails are redundant and keep a fixed-at-zero
    /// artificial.
    fn expel_artificials(&mut self) {
        let n = self.n;
        for r in 0..self.m {
            if self.basis[r] < self.first_art {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_abs = PIVOT_TOL;
            for j in 0..self.first_art {
                if matches!(self.state[j], Col::Basic(_)) {
                    continue;
                }
                let a = self.t[r * n + j].abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(j);
                }
            }
            if let Some(q) = best {
                let delta = self.beta[r] / self.t[r * n + q];
                let entering_value = self.nonbasic_value(q) + delta;
                self.shift_basics(q, delta);
                let leaving = self.basis[r];
                self.state[leaving] = Col::Lower;
                self.beta[r] = entering_value;
                self.pivot(r, q);
                self.iterations += 1;
            }
        }
        for j in self.first_art..n {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
        }
    }
}

/// Solves the continuous relaxation of `problem` (binary flags are ignored).
pub fn solve_lp(problem: &LpProblem, options: &SolverOptions) -> Result<LpSolution, LpError> {
    problem.validate()?;
    options.validate()?;
    let tol = options.feas_tol;
    let n_struct = problem.num_vars;

    if problem.bounds.iter().any(|&(lo, hi)| lo > hi) {
        return Ok(LpSolution::without_point(Status::Infeasible, 0));
    }

    // Densify rows, dropping empty ones after checking `0 rel rhs`.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &problem.constraints {
        let mut dense = vec![0.0; n_struct];
        for &(j, a) in &c.row {
            dense[j] += a;
        }
        if dense.iter().all(|&a| a == 0.0) {
            let ok = match c.relation {
                Relation::Le => 0.0 <= c.rhs + tol,
                Relation::Ge => 0.0 >= c.rhs - tol,
                Relation::Eq => c.rhs.abs() <= tol,
            };
            if !ok {
                return Ok(LpSolution::without_point(Status::Infeasible, 0));
            }
            continue;
        }
        rows.push((dense, c.relation, c.rhs));
    }
    let m = rows.len();

    // Initial nonbasic values of structurals.
    let mut lower: Vec<f64> = problem.bounds.iter().map(|b| b.0).collect();
    let mut upper: Vec<f64> = problem.bounds.iter().map(|b| b.1).collect();
    let mut state: Vec<Col> = problem
        .bounds
        .iter()
        .map(|&(lo, hi)| {
            if lo.is_finite() {
                Col::Lower
            } else if hi.is_finite() {
                Col::Upper
            } else {
                Col::Zero
            }
        })
        .collect();
    let x0: Vec<f64> = (0..n_struct)
        .map(|j| match state[j] {
            Col::Lower => lower[j],
            Col::Upper => upper[j],
            _ => 0.0,
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    // Decide per row whether the slack can start basic.
    let mut resid = Vec::with_capacity(m);
    let mut needs_art = Vec::with_capacity(m);
    for (dense, rel, rhs) in &rows {
        let r = rhs - dense.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>();
        resid.push(r);
        needs_art.push(match rel {
            Relation::Le => r < 0.0,
            Relation::Ge => r > 0.0,
            Relation::Eq => true,
        });
    }
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let first_slack = n_struct;
    let first_art = n_struct + n_slack;
    let n = first_art + n_art;

    let mut a0 = vec![0.0; m * n];
    let mut b0 = vec![0.0; m];
    let mut init_col = vec![0; m];
    let mut beta = vec![0.0; m];
    let mut cost = vec![0.0; n];
    let mut slack_j = first_slack;
    let mut art_j = first_art;
    lower.resize(n, 0.0);
    upper.resize(n, f64::INFINITY);
    state.resize(n, Col::Lower);

    for (i, (dense, rel, rhs)) in rows.iter().enumerate() {
        let mut slack_col = None;
        if *rel != Relation::Eq {
            slack_col = Some(slack_j);
            if *rel == Relation::Ge {
                lower[slack_j] = f64::NEG_INFINITY;
                upper[slack_j] = 0.0;
                state[slack_j] = Col::Upper;
            }
            slack_j += 1;
        }
        let (basic, sign) = if needs_art[i] {
            let j = art_j;
            art_j += 1;
            cost[j] = 1.0;
            (j, if resid[i] >= 0.0 { 1.0 } else { -1.0 })
        } else {
            (slack_col.expect("inequality row has a slack"), 1.0)
        };
        let row = &mut a0[i * n..(i + 1) * n];
        for (j, &a) in dense.iter().enumerate() {
            row[j] = sign * a;
        }
        if let Some(s) = slack_col {
            row[s] = sign;
        }
        if basic >= first_art {
            row[basic] = 1.0;
        }
        b0[i] = sign * rhs;
        init_col[i] = basic;
        state[basic] = Col::Basic(i);
        beta[i] = sign * resid[i];
    }

    let mut tab = Tableau {
        m,
        n,
        n_struct,
        first_art,
        t: a0.clone(),
        a0,
        b0,
        init_col: init_col.clone(),
        beta,
        basis: init_col,
        state,
        lower,
        upper,
        cost,
        d: vec![0.0; n],
        iterations: 0,
        scratch: vec![0.0; n],
        nz: Vec::with_capacity(n),
    };

    if n_art > 0 {
        tab.recompute_reduced_costs();
        match tab.run_phase(options, false) {
            PhaseEnd::Optimal => {}
            PhaseEnd::IterationLimit => return Ok(LpSolution::without_point(Status::IterationLimit, tab.iterations)),
            PhaseEnd::Unbounded => unreachable!("phase 1 objective is bounded below"),
        }
        tab.refresh_beta();
        let infeasibility: f64 = (first_art..n).map(|j| tab.value(j).abs()).sum();
        let scale = tab.b0.iter().fold(1.0f64, |acc, b| acc.max(b.abs()));
        if infeasibility > tol * scale {
            return Ok(LpSolution::without_point(Status::Infeasible, tab.iterations));
        }
        tab.expel_artificials();
        tab.refresh_beta();
    }

    tab.cost.iter_mut().for_each(|c| *c = 0.0);
    tab.cost[..n_struct].copy_from_slice(&problem.objective);
    tab.recompute_reduced_costs();
    let end = tab.run_phase(options, true);
    match end {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => return Ok(LpSolution::without_point(Status::Unbounded, tab.iterations)),
        PhaseEnd::IterationLimit => return Ok(LpSolution::without_point(Status::IterationLimit, tab.iterations)),
    }
    tab.refresh_beta();

    let x: Vec<f64> = (0..tab.n_struct).map(|j| tab.value(j)).collect();
    let column_status = (0..tab.n_struct)
        .map(|j| match tab.state[j] {
            Col::Basic(_) => ColumnStatus::Basic,
            Col::Lower => ColumnStatus::AtLower,
            Col::Upper => ColumnStatus::AtUpper,
            Col::Zero => ColumnStatus::Free,
        })
        .collect();
    Ok(LpSolution {
        status: Status::Optimal,
        objective_value: Some(problem.objective_value(&x)),
        x: Some(x),
        iterations: tab.iterations,
        nodes_explored: 0,
        reduced_costs: tab.d[..tab.n_struct].to_vec(),
        column_status,
    })
}
