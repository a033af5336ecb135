//! Plain-text problem dump, for offline debugging of dispatch instances.
//!
//! ```text
//! lp v1
//! vars 3
//! minimize 0.5 0 -2
//! bound 0 0 inf
//! bound 1 -inf 5
//! binary 2
//! row <= 10 | 0:1 1:2
//! row = 4 | 2:1
//! end
//! ```
//!
//! `minimize` lists all objective coefficients densely. `bound` lines are
//! emitted for every variable. Rows are sparse `index:coefficient` pairs.
//! Numbers use the shortest round-trip decimal form; infinities are `inf`.
//! Lines starting with `#` are comments.

use std::fmt::Write as _;

use super::{LpError, LpProblem, Relation, VarKind};

pub fn write_problem(problem: &LpProblem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lp v1");
    let _ = writeln!(s, "vars {}", problem.num_vars);
    let _ = write!(s, "minimize");
    for c in &problem.objective {
        let _ = write!(s, " {c}");
    }
    s.push('\n');
    for (j, (lo, hi)) in problem.bounds.iter().enumerate() {
        let _ = writeln!(s, "bound {j} {lo} {hi}");
    }
    let bins: Vec<String> = problem
        .integrality
        .iter()
        .enumerate()
        .filter(|(_, k)| **k == VarKind::Binary)
        .map(|(j, _)| j.to_string())
        .collect();
    if !bins.is_empty() {
        let _ = writeln!(s, "binary {}", bins.join(" "));
    }
    for c in &problem.constraints {
        let _ = write!(s, "row {} {} |", c.relation.symbol(), c.rhs);
        for (j, a) in &c.row {
            let _ = write!(s, " {j}:{a}");
        }
        s.push('\n');
    }
    s.push_str("end\n");
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> LpError {
    LpError::MalformedProblem(format!("line {line}: {msg}"))
}

fn num(tok: &str, line: usize) -> Result<f64, LpError> {
    tok.parse::<f64>()
        .map_err(|_| bad(line, format!("invalid number `{tok}`")))
}

fn index(tok: &str, line: usize) -> Result<usize, LpError> {
    tok.parse::<usize>()
        .map_err(|_| bad(line, format!("invalid index `{tok}`")))
}

pub fn parse_problem(text: &str) -> Result<LpProblem, LpError> {
    let mut p = LpProblem::new();
    let mut seen_header = false;
    let mut ended = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ended {
            return Err(bad(line_no, "content after `end`"));
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default();
        if !seen_header {
            if line != "lp v1" {
                return Err(bad(line_no, "expected header `lp v1`"));
            }
            seen_header = true;
            continue;
        }
        match key {
            "vars" => {
                let n = index(toks.next().ok_or_else(|| bad(line_no, "missing count"))?, line_no)?;
                p.num_vars = n;
                p.objective = vec![0.0; n];
                p.bounds = vec![(0.0, f64::INFINITY); n];
                p.integrality = vec![VarKind::Continuous; n];
            }
            "minimize" => {
                let c = toks.map(|t| num(t, line_no)).collect::<Result<Vec<_>, _>>()?;
                if c.len() != p.num_vars {
                    return Err(bad(line_no, "objective length differs from `vars`"));
                }
                p.objective = c;
            }
            "bound" => {
                let parts: Vec<&str> = toks.collect();
                if parts.len() != 3 {
                    return Err(bad(line_no, "expected `bound <j> <lower> <upper>`"));
                }
                let j = index(parts[0], line_no)?;
                if j >= p.num_vars {
                    return Err(bad(line_no, "bound index out of range"));
                }
                p.bounds[j] = (num(parts[1], line_no)?, num(parts[2], line_no)?);
            }
            "binary" => {
                for t in toks {
                    let j = index(t, line_no)?;
                    if j >= p.num_vars {
                        return Err(bad(line_no, "binary index out of range"));
                    }
                    p.integrality[j] = VarKind::Binary;
                }
            }
            "row" => {
                let (head, body) = line["row".len()..]
                    .split_once('|')
                    .ok_or_else(|| bad(line_no, "row without `|`"))?;
                let head: Vec<&str> = head.split_whitespace().collect();
                if head.len() != 2 {
                    return Err(bad(line_no, "expected `row <rel> <rhs> | ...`"));
                }
                let relation = match head[0] {
                    "<=" => Relation::Le,
                    ">=" => Relation::Ge,
                    "=" => Relation::Eq,
                    other => return Err(bad(line_no, format!("unknown relation `{other}`"))),
                };
                let rhs = num(head[1], line_no)?;
                let mut row = Vec::new();
                for pair in body.split_whitespace() {
                    let (j, a) = pair
                        .split_once(':')
                        .ok_or_else(|| bad(line_no, format!("bad term `{pair}`")))?;
                    row.push((index(j, line_no)?, num(a, line_no)?));
                }
                p.add_constraint(row, relation, rhs);
            }
            "end" => ended = true,
            other => return Err(bad(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if !ended {
        return Err(LpError::MalformedProblem("missing `end`".into()));
    }
    p.validate()?;
    Ok(p)
}
