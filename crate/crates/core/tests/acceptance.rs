//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use common::{milp_oracle, random_dispatch, random_lp, random_milp, vertex_oracle};
use dhtwin::dispatch::{build_problem, extract_plan};
use dhtwin::forecast::{fit_affine, fit_solar};
use dhtwin::lpsolver::{solve_lp, solve_milp, SolverOptions, Status};
use dhtwin::runner::{
    builtin_scenario, open_loop_optimum, recompute_costs, run_scenario, ControllerKind, DataSource, ForecastMode,
    KpiReport, Period, RunOutput, ScenarioConfig,
};
use dhtwin::timeseries::{read_csv_table, write_csv_columns, TimeGrid, TimeSeries, Unit};
use dhtwin::{rbc_decide, ControlAction, Measurement, Origin, PlantParams, PlantState, RbcParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (b - a) / a
}

/// Every KPI report produced by the suite, checked for storage closure.
static REPORTS: Mutex<Vec<KpiReport>> = Mutex::new(Vec::new());

fn run(cfg: &ScenarioConfig) -> Result<RunOutput, String> {
    let out = run_scenario(cfg).map_err(|e| format!("{} {:?}: {e}", cfg.name, cfg.controller))?;
    REPORTS.lock().unwrap().push(out.kpi.clone());
    Ok(out)
}

fn benchmark(name: &str, controller: ControllerKind, seed: u64) -> ScenarioConfig {
    let mut c = builtin_scenario(name).expect("builtin");
    c.controller = controller;
    c.seed = seed;
    c
}

/// Benchmark runs keyed by (scenario, controller, seed), executed on a
/// worker pool.
struct Batch {
    runs: Vec<((String, ControllerKind, u64), KpiReport)>,
}

impl Batch {
    fn execute() -> Result<Self, String> {
        let mut jobs = Vec::new();
        for seed in SEEDS {
            for name in ["A", "B", "C"] {
                for ctrl in [ControllerKind::Mpc, ControllerKind::Rbc] {
                    jobs.push(benchmark(name, ctrl, seed));
                }
            }
        }
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<KpiReport, String>>>> = Mutex::new(vec![None; jobs.len()]);
        let workers = std::thread::available_parallelism()
            .map_or(2, |n| n.get())
            .min(jobs.len());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(cfg) = jobs.get(i) else { break };
                    let r = run(cfg).map(|o| o.kpi);
                    results.lock().unwrap()[i] = Some(r);
                });
            }
        });
        let mut runs = Vec::new();
        for (cfg, r) in jobs.iter().zip(results.into_inner().unwrap()) {
            let kpi = r.expect("every job ran")?;
            runs.push(((cfg.name.clone(), cfg.controller, cfg.seed), kpi));
        }
        Ok(Self { runs })
    }

    fn get(&self, name: &str, controller: ControllerKind, seed: u64) -> &KpiReport {
        &self
            .runs
            .iter()
            .find(|((n, c, s), _)| n == name && *c == controller && *s == seed)
            .expect("run in batch")
            .1
    }
}

fn mpc_beats_rbc(batch: &Batch) -> Outcome {
    let mpc = batch.get("A", ControllerKind::Mpc, 1);
    let rbc = batch.get("A", ControllerKind::Rbc, 1);
    let total = rel(rbc.total_cost, mpc.total_cost);
    let gas = rel(rbc.cost_gas, mpc.cost_gas);
    let elec = rel(rbc.cost_elec, mpc.cost_elec);
    ensure(total <= -0.01, || {
        format!("total cost change {:+.2}%, need <= -1%", 100.0 * total)
    })?;
    ensure(gas < 0.0, || format!("gas cost change {:+.2}%, need < 0", 100.0 * gas))?;
    ensure(elec > 0.0, || {
        format!("electricity cost change {:+.2}%, need > 0", 100.0 * elec)
    })?;
    let slowest = batch.runs.iter().map(|(_, k)| k.runtime_seconds).fold(0.0, f64::max);
    ensure(slowest < 60.0, || format!("slowest run took {slowest:.1} s"))?;
    ensure(mpc.mpc_fallbacks == 0, || {
        format!("{} MPC fallbacks", mpc.mpc_fallbacks)
    })?;
    Ok(format!(
        "total {:+.2}%, gas {:+.2}%, electricity {:+.2}%, slowest run {:.2} s",
        100.0 * total,
        100.0 * gas,
        100.0 * elec,
        slowest
    ))
}

fn sizing_signs(batch: &Batch) -> Outcome {
    let mut worst_b: f64 = f64::NEG_INFINITY;
    let mut best_c: f64 = f64::INFINITY;
    let mut worst_share: f64 = f64::NEG_INFINITY;
    for seed in SEEDS {
        for ctrl in [ControllerKind::Rbc, ControllerKind::Mpc] {
            let a = batch.get("A", ctrl, seed);
            let b = batch.get("B", ctrl, seed);
            let c = batch.get("C", ctrl, seed);
            let db = rel(a.total_cost, b.total_cost);
            let dc = rel(a.total_cost, c.total_cost);
            let ds = rel(a.share_solar, c.share_solar);
            ensure(db < 0.0, || format!("seed {seed} {ctrl:?}: B vs A {:+.2}%", 100.0 * db))?;
            ensure(dc > 0.0, || format!("seed {seed} {ctrl:?}: C vs A {:+.2}%", 100.0 * dc))?;
            ensure(ds <= -0.3, || {
                format!("seed {seed} {ctrl:?}: C solar share {:+.2}%", 100.0 * ds)
            })?;
            worst_b = worst_b.max(db);
            best_c = best_c.min(dc);
            worst_share = worst_share.max(ds);
        }
    }
    Ok(format!(
        "over {} seeds x 2 controllers: B-A at most {:+.2}%, C-A at least {:+.2}%, solar share C-A at most {:+.2}%",
        SEEDS.len(),
        100.0 * worst_b,
        100.0 * best_c,
        100.0 * worst_share
    ))
}

fn solver_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = SolverOptions::default();
    let mut solver_time = 0.0;
    let (mut lps, mut milps) = (0, 0);
    while lps < 20 {
        let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let p = random_lp(&mut rng, n, m);
        let Some((z, _)) = vertex_oracle(&p) else { continue };
        let t = Instant::now();
        let s = solve_lp(&p, &opts).map_err(|e| e.to_string())?;
        solver_time += t.elapsed().as_secs_f64();
        let got = s
            .objective_value
            .ok_or_else(|| format!("LP {lps}: status {}", s.status))?;
        ensure((got - z).abs() <= 1e-7, || format!("LP {lps}: {got} vs oracle {z}"))?;
        lps += 1;
    }
    while milps < 20 {
        let (nb, nc, m) = (rng.gen_range(2..=10), rng.gen_range(0..=2), rng.gen_range(1..=5));
        let p = random_milp(&mut rng, nb, nc, m);
        let Some(z) = milp_oracle(&p) else { continue };
        let t = Instant::now();
        let s = solve_milp(&p, &opts).map_err(|e| e.to_string())?;
        solver_time += t.elapsed().as_secs_f64();
        let got = s
            .objective_value
            .ok_or_else(|| format!("MILP {milps}: status {}", s.status))?;
        let tol = opts.mip_gap * z.abs().max(1.0);
        ensure((got - z).abs() <= tol, || format!("MILP {milps}: {got} vs oracle {z}"))?;
        milps += 1;
    }
    ensure(solver_time < 5.0, || format!("solver time {solver_time:.2} s"))?;
    Ok(format!(
        "20 LPs and 20 MILPs match their oracles, solver time {:.1} ms",
        1e3 * solver_time
    ))
}

fn dispatch_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(1..=48);
        let case = random_dispatch(&mut rng, n);
        let (lp, layout) =
            build_problem(&case.initial, &case.bundle, &case.planner, &case.config).map_err(|e| e.to_string())?;
        let sol = solve_lp(&lp, &SolverOptions::default()).map_err(|e| e.to_string())?;
        if sol.status != Status::Optimal {
            continue;
        }
        let plan = extract_plan(&sol, &layout, case.initial.energy).map_err(|e| e.to_string())?;
        let mut state = PlantState::new(case.initial.energy);
        state.p_hp_prev = case.initial.p_hp_prev;
        state.p_gb_prev = case.initial.p_gb_prev;
        for k in 0..n {
            let a = ControlAction {
                p_hp_set: plan.p_hp[k],
                p_gb_set: plan.p_gb[k],
                origin: Origin::Mpc,
            };
            let (next, _) = dhtwin::plant::step(
                &state,
                &case.plant,
                &a,
                case.bundle.solar.values()[k],
                case.bundle.load.values()[k],
                case.config.dt,
            )
            .map_err(|e| e.to_string())?;
            worst = worst.max((next.energy - plan.energy[k + 1]).abs());
            state = next;
        }
        done += 1;
    }
    ensure(worst <= 1e-6, || format!("worst replay deviation {worst:e} kWh"))?;
    Ok(format!("100 optimal plans replayed, worst deviation {worst:.1e} kWh"))
}

/// Costs of a run recomputed from its exported step table.
fn exported_cost(out: &RunOutput, dir: &Path) -> Result<f64, String> {
    out.write(dir).map_err(|e| e.to_string())?;
    let table = read_csv_table(&dir.join("steps.csv")).map_err(|e| e.to_string())?;
    let (gas, elec) = recompute_costs(&table, out.config.plant.cop, out.config.gas_price).map_err(|e| e.to_string())?;
    Ok(gas + elec)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn open_loop_bound() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let windows = [
        ("2017-10-01T00:00:00Z", "2017-10-08T00:00:00Z"),
        ("2017-11-01T00:00:00Z", "2017-11-08T00:00:00Z"),
        ("2017-12-01T00:00:00Z", "2017-12-08T00:00:00Z"),
    ];
    let mut checked = 0;
    let mut gaps = Vec::new();
    for name in ["A", "B", "C"] {
        for (w, (start, end)) in windows.iter().enumerate() {
            let mut cfg = benchmark(name, ControllerKind::Mpc, 1);
            cfg.forecast = ForecastMode::Perfect;
            cfg.period = Period {
                start: (*start).into(),
                end: (*end).into(),
            };
            let mpc = run(&cfg)?;
            cfg.controller = ControllerKind::Rbc;
            let rbc = run(&cfg)?;
            let dir = tmp.path().join(format!("{name}{w}"));
            let mpc_cost = exported_cost(&mpc, &dir.join("mpc"))?;
            let rbc_cost = exported_cost(&rbc, &dir.join("rbc"))?;
            ensure(close(mpc_cost, mpc.kpi.total_cost), || {
                format!("{name}/{start}: MPC export {mpc_cost} vs {}", mpc.kpi.total_cost)
            })?;
            ensure(close(rbc_cost, rbc.kpi.total_cost), || {
                format!("{name}/{start}: RBC export {rbc_cost} vs {}", rbc.kpi.total_cost)
            })?;

            let open = open_loop_optimum(&cfg, &cfg.solver).map_err(|e| e.to_string())?;
            let plan = open
                .plan
                .ok_or_else(|| format!("{name}/{start}: open loop {}", open.status))?;
            let grid = mpc.grid;
            let hp = TimeSeries::new(grid, plan.p_hp.clone(), Unit::KiloWatt).map_err(|e| e.to_string())?;
            let gb = TimeSeries::new(grid, plan.p_gb.clone(), Unit::KiloWatt).map_err(|e| e.to_string())?;
            let price =
                TimeSeries::new(grid, mpc.elec_price.clone(), Unit::EurPerKiloWattHour).map_err(|e| e.to_string())?;
            let path = dir.join("open_loop.csv");
            write_csv_columns(&[("p_hp", &hp), ("p_gb", &gb), ("elec_price", &price)], &path)
                .map_err(|e| e.to_string())?;
            let table = read_csv_table(&path).map_err(|e| e.to_string())?;
            let (g, e) = recompute_costs(&table, cfg.plant.cop, cfg.gas_price).map_err(|e| e.to_string())?;
            ensure(close(g + e, plan.planned_cost), || {
                format!("{name}/{start}: open-loop export {} vs {}", g + e, plan.planned_cost)
            })?;

            let (o, m, r) = (plan.planned_cost, mpc.kpi.total_cost, rbc.kpi.total_cost);
            ensure(o <= m && m <= r, || {
                format!("{name}/{start}: open {o:.4} / MPC {m:.4} / RBC {r:.4}")
            })?;
            gaps.push(rel(o, m));
            checked += 1;
        }
    }
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    Ok(format!(
        "{checked} one-week perfect-forecast runs: open loop <= MPC <= RBC, MPC at most {:+.2}% above the bound",
        100.0 * max_gap
    ))
}

fn conservation() -> Outcome {
    let reports = REPORTS.lock().unwrap();
    let mut worst: f64 = 0.0;
    for k in reports.iter() {
        let r = k.energy_residual().abs() / k.energy_scale();
        ensure(r <= 1e-9, || {
            format!("{} {} seed-run: residual {r:e}", k.scenario, k.controller)
        })?;
        ensure(k.energy_gb + k.energy_hp + k.energy_solar == k.energy_total, || {
            format!(
                "{} {}: energy_total is not the sum of sources",
                k.scenario, k.controller
            )
        })?;
        worst = worst.max(r);
    }
    ensure(!reports.is_empty(), || "no runs recorded".into())?;
    Ok(format!(
        "{} runs, worst relative storage residual {worst:.1e}",
        reports.len()
    ))
}

fn rbc_semantics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..10_000 {
        let p = PlantParams::with_capacities(rng.gen_range(10.0..300.0), rng.gen_range(10.0..100.0), 70.0);
        let rbc = RbcParams {
            e_min: p.e_min,
            k_restore: rng.gen_range(0.01..5.0),
            cap_overcharge: rng.gen_bool(0.5),
        };
        let dt = 0.5;
        let net_load = rng.gen_range(-100.0..400.0);
        let e1 = rng.gen_range(0.0..p.e_max);
        let e2 = rng.gen_range(0.0..p.e_max);
        let a = rbc_decide(
            &Measurement {
                energy: e1.min(e2),
                net_load,
            },
            &p,
            &rbc,
            dt,
        );
        let b = rbc_decide(
            &Measurement {
                energy: e1.max(e2),
                net_load,
            },
            &p,
            &rbc,
            dt,
        );
        for x in [&a, &b] {
            ensure(x.p_gb_set <= 0.0 || x.p_hp_set == p.p_hp_max, || {
                format!("sample {i}: boiler on with HP below max")
            })?;
            ensure((0.0..=p.p_hp_max).contains(&x.p_hp_set), || {
                format!("sample {i}: HP {}", x.p_hp_set)
            })?;
            ensure((0.0..=p.p_gb_max).contains(&x.p_gb_set), || {
                format!("sample {i}: boiler {}", x.p_gb_set)
            })?;
        }
        ensure(b.p_hp_set + b.p_gb_set <= a.p_hp_set + a.p_gb_set + 1e-12, || {
            format!("sample {i}: more production at higher storage")
        })?;
    }
    Ok("10000 random measurements: HP priority, capacity and monotone restore hold".into())
}

fn fit_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, b, c) = (0.0525, 0.245, -11.025);
    let n = 4000;
    let grid = TimeGrid::new(1_506_816_000, 1800, n).map_err(|e| e.to_string())?;
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(300.0..1000.0)).collect();
    let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..25.0)).collect();
    let clean: Vec<f64> = g.iter().zip(&t).map(|(g, t)| a * g + b * t + c).collect();
    let series = |v: Vec<f64>, u| TimeSeries::new(grid, v, u).map_err(|e| e.to_string());
    let gs = series(g.clone(), Unit::WattPerSquareMeter)?;
    let ts = series(t.clone(), Unit::DegreeCelsius)?;
    let exact = fit_solar(&gs, &ts, &series(clean.clone(), Unit::KiloWatt)?).map_err(|e| e.to_string())?;
    let clean_err = [
        (exact.a_irradiance - a).abs(),
        (exact.b_ambient - b).abs(),
        (exact.c_offset - c).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ensure(clean_err <= 1e-9, || format!("noiseless error {clean_err:e}"))?;

    let noisy: Vec<f64> = clean
        .iter()
        .map(|p| p * (1.0 + 0.05 * rng.gen_range(-1.0..1.0)))
        .collect();
    let fit = fit_affine(&g, &t, &noisy).map_err(|e| e.to_string())?;
    let noisy_err = [
        rel(a, fit.a_irradiance).abs(),
        rel(b, fit.b_ambient).abs(),
        rel(c, fit.c_offset).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ensure(noisy_err <= 0.05, || {
        format!("noisy relative error {:.2}%", 100.0 * noisy_err)
    })?;
    Ok(format!(
        "noiseless error {clean_err:.1e}, 5% noise on {n} points: worst relative error {:.2}%",
        100.0 * noisy_err
    ))
}

/// Three sunny days on a small tank: cheap electricity at night, expensive
/// by day, constant low load and a forecast that sees 30% of the sun.
fn curtailment_episode(dir: &Path) -> Result<ScenarioConfig, String> {
    let days = 4;
    let n = days * 48;
    let start = 1_506_816_000;
    let grid = TimeGrid::new(start, 1800, n).map_err(|e| e.to_string())?;
    let hour = |i: usize| (i % 48) as f64 / 2.0;
    let solar: Vec<f64> = (0..n)
        .map(|i| {
            let h = hour(i) + 0.25;
            if (7.0..17.0).contains(&h) {
                60.0 * (std::f64::consts::PI * (h - 7.0) / 10.0).sin().powi(2)
            } else {
                0.0
            }
        })
        .collect();
    let load = vec![20.0; n];
    let price: Vec<f64> = (0..n).map(|i| if hour(i) < 8.0 { 0.02 } else { 0.4 }).collect();
    let forecast: Vec<f64> = solar.iter().map(|s| 0.3 * s).collect();
    let s = |v: Vec<f64>, u| TimeSeries::new(grid, v, u).map_err(|e| e.to_string());
    let (ls, ss, ps) = (
        s(load, Unit::KiloWatt)?,
        s(solar, Unit::KiloWatt)?,
        s(price, Unit::EurPerKiloWattHour)?,
    );
    write_csv_columns(
        &[("load", &ls), ("solar", &ss), ("price", &ps)],
        &dir.join("actuals.csv"),
    )
    .map_err(|e| e.to_string())?;
    write_csv_columns(&[("value", &s(forecast, Unit::KiloWatt)?)], &dir.join("forecast.csv"))
        .map_err(|e| e.to_string())?;

    let mut cfg = benchmark("A", ControllerKind::Mpc, 1);
    cfg.name = "sunny".into();
    cfg.plant.e_max = 300.0;
    cfg.plant.e_min = 60.0;
    cfg.plant.e_curtail = 285.0;
    cfg.rbc = RbcParams::for_plant(&cfg.plant);
    cfg.data = DataSource::Csv {
        actuals: dir.join("actuals.csv"),
        solar_forecast: Some(dir.join("forecast.csv")),
    };
    cfg.period = Period {
        start: "2017-10-01T00:00:00Z".into(),
        end: "2017-10-04T00:00:00Z".into(),
    };
    cfg.initial_energy = Some(150.0);
    Ok(cfg)
}

fn curtailment() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = curtailment_episode(tmp.path())?;
    let fitted = run(&cfg)?;
    cfg.forecast = ForecastMode::Perfect;
    let perfect = run(&cfg)?;
    let (f, p) = (fitted.kpi.curtailed, perfect.kpi.curtailed);
    ensure(f > 0.0, || "underestimating forecast run curtailed nothing".into())?;
    ensure(p < f, || {
        format!("perfect forecast curtailed {p:.2} kWh, underestimating {f:.2} kWh")
    })?;
    Ok(format!(
        "curtailed {f:.1} kWh with the underestimating forecast, {p:.1} kWh with the perfect one"
    ))
}

fn files_equal(a: &Path, b: &Path) -> Result<Vec<String>, String> {
    let mut names: Vec<String> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| {
            e.map(|e| e.file_name().to_string_lossy().into_owned())
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    names.sort();
    for n in &names {
        let x = fs::read(a.join(n)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(n)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{n} differs"))?;
    }
    Ok(names)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for ctrl in [ControllerKind::Mpc, ControllerKind::Rbc] {
        let cfg = benchmark("A", ctrl, 7);
        let dirs = [
            tmp.path().join(format!("{ctrl:?}-1")),
            tmp.path().join(format!("{ctrl:?}-2")),
        ];
        for d in &dirs {
            run(&cfg)?.write(d).map_err(|e| e.to_string())?;
        }
        compared += files_equal(&dirs[0], &dirs[1])?.len();
    }
    let mut episode = curtailment_episode(tmp.path())?;
    episode.forecast = ForecastMode::Fitted;
    for i in 0..2 {
        run(&episode)?
            .write(&tmp.path().join(format!("sunny-{i}")))
            .map_err(|e| e.to_string())?;
    }
    compared += files_equal(&tmp.path().join("sunny-0"), &tmp.path().join("sunny-1"))?.len();
    Ok(format!("{compared} output files byte-identical across repeated runs"))
}

fn main() {
    let started = Instant::now();
    let batch = Batch::execute();
    if let Ok(b) = &batch {
        println!(
            "benchmark batch: {} runs in {:.1} s",
            b.runs.len(),
            started.elapsed().as_secs_f64()
        );
    }
    let batch_ref = batch.as_ref();
    let criteria: Vec<(&str, Check)> = vec![
        (
            "MPC beats RBC on cost",
            Box::new(|| mpc_beats_rbc(batch_ref.map_err(Clone::clone)?)),
        ),
        (
            "sizing scenario signs",
            Box::new(|| sizing_signs(batch_ref.map_err(Clone::clone)?)),
        ),
        ("solver oracle equivalence", Box::new(solver_oracles)),
        ("dispatch-plant consistency", Box::new(dispatch_consistency)),
        ("open-loop lower bound", Box::new(open_loop_bound)),
        // Conservation runs last so it sees every run.
        ("RBC rule semantics", Box::new(rbc_semantics)),
        ("forecast fit recovery", Box::new(fit_recovery)),
        ("curtailment behavior", Box::new(curtailment)),
        ("determinism", Box::new(determinism)),
        ("energy conservation", Box::new(conservation)),
    ];
    let order = [1, 2, 3, 4, 5, 7, 8, 9, 10, 6];
    let mut lines = Vec::new();
    for ((label, check), id) in criteria.iter().zip(order) {
        let t = Instant::now();
        let result = check();
        lines.push((id, label, result, t.elapsed().as_secs_f64()));
    }
    lines.sort_by_key(|l| l.0);
    let mut failed = 0;
    for (id, label, result, secs) in &lines {
        match result {
            Ok(detail) => println!("PASS criterion {id:>2} {label}: {detail} ({secs:.1} s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {label}: {why} ({secs:.1} s)");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        lines.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
