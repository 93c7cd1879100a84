//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Scale knobs: `ACCEPTANCE_DURATION_S` (simulated seconds per run, default 60)
//! and `ACCEPTANCE_SEEDS` (seeds per sweep point, default 2).
//!
//! Criteria listed in `KNOWN_GAPS` are still run and reported; a failure there
//! does not fail the target. Any other failure does.

use std::process::ExitCode;
use std::time::Instant;

use orbitroute::delay::Components;
use orbitroute::exec::Execution;
use orbitroute::ga::{Exhaustive, GaParams, Genetic};
use orbitroute::graph::{GraphView, Ledger, Topology};
use orbitroute::harness::{path_oracle, run_scenario_traced, seed_range, sweep, sweep_with, OracleSpec, ScenarioConfig};
use orbitroute::orbit::{orbital_period, PhysicalConstants};
use orbitroute::profile::ResourceProfile;
use orbitroute::scheduler::{commit, route_computing_aware, route_ground_offloading, RoutePlan, SchedulerParams};
use orbitroute::synthetic::{random_instance, RandomInstance, TableNetwork};
use orbitroute::traffic::Subtask;
use orbitroute::zone::VnId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_GAPS: &[u32] = &[4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn env_or<T: std::str::FromStr>(key: &str, default: T) -> T {
    std::env::var(key).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn base() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.run.duration_s = env_or("ACCEPTANCE_DURATION_S", 60.0);
    cfg.run.index_margin_s = 240.0;
    cfg
}

fn seeds() -> Vec<u64> {
    seed_range(1, env_or("ACCEPTANCE_SEEDS", 2))
}

fn fmt(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn break_even_compute() -> Outcome {
    let values = [5.0, 8.0, 11.0, 15.0, 20.0, 25.0];
    let r = sweep(&base(), "network.compute_gflops", &values, &seeds()).unwrap();
    let x = r.break_even();
    let pass = x.is_some_and(|x| (5.0..=25.0).contains(&x));
    outcome(pass, format!("ratios {} over C = {values:?}; break-even C* = {x:?} GFLOPS", fmt(&r.ratios())))
}

fn compute_trend() -> (Outcome, Outcome) {
    let values = [25.0, 50.0, 100.0, 200.0, 400.0];
    let r = sweep(&base(), "network.compute_gflops", &values, &seeds()).unwrap();
    let ratios = r.ratios();
    let at_100 = ratios[2];
    let speedup = outcome(at_100 <= 0.35, format!("ratio at 100 GFLOPS = {at_100:.4} (limit 0.35)"));
    let rises: Vec<f64> = ratios.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    let monotone = rises.is_empty() || (rises.len() == 1 && rises[0] <= 0.02);
    let trend = outcome(monotone, format!("ratios {} over C = {values:?}", fmt(&ratios)));
    (speedup, trend)
}

fn sgl_direction() -> Outcome {
    let values = [0.2, 1.0, 5.0, 10.0];
    let r = sweep(&base(), "network.sgl_rate_gbps", &values, &seeds()).unwrap();
    let ratios = r.ratios();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let last = ratios[3];
    let in_range = (0.7..=1.0).contains(&last);
    outcome(
        increasing && in_range,
        format!(
            "ratios {} over SGL = {values:?} Gb/s; strictly increasing: {increasing}; at 10 Gb/s {last:.4} (want [0.7, 1.0])",
            fmt(&ratios)
        ),
    )
}

/// Sets the mean of a log-normal quantity and keeps its coefficient of
/// variation.
fn scale_moments(m: &mut orbitroute::traffic::Moments, mean: f64) {
    let cv = m.std / m.mean;
    m.mean = mean;
    m.std = cv * mean;
}

fn data_volume() -> Outcome {
    let mb = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let values: Vec<f64> = mb.iter().map(|m| m / 1000.0).collect();
    let r = sweep_with(&base(), "traffic.volume_gb.mean", &values, &seeds(), |cfg, v| {
        scale_moments(&mut cfg.traffic.volume_gb, v);
        Ok(())
    })
    .unwrap();
    let x = r.break_even().map(|gb| gb * 1000.0);
    let big = sweep_with(&base(), "traffic.volume_gb.mean", &[1.0], &seeds(), |cfg, v| {
        scale_moments(&mut cfg.traffic.volume_gb, v);
        Ok(())
    })
    .unwrap();
    let speedup = 1.0 / big.points[0].ratio;
    let pass = x.is_some_and(|x| (1.0..=16.0).contains(&x)) && speedup >= 8.0;
    outcome(
        pass,
        format!(
            "ratios {} over {mb:?} MB; break-even {x:?} MB; speedup at 1 GB = {speedup:.2}x",
            fmt(&r.ratios())
        ),
    )
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn compute_requirement() -> Outcome {
    let values = [50.0, 100.0, 200.0, 400.0, 800.0];
    let r = sweep_with(&base(), "traffic.compute_gflo.mean", &values, &seeds(), |cfg, v| {
        scale_moments(&mut cfg.traffic.compute_gflo, v);
        Ok(())
    })
    .unwrap();
    let rho = pearson(&values, &r.ratios());
    outcome(rho >= 0.95, format!("ratios {} over C~ = {values:?} GFLO; r = {rho:.4}", fmt(&r.ratios())))
}

/// Line 0 - 1 - 2 - 3 - 4 with compute only at VN 1 and the downlink at VN 4:
/// one raw hop for the computing-aware route, four for the baseline.
fn isl_limit() -> Outcome {
    let (compute, sgl, volume, work) = (100.0, 0.2, 0.1, 50.0);
    let limit = (work / compute) / (8.0 * volume / sgl);
    let subtask = Subtask {
        task_id: 0,
        subtask_index: 0,
        source_vn: VnId(0),
        created_at_s: 0.0,
        compute_gflo: work,
        volume_gb: volume,
        memory_gb: 0.0,
        deadline_s: 10.0,
        dest_lon_rad: 0.0,
        dest_lat_rad: 0.0,
    };
    let solver = Genetic(GaParams::default());
    let mut ratios = Vec::new();
    let rates = [1.0, 10.0, 100.0, 1e3, 1e4];
    for rate in rates {
        let mut b = TableNetwork::builder(5);
        for v in 0..4 {
            b.edge(v, v + 1, rate, 0.0);
        }
        b.compute(1, compute).downlink(4, sgl, 0.0);
        let (net, ledger) = b.build().unwrap();
        let ca = route_computing_aware(&net, &ledger, &subtask, VnId(4), &solver, &SchedulerParams::default(), 0).unwrap();
        let go = route_ground_offloading(&net, &ledger, &subtask, VnId(4), &solver, 0).unwrap();
        assert_eq!((ca.raw_hops(), go.raw_hops()), (1, 4));
        ratios.push(ca.total_delay_s / go.total_delay_s);
    }
    let last = *ratios.last().unwrap();
    let err = (last - limit).abs() / limit;
    let converging = ratios.windows(2).all(|w| (w[1] - limit).abs() <= (w[0] - limit).abs());
    outcome(
        err <= 0.05 && converging,
        format!(
            "ratios {} over ISL = {rates:?} Gb/s; limit T_comp/T_SGL = {limit:.4}; error {:.2e}",
            fmt(&ratios),
            err
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let report = path_oracle(&OracleSpec::default()).unwrap();
    let within = report.within_tolerance();
    let below = report.below_exact();
    outcome(
        within >= 95 && below == 0,
        format!(
            "{within}/100 within 5% ({} exact); {below} below the exhaustive optimum",
            report.exact_matches()
        ),
    )
}

fn simple_paths<T: Topology>(topo: &T, from: VnId, to: VnId) -> Vec<Vec<VnId>> {
    fn go<T: Topology>(topo: &T, path: &mut Vec<VnId>, to: VnId, out: &mut Vec<Vec<VnId>>) {
        let cur = *path.last().unwrap();
        if cur == to {
            out.push(path.clone());
            return;
        }
        for &n in topo.neighbors(cur) {
            if !path.contains(&n) {
                path.push(n);
                go(topo, path, to, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(topo, &mut vec![from], to, &mut out);
    out
}

/// Arrival time at the end of `path`, or `None` if a hop is unusable.
fn arrive<T: Topology>(view: GraphView<'_, T>, path: &[VnId], volume: f64, t: f64) -> Option<f64> {
    path.windows(2)
        .try_fold(t, |t, w| view.hop(w[0], w[1], volume, t).map(|h| t + h.total()))
}

/// Minimum over every computing node and every pair of simple paths.
fn joint_optimum(net: &TableNetwork, ledger: &Ledger, s: &Subtask, dest: VnId, result: f64) -> f64 {
    let view = GraphView::new(net, ledger);
    let mut best = f64::INFINITY;
    for q in 0..net.vn_count() as u32 {
        let q = VnId(q);
        let firsts = simple_paths(net, s.source_vn, q);
        let seconds = simple_paths(net, q, dest);
        for p1 in &firsts {
            let Some(tq) = arrive(view, p1, s.volume_gb, s.created_at_s) else { continue };
            let Some(proc) = view.process(q, s, tq) else { continue };
            let tq2 = tq + proc.total();
            for p2 in &seconds {
                let Some(t3) = arrive(view, p2, result, tq2) else { continue };
                let Some(down) = view.downlink(dest, result, t3) else { continue };
                best = best.min(t3 + down.total() - s.created_at_s);
            }
        }
    }
    best
}

fn small_subtask(rng: &mut ChaCha8Rng, source: u32) -> Subtask {
    Subtask {
        task_id: rng.random_range(0..1000),
        subtask_index: 0,
        source_vn: VnId(source),
        created_at_s: rng.random_range(0.0..3.0),
        compute_gflo: rng.random_range(10.0..200.0),
        volume_gb: rng.random_range(0.05..1.0),
        memory_gb: 0.0,
        deadline_s: 10.0,
        dest_lon_rad: 0.0,
        dest_lat_rad: 0.0,
    }
}

fn p2_exactness() -> Outcome {
    let spec = RandomInstance {
        vns: 5,
        with_compute: true,
        ..RandomInstance::default()
    };
    let params = SchedulerParams {
        result_volume_gb: 0.05,
        lower_bound_pruning: false,
        execution: Execution::Sequential,
        ..SchedulerParams::default()
    };
    let mut matched = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let (net, ledger) = random_instance(seed, spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let s = small_subtask(&mut rng, 0);
        let dest = VnId(4);
        let plan = route_computing_aware(&net, &ledger, &s, dest, &Exhaustive { max_hops: 4 }, &params, 0).unwrap();
        let opt = joint_optimum(&net, &ledger, &s, dest, params.result_volume_gb);
        let err = (plan.total_delay_s - opt).abs() / opt;
        worst = worst.max(err);
        if err <= 1e-9 {
            matched += 1;
        }
    }
    outcome(matched == 20, format!("{matched}/20 match the joint enumeration; worst relative error {worst:.2e}"))
}

fn decomposition_holds(plan: &RoutePlan) -> bool {
    plan.total_delay_s == plan.components.total()
}

fn numerical_properties() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // Integral inversion.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let cap = rng.random_range(0.5..10.0);
        let mut t = 0.0;
        let pieces: Vec<(f64, f64)> = (0..rng.random_range(1..6))
            .map(|_| {
                t += rng.random_range(0.01..2.0);
                (t, cap * rng.random_range(0.0..=1.0f64))
            })
            .collect();
        let p = ResourceProfile::from_pieces(cap, 0.0, &pieces).unwrap();
        let start = rng.random_range(0.0..t);
        let work = rng.random_range(0.001..20.0);
        let tau = p.time_to_accumulate(start, work);
        worst = worst.max((p.integrate(start, start + tau) - work).abs() / work);
    }
    pass &= worst < 1e-9;
    notes.push(format!("inversion error {worst:.1e}"));

    // Orbital periods against an independent evaluation.
    let k = PhysicalConstants::default();
    for (h, paper) in [(200e3, 5304.7), (600e3, 5796.3)] {
        let a: f64 = 6_371_393.0 + h;
        let expect = 2.0 * std::f64::consts::PI * (a.powi(3) / (6.67428e-11 * 5.965e24)).sqrt();
        let got = orbital_period(h, &k).unwrap();
        let ok = ((got - expect) / expect).abs() < 1e-6 && (got - paper).abs() < 0.05;
        pass &= ok;
        notes.push(format!("T({} km) = {got:.3} s", h / 1e3));
    }

    // Random commit sequences never drive availability negative.
    let mut plans = 0usize;
    let mut identity = true;
    let mut nonneg = true;
    for seed in 0..10_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = RandomInstance {
            vns: rng.random_range(3..6),
            with_compute: true,
            ..RandomInstance::default()
        };
        let (net, mut ledger) = random_instance(seed, spec).unwrap();
        let params = SchedulerParams {
            reserve_downlink: rng.random_bool(0.5),
            result_volume_gb: if rng.random_bool(0.5) { 0.0 } else { 0.02 },
            execution: Execution::Sequential,
            ..SchedulerParams::default()
        };
        let n = net.vn_count() as u32;
        for k in 0..3 {
            let source = rng.random_range(0..n);
            let mut s = small_subtask(&mut rng, source);
            s.task_id = k;
            let dest = VnId(rng.random_range(0..n));
            let solver = Exhaustive { max_hops: 3 };
            let plan = if rng.random_bool(0.5) {
                route_computing_aware(&net, &ledger, &s, dest, &solver, &params, seed)
            } else {
                route_ground_offloading(&net, &ledger, &s, dest, &solver, seed)
            };
            let Ok(plan) = plan else { continue };
            identity &= decomposition_holds(&plan);
            commit(&net, &mut ledger, &plan, &params).unwrap();
            plans += 1;
        }
        for p in ledger.profiles() {
            for r in p.reservations() {
                nonneg &= r.amount <= p.capacity() && p.available(r.start) >= 0.0 && p.available(r.end) >= 0.0;
            }
        }
    }
    pass &= nonneg;
    notes.push(format!("availability >= 0 over 10^4 sequences: {nonneg}"));

    // Identity on every record of a full-scale run.
    let mut cfg = base();
    cfg.run.duration_s = 20.0;
    let (_, records) = run_scenario_traced(&cfg).unwrap();
    for r in records.iter().filter(|r| !r.dropped) {
        let c = Components {
            isl_transmission_s: r.isl_transmission_s,
            sgl_transmission_s: r.sgl_transmission_s,
            propagation_s: r.propagation_s,
            processing_s: r.processing_s,
            waiting_s: r.waiting_s,
        };
        identity &= r.total_delay_s == c.total();
        plans += 1;
    }
    pass &= identity;
    notes.push(format!("decomposition identity on {plans} plans: {identity}"));
    outcome(pass, notes.join("; "))
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--nocapture`; they do not
    // apply here. `--list` is answered so test discovery sees one test.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let started = Instant::now();
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let timed = |n: u32, f: &dyn Fn() -> Outcome, results: &mut Vec<(u32, Outcome)>| {
        let t = Instant::now();
        let mut o = f();
        o.detail = format!("{} ({:.1} s)", o.detail, t.elapsed().as_secs_f64());
        report(n, &o);
        results.push((n, o));
    };
    timed(1, &break_even_compute, &mut results);
    let t = Instant::now();
    let (c2, c3) = compute_trend();
    for (n, mut o) in [(2, c2), (3, c3)] {
        o.detail = format!("{} ({:.1} s, shared sweep)", o.detail, t.elapsed().as_secs_f64());
        report(n, &o);
        results.push((n, o));
    }
    timed(4, &sgl_direction, &mut results);
    timed(5, &data_volume, &mut results);
    timed(6, &compute_requirement, &mut results);
    timed(7, &isl_limit, &mut results);
    timed(8, &oracle_equivalence, &mut results);
    timed(9, &p2_exactness, &mut results);
    timed(10, &numerical_properties, &mut results);

    let passed = results.iter().filter(|(_, o)| o.pass).count();
    let blocking: Vec<u32> = results
        .iter()
        .filter(|(n, o)| !o.pass && !KNOWN_GAPS.contains(n))
        .map(|(n, _)| *n)
        .collect();
    println!(
        "acceptance: {passed}/{} criteria pass in {:.0} s; blocking failures: {blocking:?}",
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(n: u32, o: &Outcome) {
    let verdict = match (o.pass, KNOWN_GAPS.contains(&n)) {
        (true, _) => "PASS",
        (false, false) => "FAIL",
        (false, true) => "FAIL (known gap)",
    };
    println!("criterion {n:>2}: {verdict}: {}", o.detail);
}
