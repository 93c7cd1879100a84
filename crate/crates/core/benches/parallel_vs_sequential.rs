use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orbitroute::exec::Execution;
use orbitroute::ga::{GaParams, Genetic};
use orbitroute::harness::{path_oracle, sweep, OracleSpec, ScenarioConfig};
use orbitroute::scheduler::{route_computing_aware, SchedulerParams};
use orbitroute::traffic::{destination_vn, flatten, generate_workload};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

/// One computing-aware plan with every VN scored.
fn candidate_scoring(c: &mut Criterion) {
    let mut cfg = ScenarioConfig::default();
    cfg.run.duration_s = 30.0;
    let network = cfg.network().unwrap();
    let ledger = network.new_ledger().unwrap();
    let tasks = generate_workload(network.grid(), cfg.run.duration_s, &cfg.traffic, 1).unwrap();
    let subtask = flatten(&tasks)
        .into_iter()
        .find(|s| {
            let p = SchedulerParams {
                execution: Execution::Sequential,
                ..SchedulerParams::default()
            };
            let dest = destination_vn(s, network.grid());
            route_computing_aware(&network, &ledger, s, dest, &Genetic(cfg.ga.clone()), &p, 1).is_ok()
        })
        .expect("a routable subtask");
    let dest = destination_vn(&subtask, network.grid());
    let solver = Genetic(GaParams::default());

    let mut group = c.benchmark_group("candidate_scoring");
    group.sample_size(10);
    for (name, execution) in MODES {
        let params = SchedulerParams {
            lower_bound_pruning: false,
            execution,
            ..SchedulerParams::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| route_computing_aware(&network, &ledger, &subtask, dest, &solver, &params, 1).unwrap())
        });
    }
    group.finish();
}

/// A short compute-capability sweep, parallel over (value, seed) jobs.
fn short_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, execution) in MODES {
        let mut cfg = ScenarioConfig::default();
        cfg.run.duration_s = 10.0;
        cfg.run.index_margin_s = 120.0;
        cfg.scheduler.execution = execution;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sweep(&cfg, "network.compute_gflops", &[25.0, 100.0], &[1, 2]).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("path_oracle");
    group.sample_size(10);
    for (name, execution) in MODES {
        let spec = OracleSpec {
            instances: 20,
            execution,
            ..OracleSpec::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| path_oracle(&spec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, candidate_scoring, short_sweep, oracle);
criterion_main!(benches);
