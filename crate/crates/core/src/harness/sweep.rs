use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::delay::Components;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

use super::config::ScenarioConfig;
use super::run::{run_scenario, RunMetrics};

/// One row of a sweep: seed-averaged results at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub ca_mean_delay_s: f64,
    pub go_mean_delay_s: f64,
    /// `ca_mean_delay_s / go_mean_delay_s`.
    pub ratio: f64,
    pub ca_ci_s: f64,
    pub go_ci_s: f64,
    /// Half-width over per-seed ratios.
    pub ratio_ci: f64,
    pub ca_isl_transmission_s: f64,
    pub ca_sgl_transmission_s: f64,
    pub ca_propagation_s: f64,
    pub ca_processing_s: f64,
    pub ca_waiting_s: f64,
    pub go_isl_transmission_s: f64,
    pub go_sgl_transmission_s: f64,
    pub go_propagation_s: f64,
    pub go_processing_s: f64,
    pub go_waiting_s: f64,
    pub subtasks: usize,
    pub measured: usize,
    pub ca_dropped: usize,
    pub go_dropped: usize,
    pub ca_raw_hops: f64,
    pub go_raw_hops: f64,
    pub ca_deadline_misses: usize,
    pub go_deadline_misses: usize,
    pub isl_model_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub seeds: Vec<u64>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ratio).collect()
    }

    /// Parameter value where the ratio crosses 1, by linear interpolation
    /// between the first bracketing pair of points.
    pub fn break_even(&self) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (ra, rb) = (a.ratio - 1.0, b.ratio - 1.0);
            if ra == 0.0 {
                return Some(a.value);
            }
            if ra.is_finite() && rb.is_finite() && ra * rb < 0.0 {
                Some(a.value + (b.value - a.value) * ra / (ra - rb))
            } else if rb == 0.0 {
                Some(b.value)
            } else {
                None
            }
        })
    }
}

/// 95% Student-t half-width of the mean of `xs`.
pub fn ci_half_width(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    t * (var / n as f64).sqrt()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Averages per-seed metrics of one sweep value.
pub fn summarize(value: f64, runs: &[RunMetrics]) -> SweepPoint {
    let ok: Vec<&RunMetrics> = runs.iter().filter(|r| r.measured > 0).collect();
    let ca: Vec<f64> = ok.iter().map(|r| r.computing_aware.mean_delay_s).collect();
    let go: Vec<f64> = ok.iter().map(|r| r.ground_offloading.mean_delay_s).collect();
    let ratios: Vec<f64> = ok.iter().map(|r| r.ratio).collect();
    let comp = |f: &dyn Fn(&RunMetrics) -> Components| {
        let mut sum = Components::default();
        for r in &ok {
            sum.add(&f(r));
        }
        sum.scaled(1.0 / ok.len().max(1) as f64)
    };
    let cac = comp(&|r| r.computing_aware.components);
    let goc = comp(&|r| r.ground_offloading.components);
    let ca_mean = mean(ca.iter().copied());
    let go_mean = mean(go.iter().copied());
    SweepPoint {
        value,
        ca_mean_delay_s: ca_mean,
        go_mean_delay_s: go_mean,
        ratio: ca_mean / go_mean,
        ca_ci_s: ci_half_width(&ca),
        go_ci_s: ci_half_width(&go),
        ratio_ci: ci_half_width(&ratios),
        ca_isl_transmission_s: cac.isl_transmission_s,
        ca_sgl_transmission_s: cac.sgl_transmission_s,
        ca_propagation_s: cac.propagation_s,
        ca_processing_s: cac.processing_s,
        ca_waiting_s: cac.waiting_s,
        go_isl_transmission_s: goc.isl_transmission_s,
        go_sgl_transmission_s: goc.sgl_transmission_s,
        go_propagation_s: goc.propagation_s,
        go_processing_s: goc.processing_s,
        go_waiting_s: goc.waiting_s,
        subtasks: runs.iter().map(|r| r.subtasks).sum(),
        measured: runs.iter().map(|r| r.measured).sum(),
        ca_dropped: runs.iter().map(|r| r.computing_aware.dropped).sum(),
        go_dropped: runs.iter().map(|r| r.ground_offloading.dropped).sum(),
        ca_raw_hops: mean(ok.iter().map(|r| r.computing_aware.mean_raw_hops)),
        go_raw_hops: mean(ok.iter().map(|r| r.ground_offloading.mean_raw_hops)),
        ca_deadline_misses: ok.iter().map(|r| r.computing_aware.deadline_misses).sum(),
        go_deadline_misses: ok.iter().map(|r| r.ground_offloading.deadline_misses).sum(),
        isl_model_ratio: mean(ok.iter().map(|r| r.isl_model_ratio)),
    }
}

/// Runs every `(value, seed)` pair with `apply` setting the value, then
/// averages over seeds. Output order follows `values`.
pub fn sweep_with<F>(base: &ScenarioConfig, parameter: &str, values: &[f64], seeds: &[u64], apply: F) -> Result<SweepResult>
where
    F: Fn(&mut ScenarioConfig, f64) -> Result<()> + Sync + Send,
{
    if values.is_empty() {
        return Err(Error::config("sweep.values", "at least one value is required"));
    }
    if seeds.is_empty() {
        return Err(Error::config("sweep.seeds", "at least one seed is required"));
    }
    base.validate()?;
    let mut configs = Vec::with_capacity(values.len());
    for &v in values {
        let mut cfg = base.clone();
        apply(&mut cfg, v)?;
        cfg.validate()?;
        configs.push(cfg);
    }
    let jobs: Vec<(usize, u64)> = (0..values.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let outer = base.scheduler.execution;
    let runs = exec::map(outer, &jobs, |&(i, seed)| {
        let mut cfg = configs[i].clone();
        cfg.run.seed = seed;
        // Parallelism lives at the sweep level; each run stays sequential.
        if outer == Execution::Parallel {
            cfg.scheduler.execution = Execution::Sequential;
        }
        run_scenario(&cfg)
    });
    let runs: Vec<RunMetrics> = runs.into_iter().collect::<Result<_>>()?;
    let points = values
        .iter()
        .enumerate()
        .map(|(i, &v)| summarize(v, &runs[i * seeds.len()..(i + 1) * seeds.len()]))
        .collect();
    Ok(SweepResult {
        parameter: parameter.to_string(),
        seeds: seeds.to_vec(),
        points,
    })
}

/// Sweeps one numeric field addressed by a dotted path.
pub fn sweep(base: &ScenarioConfig, parameter_path: &str, values: &[f64], seeds: &[u64]) -> Result<SweepResult> {
    let mut probe = base.clone();
    probe.set(parameter_path, values.first().copied().unwrap_or(0.0))?;
    sweep_with(base, parameter_path, values, seeds, |cfg, v| cfg.set(parameter_path, v))
}

/// `count` consecutive seeds starting at `first`.
pub fn seed_range(first: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|k| first + k).collect()
}
