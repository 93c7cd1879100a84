use serde::{Deserialize, Serialize};

use crate::delay::Components;
use crate::error::{Error, Result};
use crate::exec;
use crate::ga::Genetic;
use crate::graph::Ledger;
use crate::network::{SfdnmNetwork, BITS_PER_BYTE};
use crate::scheduler::{commit, route_computing_aware, route_ground_offloading, RoutePlan, RoutingMode};
use crate::traffic::{destination_vn, flatten, generate_workload, Subtask, Task};

use super::config::ScenarioConfig;

/// Per-subtask outcome in one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub mode: RoutingMode,
    pub task_id: u64,
    pub subtask_index: u32,
    pub created_at_s: f64,
    pub source_vn: u32,
    pub destination_vn: u32,
    /// `None` when the subtask was dropped.
    pub computing_vn: Option<u32>,
    pub total_delay_s: f64,
    pub isl_transmission_s: f64,
    pub sgl_transmission_s: f64,
    pub propagation_s: f64,
    pub processing_s: f64,
    pub waiting_s: f64,
    pub raw_hops: usize,
    pub total_hops: usize,
    pub handovers: u32,
    pub deadline_s: f64,
    pub missed_deadline: bool,
    pub dropped: bool,
}

impl PlanRecord {
    fn from_plan(plan: &RoutePlan) -> Self {
        let c = &plan.components;
        let s = &plan.subtask;
        Self {
            mode: plan.mode,
            task_id: s.task_id,
            subtask_index: s.subtask_index,
            created_at_s: s.created_at_s,
            source_vn: s.source_vn.0,
            destination_vn: plan.destination.0,
            computing_vn: plan.computing_vn().map(|v| v.0),
            total_delay_s: plan.total_delay_s,
            isl_transmission_s: c.isl_transmission_s,
            sgl_transmission_s: c.sgl_transmission_s,
            propagation_s: c.propagation_s,
            processing_s: c.processing_s,
            waiting_s: c.waiting_s,
            raw_hops: plan.raw_hops(),
            total_hops: plan.total_hops(),
            handovers: plan.processing.map_or(0, |p| p.detail.handovers),
            deadline_s: s.deadline_s,
            missed_deadline: plan.total_delay_s > s.deadline_s,
            dropped: false,
        }
    }

    fn dropped(mode: RoutingMode, s: &Subtask, destination_vn: u32) -> Self {
        Self {
            mode,
            task_id: s.task_id,
            subtask_index: s.subtask_index,
            created_at_s: s.created_at_s,
            source_vn: s.source_vn.0,
            destination_vn,
            computing_vn: None,
            total_delay_s: f64::INFINITY,
            isl_transmission_s: 0.0,
            sgl_transmission_s: 0.0,
            propagation_s: 0.0,
            processing_s: 0.0,
            waiting_s: 0.0,
            raw_hops: 0,
            total_hops: 0,
            handovers: 0,
            deadline_s: s.deadline_s,
            missed_deadline: true,
            dropped: true,
        }
    }

    fn components(&self) -> Components {
        Components {
            isl_transmission_s: self.isl_transmission_s,
            sgl_transmission_s: self.sgl_transmission_s,
            propagation_s: self.propagation_s,
            processing_s: self.processing_s,
            waiting_s: self.waiting_s,
        }
    }
}

/// Aggregates of one mode over the measured subtasks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeMetrics {
    pub planned: usize,
    pub dropped: usize,
    pub mean_delay_s: f64,
    pub components: Components,
    pub mean_raw_hops: f64,
    pub mean_total_hops: f64,
    /// Measured subtasks delivered after their deadline.
    pub deadline_misses: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub subtasks: usize,
    /// Subtasks past warm-up that both modes delivered.
    pub measured: usize,
    pub computing_aware: ModeMetrics,
    pub ground_offloading: ModeMetrics,
    /// `mean_CA / mean_GO` over the measured subtasks; NaN if none.
    pub ratio: f64,
    /// `(T_comp + x·Δ) / (T_SGL + y·Δ)` with `x`, `y` the mean raw-data hop
    /// counts and `Δ` the per-hop ISL transmission time of the mean volume.
    pub isl_model_ratio: f64,
}

/// Plans and commits every subtask in arrival order in one mode.
pub fn simulate_mode(
    cfg: &ScenarioConfig,
    network: &SfdnmNetwork,
    subtasks: &[Subtask],
    mode: RoutingMode,
    seed: u64,
) -> Result<Vec<PlanRecord>> {
    let mut ledger: Ledger = network.new_ledger()?;
    let solver = Genetic(cfg.ga.clone());
    let mut out = Vec::with_capacity(subtasks.len());
    for s in subtasks {
        let dest = destination_vn(s, network.grid());
        let planned = match mode {
            RoutingMode::ComputingAware => {
                route_computing_aware(network, &ledger, s, dest, &solver, &cfg.scheduler, seed)
            }
            RoutingMode::GroundOffloading => route_ground_offloading(network, &ledger, s, dest, &solver, seed),
        };
        match planned {
            Ok(plan) => {
                commit(network, &mut ledger, &plan, &cfg.scheduler)?;
                out.push(PlanRecord::from_plan(&plan));
            }
            Err(Error::Infeasible { .. }) => out.push(PlanRecord::dropped(mode, s, dest.0)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Runs both modes over `tasks` and returns metrics plus all plan records
/// (computing-aware first).
pub fn run_workload(cfg: &ScenarioConfig, network: &SfdnmNetwork, tasks: &[Task]) -> Result<(RunMetrics, Vec<PlanRecord>)> {
    let subtasks = flatten(tasks);
    let modes = [RoutingMode::ComputingAware, RoutingMode::GroundOffloading];
    let seed = cfg.run.seed;
    let mut results = exec::map(cfg.scheduler.execution, &modes, |&m| simulate_mode(cfg, network, &subtasks, m, seed));
    let go = results.pop().expect("two modes")?;
    let ca = results.pop().expect("two modes")?;
    let metrics = aggregate(cfg, &subtasks, &ca, &go);
    let mut records = ca;
    records.extend(go);
    Ok((metrics, records))
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunMetrics> {
    run_scenario_traced(cfg).map(|(m, _)| m)
}

pub fn run_scenario_traced(cfg: &ScenarioConfig) -> Result<(RunMetrics, Vec<PlanRecord>)> {
    cfg.validate()?;
    let network = cfg.network()?;
    let tasks = generate_workload(network.grid(), cfg.run.duration_s, &cfg.traffic, cfg.run.seed)?;
    run_workload(cfg, &network, &tasks)
}

fn aggregate(cfg: &ScenarioConfig, subtasks: &[Subtask], ca: &[PlanRecord], go: &[PlanRecord]) -> RunMetrics {
    let warmup = cfg.run.warmup_fraction * cfg.run.duration_s;
    let measured: Vec<usize> = (0..subtasks.len())
        .filter(|&i| subtasks[i].created_at_s >= warmup && !ca[i].dropped && !go[i].dropped)
        .collect();
    let mode = |records: &[PlanRecord]| {
        let mut m = ModeMetrics {
            planned: records.iter().filter(|r| !r.dropped).count(),
            dropped: records.iter().filter(|r| r.dropped).count(),
            ..ModeMetrics::default()
        };
        if measured.is_empty() {
            m.mean_delay_s = f64::NAN;
            return m;
        }
        let n = measured.len() as f64;
        let mut sum = Components::default();
        let (mut raw, mut total) = (0usize, 0usize);
        for &i in &measured {
            sum.add(&records[i].components());
            raw += records[i].raw_hops;
            total += records[i].total_hops;
            m.deadline_misses += usize::from(records[i].missed_deadline);
        }
        m.components = sum.scaled(1.0 / n);
        m.mean_delay_s = m.components.total();
        m.mean_raw_hops = raw as f64 / n;
        m.mean_total_hops = total as f64 / n;
        m
    };
    let ca_m = mode(ca);
    let go_m = mode(go);
    let volume = cfg.traffic.volume_gb.mean;
    let delta = BITS_PER_BYTE * volume / cfg.network.channel_rate_gbps();
    let isl_model_ratio = (ca_m.components.processing_s + ca_m.mean_raw_hops * delta)
        / (go_m.components.sgl_transmission_s + go_m.mean_raw_hops * delta);
    RunMetrics {
        seed: cfg.run.seed,
        subtasks: subtasks.len(),
        measured: measured.len(),
        ratio: ca_m.mean_delay_s / go_m.mean_delay_s,
        computing_aware: ca_m,
        ground_offloading: go_m,
        isl_model_ratio,
    }
}
