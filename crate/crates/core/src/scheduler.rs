//! Joint selection of a computing node and its two routing legs, the
//! ground-offloading baseline, and reservation of the chosen resources.
//!
//! A computing-aware plan moves raw data from the source VN to a computing VN
//! `u_q`, processes it there, routes the result to the destination VN and
//! downlinks it. Every candidate `u_q` is scored as `d₁ + d₂ + d₃` and the
//! smallest wins. The baseline routes the raw data to the destination VN and
//! downlinks it for processing on the ground.

use serde::{Deserialize, Serialize};

use crate::delay::{leg_timeline, Components, PathTimeline};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::ga::{HopMemo, PathResult, PathSolver};
use crate::graph::{GraphView, Hop, Ledger, Processing, Topology};
use crate::traffic::Subtask;
use crate::zone::VnId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingMode {
    ComputingAware,
    GroundOffloading,
}

impl RoutingMode {
    pub fn label(self) -> &'static str {
        match self {
            RoutingMode::ComputingAware => "computing_aware",
            RoutingMode::GroundOffloading => "ground_offloading",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerParams {
    /// Size of computing results in GB (`0` = propagation only).
    pub result_volume_gb: f64,
    /// Only VNs within this many hops of the source or the destination are
    /// candidates. `None` considers every VN.
    pub hop_radius: Option<u32>,
    /// Visit candidates in order of a cheap estimate of `d₁ + d₂ + d₃` (hop
    /// counts times the fastest hop, plus processing at the earliest arrival)
    /// and stop once it reaches the best total found.
    pub lower_bound_pruning: bool,
    /// Candidates evaluated per round before re-checking the bound.
    pub batch_size: usize,
    /// Hold the downlink exclusively while a delivery carries data. Off, the
    /// downlink is a fixed-rate pipe shared by concurrent deliveries.
    pub reserve_downlink: bool,
    pub execution: Execution,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        Self {
            result_volume_gb: 0.0,
            hop_radius: None,
            lower_bound_pruning: true,
            batch_size: 2,
            reserve_downlink: false,
            execution: Execution::default(),
        }
    }
}

impl SchedulerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.result_volume_gb >= 0.0 && self.result_volume_gb.is_finite()) {
            return Err(Error::config("scheduler.result_volume_gb", "must be finite and >= 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("scheduler.batch_size", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessingStep {
    pub vn: VnId,
    pub start_s: f64,
    pub duration_s: f64,
    pub detail: Processing,
}

/// Final delivery from the destination VN to the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub vn: VnId,
    pub start_s: f64,
    pub volume_gb: f64,
    pub hop: Hop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub subtask: Subtask,
    pub mode: RoutingMode,
    pub destination: VnId,
    /// Raw data from the source to the computing VN (or to the destination
    /// for the baseline).
    pub leg1: PathTimeline,
    /// `None` for the baseline, which computes on the ground.
    pub processing: Option<ProcessingStep>,
    /// Result from the computing VN to the destination VN. A single-node
    /// timeline for the baseline.
    pub leg2: PathTimeline,
    pub delivery: Delivery,
    pub d1_s: f64,
    pub d2_s: f64,
    /// Leg 2 plus delivery.
    pub d3_s: f64,
    /// `L*`, equal to `components.total()`.
    pub total_delay_s: f64,
    pub components: Components,
    pub raw_volume_gb: f64,
    pub result_volume_gb: f64,
}

impl RoutePlan {
    pub fn computing_vn(&self) -> Option<VnId> {
        self.processing.map(|p| p.vn)
    }

    /// Hops that carry raw data.
    pub fn raw_hops(&self) -> usize {
        self.leg1.hop_count()
    }

    pub fn total_hops(&self) -> usize {
        self.leg1.hop_count() + self.leg2.hop_count()
    }

    /// `t`, `t_q`, `t_q′` and the delivery end, in order.
    pub fn milestones(&self) -> [f64; 4] {
        let t = self.subtask.created_at_s;
        let tq = self.leg1.end();
        let tq2 = self.processing.map_or(tq, |p| p.start_s + p.duration_s);
        [t, tq, tq2, self.delivery.start_s + self.delivery.hop.total()]
    }
}

/// Deterministic per-call seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = base ^ 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h = splitmix(h ^ p.wrapping_mul(0xD1B5_4A32_D192_ED03));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn subtask_seed(base: u64, s: &Subtask, candidate: VnId, leg: u64) -> u64 {
    derive_seed(base, &[s.task_id, s.subtask_index as u64, candidate.0 as u64, leg])
}

struct Candidate {
    vn: VnId,
    bound: f64,
}

struct Scored {
    vn: VnId,
    leg1: PathResult,
    processing: Processing,
    leg2: PathResult,
    delivery: Hop,
    total: f64,
}

fn candidates<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    source: VnId,
    dest: VnId,
    subtask: &Subtask,
    params: &SchedulerParams,
) -> Vec<Candidate> {
    let topology = view.topology;
    let raw_hop = topology.min_hop_delay(subtask.volume_gb);
    let result_hop = topology.min_hop_delay(params.result_volume_gb);
    let peak = topology.peak_compute_gflops();
    let compute = if peak > 0.0 { subtask.compute_gflo / peak } else { f64::INFINITY };
    let mut out: Vec<Candidate> = (0..topology.vn_count() as u32)
        .map(VnId)
        .filter_map(|vn| {
            let a = topology.hop_distance(source, vn)?;
            let b = topology.hop_distance(vn, dest)?;
            if let Some(r) = params.hop_radius {
                if a > r && b > r {
                    return None;
                }
            }
            let arrival = a as f64 * raw_hop;
            // Queue and rate at the earliest arrival, when pruning needs a
            // bound at all.
            let node = if params.lower_bound_pruning {
                view.process(vn, subtask, subtask.created_at_s + arrival)
                    .map_or(compute, |p| p.total().max(compute))
            } else {
                compute
            };
            let bound = arrival + node + b as f64 * result_hop;
            Some(Candidate { vn, bound })
        })
        .collect();
    if params.lower_bound_pruning {
        out.sort_by(|x, y| x.bound.total_cmp(&y.bound).then(x.vn.cmp(&y.vn)));
    }
    out
}

/// Plans `subtask` in computing-aware mode against `ledger`. The plan is not
/// committed.
#[allow(clippy::too_many_arguments)]
pub fn route_computing_aware<T, S>(
    topology: &T,
    ledger: &Ledger,
    subtask: &Subtask,
    destination: VnId,
    solver: &S,
    params: &SchedulerParams,
    seed: u64,
) -> Result<RoutePlan>
where
    T: Topology + ?Sized,
    S: PathSolver,
{
    params.validate()?;
    let view = GraphView::new(topology, ledger);
    let source = subtask.source_vn;
    let t = subtask.created_at_s;
    let result_volume = params.result_volume_gb;
    let raw_hop = topology.min_hop_delay(subtask.volume_gb);
    let result_hop = topology.min_hop_delay(result_volume);

    let evaluate = |memo: &mut HopMemo, c: &Candidate| -> Result<Option<Scored>> {
        let lb1 = topology.hop_distance(source, c.vn).unwrap_or(0) as f64 * raw_hop;
        let leg1 = solver.solve(view, memo, source, c.vn, t, subtask.volume_gb, lb1, subtask_seed(seed, subtask, c.vn, 1))?;
        if !leg1.is_reachable() {
            return Ok(None);
        }
        let tq = t + leg1.length_s;
        let Some(processing) = view.process(c.vn, subtask, tq) else {
            return Ok(None);
        };
        let tq2 = tq + processing.total();
        let lb2 = topology.hop_distance(c.vn, destination).unwrap_or(0) as f64 * result_hop;
        let mut memo2 = HopMemo::new();
        let leg2 = solver.solve(
            view,
            &mut memo2,
            c.vn,
            destination,
            tq2,
            result_volume,
            lb2,
            subtask_seed(seed, subtask, c.vn, 2),
        )?;
        if !leg2.is_reachable() {
            return Ok(None);
        }
        let Some(delivery) = view.downlink(destination, result_volume, tq2 + leg2.length_s) else {
            return Ok(None);
        };
        let total = leg1.length_s + processing.total() + (leg2.length_s + delivery.total());
        Ok(Some(Scored {
            vn: c.vn,
            leg1,
            processing,
            leg2,
            delivery,
            total,
        }))
    };

    // Nothing leaves a source that can neither compute nor transmit at `t`.
    let isolated = view.process(source, subtask, t).is_none()
        && topology.neighbors(source).iter().all(|&n| view.hop(source, n, subtask.volume_gb, t).is_none());
    if isolated {
        return Err(Error::Infeasible {
            task: subtask.task_id,
            subtask: subtask.subtask_index,
        });
    }
    let list = candidates(view, source, destination, subtask, params);
    let mut best: Option<Scored> = None;
    let mut memo = HopMemo::new();
    for batch in list.chunks(if params.lower_bound_pruning { params.batch_size } else { list.len().max(1) }) {
        if params.lower_bound_pruning {
            if let Some(b) = &best {
                if batch[0].bound >= b.total {
                    break;
                }
            }
        }
        let scored: Vec<Result<Option<Scored>>> = if params.execution.is_parallel() {
            exec::map_init(params.execution, batch, HopMemo::new, |m, c| evaluate(m, c))
        } else {
            batch.iter().map(|c| evaluate(&mut memo, c)).collect()
        };
        for s in scored {
            if let Some(s) = s? {
                if best.as_ref().is_none_or(|b| s.total < b.total) {
                    best = Some(s);
                }
            }
        }
    }
    let best = best.ok_or(Error::Infeasible {
        task: subtask.task_id,
        subtask: subtask.subtask_index,
    })?;
    assemble_computing_aware(view, subtask, destination, result_volume, best)
}

fn assemble_computing_aware<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    subtask: &Subtask,
    destination: VnId,
    result_volume: f64,
    s: Scored,
) -> Result<RoutePlan> {
    let t = subtask.created_at_s;
    let leg1 = leg_timeline(view, &s.leg1.path, subtask.volume_gb, t)?;
    let tq = t + s.leg1.length_s;
    let tq2 = tq + s.processing.total();
    let leg2 = leg_timeline(view, &s.leg2.path, result_volume, tq2)?;
    let delivery_start = tq2 + s.leg2.length_s;
    let mut components = leg1.components;
    components.add_processing(&s.processing);
    components.add(&leg2.components);
    components.add_hop(&s.delivery);
    let d3 = s.leg2.length_s + s.delivery.total();
    Ok(RoutePlan {
        subtask: *subtask,
        mode: RoutingMode::ComputingAware,
        destination,
        leg1,
        processing: Some(ProcessingStep {
            vn: s.vn,
            start_s: tq,
            duration_s: s.processing.total(),
            detail: s.processing,
        }),
        leg2,
        delivery: Delivery {
            vn: destination,
            start_s: delivery_start,
            volume_gb: result_volume,
            hop: s.delivery,
        },
        d1_s: s.leg1.length_s,
        d2_s: s.processing.total(),
        d3_s: d3,
        total_delay_s: components.total(),
        components,
        raw_volume_gb: subtask.volume_gb,
        result_volume_gb: result_volume,
    })
}

/// Plans `subtask` for the baseline: raw data to the destination VN, raw
/// downlink, no on-board processing.
pub fn route_ground_offloading<T, S>(
    topology: &T,
    ledger: &Ledger,
    subtask: &Subtask,
    destination: VnId,
    solver: &S,
    seed: u64,
) -> Result<RoutePlan>
where
    T: Topology + ?Sized,
    S: PathSolver,
{
    let view = GraphView::new(topology, ledger);
    let source = subtask.source_vn;
    let t = subtask.created_at_s;
    let infeasible = Error::Infeasible {
        task: subtask.task_id,
        subtask: subtask.subtask_index,
    };
    let lb = topology.hop_distance(source, destination).unwrap_or(0) as f64 * topology.min_hop_delay(subtask.volume_gb);
    let mut memo = HopMemo::new();
    let route = solver.solve(
        view,
        &mut memo,
        source,
        destination,
        t,
        subtask.volume_gb,
        lb,
        subtask_seed(seed, subtask, destination, 0),
    )?;
    if !route.is_reachable() {
        return Err(infeasible);
    }
    let leg1 = leg_timeline(view, &route.path, subtask.volume_gb, t)?;
    let arrive = t + route.length_s;
    let hop = view.downlink(destination, subtask.volume_gb, arrive).ok_or(infeasible)?;
    let mut components = leg1.components;
    components.add_hop(&hop);
    Ok(RoutePlan {
        subtask: *subtask,
        mode: RoutingMode::GroundOffloading,
        destination,
        leg1,
        processing: None,
        leg2: PathTimeline::at(destination, arrive),
        delivery: Delivery {
            vn: destination,
            start_s: arrive,
            volume_gb: subtask.volume_gb,
            hop,
        },
        d1_s: route.length_s,
        d2_s: 0.0,
        d3_s: hop.total(),
        total_delay_s: components.total(),
        components,
        raw_volume_gb: subtask.volume_gb,
        result_volume_gb: subtask.volume_gb,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CommitReport {
    pub link_reservations: usize,
    pub compute_reservations: usize,
}

/// Reserves the plan's resources: each raw-data hop over its occupancy
/// interval, the computing VN while it processes, and, if
/// `params.reserve_downlink`, the downlink while it carries data. Result hops
/// are not reserved. Fails with a stale-plan error if the ledger changed since
/// planning.
pub fn commit<T: Topology + ?Sized>(
    topology: &T,
    ledger: &mut Ledger,
    plan: &RoutePlan,
    params: &SchedulerParams,
) -> Result<CommitReport> {
    let mut report = CommitReport::default();
    let stale = |what: String| Error::StalePlan(what);
    {
        let view = GraphView::new(topology, &*ledger);
        for (i, hop) in plan.leg1.hops.iter().enumerate() {
            let entry = plan.leg1.arrival_times[i];
            let now = view.hop(plan.leg1.path[i], plan.leg1.path[i + 1], plan.raw_volume_gb, entry);
            if now.map(|h| h.total()) != Some(hop.total()) {
                return Err(stale(format!("hop {i} of leg 1 changed")));
            }
        }
        if let Some(p) = &plan.processing {
            let now = view.process(p.vn, &plan.subtask, p.start_s);
            if now.map(|x| x.total()) != Some(p.duration_s) {
                return Err(stale(format!("processing at {} changed", p.vn)));
            }
        }
    }
    if plan.raw_volume_gb > 0.0 {
        for (i, hop) in plan.leg1.hops.iter().enumerate() {
            let Some(key) = hop.link else { continue };
            let start = plan.leg1.arrival_times[i];
            let end = plan.leg1.arrival_times[i + 1];
            ledger.reserve_link(key, start, end)?;
            report.link_reservations += 1;
        }
    }
    if let Some(p) = &plan.processing {
        if plan.subtask.compute_gflo > 0.0 {
            ledger.reserve_compute(p.vn, p.start_s, p.start_s + p.duration_s)?;
            report.compute_reservations += 1;
        }
    }
    if params.reserve_downlink && plan.delivery.volume_gb > 0.0 {
        if let Some(key) = plan.delivery.hop.link {
            let start = plan.delivery.start_s;
            ledger.reserve_link(key, start, start + plan.delivery.hop.total())?;
            report.link_reservations += 1;
        }
    }
    Ok(report)
}
