//! Stochastic workload: per-VN Poisson task arrivals, each task split into
//! log-normally many subtasks with log-normal compute, volume and memory.
//!
//! Distribution parameters are the mean and standard deviation of the variable
//! itself; the log-space parameters are derived by moment matching.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zone::{VnId, ZoneGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub const fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    fn sampler(&self, name: &str) -> Result<PositiveSampler> {
        if !(self.mean.is_finite() && self.mean > 0.0) {
            return Err(Error::config(name, "mean must be > 0"));
        }
        if !(self.std.is_finite() && self.std >= 0.0) {
            return Err(Error::config(name, "std must be >= 0"));
        }
        if self.std == 0.0 {
            return Ok(PositiveSampler::Constant(self.mean));
        }
        LogNormal::from_mean_cv(self.mean, self.std / self.mean)
            .map(PositiveSampler::LogNormal)
            .map_err(|e| Error::config(name, e.to_string()))
    }
}

#[derive(Debug, Clone, Copy)]
enum PositiveSampler {
    Constant(f64),
    LogNormal(LogNormal<f64>),
}

impl PositiveSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PositiveSampler::Constant(v) => *v,
            PositiveSampler::LogNormal(d) => d.sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficParams {
    /// Task arrivals per VN per second.
    pub lambda_per_vn: f64,
    pub subtask_count: Moments,
    pub compute_gflo: Moments,
    pub volume_gb: Moments,
    pub memory_gb: Moments,
    pub deadlines_s: [f64; 2],
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            lambda_per_vn: 1.0 / 60.0,
            subtask_count: Moments::new(3.0, 1.0),
            compute_gflo: Moments::new(50.0, 2.0),
            volume_gb: Moments::new(0.1, 0.02),
            memory_gb: Moments::new(1.0, 0.2),
            deadlines_s: [10.0, 60.0],
        }
    }
}

/// The routing unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subtask {
    pub task_id: u64,
    pub subtask_index: u32,
    pub source_vn: VnId,
    pub created_at_s: f64,
    pub compute_gflo: f64,
    pub volume_gb: f64,
    pub memory_gb: f64,
    pub deadline_s: f64,
    pub dest_lon_rad: f64,
    pub dest_lat_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub task_id: u64,
    pub source_vn: VnId,
    pub arrival_s: f64,
    pub subtasks: Vec<Subtask>,
}

/// The VN above a subtask's destination.
pub fn destination_vn(subtask: &Subtask, grid: &ZoneGrid) -> VnId {
    grid.zone_of(subtask.dest_lon_rad, subtask.dest_lat_rad)
}

/// Generates the workload for every VN of `grid` over `[0, duration_s)`.
/// Each VN draws from its own ChaCha stream, so per-VN processes are
/// independent and the whole workload is a pure function of `seed`.
pub fn generate_workload(
    grid: &ZoneGrid,
    duration_s: f64,
    params: &TrafficParams,
    seed: u64,
) -> Result<Vec<Task>> {
    if !(duration_s.is_finite() && duration_s >= 0.0) {
        return Err(Error::config("duration_s", "must be >= 0"));
    }
    if !(params.lambda_per_vn.is_finite() && params.lambda_per_vn > 0.0) {
        return Err(Error::config("traffic.lambda_per_vn", "must be > 0"));
    }
    if params.deadlines_s.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::config("traffic.deadlines_s", "must be > 0"));
    }
    let count = params.subtask_count.sampler("traffic.subtask_count")?;
    let compute = params.compute_gflo.sampler("traffic.compute_gflo")?;
    let volume = params.volume_gb.sampler("traffic.volume_gb")?;
    let memory = params.memory_gb.sampler("traffic.memory_gb")?;
    let gap = Exp::new(params.lambda_per_vn).map_err(|e| Error::config("traffic.lambda_per_vn", e.to_string()))?;

    let mut tasks = Vec::new();
    for vn in 0..grid.len() as u32 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(vn as u64);
        let mut t = 0.0;
        loop {
            t += gap.sample(&mut rng);
            if t >= duration_s {
                break;
            }
            let n = (count.sample(&mut rng).round() as u32).max(1);
            let dest_lon = rng.random_range(-PI..PI);
            let dest_lat = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            let subtasks = (0..n)
                .map(|l| Subtask {
                    task_id: 0,
                    subtask_index: l,
                    source_vn: VnId(vn),
                    created_at_s: t,
                    compute_gflo: compute.sample(&mut rng),
                    volume_gb: volume.sample(&mut rng),
                    memory_gb: memory.sample(&mut rng),
                    deadline_s: params.deadlines_s[rng.random_range(0..2)],
                    dest_lon_rad: dest_lon,
                    dest_lat_rad: dest_lat,
                })
                .collect();
            tasks.push(Task {
                task_id: 0,
                source_vn: VnId(vn),
                arrival_s: t,
                subtasks,
            });
        }
    }
    tasks.sort_by(|a, b| a.arrival_s.total_cmp(&b.arrival_s).then(a.source_vn.cmp(&b.source_vn)));
    for (k, task) in tasks.iter_mut().enumerate() {
        task.task_id = k as u64;
        for s in &mut task.subtasks {
            s.task_id = k as u64;
        }
    }
    Ok(tasks)
}

/// Subtasks of `tasks` in arrival order.
pub fn flatten(tasks: &[Task]) -> Vec<Subtask> {
    tasks.iter().flat_map(|t| t.subtasks.iter().copied()).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct WorkloadRow {
    task_id: u64,
    subtask_id: u32,
    arrival_s: f64,
    source_vn: u32,
    compute_gflo: f64,
    volume_gb: f64,
    memory_gb: f64,
    deadline_s: f64,
    dest_lon_rad: f64,
    dest_lat_rad: f64,
}

/// Writes one subtask per row. Floats use the shortest round-trip decimal form,
/// so a replay reads back bit-identical values.
pub fn write_workload_csv(tasks: &[Task], path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for s in tasks.iter().flat_map(|t| &t.subtasks) {
        w.serialize(WorkloadRow {
            task_id: s.task_id,
            subtask_id: s.subtask_index,
            arrival_s: s.created_at_s,
            source_vn: s.source_vn.0,
            compute_gflo: s.compute_gflo,
            volume_gb: s.volume_gb,
            memory_gb: s.memory_gb,
            deadline_s: s.deadline_s,
            dest_lon_rad: s.dest_lon_rad,
            dest_lat_rad: s.dest_lat_rad,
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_workload_csv(path: &Path) -> Result<Vec<Task>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut tasks: Vec<Task> = Vec::new();
    for row in r.deserialize() {
        let row: WorkloadRow = row.map_err(csv_err)?;
        let s = Subtask {
            task_id: row.task_id,
            subtask_index: row.subtask_id,
            source_vn: VnId(row.source_vn),
            created_at_s: row.arrival_s,
            compute_gflo: row.compute_gflo,
            volume_gb: row.volume_gb,
            memory_gb: row.memory_gb,
            deadline_s: row.deadline_s,
            dest_lon_rad: row.dest_lon_rad,
            dest_lat_rad: row.dest_lat_rad,
        };
        match tasks.last_mut() {
            Some(t) if t.task_id == row.task_id => t.subtasks.push(s),
            _ => tasks.push(Task {
                task_id: row.task_id,
                source_vn: s.source_vn,
                arrival_s: s.created_at_s,
                subtasks: vec![s],
            }),
        }
    }
    Ok(tasks)
}
