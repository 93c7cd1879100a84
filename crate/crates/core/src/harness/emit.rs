use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::oracle::OracleReport;
use super::run::{PlanRecord, RunMetrics};
use crate::scheduler::RoutingMode;
use super::sweep::{SweepPoint, SweepResult};

/// Column order of the sweep CSV.
pub const SWEEP_COLUMNS: &[&str] = &[
    "value",
    "ca_mean_delay_s",
    "go_mean_delay_s",
    "ratio",
    "ca_ci_s",
    "go_ci_s",
    "ratio_ci",
    "ca_isl_transmission_s",
    "ca_sgl_transmission_s",
    "ca_propagation_s",
    "ca_processing_s",
    "ca_waiting_s",
    "go_isl_transmission_s",
    "go_sgl_transmission_s",
    "go_propagation_s",
    "go_processing_s",
    "go_waiting_s",
    "subtasks",
    "measured",
    "ca_dropped",
    "go_dropped",
    "ca_raw_hops",
    "go_raw_hops",
    "ca_deadline_misses",
    "go_deadline_misses",
    "isl_model_ratio",
];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for p in &result.points {
        w.serialize(p).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepPoint>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}

pub fn write_trace_csv(records: &[PlanRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<PlanRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}

/// One row per routing mode of a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub mode: RoutingMode,
    pub subtasks: usize,
    pub measured: usize,
    pub planned: usize,
    pub dropped: usize,
    pub deadline_misses: usize,
    pub mean_delay_s: f64,
    pub isl_transmission_s: f64,
    pub sgl_transmission_s: f64,
    pub propagation_s: f64,
    pub processing_s: f64,
    pub waiting_s: f64,
    pub mean_raw_hops: f64,
    pub mean_total_hops: f64,
    pub ratio: f64,
}

pub fn metrics_rows(m: &RunMetrics) -> [MetricsRow; 2] {
    let row = |mode, x: &super::run::ModeMetrics| MetricsRow {
        seed: m.seed,
        mode,
        subtasks: m.subtasks,
        measured: m.measured,
        planned: x.planned,
        dropped: x.dropped,
        deadline_misses: x.deadline_misses,
        mean_delay_s: x.mean_delay_s,
        isl_transmission_s: x.components.isl_transmission_s,
        sgl_transmission_s: x.components.sgl_transmission_s,
        propagation_s: x.components.propagation_s,
        processing_s: x.components.processing_s,
        waiting_s: x.components.waiting_s,
        mean_raw_hops: x.mean_raw_hops,
        mean_total_hops: x.mean_total_hops,
        ratio: m.ratio,
    };
    [
        row(RoutingMode::ComputingAware, &m.computing_aware),
        row(RoutingMode::GroundOffloading, &m.ground_offloading),
    ]
}

pub fn write_metrics_csv(runs: &[RunMetrics], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for m in runs {
        for row in metrics_rows(m) {
            w.serialize(row).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn write_oracle_csv(report: &OracleReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for c in &report.cases {
        w.serialize(c).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn sweep_summary(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "parameter: {}", result.parameter);
    let seeds: Vec<String> = result.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(s, "seeds: {}", seeds.join(", "));
    let _ = writeln!(
        s,
        "{:>12} {:>12} {:>12} {:>8} {:>8} {:>9} {:>8}",
        "value", "ca_delay_s", "go_delay_s", "ratio", "±", "measured", "dropped"
    );
    for p in &result.points {
        let _ = writeln!(
            s,
            "{:>12} {:>12.4} {:>12.4} {:>8.4} {:>8.4} {:>9} {:>8}",
            p.value,
            p.ca_mean_delay_s,
            p.go_mean_delay_s,
            p.ratio,
            p.ratio_ci,
            p.measured,
            p.ca_dropped + p.go_dropped
        );
    }
    match result.break_even() {
        Some(x) => {
            let _ = writeln!(s, "break-even: ratio crosses 1.0 at {} ≈ {x:.4}", result.parameter);
        }
        None => {
            let _ = writeln!(s, "break-even: ratio does not cross 1.0 over the swept range");
        }
    }
    s
}

pub fn run_summary(m: &RunMetrics) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed: {}", m.seed);
    let _ = writeln!(s, "subtasks: {} (measured {})", m.subtasks, m.measured);
    for (name, x) in [
        ("computing-aware", &m.computing_aware),
        ("ground-offloading", &m.ground_offloading),
    ] {
        let c = &x.components;
        let _ = writeln!(
            s,
            "{name}: mean {:.4} s = isl {:.4} + sgl {:.4} + prop {:.4} + proc {:.4} + wait {:.4}; raw hops {:.2}; dropped {}; late {}",
            x.mean_delay_s,
            c.isl_transmission_s,
            c.sgl_transmission_s,
            c.propagation_s,
            c.processing_s,
            c.waiting_s,
            x.mean_raw_hops,
            x.dropped,
            x.deadline_misses
        );
    }
    let _ = writeln!(s, "ratio: {:.4}", m.ratio);
    s
}

/// Writes `sweep.csv` and `summary.txt` into `dir`.
pub fn emit(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("sweep.csv");
    write_sweep_csv(result, &csv_path)?;
    let summary = dir.join("summary.txt");
    std::fs::write(&summary, sweep_summary(result)).map_err(io_err(&summary))?;
    Ok(vec![csv_path, summary])
}
