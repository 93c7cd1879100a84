use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use orbitroute::harness::{
    emit, path_oracle, run_summary, run_workload, seed_range, sweep, write_metrics_csv, write_oracle_csv,
    write_trace_csv, OracleSpec, RunMetrics, ScenarioConfig,
};
use orbitroute::synthetic::RandomInstance;
use orbitroute::traffic::{generate_workload, read_workload_csv, write_workload_csv, Task};

/// Computing-aware routing experiments on a LEO constellation.
#[derive(Debug, Parser)]
#[command(name = "orbitroute", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write per-subtask plan records (`trace.csv`).
    #[arg(long, global = true)]
    trace: bool,
    /// Numeric override, e.g. `--set network.compute_gflops=20`. Repeatable.
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a workload and run both routing modes on it.
    Run,
    /// Sweep one numeric parameter over values and seeds.
    Sweep {
        /// Dotted parameter path, e.g. `network.sgl_rate_gbps`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Seeds per value, starting at the run seed. Defaults to `run.seeds`.
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Run both routing modes on a workload CSV written by `run`.
    Replay {
        workload: PathBuf,
    },
    /// Compare the GA with exhaustive search on small random graphs.
    Oracle {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 6)]
        vns: usize,
        /// Relative excess counted as a match.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli.global)?;
    let out = &cli.global.out;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match cli.command {
        Command::Run => {
            let network = cfg.network()?;
            let tasks = generate_workload(network.grid(), cfg.run.duration_s, &cfg.traffic, cfg.run.seed)?;
            write_workload_csv(&tasks, &out.join("workload.csv"))?;
            finish_run(&cfg, &tasks, out, cli.global.trace)
        }
        Command::Replay { workload } => {
            let tasks = read_workload_csv(&workload)?;
            let mut cfg = cfg;
            cfg.run.duration_s = tasks.iter().map(|t| t.arrival_s).fold(0.0, f64::max).ceil();
            finish_run(&cfg, &tasks, out, cli.global.trace)
        }
        Command::Sweep { param, values, seeds } => {
            let seeds = seed_range(cfg.run.seed, seeds.unwrap_or(cfg.run.seeds));
            let result = sweep(&cfg, &param, &values, &seeds)?;
            save_config(&cfg, out)?;
            for p in emit(&result, out)? {
                eprintln!("wrote {}", p.display());
            }
            print!("{}", orbitroute::harness::sweep_summary(&result));
            Ok(())
        }
        Command::Oracle {
            instances,
            vns,
            tolerance,
        } => {
            if vns < 2 {
                bail!("--vns must be at least 2");
            }
            let spec = OracleSpec {
                instances,
                first_seed: cfg.run.seed,
                graph: RandomInstance {
                    vns,
                    ..RandomInstance::default()
                },
                tolerance,
                ga: cfg.ga.clone(),
                execution: cfg.scheduler.execution,
                ..OracleSpec::default()
            };
            let report = path_oracle(&spec)?;
            if cli.global.trace {
                for c in &report.cases {
                    eprintln!(
                        "seed {}: ga {:.6} s ({} hops), exact {:.6} s ({} hops)",
                        c.seed, c.ga_length_s, c.ga_hops, c.exact_length_s, c.exact_hops
                    );
                }
            }
            write_oracle_csv(&report, &out.join("oracle.csv"))?;
            let summary = report.summary();
            std::fs::write(out.join("summary.txt"), &summary)?;
            print!("{summary}");
            Ok(())
        }
    }
}

fn load_config(g: &Global) -> Result<ScenarioConfig> {
    let mut cfg = match &g.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    for kv in &g.overrides {
        let Some((path, value)) = kv.split_once('=') else {
            bail!("--set expects PATH=VALUE, got `{kv}`");
        };
        let value: f64 = value.trim().parse().with_context(|| format!("--set {path}: not a number"))?;
        cfg.set(path.trim(), value)?;
    }
    if let Some(seed) = g.seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn save_config(cfg: &ScenarioConfig, out: &Path) -> Result<()> {
    std::fs::write(out.join("config.toml"), cfg.to_toml_string()?)?;
    Ok(())
}

fn finish_run(cfg: &ScenarioConfig, tasks: &[Task], out: &Path, trace: bool) -> Result<()> {
    let network = cfg.network()?;
    let (metrics, records): (RunMetrics, _) = run_workload(cfg, &network, tasks)?;
    save_config(cfg, out)?;
    write_metrics_csv(std::slice::from_ref(&metrics), &out.join("metrics.csv"))?;
    if trace {
        write_trace_csv(&records, &out.join("trace.csv"))?;
    }
    let summary = run_summary(&metrics);
    std::fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}
