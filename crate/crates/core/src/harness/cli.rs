//! Command-line front end of the experiment harness.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::datamodel::write_labels_csv;
use crate::error::{Result, SscError};
use crate::harness::config::{
    load_config, ClusterConfig, DdConfig, DiConfig, NoiselessConfig, PhaseConfig,
};
use crate::harness::experiments::{
    cluster_external, run_dd_sweep, run_di_sweep, run_noiseless_sweep, run_phase_diagram,
    ClusterOutcome, SweepOutput,
};
use crate::harness::output::{write_grid, write_json, write_raw, write_summary, versions};
use crate::harness::sweep::{CellResult, Coords, MetricSummary, RunOptions, SweepResult};
use crate::pursuit::Method;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ssc", version, about = "Subspace clustering experiments with OMP and MP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// TOML configuration file; missing keys take their defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed (overrides the config file)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials per cell (overrides the config file)
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = "ssc-out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write every trial's supports and coefficients to raw.jsonl
    #[arg(long, global = true)]
    pub dump_raw: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clustering error over intersection dimension, density and noise
    Phase,
    /// TP/FP counts as a function of the residual threshold
    DdSweep,
    /// Sensitivity to the iteration budget / target sparsity
    DiSweep,
    /// Sparsity sweep on noiseless data
    Noiseless,
    /// Cluster points read from a CSV file
    Cluster(ClusterArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct ClusterArgs {
    /// Points, one per row (overrides `data` in the config)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Ground-truth labels, one per row
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Number of clusters (eigengap estimate when omitted)
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long)]
    pub s_max: Option<usize>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "omp" => Ok(Method::Omp),
        "mp" => Ok(Method::Mp),
        _ => Err(format!("unknown method '{s}' (expected omp or mp)")),
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    PartialFailure,
}

fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => load_config(p),
        None => Ok(T::default()),
    }
}

/// Parses `args` (including the program name), runs the command and maps the
/// result to a process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(Outcome::Complete) => EXIT_OK,
        Ok(Outcome::PartialFailure) => {
            eprintln!("some cells failed; see summary.json");
            EXIT_PARTIAL
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &SscError) -> i32 {
    match e {
        SscError::InvalidConfig(_) | SscError::ParseError { .. } | SscError::DimensionMismatch(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_ERROR,
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    let opts = RunOptions {
        threads: c.threads,
        dump_raw: c.dump_raw,
    };
    let config = c.config.as_deref();
    macro_rules! sweep {
        ($ty:ty, $run:ident) => {{
            let mut cfg: $ty = load_or_default(config)?;
            if let Some(seed) = c.seed {
                cfg.seed = seed;
            }
            if let Some(trials) = c.trials {
                cfg.trials = trials;
            }
            cfg.validate()?;
            let out = $run(&cfg, &opts)?;
            write_sweep(&c.out, &cfg, &out, &opts)
        }};
    }
    match &cli.command {
        Command::Phase => sweep!(PhaseConfig, run_phase_diagram),
        Command::DdSweep => sweep!(DdConfig, run_dd_sweep),
        Command::DiSweep => sweep!(DiConfig, run_di_sweep),
        Command::Noiseless => sweep!(NoiselessConfig, run_noiseless_sweep),
        Command::Cluster(args) => {
            let mut cfg: ClusterConfig = load_or_default(config)?;
            if let Some(seed) = c.seed {
                cfg.seed = seed;
            }
            if args.data.is_some() {
                cfg.data = args.data.clone();
            }
            if args.labels.is_some() {
                cfg.labels = args.labels.clone();
            }
            if args.clusters.is_some() {
                cfg.clusters = args.clusters;
            }
            if let Some(m) = args.method {
                cfg.method = m;
            }
            if args.s_max.is_some() {
                cfg.s_max = args.s_max;
            }
            let outcome = cluster_external(&cfg)?;
            write_cluster(&c.out, &cfg, &outcome)?;
            Ok(Outcome::Complete)
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Writes `grid.csv`, `summary.json` and (optionally) `raw.jsonl` into `dir`.
pub fn write_sweep<C: serde::Serialize>(
    dir: &Path,
    cfg: &C,
    out: &SweepOutput,
    opts: &RunOptions,
) -> Result<Outcome> {
    prepare_dir(dir)?;
    write_grid(&dir.join("grid.csv"), &out.result)?;
    write_summary(&dir.join("summary.json"), cfg, &out.result, &out.extras, opts.threads)?;
    if opts.dump_raw {
        write_raw(&dir.join("raw.jsonl"), &out.raw)?;
    }
    Ok(if out.result.has_failures() {
        Outcome::PartialFailure
    } else {
        Outcome::Complete
    })
}

fn single(metric: &str, subspace: Option<usize>, value: f64) -> MetricSummary {
    MetricSummary {
        metric: metric.to_string(),
        subspace,
        mean: value,
        std: 0.0,
        count: 1,
    }
}

/// Single-cell grid of an external clustering run.
pub fn cluster_grid(cfg: &ClusterConfig, outcome: &ClusterOutcome) -> SweepResult {
    let mut metrics = vec![single("clusters", None, outcome.output.clusters as f64)];
    if let Some(r) = &outcome.report {
        metrics.push(single("ce", None, r.ce));
        metrics.push(single("nfc", None, if r.nfc { 1.0 } else { 0.0 }));
        metrics.push(single("tp_l1", None, r.tp_l1));
        metrics.push(single("fp_l1", None, r.fp_l1));
        for c in &r.subspaces {
            let l = Some(c.label);
            metrics.push(single("tp_count", l, c.tp_count));
            metrics.push(single("fp_count", l, c.fp_count));
            metrics.push(single("tpr_size", l, c.tpr_size));
            metrics.push(single("fpr_size", l, c.fpr_size));
        }
    }
    SweepResult {
        experiment: "cluster".into(),
        cells: vec![CellResult {
            index: 0,
            coords: Coords {
                variant: cfg.method.to_string(),
                u: cfg.s_max,
                tau: (cfg.tau > 0.0).then_some(cfg.tau),
                ..Coords::default()
            },
            trials: 1,
            failures: Vec::new(),
            metrics,
            pursuit_seconds: 0.0,
        }],
        wall_seconds: outcome.wall_seconds,
    }
}

/// Writes `labels.csv`, `grid.csv` and `summary.json` of a clustering run.
pub fn write_cluster(dir: &Path, cfg: &ClusterConfig, outcome: &ClusterOutcome) -> Result<()> {
    prepare_dir(dir)?;
    write_labels_csv(&dir.join("labels.csv"), &outcome.output.labels)?;
    write_grid(&dir.join("grid.csv"), &cluster_grid(cfg, outcome))?;
    let unavailable = json!("unavailable: no labels supplied");
    let summary = json!({
        "experiment": "cluster",
        "config": cfg,
        "points": outcome.points,
        "ambient_dim": outcome.ambient_dim,
        "clusters": outcome.output.clusters,
        "estimated_clusters": outcome.output.estimated_clusters,
        "zero_columns": outcome.output.zero_columns,
        "ce": outcome.report.as_ref().map_or(unavailable.clone(), |r| json!(r.ce)),
        "nfc": outcome.report.as_ref().map_or(unavailable, |r| json!(r.nfc)),
        "metrics": outcome.report,
        "wall_seconds": outcome.wall_seconds,
        "versions": versions(),
    });
    write_json(&dir.join("summary.json"), &summary)
}
