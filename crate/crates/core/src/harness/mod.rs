//! Monte-Carlo experiment harness: configurations, sweeps, output files and the CLI.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;
pub mod sweep;

pub use config::{
    load_config, parse_config, ArrangementKind, ClusterConfig, DdConfig, DiConfig, DiVariant,
    NoiselessConfig, PhaseConfig,
};
pub use experiments::{
    cluster_external, cluster_points, run_dd_sweep, run_di_sweep, run_noiseless_sweep,
    run_phase_diagram, ClusterOutcome, SweepOutput,
};
pub use output::{grid_csv, raw_consistency_error, recompute_from_raw};
pub use sweep::{CellResult, Coords, MetricSummary, RawTrial, RunOptions, SweepResult};
