//! Monte-Carlo sweep engine: runs every (cell, trial) task on a worker pool
//! and aggregates per-cell statistics in a fixed order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};
use crate::numerics::RngStream;

/// Grid coordinates of a cell; unused axes are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coords {
    pub variant: String,
    pub t: Option<usize>,
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub u: Option<usize>,
}

/// One measured value of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub metric: &'static str,
    pub subspace: Option<usize>,
    pub value: f64,
}

impl Sample {
    pub fn total(metric: &'static str, value: f64) -> Self {
        Self {
            metric,
            subspace: None,
            value,
        }
    }

    pub fn per_subspace(metric: &'static str, subspace: usize, value: f64) -> Self {
        Self {
            metric,
            subspace: Some(subspace),
            value,
        }
    }
}

/// Everything a trial needs to persist for offline recomputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTrial {
    pub cell: usize,
    pub trial: usize,
    pub m: usize,
    pub dims: Vec<usize>,
    pub truth: Vec<usize>,
    /// Empty when the experiment does not cluster.
    pub labels: Vec<usize>,
    pub supports: Vec<Vec<usize>>,
    pub coefficients: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub samples: Vec<Sample>,
    pub pursuit_seconds: f64,
    pub raw: Option<RawTrial>,
}

/// Mean and spread of one metric over the successful trials of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub subspace: Option<usize>,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub coords: Coords,
    pub trials: usize,
    /// `(trial, message)` for every failed trial.
    pub failures: Vec<(usize, String)>,
    pub metrics: Vec<MetricSummary>,
    pub pursuit_seconds: f64,
}

impl CellResult {
    pub fn status(&self) -> &'static str {
        match self.failures.len() {
            0 => "ok",
            f if f == self.trials => "failed",
            _ => "partial",
        }
    }

    pub fn metric(&self, metric: &str, subspace: Option<usize>) -> Option<&MetricSummary> {
        self.metrics
            .iter()
            .find(|s| s.metric == metric && s.subspace == subspace)
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.metric(metric, None).map(|s| s.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: String,
    pub cells: Vec<CellResult>,
    pub wall_seconds: f64,
}

impl SweepResult {
    pub fn has_failures(&self) -> bool {
        self.cells.iter().any(|c| !c.failures.is_empty())
    }

    /// First cell whose coordinates satisfy `pred`.
    pub fn find(&self, pred: impl Fn(&Coords) -> bool) -> Option<&CellResult> {
        self.cells.iter().find(|c| pred(&c.coords))
    }
}

/// Pool size and raw-output switch shared by all experiments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses all available cores.
    pub threads: Option<usize>,
    pub dump_raw: bool,
}

/// A grid cell: coordinates, the data group seeding its trials, and its parameters.
///
/// Cells with the same `group` see the same data in trial `k`, so method
/// variants are compared on identical samples.
#[derive(Debug, Clone)]
pub struct CellPlan<P> {
    pub coords: Coords,
    pub group: u64,
    pub params: P,
}

/// Random stream of trial `trial` of data group `group`.
pub fn trial_stream(seed: u64, group: u64, trial: usize) -> RngStream {
    RngStream::new(seed, group).substream(trial as u64)
}

/// Runs `trials` trials of every cell and aggregates them.
pub fn run_cells<P, F>(
    experiment: &str,
    plans: &[CellPlan<P>],
    trials: usize,
    seed: u64,
    opts: &RunOptions,
    trial_fn: F,
) -> Result<(SweepResult, Vec<RawTrial>)>
where
    P: Sync,
    F: Fn(&P, RngStream, bool) -> Result<TrialOutput> + Sync,
{
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(SscError::InvalidConfig("threads must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SscError::InvalidConfig(format!("thread pool: {e}")))?;

    let tasks: Vec<(usize, usize)> = (0..plans.len())
        .flat_map(|c| (0..trials).map(move |t| (c, t)))
        .collect();
    let outputs: Vec<Result<TrialOutput>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, t)| {
                let plan = &plans[c];
                let mut out = trial_fn(&plan.params, trial_stream(seed, plan.group, t), opts.dump_raw)?;
                if let Some(raw) = out.raw.as_mut() {
                    raw.cell = c;
                    raw.trial = t;
                }
                Ok(out)
            })
            .collect()
    });

    let mut cells = Vec::with_capacity(plans.len());
    let mut raw = Vec::new();
    let mut iter = outputs.into_iter();
    for (index, plan) in plans.iter().enumerate() {
        let mut failures = Vec::new();
        let mut runs = Vec::with_capacity(trials);
        for trial in 0..trials {
            match iter.next().expect("one output per task") {
                Ok(out) => runs.push(out),
                Err(e) => failures.push((trial, e.to_string())),
            }
        }
        let pursuit_seconds = runs.iter().map(|r| r.pursuit_seconds).sum();
        let metrics = aggregate(&runs);
        raw.extend(runs.into_iter().filter_map(|r| r.raw));
        cells.push(CellResult {
            index,
            coords: plan.coords.clone(),
            trials,
            failures,
            metrics,
            pursuit_seconds,
        });
    }
    Ok((
        SweepResult {
            experiment: experiment.to_string(),
            cells,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
        raw,
    ))
}

/// Per-metric mean and sample standard deviation, in first-appearance order.
fn aggregate(runs: &[TrialOutput]) -> Vec<MetricSummary> {
    let mut keys: Vec<(&'static str, Option<usize>)> = Vec::new();
    for run in runs {
        for s in &run.samples {
            if !keys.contains(&(s.metric, s.subspace)) {
                keys.push((s.metric, s.subspace));
            }
        }
    }
    keys.into_iter()
        .map(|(metric, subspace)| {
            let values: Vec<f64> = runs
                .iter()
                .flat_map(|r| r.samples.iter())
                .filter(|s| s.metric == metric && s.subspace == subspace)
                .map(|s| s.value)
                .collect();
            let (mean, std) = mean_std(&values);
            MetricSummary {
                metric: metric.to_string(),
                subspace,
                mean,
                std,
                count: values.len(),
            }
        })
        .collect()
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
