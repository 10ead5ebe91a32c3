//! `grid.csv`, `summary.json` and `raw.jsonl` writers, plus recomputation of
//! cell metrics from raw trials.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Result, SscError};
use crate::graph::{build_adjacency, CoefficientMatrix};
use crate::harness::sweep::{mean_std, RawTrial, SweepResult};
use crate::metrics::{clustering_error, l1_norms, tp_fp_from_supports};

pub const GRID_HEADER: [&str; 14] = [
    "cell", "variant", "t", "rho", "sigma", "tau", "u", "metric", "subspace", "mean", "std",
    "trials", "failed", "status",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> SscError {
    SscError::Io(e.to_string())
}

/// Renders the grid: one row per cell and metric, cells in grid order.
///
/// Contains no timing information, so equal inputs give byte-identical output.
pub fn grid_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(GRID_HEADER).map_err(csv_error)?;
    for cell in &result.cells {
        let c = &cell.coords;
        let prefix = [
            cell.index.to_string(),
            c.variant.clone(),
            opt(c.t),
            opt(c.rho),
            opt(c.sigma),
            opt(c.tau),
            opt(c.u),
        ];
        let suffix = [
            cell.trials.to_string(),
            cell.failures.len().to_string(),
            cell.status().to_string(),
        ];
        if cell.metrics.is_empty() {
            let row = prefix
                .iter()
                .cloned()
                .chain(["error".into(), String::new(), String::new(), String::new()])
                .chain(suffix.iter().cloned());
            w.write_record(row).map_err(csv_error)?;
        }
        for m in &cell.metrics {
            let row = prefix
                .iter()
                .cloned()
                .chain([
                    m.metric.clone(),
                    opt(m.subspace),
                    m.mean.to_string(),
                    m.std.to_string(),
                ])
                .chain(suffix.iter().cloned());
            w.write_record(row).map_err(csv_error)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| SscError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| SscError::Io(e.to_string()))
}

pub fn write_grid(path: &Path, result: &SweepResult) -> Result<()> {
    std::fs::write(path, grid_csv(result)?)?;
    Ok(())
}

/// Library version and build information recorded in summaries.
pub fn versions() -> Value {
    json!({
        "greedy_ssc": env!("CARGO_PKG_VERSION"),
        "summary_format": 1,
    })
}

/// Writes `summary.json`: config echo, per-cell statistics, timings, versions.
pub fn write_summary<C: Serialize>(
    path: &Path,
    config: &C,
    result: &SweepResult,
    extras: &Value,
    threads: Option<usize>,
) -> Result<()> {
    let cells: Vec<Value> = result
        .cells
        .iter()
        .map(|c| {
            json!({
                "index": c.index,
                "coords": c.coords,
                "status": c.status(),
                "trials": c.trials,
                "failures": c.failures,
                "pursuit_seconds_per_trial": c.pursuit_seconds / c.trials as f64,
                "metrics": c.metrics,
            })
        })
        .collect();
    let summary = json!({
        "experiment": result.experiment,
        "config": config,
        "threads": threads,
        "wall_seconds": result.wall_seconds,
        "failed_cells": result.cells.iter().filter(|c| !c.failures.is_empty()).count(),
        "cells": cells,
        "extras": extras,
        "versions": versions(),
    });
    write_json(path, &summary)
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| SscError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// One JSON object per line.
pub fn write_raw(path: &Path, raw: &[RawTrial]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in raw {
        let line = serde_json::to_string(r).map_err(|e| SscError::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<Vec<RawTrial>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| SscError::ParseError {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Key of a recomputed statistic: `(cell, metric, subspace)`.
pub type MetricKey = (usize, String, Option<usize>);

/// Recomputes the support- and coefficient-based metrics of every cell from
/// raw trials and averages them over trials in trial order.
pub fn recompute_from_raw(raw: &[RawTrial]) -> Result<BTreeMap<MetricKey, f64>> {
    let mut values: BTreeMap<MetricKey, Vec<(usize, f64)>> = BTreeMap::new();
    for r in raw {
        let mut push = |metric: &str, subspace: Option<usize>, v: f64| {
            values
                .entry((r.cell, metric.to_string(), subspace))
                .or_default()
                .push((r.trial, v));
        };
        // trials without a clustering step store no labels
        if !r.labels.is_empty() {
            push("ce", None, clustering_error(&r.labels, &r.truth)?);
        }
        let b = CoefficientMatrix::from_columns(r.truth.len(), r.coefficients.clone())?;
        let g = build_adjacency(&b);
        let nfc = crate::graph::check_nfc(&g, &r.truth)?.holds;
        push("nfc", None, if nfc { 1.0 } else { 0.0 });
        let (tp_l1, fp_l1) = l1_norms(&b, &r.truth)?;
        push("tp_l1", None, tp_l1);
        push("fp_l1", None, fp_l1);
        let supports: Vec<&[usize]> = r.supports.iter().map(Vec::as_slice).collect();
        for c in tp_fp_from_supports(&supports, &r.truth, &r.dims, r.m)? {
            let l = Some(c.label);
            push("tp_count", l, c.tp_count);
            push("fp_count", l, c.fp_count);
            push("tpr_dim", l, c.tpr_dim);
            push("fpr_dim", l, c.fpr_dim);
            push("tpr_size", l, c.tpr_size);
            push("fpr_size", l, c.fpr_size);
        }
    }
    Ok(values
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|&(trial, _)| trial);
            let xs: Vec<f64> = v.into_iter().map(|(_, x)| x).collect();
            (k, mean_std(&xs).0)
        })
        .collect())
}

/// Largest absolute difference between recomputed and aggregated means.
pub fn raw_consistency_error(result: &SweepResult, raw: &[RawTrial]) -> Result<f64> {
    let recomputed = recompute_from_raw(raw)?;
    let mut worst = 0.0f64;
    for ((cell, metric, subspace), value) in &recomputed {
        let summary = result
            .cells
            .get(*cell)
            .and_then(|c| c.metric(metric, *subspace))
            .ok_or_else(|| {
                SscError::DimensionMismatch(format!("no aggregated {metric} for cell {cell}"))
            })?;
        worst = worst.max((summary.mean - value).abs());
    }
    Ok(worst)
}
