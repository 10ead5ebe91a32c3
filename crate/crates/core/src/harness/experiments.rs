//! The synthetic sweeps and external-data clustering.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::datamodel::{
    generate_points, read_labels_csv, read_points_csv, sample_arrangement_common_core,
    sample_arrangement_shared_intersection, SubspaceArrangement, SyntheticConfig,
};
use crate::error::{Result, SscError};
use crate::graph::{build_adjacency, CoefficientMatrix};
use crate::harness::config::{
    points_for_density, ArrangementKind, ClusterConfig, DdConfig, DiConfig, DiVariant,
    NoiselessConfig, PhaseConfig,
};
use crate::harness::sweep::{
    run_cells, CellPlan, Coords, RawTrial, RunOptions, Sample, SweepResult, TrialOutput,
};
use crate::metrics::{clustering_error, MetricsReport};
use crate::numerics::RngStream;
use crate::pipeline::{run_ssc, SscConfig, SscOutput};
use crate::pursuit::{represent_all, PursuitConfig, PursuitResult, StopReason};
use crate::spectral::{normalized_spectral_clustering, SpectralConfig};
use crate::theory::{reference_rho_of_aff, reference_rho_of_sigma, tau_admissible_range, theorem3_tp_lower_bound};

/// A finished experiment: aggregated grid, optional raw trials and extra
/// summary fields.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub result: SweepResult,
    pub raw: Vec<RawTrial>,
    pub extras: Value,
}

/// Data model of one trial.
#[derive(Debug, Clone, PartialEq)]
struct DataSpec {
    kind: ArrangementKind,
    m: usize,
    dims: Vec<usize>,
    t: usize,
    counts: Vec<usize>,
    sigma: f64,
}

impl DataSpec {
    fn arrangement(&self, stream: RngStream) -> Result<SubspaceArrangement> {
        let mut rng = stream.rng();
        match self.kind {
            ArrangementKind::SharedIntersection => {
                let d = self.dims[0];
                sample_arrangement_shared_intersection(self.m, self.dims.len(), d, self.t, &mut rng)
            }
            ArrangementKind::CommonCore => {
                sample_arrangement_common_core(self.m, &self.dims, self.t, &mut rng)
            }
        }
    }
}

#[derive(Debug, Clone)]
struct TrialPlan {
    data: DataSpec,
    pursuit: PursuitConfig,
    /// Residual threshold experiments also check the TP lower bound.
    tp_bound: Option<TpBoundCheck>,
    /// Run spectral clustering and report the clustering error.
    cluster: bool,
}

#[derive(Debug, Clone, Copy)]
struct TpBoundCheck {
    tau: f64,
    c_s: f64,
}

fn stop_metric(reason: StopReason) -> &'static str {
    match reason {
        StopReason::MaxIterations => "stop_max_iterations",
        StopReason::SparsityReached => "stop_sparsity_reached",
        StopReason::ResidualBelowTau => "stop_residual_below_tau",
        StopReason::ZeroInnerProducts => "stop_zero_inner_products",
        StopReason::IterCap => "stop_iter_cap",
    }
}

/// Same-subspace support size of every point.
fn tp_per_point(results: &[PursuitResult], truth: &[usize]) -> Vec<usize> {
    results
        .iter()
        .enumerate()
        .map(|(j, r)| r.support.iter().filter(|&&i| i != j && truth[i] == truth[j]).count())
        .collect()
}

fn run_trial(plan: &TrialPlan, stream: RngStream, dump: bool) -> Result<TrialOutput> {
    let spec = &plan.data;
    let arr = spec.arrangement(stream.substream(0))?;
    let data = generate_points(
        &arr,
        &SyntheticConfig {
            counts: spec.counts.clone(),
            sigma: spec.sigma,
            rng: stream.substream(1),
        },
    )?;
    let truth = data.truth.expect("synthetic data carries labels");
    plan.pursuit.validate(data.y.nrows(), data.y.ncols())?;

    let clock = Instant::now();
    let results = represent_all(&data.y, &plan.pursuit)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let pursuit_seconds = clock.elapsed().as_secs_f64();

    let b = CoefficientMatrix::from_results(&results)?;
    let graph = build_adjacency(&b);
    let labels = if plan.cluster {
        normalized_spectral_clustering(
            &graph,
            arr.len(),
            &SpectralConfig::with_rng(stream.substream(2)),
        )?
    } else {
        // the clustering error of a constant labelling is never reported
        vec![0; truth.len()]
    };
    let report = MetricsReport::compute(&results, &b, &graph, &labels, &truth, &spec.dims, spec.m)?;

    let n = results.len() as f64;
    let mut samples = Vec::new();
    if plan.cluster {
        samples.push(Sample::total("ce", report.ce));
    }
    samples.extend([
        Sample::total("nfc", if report.nfc { 1.0 } else { 0.0 }),
        Sample::total("tp_l1", report.tp_l1),
        Sample::total("fp_l1", report.fp_l1),
        Sample::total(
            "iterations",
            results.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
        ),
        Sample::total(
            "support_size",
            results.iter().map(|r| r.support.len() as f64).sum::<f64>() / n,
        ),
    ]);
    for reason in StopReason::ALL {
        let hits = results.iter().filter(|r| r.stop_reason == reason).count();
        samples.push(Sample::total(stop_metric(reason), hits as f64 / n));
    }
    for c in &report.subspaces {
        let l = c.label;
        samples.extend([
            Sample::per_subspace("tp_count", l, c.tp_count),
            Sample::per_subspace("fp_count", l, c.fp_count),
            Sample::per_subspace("tpr_dim", l, c.tpr_dim),
            Sample::per_subspace("fpr_dim", l, c.fpr_dim),
            Sample::per_subspace("tpr_size", l, c.tpr_size),
            Sample::per_subspace("fpr_size", l, c.fpr_size),
        ]);
    }
    if let Some(check) = plan.tp_bound {
        let tp = tp_per_point(&results, &truth);
        let d_max = spec.dims.iter().copied().max().unwrap_or(0);
        let range = tau_admissible_range(d_max, spec.m, spec.sigma)?;
        samples.push(Sample::total(
            "tau_admissible",
            if check.tau <= range.upper { 1.0 } else { 0.0 },
        ));
        let mut met_total = 0usize;
        for (l, (&d, &count)) in spec.dims.iter().zip(&spec.counts).enumerate() {
            let bound = theorem3_tp_lower_bound(d, count, spec.m, spec.sigma, check.tau, check.c_s)?;
            let met = (0..truth.len())
                .filter(|&j| truth[j] == l && tp[j] as u64 >= bound.value)
                .count();
            met_total += met;
            samples.push(Sample::per_subspace("tp_bound", l, bound.value as f64));
            samples.push(Sample::per_subspace("tp_bound_rate", l, met as f64 / count as f64));
        }
        samples.push(Sample::total("tp_bound_rate", met_total as f64 / n));
    }

    let raw = dump.then(|| RawTrial {
        cell: 0,
        trial: 0,
        m: spec.m,
        dims: spec.dims.clone(),
        truth: truth.clone(),
        labels: if plan.cluster { labels.clone() } else { Vec::new() },
        supports: results.iter().map(|r| r.support.clone()).collect(),
        coefficients: results.iter().map(|r| r.coefficients.clone()).collect(),
    });
    Ok(TrialOutput {
        samples,
        pursuit_seconds,
        raw,
    })
}

fn run_plans(
    experiment: &str,
    plans: &[CellPlan<TrialPlan>],
    trials: usize,
    seed: u64,
    opts: &RunOptions,
    extras: Value,
) -> Result<SweepOutput> {
    let (result, raw) = run_cells(experiment, plans, trials, seed, opts, run_trial)?;
    Ok(SweepOutput { result, raw, extras })
}

/// Clustering error over `(t, rho, sigma)` with DI stopping at `s_max`.
pub fn run_phase_diagram(cfg: &PhaseConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let mut plans = Vec::new();
    let mut group = 0u64;
    for &t in &cfg.t {
        for &rho in &cfg.rho {
            for &sigma in &cfg.sigma {
                let n = points_for_density(rho, cfg.d);
                let data = DataSpec {
                    kind: ArrangementKind::SharedIntersection,
                    m: cfg.m,
                    dims: vec![cfg.d; cfg.subspaces],
                    t,
                    counts: vec![n; cfg.subspaces],
                    sigma,
                };
                for &method in &cfg.methods {
                    let mut pursuit = PursuitConfig::di(method, cfg.s_max);
                    pursuit.p_max = cfg.p_max;
                    plans.push(CellPlan {
                        coords: Coords {
                            variant: method.to_string(),
                            t: Some(t),
                            rho: Some(rho),
                            sigma: Some(sigma),
                            ..Coords::default()
                        },
                        group,
                        params: TrialPlan {
                            data: data.clone(),
                            pursuit,
                            tp_bound: None,
                            cluster: true,
                        },
                    });
                }
                group += 1;
            }
        }
    }
    let overlay = curve_fit_overlay(cfg);
    run_plans("phase", &plans, cfg.trials, cfg.seed, opts, json!({ "curve_fit": overlay }))
}

#[derive(Debug, Serialize)]
struct OverlayPoint {
    x: f64,
    rho: Option<f64>,
}

/// Reference phase-transition curves evaluated on the grid's affinity and
/// noise values (`None` where the curve has no finite value).
fn curve_fit_overlay(cfg: &PhaseConfig) -> Value {
    let by_aff: Vec<OverlayPoint> = cfg
        .t
        .iter()
        .map(|&t| {
            let aff = (t as f64 / cfg.d as f64).sqrt();
            OverlayPoint {
                x: aff,
                rho: reference_rho_of_aff(aff).ok(),
            }
        })
        .collect();
    let by_sigma: Vec<OverlayPoint> = cfg
        .sigma
        .iter()
        .map(|&s| OverlayPoint {
            x: s,
            rho: reference_rho_of_sigma(s).ok(),
        })
        .collect();
    json!({
        "rho_of_aff": { "formula": "(0.37/(1-aff))^2", "points": by_aff },
        "rho_of_sigma": { "formula": "(s(1+0.7s)/(2.3-0.2s-0.5s^2))^2", "points": by_sigma },
    })
}

/// TP/FP counts as a function of the residual threshold `tau`.
pub fn run_dd_sweep(cfg: &DdConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let counts: Vec<usize> = cfg.dims.iter().map(|&d| points_for_density(cfg.rho, d)).collect();
    let mut plans = Vec::new();
    for (group, &sigma) in cfg.sigma.iter().enumerate() {
        let data = DataSpec {
            kind: ArrangementKind::CommonCore,
            m: cfg.m,
            dims: cfg.dims.clone(),
            t: cfg.t_core,
            counts: counts.clone(),
            sigma,
        };
        for &tau in &cfg.tau {
            for &method in &cfg.methods {
                plans.push(CellPlan {
                    coords: Coords {
                        variant: method.to_string(),
                        rho: Some(cfg.rho),
                        sigma: Some(sigma),
                        tau: Some(tau),
                        ..Coords::default()
                    },
                    group: group as u64,
                    params: TrialPlan {
                        data: data.clone(),
                        pursuit: PursuitConfig::dd(method, tau),
                        tp_bound: Some(TpBoundCheck { tau, c_s: cfg.c_s }),
                        cluster: false,
                    },
                });
            }
        }
    }
    let ranges: Vec<Value> = cfg
        .sigma
        .iter()
        .map(|&s| {
            let d_max = cfg.dims.iter().copied().max().unwrap_or(0);
            let r = tau_admissible_range(d_max, cfg.m, s).expect("m validated");
            json!({ "sigma": s, "tau_upper": r.upper, "tau_upper_conservative": r.conservative_upper })
        })
        .collect();
    run_plans("dd-sweep", &plans, cfg.trials, cfg.seed, opts, json!({ "tau_ranges": ranges }))
}

fn di_plans(
    data: &DataSpec,
    group: u64,
    t: usize,
    rho: f64,
    u_values: &[usize],
    variants: &[DiVariant],
    plans: &mut Vec<CellPlan<TrialPlan>>,
) {
    for &u in u_values {
        for &variant in variants {
            plans.push(CellPlan {
                coords: Coords {
                    variant: variant.as_str().to_string(),
                    t: Some(t),
                    rho: Some(rho),
                    sigma: Some(data.sigma),
                    u: Some(u),
                    ..Coords::default()
                },
                group,
                params: TrialPlan {
                    data: data.clone(),
                    pursuit: variant.pursuit(u),
                    tp_bound: None,
                    cluster: true,
                },
            });
        }
    }
}

/// Sensitivity to the sparsity budget `u` for the three DI variants.
pub fn run_di_sweep(cfg: &DiConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let n = points_for_density(cfg.rho, cfg.d);
    let data = DataSpec {
        kind: cfg.arrangement,
        m: cfg.m,
        dims: vec![cfg.d; cfg.subspaces],
        t: cfg.t,
        counts: vec![n; cfg.subspaces],
        sigma: cfg.sigma,
    };
    let mut plans = Vec::new();
    di_plans(&data, 0, cfg.t, cfg.rho, &cfg.u, &cfg.variants, &mut plans);
    run_plans("di-sweep", &plans, cfg.trials, cfg.seed, opts, Value::Null)
}

/// The DI sweep on noiseless data for each `(t, rho)` pair.
pub fn run_noiseless_sweep(cfg: &NoiselessConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let u_values = cfg.u_values();
    let mut plans = Vec::new();
    for (group, &(t, rho)) in cfg.pairs.iter().enumerate() {
        let n = points_for_density(rho, cfg.d);
        let data = DataSpec {
            kind: cfg.arrangement,
            m: cfg.m,
            dims: vec![cfg.d; cfg.subspaces],
            t,
            counts: vec![n; cfg.subspaces],
            sigma: 0.0,
        };
        di_plans(&data, group as u64, t, rho, &u_values, &cfg.variants, &mut plans);
    }
    run_plans("noiseless", &plans, cfg.trials, cfg.seed, opts, Value::Null)
}

/// Result of clustering an external data set.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub output: SscOutput,
    /// Present when ground-truth labels were supplied.
    pub report: Option<MetricsReport>,
    pub points: usize,
    pub ambient_dim: usize,
    pub wall_seconds: f64,
}

/// Reads the configured CSV files and clusters the points.
pub fn cluster_external(cfg: &ClusterConfig) -> Result<ClusterOutcome> {
    cfg.validate()?;
    let path = cfg.data.as_ref().expect("validated");
    let y = read_points_csv(path)?;
    let truth = cfg.labels.as_ref().map(|p| read_labels_csv(p)).transpose()?;
    cluster_points(&y, truth.as_deref(), cfg)
}

/// Clusters in-memory points (columns of `y`) as configured.
pub fn cluster_points(
    y: &crate::numerics::DenseMatrix,
    truth: Option<&[usize]>,
    cfg: &ClusterConfig,
) -> Result<ClusterOutcome> {
    let start = Instant::now();
    let n = y.ncols();
    if n < 2 {
        return Err(SscError::InvalidShape(format!("need at least 2 points, got {n}")));
    }
    if let Some(t) = truth {
        if t.len() != n {
            return Err(SscError::DimensionMismatch(format!(
                "{} labels for {n} points",
                t.len()
            )));
        }
    }
    let ssc = SscConfig {
        pursuit: cfg.pursuit(),
        clusters: cfg.clusters,
        max_clusters: cfg.max_clusters,
        spectral: SpectralConfig::with_rng(RngStream::from_seed(cfg.seed)),
        normalize: cfg.normalize,
    };
    let output = run_ssc(y, &ssc)?;
    let report = match truth {
        Some(t) => {
            let (dense, l) = dense_labels(t);
            // subspace dimensions are unknown for external data
            let dims = vec![0; l];
            let mut r = MetricsReport::compute(
                &output.results,
                &output.coefficients,
                &output.graph,
                &output.labels,
                &dense,
                &dims,
                y.nrows(),
            )?;
            r.ce = clustering_error(&output.labels, t)?;
            Some(r)
        }
        None => None,
    };
    Ok(ClusterOutcome {
        output,
        report,
        points: n,
        ambient_dim: y.nrows(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Relabels arbitrary integer labels to `0..count` in ascending label order.
fn dense_labels(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let dense = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("present"))
        .collect();
    (dense, distinct.len())
}
