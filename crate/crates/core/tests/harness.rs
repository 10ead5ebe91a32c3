use std::path::Path;
use std::process::Command;

use greedy_ssc::datamodel::{
    generate_points, sample_arrangement_shared_intersection, write_labels_csv, write_points_csv,
    SyntheticConfig,
};
use greedy_ssc::harness::config::{
    parse_config, ArrangementKind, ClusterConfig, DdConfig, DiConfig, DiVariant, NoiselessConfig,
    PhaseConfig,
};
use greedy_ssc::harness::experiments::{
    cluster_points, run_dd_sweep, run_di_sweep, run_noiseless_sweep, run_phase_diagram,
};
use greedy_ssc::harness::output::{grid_csv, raw_consistency_error, GRID_HEADER};
use greedy_ssc::harness::sweep::RunOptions;
use greedy_ssc::numerics::RngStream;
use greedy_ssc::pursuit::Method;
use serde_json::Value;

fn ssc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ssc"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_PHASE: &str = "subspaces = 2\nd = 5\nm = 20\ns_max = 3\nt = [0, 2]\nrho = [2.0]\nsigma = [0.1]\ntrials = 2\n";

fn small_di() -> DiConfig {
    DiConfig {
        subspaces: 2,
        d: 5,
        m: 20,
        sigma: 0.2,
        rho: 3.0,
        arrangement: ArrangementKind::SharedIntersection,
        t: 1,
        u: vec![1, 3],
        trials: 3,
        ..DiConfig::default()
    }
}

fn raw_opts() -> RunOptions {
    RunOptions {
        threads: Some(2),
        dump_raw: true,
    }
}

#[test]
fn cli_phase_writes_grid_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "phase.toml", SMALL_PHASE);
    let out = dir.path().join("out");
    let status = ssc()
        .args(["phase", "--config"])
        .arg(&cfg)
        .args(["--seed", "5", "--trials", "1", "--threads", "2", "--dump-raw", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let grid = std::fs::read_to_string(out.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().next().unwrap(), GRID_HEADER.join(","));
    assert!(grid.lines().any(|l| l.contains(",ce,")));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "phase");
    assert_eq!(summary["config"]["seed"], 5);
    assert_eq!(summary["config"]["trials"], 1);
    assert_eq!(summary["cells"].as_array().unwrap().len(), 4);
    assert!(summary["versions"]["greedy_ssc"].is_string());
    assert!(summary["extras"]["curve_fit"].is_object());
    assert!(out.join("raw.jsonl").exists());
}

#[test]
fn cli_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad_key = write(dir.path(), "a.toml", "no_such_field = 1\n");
    let bad_value = write(dir.path(), "b.toml", "trials = 0\n");
    let bad_syntax = write(dir.path(), "c.toml", "t = [\n");
    for cfg in [&bad_key, &bad_value, &bad_syntax] {
        let status = ssc().args(["phase", "--config"]).arg(cfg).arg("--out").arg(&out).status().unwrap();
        assert_eq!(status.code(), Some(2), "{}", cfg.display());
    }
    let missing = ssc().args(["dd-sweep", "--config", "/nonexistent/x.toml"]).arg("--out").arg(&out).status().unwrap();
    assert_eq!(missing.code(), Some(2));
    let unknown_flag = ssc().args(["phase", "--bogus"]).status().unwrap();
    assert_eq!(unknown_flag.code(), Some(2));
    let zero_threads = ssc().args(["phase", "--threads", "0", "--trials", "1"]).arg("--out").arg(&out).status().unwrap();
    assert_eq!(zero_threads.code(), Some(2));
    let no_data = ssc().args(["cluster"]).arg("--out").arg(&out).status().unwrap();
    assert_eq!(no_data.code(), Some(2));
}

#[test]
fn cli_partial_failure_exits_3() {
    // at rho = 0.5 each subspace has 3 points, too few for 3 OMP iterations
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        "subspaces = 2\nd = 5\nm = 20\ns_max = 6\nt = [0]\nrho = [0.5, 4.0]\nsigma = [0.1]\ntrials = 1\n",
    );
    let out = dir.path().join("out");
    let status = ssc().args(["phase", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(3));
    let grid = std::fs::read_to_string(out.join("grid.csv")).unwrap();
    assert!(grid.lines().any(|l| l.contains(",error,") && l.ends_with(",failed")));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed_cells"], 1);
    let failed = summary["cells"].as_array().unwrap().iter().find(|c| c["status"] == "failed").unwrap();
    assert!(failed["failures"][0][1].as_str().unwrap().contains("s_max"));
}

#[test]
fn cli_cluster_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let arr = sample_arrangement_shared_intersection(30, 3, 4, 0, &mut RngStream::new(1, 0).rng()).unwrap();
    let data = generate_points(
        &arr,
        &SyntheticConfig {
            counts: vec![12, 12, 12],
            sigma: 0.05,
            rng: RngStream::new(1, 1),
        },
    )
    .unwrap();
    let truth = data.truth.clone().unwrap();
    let points = dir.path().join("points.csv");
    let labels = dir.path().join("labels.csv");
    write_points_csv(&points, &data.y).unwrap();
    write_labels_csv(&labels, &truth).unwrap();

    let cfg = ClusterConfig {
        s_max: Some(4),
        clusters: Some(3),
        ..ClusterConfig::default()
    };
    let in_memory = cluster_points(&data.y, Some(&truth), &cfg).unwrap();

    let out = dir.path().join("with-labels");
    let status = ssc()
        .args(["cluster", "--data"])
        .arg(&points)
        .arg("--labels")
        .arg(&labels)
        .args(["--clusters", "3", "--s-max", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let written = std::fs::read_to_string(out.join("labels.csv")).unwrap();
    let parsed: Vec<usize> = written.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(parsed, in_memory.output.labels);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["ce"], in_memory.report.as_ref().unwrap().ce);
    assert!(std::fs::read_to_string(out.join("grid.csv")).unwrap().contains(",ce,"));

    // no labels, no cluster count: eigengap estimate and unavailable metrics
    let out = dir.path().join("bare");
    let status = ssc().args(["cluster", "--data"]).arg(&points).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["ce"].as_str().unwrap().starts_with("unavailable"));
    assert!(summary["nfc"].as_str().unwrap().starts_with("unavailable"));
    assert!(summary["estimated_clusters"].as_u64().unwrap() >= 1);
    assert_eq!(summary["estimated_clusters"], summary["clusters"]);

    // malformed row: parse error with exit code 2
    let bad = write(dir.path(), "bad.csv", "1,2,3\n4,5,oops\n");
    let output = ssc().args(["cluster", "--data"]).arg(&bad).arg("--out").arg(dir.path().join("x")).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 2"));
}

#[test]
fn raw_dump_recomputes_aggregates() {
    let phase: PhaseConfig = parse_config(SMALL_PHASE).unwrap();
    let out = run_phase_diagram(&phase, &raw_opts()).unwrap();
    assert_eq!(out.raw.len(), 4 * 2);
    assert!(raw_consistency_error(&out.result, &out.raw).unwrap() <= 1e-12);

    let out = run_di_sweep(&small_di(), &raw_opts()).unwrap();
    assert!(raw_consistency_error(&out.result, &out.raw).unwrap() <= 1e-12);

    let dd = DdConfig {
        m: 40,
        dims: vec![4, 6],
        t_core: 1,
        tau: vec![0.3, 0.6],
        trials: 2,
        ..DdConfig::default()
    };
    let out = run_dd_sweep(&dd, &raw_opts()).unwrap();
    assert!(raw_consistency_error(&out.result, &out.raw).unwrap() <= 1e-12);
}

#[test]
fn cli_raw_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "phase.toml", SMALL_PHASE);
    let out = dir.path().join("out");
    let status = ssc().args(["phase", "--dump-raw", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let raw = greedy_ssc::harness::output::read_raw(&out.join("raw.jsonl")).unwrap();
    let phase: PhaseConfig = parse_config(SMALL_PHASE).unwrap();
    let again = run_phase_diagram(&phase, &RunOptions::default()).unwrap();
    assert!(raw_consistency_error(&again.result, &raw).unwrap() <= 1e-12);
}

#[test]
fn variants_coincide_at_u_one() {
    let cfg = DiConfig {
        u: vec![1],
        ..small_di()
    };
    let out = run_di_sweep(&cfg, &raw_opts()).unwrap();
    let variants: Vec<&str> = out.result.cells.iter().map(|c| c.coords.variant.as_str()).collect();
    assert_eq!(variants, ["omp-smax", "mp-smax", "mp-pmax"]);
    for trial in 0..cfg.trials {
        let of = |cell: usize| out.raw.iter().find(|r| r.cell == cell && r.trial == trial).unwrap();
        let base = of(0);
        for cell in [1, 2] {
            let other = of(cell);
            assert_eq!(other.supports, base.supports);
            for (a, b) in other.coefficients.iter().zip(&base.coefficients) {
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(b) {
                    assert_eq!(x.0, y.0);
                    assert!((x.1 - y.1).abs() <= 1e-12);
                }
            }
        }
    }
    for metric in ["tp_l1", "fp_l1", "nfc", "support_size"] {
        let v: Vec<f64> = out.result.cells.iter().map(|c| c.mean(metric).unwrap()).collect();
        assert!((v[0] - v[1]).abs() <= 1e-12 && (v[0] - v[2]).abs() <= 1e-12, "{metric}: {v:?}");
    }
}

#[test]
fn zero_budget_gives_empty_graph() {
    let cfg = DiConfig {
        u: vec![0],
        ..small_di()
    };
    let out = run_di_sweep(&cfg, &RunOptions::default()).unwrap();
    for cell in &out.result.cells {
        assert_eq!(cell.mean("support_size"), Some(0.0));
        assert_eq!(cell.mean("nfc"), Some(1.0));
        assert_eq!(cell.mean("tp_l1"), Some(0.0));
        // the Laplacian is zero, so labels carry no information
        let ce = cell.mean("ce").unwrap();
        assert!((0.3..=0.5).contains(&ce), "{ce}");
    }
}

#[test]
fn noiseless_orthogonal_subspaces_have_no_false_connections() {
    let cfg = NoiselessConfig {
        subspaces: 3,
        d: 4,
        m: 20,
        pairs: vec![(0, 3.0)],
        u: Some(vec![1, 2, 4]),
        trials: 3,
        ..NoiselessConfig::default()
    };
    let out = run_noiseless_sweep(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(out.result.cells.len(), 9);
    for cell in &out.result.cells {
        assert_eq!(cell.status(), "ok");
        assert_eq!(cell.mean("nfc"), Some(1.0), "{:?}", cell.coords);
        if cell.coords.u.unwrap() >= 2 {
            assert_eq!(cell.mean("ce"), Some(0.0), "{:?}", cell.coords);
        }
    }

    // the (t, rho) = (5, 3) configuration runs to completion
    let appendix = NoiselessConfig {
        pairs: vec![(5, 3.0)],
        u: Some(vec![1, 15, 30]),
        trials: 1,
        ..NoiselessConfig::default()
    };
    let out = run_noiseless_sweep(&appendix, &RunOptions::default()).unwrap();
    assert!(out.result.cells.iter().all(|c| c.status() == "ok" && !c.metrics.is_empty()));
}

#[test]
fn dd_exact_threshold_on_noiseless_data() {
    let dd = DdConfig {
        m: 30,
        dims: vec![4, 6],
        t_core: 0,
        sigma: vec![0.0],
        tau: vec![0.0],
        trials: 3,
        ..DdConfig::default()
    };
    let out = run_dd_sweep(&dd, &raw_opts()).unwrap();
    let omp_cell = out.result.cells.iter().position(|c| c.coords.variant == "omp").unwrap();
    for r in out.raw.iter().filter(|r| r.cell == omp_cell) {
        for (j, support) in r.supports.iter().enumerate() {
            assert!(support.len() <= r.dims[r.truth[j]]);
        }
    }
    let omp = out.result.find(|c| c.variant == "omp").unwrap();
    assert_eq!(omp.mean("nfc"), Some(1.0));
    assert!(omp.mean("iterations").unwrap() <= 6.0);
    assert_eq!(omp.mean("stop_iter_cap"), Some(0.0));
}

#[test]
fn large_threshold_means_no_iterations() {
    let dd = DdConfig {
        m: 30,
        dims: vec![4, 6],
        t_core: 1,
        tau: vec![10.0],
        trials: 2,
        ..DdConfig::default()
    };
    let out = run_dd_sweep(&dd, &RunOptions::default()).unwrap();
    for cell in &out.result.cells {
        assert_eq!(cell.mean("iterations"), Some(0.0));
        for l in 0..2 {
            assert_eq!(cell.metric("tp_count", Some(l)).unwrap().mean, 0.0);
            assert_eq!(cell.metric("fp_count", Some(l)).unwrap().mean, 0.0);
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let phase: PhaseConfig = parse_config(SMALL_PHASE).unwrap();
    let a = grid_csv(&run_phase_diagram(&phase, &RunOptions::default()).unwrap().result).unwrap();
    let b = grid_csv(&run_phase_diagram(&phase, &RunOptions { threads: Some(3), dump_raw: false }).unwrap().result).unwrap();
    assert_eq!(a, b);
    let other_seed = PhaseConfig { seed: 1, ..phase };
    let c = grid_csv(&run_phase_diagram(&other_seed, &RunOptions::default()).unwrap().result).unwrap();
    assert_ne!(a, c);
}

#[test]
fn variant_pursuit_settings() {
    let omp = DiVariant::OmpSmax.pursuit(7);
    assert_eq!((omp.method, omp.s_max, omp.p_max), (Method::Omp, Some(7), None));
    let mp = DiVariant::MpSmax.pursuit(7);
    assert_eq!((mp.method, mp.s_max), (Method::Mp, Some(7)));
    let sparse = DiVariant::MpPmax.pursuit(7);
    assert_eq!((sparse.method, sparse.s_max, sparse.p_max), (Method::Mp, None, Some(7)));
}
