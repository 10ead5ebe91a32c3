//! Residual-threshold stopping: true and false positive rates per subspace
//! as tau grows, with the TP lower bound alongside.

use greedy_ssc::harness::config::DdConfig;
use greedy_ssc::harness::experiments::run_dd_sweep;
use greedy_ssc::harness::sweep::RunOptions;
use greedy_ssc::pursuit::Method;

fn main() -> greedy_ssc::Result<()> {
    let cfg = DdConfig {
        dims: vec![20, 40],
        methods: vec![Method::Omp],
        trials: 2,
        ..DdConfig::default()
    };
    let out = run_dd_sweep(&cfg, &RunOptions::default())?;
    println!("admissible tau: {}", out.extras["tau_ranges"]);
    println!("{:>6} {:>4} {:>9} {:>9} {:>9} {:>6}", "tau", "d", "TP/d", "FPR_dim", "bound", "met");
    for cell in &out.result.cells {
        for (l, d) in cfg.dims.iter().enumerate() {
            let get = |m: &str| cell.metric(m, Some(l)).map_or(f64::NAN, |s| s.mean);
            println!(
                "{:>6} {d:>4} {:>9.3} {:>9.4} {:>9} {:>6.2}",
                cell.coords.tau.unwrap(),
                get("tpr_dim"),
                get("fpr_dim"),
                get("tp_bound"),
                get("tp_bound_rate"),
            );
        }
    }
    Ok(())
}
