//! How the fixed iteration budget u affects OMP and the two MP variants.

use greedy_ssc::harness::config::DiConfig;
use greedy_ssc::harness::experiments::run_di_sweep;
use greedy_ssc::harness::sweep::RunOptions;

fn main() -> greedy_ssc::Result<()> {
    let cfg = DiConfig {
        u: vec![1, 5, 10, 20, 30],
        trials: 3,
        ..DiConfig::default()
    };
    let out = run_di_sweep(&cfg, &RunOptions::default())?;
    println!("{:>9} {:>3} {:>7} {:>7} {:>7}", "variant", "u", "TP-l1", "FP-l1", "CE");
    for cell in &out.result.cells {
        let m = |name| cell.mean(name).unwrap_or(f64::NAN);
        println!(
            "{:>9} {:>3} {:>7.3} {:>7.3} {:>7.3}",
            cell.coords.variant,
            cell.coords.u.unwrap(),
            m("tp_l1"),
            m("fp_l1"),
            m("ce")
        );
    }
    Ok(())
}
