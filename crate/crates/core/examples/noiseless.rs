use greedy_ssc::harness::config::NoiselessConfig;
use greedy_ssc::harness::experiments::run_noiseless_sweep;
use greedy_ssc::harness::sweep::RunOptions;

fn main() -> greedy_ssc::Result<()> {
    let cfg = NoiselessConfig {
        pairs: vec![(5, 3.0), (10, 6.0)],
        u: Some(vec![5, 15, 30]),
        trials: 3,
        ..NoiselessConfig::default()
    };
    let out = run_noiseless_sweep(&cfg, &RunOptions::default())?;
    for cell in &out.result.cells {
        let c = &cell.coords;
        println!(
            "t={:<3} rho={:<4} {:>9} u={:<3} NFC {:.2}  CE {:.3}",
            c.t.unwrap(),
            c.rho.unwrap(),
            c.variant,
            c.u.unwrap(),
            cell.mean("nfc").unwrap_or(f64::NAN),
            cell.mean("ce").unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
