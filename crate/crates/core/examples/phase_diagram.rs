//! Clustering error over intersection dimension and noise level, at a reduced
//! grid. Pass a trial count as the first argument (default 3).

use greedy_ssc::harness::config::PhaseConfig;
use greedy_ssc::harness::experiments::run_phase_diagram;
use greedy_ssc::harness::sweep::RunOptions;
use greedy_ssc::pursuit::Method;

fn main() -> greedy_ssc::Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let cfg = PhaseConfig {
        methods: vec![Method::Omp],
        trials,
        ..PhaseConfig::default()
    };
    let out = run_phase_diagram(&cfg, &RunOptions::default())?;

    print!("{:>8}", "t \\ sigma");
    for s in &cfg.sigma {
        print!("{s:>8}");
    }
    println!();
    for &t in &cfg.t {
        print!("{t:>8}");
        for &s in &cfg.sigma {
            let cell = out
                .result
                .find(|c| c.t == Some(t) && c.sigma == Some(s))
                .expect("cell in grid");
            print!("{:>8.3}", cell.mean("ce").unwrap_or(f64::NAN));
        }
        println!();
    }
    println!("curve fits: {}", out.extras["curve_fit"]);
    Ok(())
}
