//! SSC-OMP and SSC-MP on the same noisy union of subspaces.

use std::time::Instant;

use greedy_ssc::prelude::*;

fn main() -> Result<()> {
    let stream = RngStream::from_seed(1);
    // three 10-dimensional subspaces in R^60 sharing 4 directions
    let arr = sample_arrangement_shared_intersection(60, 3, 10, 4, &mut stream.rng())?;
    let data = generate_points(
        &arr,
        &SyntheticConfig { counts: vec![40; 3], sigma: 0.3, rng: stream.substream(1) },
    )?;
    let truth = data.truth.as_ref().unwrap();
    println!("max affinity {:.3}, N = {}", arr.max_affinity()?, data.len());

    for method in [Method::Omp, Method::Mp] {
        let start = Instant::now();
        let out = run_ssc(&data.y, &SscConfig::new(PursuitConfig::di(method, 10), Some(3)))?;
        let report = MetricsReport::compute(
            &out.results,
            &out.coefficients,
            &out.graph,
            &out.labels,
            truth,
            &arr.dims(),
            data.ambient_dim(),
        )?;
        println!(
            "{method:>3}: CE {:.3}  NFC {}  TP-l1 {:.3}  FP-l1 {:.3}  ({:.1?})",
            report.ce,
            report.nfc,
            report.tp_l1,
            report.fp_l1,
            start.elapsed()
        );
    }
    Ok(())
}
