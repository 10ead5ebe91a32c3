//! Clusters points stored as headerless CSV (one point per row). Without a
//! path argument a small synthetic file is written and used instead. The
//! number of clusters comes from the eigengap.

use std::path::PathBuf;

use greedy_ssc::datamodel::{read_points_csv, write_points_csv};
use greedy_ssc::prelude::*;

fn main() -> Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let stream = RngStream::from_seed(3);
            let arr = sample_arrangement_random(30, &[3, 4, 5], &mut stream.rng())?;
            let data = generate_points(
                &arr,
                &SyntheticConfig { counts: vec![20, 25, 30], sigma: 0.05, rng: stream.substream(1) },
            )?;
            let p = std::env::temp_dir().join("greedy_ssc_points.csv");
            // the file stores points as rows
            write_points_csv(&p, &data.y)?;
            p
        }
    };
    let y = read_points_csv(&path)?;
    println!("{}: {} points in R^{}", path.display(), y.ncols(), y.nrows());

    let out = run_ssc(&y, &SscConfig::new(PursuitConfig::di(Method::Omp, 5), None))?;
    println!("eigengap estimate: {} clusters", out.clusters);
    let mut sizes = vec![0; out.clusters];
    for &l in &out.labels {
        sizes[l] += 1;
    }
    println!("cluster sizes: {sizes:?}");
    Ok(())
}
