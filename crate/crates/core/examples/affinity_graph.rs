//! From supports to graph: components, NFC and the Laplacian spectrum.

use greedy_ssc::graph::{component_count, connected_components};
use greedy_ssc::numerics::sym_eigs_smallest;
use greedy_ssc::prelude::*;

fn main() -> Result<()> {
    let stream = RngStream::from_seed(5);
    let arr = sample_arrangement_shared_intersection(40, 3, 4, 0, &mut stream.rng())?;
    let data = generate_points(
        &arr,
        &SyntheticConfig { counts: vec![12; 3], sigma: 0.0, rng: stream.substream(1) },
    )?;
    let truth = data.truth.unwrap();

    let results: Vec<PursuitResult> = represent_all(&data.y, &PursuitConfig::di(Method::Omp, 3))
        .into_iter()
        .collect::<Result<_>>()?;
    let graph = build_adjacency(&CoefficientMatrix::from_results(&results)?);
    let nfc = check_nfc(&graph, &truth)?;
    println!("{} edges, NFC {}, {} components", graph.edge_count(), nfc.holds, component_count(&graph));
    println!("component labels: {:?}", connected_components(&graph));

    let (vals, _) = sym_eigs_smallest(&graph.normalized_laplacian(), 6)?;
    println!("smallest Laplacian eigenvalues: {:.4?}", vals.as_slice());
    println!("eigengap estimate: {}", estimate_num_clusters_eigengap(&graph, 10)?);

    let labels = normalized_spectral_clustering(&graph, 3, &SpectralConfig::default())?;
    println!("CE {}", clustering_error(&labels, &truth)?);
    Ok(())
}
