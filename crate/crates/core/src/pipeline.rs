//! End-to-end SSC-OMP / SSC-MP: normalize, self-represent, build the graph,
//! cluster spectrally.

use crate::datamodel::normalize_columns;
use crate::error::Result;
use crate::graph::{
    build_adjacency, default_max_clusters, estimate_num_clusters_eigengap, AffinityGraph,
    CoefficientMatrix,
};
use crate::numerics::DenseMatrix;
use crate::pursuit::{represent_all, PursuitConfig, PursuitResult};
use crate::spectral::{normalized_spectral_clustering, SpectralConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SscConfig {
    pub pursuit: PursuitConfig,
    /// Number of clusters; estimated with the eigengap heuristic when `None`.
    pub clusters: Option<usize>,
    /// Upper end of the eigengap search (defaults to `min(N, 20)`).
    pub max_clusters: Option<usize>,
    pub spectral: SpectralConfig,
    /// Scale columns to unit norm before representing them.
    pub normalize: bool,
}

impl SscConfig {
    pub fn new(pursuit: PursuitConfig, clusters: Option<usize>) -> Self {
        Self {
            pursuit,
            clusters,
            max_clusters: None,
            spectral: SpectralConfig::default(),
            normalize: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SscOutput {
    pub labels: Vec<usize>,
    pub clusters: usize,
    /// Set when the cluster count came from the eigengap heuristic.
    pub estimated_clusters: Option<usize>,
    pub results: Vec<PursuitResult>,
    pub coefficients: CoefficientMatrix,
    pub graph: AffinityGraph,
    pub zero_columns: Vec<usize>,
}

/// Clusters the columns of `y`.
pub fn run_ssc(y: &DenseMatrix, cfg: &SscConfig) -> Result<SscOutput> {
    let (data, zero_columns) = if cfg.normalize {
        let out = normalize_columns(y);
        (out.y, out.zero_columns)
    } else {
        (y.clone(), Vec::new())
    };
    cfg.pursuit.validate(data.nrows(), data.ncols())?;
    let results = represent_all(&data, &cfg.pursuit)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let coefficients = CoefficientMatrix::from_results(&results)?;
    let graph = build_adjacency(&coefficients);
    let (clusters, estimated_clusters) = match cfg.clusters {
        Some(l) => (l, None),
        None => {
            let l_max = cfg
                .max_clusters
                .unwrap_or_else(|| default_max_clusters(graph.len()));
            let l = estimate_num_clusters_eigengap(&graph, l_max)?;
            (l, Some(l))
        }
    };
    let labels = normalized_spectral_clustering(&graph, clusters, &cfg.spectral)?;
    Ok(SscOutput {
        labels,
        clusters,
        estimated_clusters,
        results,
        coefficients,
        graph,
        zero_columns,
    })
}
