//! Normalized spectral clustering (symmetric Laplacian, row-normalized embedding).

use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};
use crate::graph::AffinityGraph;
use crate::numerics::{kmeans, sym_eigs_smallest, DenseMatrix, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub restarts: usize,
    pub eig_tol: f64,
    pub rng: RngStream,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            eig_tol: 1e-8,
            rng: RngStream::from_seed(0),
        }
    }
}

impl SpectralConfig {
    pub fn with_rng(rng: RngStream) -> Self {
        Self {
            rng,
            ..Self::default()
        }
    }
}

/// Partitions the nodes of `g` into `clusters` groups.
///
/// Embeds node `i` as row `i` of the eigenvectors belonging to the `clusters`
/// smallest eigenvalues of the normalized Laplacian, scales each row to unit
/// length and runs k-means on the rows. Rows that are exactly zero are left
/// out of k-means and join the nearest centroid afterwards.
pub fn normalized_spectral_clustering(
    g: &AffinityGraph,
    clusters: usize,
    cfg: &SpectralConfig,
) -> Result<Vec<usize>> {
    let n = g.len();
    if clusters == 0 || clusters > n {
        return Err(SscError::InvalidL { l: clusters, n });
    }
    if cfg.restarts == 0 {
        return Err(SscError::InvalidConfig("spectral clustering needs restarts >= 1".into()));
    }
    if clusters == 1 {
        return Ok(vec![0; n]);
    }

    let (_, vectors) = sym_eigs_smallest(&g.normalized_laplacian(), clusters)?;
    let mut embedding = vectors;
    let mut nonzero = Vec::with_capacity(n);
    for i in 0..n {
        let norm = embedding.row(i).norm();
        if norm > 0.0 {
            embedding.row_mut(i).unscale_mut(norm);
            nonzero.push(i);
        }
    }

    if nonzero.len() < clusters {
        // too few informative rows; cluster everything
        return Ok(kmeans(&embedding, clusters, cfg.restarts, &cfg.rng)?.labels);
    }

    let active = DenseMatrix::from_fn(nonzero.len(), clusters, |r, c| embedding[(nonzero[r], c)]);
    let fit = kmeans(&active, clusters, cfg.restarts, &cfg.rng)?;
    let mut labels = vec![usize::MAX; n];
    for (r, &i) in nonzero.iter().enumerate() {
        labels[i] = fit.labels[r];
    }
    for (i, label) in labels.iter_mut().enumerate() {
        if *label == usize::MAX {
            let row = embedding.row(i);
            let mut best = (0, f64::INFINITY);
            for c in 0..clusters {
                let d = (fit.centroids.row(c) - row).norm_squared();
                if d < best.1 {
                    best = (c, d);
                }
            }
            *label = best.0;
        }
    }
    Ok(labels)
}
