//! Sparse subspace clustering with greedy self-representation.
//!
//! Each data point is written as a sparse combination of the other points by
//! orthogonal matching pursuit (SSC-OMP) or matching pursuit (SSC-MP). The
//! supports define an affinity graph which is split by normalized spectral
//! clustering. The crate also ships the union-of-subspaces data model used to
//! benchmark these methods, the associated metrics and theoretical bounds, and
//! a Monte-Carlo experiment harness.
//!
//! ```
//! use greedy_ssc::prelude::*;
//!
//! let stream = RngStream::from_seed(7);
//! let arr = sample_arrangement_shared_intersection(30, 2, 3, 0, &mut stream.rng()).unwrap();
//! let data = generate_points(
//!     &arr,
//!     &SyntheticConfig { counts: vec![12, 12], sigma: 0.0, rng: stream.substream(1) },
//! )
//! .unwrap();
//! let out = run_ssc(&data.y, &SscConfig::new(PursuitConfig::di(Method::Omp, 3), Some(2))).unwrap();
//! assert_eq!(clustering_error(&out.labels, data.truth.as_ref().unwrap()).unwrap(), 0.0);
//! ```

pub mod datamodel;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod pipeline;
pub mod pursuit;
pub mod spectral;
pub mod theory;

pub use error::{Result, SscError};

pub mod prelude {
    pub use crate::datamodel::{
        affinity, generate_points, normalize_columns, principal_angles,
        sample_arrangement_common_core, sample_arrangement_random,
        sample_arrangement_shared_intersection, DataSet, SubspaceArrangement, SyntheticConfig,
    };
    pub use crate::error::{Result, SscError};
    pub use crate::graph::{
        build_adjacency, check_nfc, estimate_num_clusters_eigengap, AffinityGraph,
        CoefficientMatrix,
    };
    pub use crate::metrics::{clustering_error, l1_norms, tp_fp_counts, MetricsReport};
    pub use crate::numerics::{DenseMatrix, DenseVector, RngStream};
    pub use crate::pipeline::{run_ssc, SscConfig, SscOutput};
    pub use crate::pursuit::{
        represent, represent_all, Method, PursuitConfig, PursuitResult, StopReason,
    };
    pub use crate::spectral::{normalized_spectral_clustering, SpectralConfig};
}
