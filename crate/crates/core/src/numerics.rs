//! Dense linear-algebra and randomness kernels.
//!
//! Everything here is a pure function of its inputs. Randomized routines take
//! either an [`RngStream`] (a `(seed, stream-id)` pair that always reproduces the
//! same draw sequence) or a generator created from one.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};

/// Column-major dense matrix of doubles. Data points are stored as columns.
pub type DenseMatrix = DMatrix<f64>;
pub type DenseVector = DVector<f64>;

/// Relative threshold on `sigma_min / sigma_max` below which a system is rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Absolute tolerance used when checking symmetry of an input matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;

const KMEANS_MAX_ITER: usize = 300;

/// Builds a matrix from row-major entries, rejecting non-finite values.
pub fn matrix_from_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<DenseMatrix> {
    if entries.len() != rows * cols {
        return Err(SscError::InvalidShape(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let m = DenseMatrix::from_row_slice(rows, cols, entries);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn ensure_finite(m: &DenseMatrix) -> Result<()> {
    match m.iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(SscError::DomainError(format!(
            "non-finite entry at row {}, column {}",
            pos % m.nrows(),
            pos / m.nrows()
        ))),
        None => Ok(()),
    }
}

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Streams are counter based (ChaCha8 with an explicit stream id), so a stream can
/// be handed to any worker thread and produces the same draws regardless of
/// scheduling. Child streams are derived with [`RngStream::substream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    /// Independent child stream for item `index` (a trial, a data point, a restart).
    pub fn substream(&self, index: u64) -> Self {
        let mixed = splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)));
        Self {
            seed: self.seed,
            stream: mixed,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Least-squares solution of `A x = b` for a full-column-rank `A`.
pub fn least_squares(a: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    let (m, k) = a.shape();
    if b.len() != m {
        return Err(SscError::LengthMismatch {
            expected: m,
            actual: b.len(),
        });
    }
    if k > m {
        return Err(SscError::InvalidShape(format!(
            "least squares needs k <= m, got {m}x{k}"
        )));
    }
    if k == 0 {
        return Ok(DenseVector::zeros(0));
    }
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(SscError::ConvergenceFailure("svd"))?;
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };
    if ratio < RANK_TOL {
        return Err(SscError::RankDeficient { ratio });
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut proj = u.tr_mul(b);
    for (p, s) in proj.iter_mut().zip(svd.singular_values.iter()) {
        *p /= s;
    }
    Ok(v_t.tr_mul(&proj))
}

/// Draws a standard-normal matrix.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed `m x k` matrix with orthonormal columns.
///
/// QR of a Gaussian matrix with the diagonal of `R` made positive.
pub fn random_orthonormal<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Result<DenseMatrix> {
    if k > m {
        return Err(SscError::InvalidShape(format!(
            "cannot draw {k} orthonormal columns in dimension {m}"
        )));
    }
    if k == 0 {
        return Ok(DenseMatrix::zeros(m, 0));
    }
    let g = gaussian_matrix(m, k, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..k {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    Ok(q)
}

/// Uniform draw from the unit sphere in `R^d`.
pub fn uniform_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DenseVector> {
    if d == 0 {
        return Err(SscError::InvalidShape("sphere dimension must be >= 1".into()));
    }
    loop {
        let v = DenseVector::from_fn(d, |_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 0.0 {
            return Ok(v / n);
        }
    }
}

/// The `k` smallest eigenpairs of a symmetric matrix, eigenvalues ascending.
///
/// Equal eigenvalues keep the solver's order, so the output is deterministic.
pub fn sym_eigs_smallest(s: &DenseMatrix, k: usize) -> Result<(DenseVector, DenseMatrix)> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(SscError::InvalidShape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            s.ncols()
        )));
    }
    if k == 0 || k > n {
        return Err(SscError::InvalidShape(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let asym = max_asymmetry(s);
    if asym > SYMMETRY_TOL {
        return Err(SscError::NotSymmetric(asym));
    }
    let eig = s
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(SscError::ConvergenceFailure("symmetric eigendecomposition"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DenseVector::from_iterator(k, order[..k].iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DenseMatrix::zeros(n, k);
    for (c, &i) in order[..k].iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

pub fn max_asymmetry(s: &DenseMatrix) -> f64 {
    let n = s.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    worst
}

/// Singular values in descending order; `min(rows, cols)` of them.
pub fn singular_values(a: &DenseMatrix) -> Result<DenseVector> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(DenseVector::zeros(0));
    }
    let svd = a
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(SscError::ConvergenceFailure("svd"))?;
    let mut values: Vec<f64> = svd.singular_values.iter().map(|v| v.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(DenseVector::from_vec(values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// `clusters x dims`, one centroid per row.
    pub centroids: DenseMatrix,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
}

/// Lloyd's k-means with k-means++ seeding; rows of `points` are the observations.
///
/// Restart `r` draws from `stream.substream(r)`. The restart with the lowest
/// within-cluster sum of squares wins (earliest restart on ties).
pub fn kmeans(
    points: &DenseMatrix,
    clusters: usize,
    restarts: usize,
    stream: &RngStream,
) -> Result<KMeansResult> {
    let n = points.nrows();
    if clusters == 0 || clusters > n {
        return Err(SscError::InvalidL { l: clusters, n });
    }
    if restarts == 0 {
        return Err(SscError::InvalidConfig("kmeans needs at least one restart".into()));
    }
    let dims = points.ncols();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| points.row(i).iter().copied().collect())
        .collect();

    let mut best: Option<(Vec<usize>, Vec<Vec<f64>>, f64)> = None;
    for r in 0..restarts {
        let mut rng = stream.substream(r as u64).rng();
        let (labels, centroids) = lloyd(&rows, clusters, &mut rng);
        let wcss = within_cluster_ss(&rows, &labels, &centroids);
        if best.as_ref().is_none_or(|(_, _, w)| wcss < *w) {
            best = Some((labels, centroids, wcss));
        }
    }
    let (labels, centroids, wcss) = best.expect("at least one restart");
    let centroids = DenseMatrix::from_fn(clusters, dims, |i, j| centroids[i][j]);
    Ok(KMeansResult {
        labels,
        centroids,
        wcss,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn within_cluster_ss(rows: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    rows.iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, &centroids[l]))
        .sum()
}

fn seed_plus_plus<R: Rng + ?Sized>(rows: &[Vec<f64>], clusters: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut dist: Vec<f64> = rows.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < clusters {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in dist.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // rounding can walk past the end; fall back to the farthest point
            if dist[chosen] == 0.0 {
                chosen = argmax(&dist);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = rows[pick].clone();
        for (d, p) in dist.iter_mut().zip(rows) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn lloyd<R: Rng + ?Sized>(
    rows: &[Vec<f64>],
    clusters: usize,
    rng: &mut R,
) -> (Vec<usize>, Vec<Vec<f64>>) {
    let dims = rows[0].len();
    let mut centroids = seed_plus_plus(rows, clusters, rng);
    let mut labels: Vec<usize> = rows.iter().map(|p| nearest(p, &centroids).0).collect();

    for _ in 0..KMEANS_MAX_ITER {
        // update step
        let mut sums = vec![vec![0.0; dims]; clusters];
        let mut counts = vec![0usize; clusters];
        for (p, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..clusters {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centroids[c] = std::mem::take(&mut sums[c]);
            }
        }
        // an empty cluster takes over the point farthest from its own centroid
        for c in 0..clusters {
            if counts[c] == 0 {
                let dist: Vec<f64> = rows
                    .iter()
                    .zip(&labels)
                    .map(|(p, &l)| if counts[l] > 1 { sq_dist(p, &centroids[l]) } else { -1.0 })
                    .collect();
                let far = argmax(&dist);
                counts[labels[far]] -= 1;
                labels[far] = c;
                counts[c] = 1;
                centroids[c] = rows[far].clone();
            }
        }

        let next: Vec<usize> = rows.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    // centroids consistent with the final assignment
    let mut sums = vec![vec![0.0; dims]; clusters];
    let mut counts = vec![0usize; clusters];
    for (p, &l) in rows.iter().zip(&labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    for c in 0..clusters {
        if counts[c] > 0 {
            centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
    (labels, centroids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn least_squares_identity() {
        let a = DenseMatrix::identity(3, 3);
        let b = DenseVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = least_squares(&a, &b).unwrap();
        for i in 0..3 {
            assert!(close(x[i], b[i], 1e-14));
        }
    }

    #[test]
    fn least_squares_scalar_column() {
        let a = DenseMatrix::from_column_slice(2, 1, &[2.0, 0.0]);
        let b = DenseVector::from_vec(vec![4.0, 0.0]);
        let x = least_squares(&a, &b).unwrap();
        assert!(close(x[0], 2.0, 1e-14));
    }

    #[test]
    fn least_squares_normal_equations() {
        // A^T A = [[1,1],[1,2]], A^T b = (1,2)  =>  x = (0,1)
        let a = matrix_from_rows(3, 2, &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let b = DenseVector::from_vec(vec![1.0, 1.0, 1.0]);
        let x = least_squares(&a, &b).unwrap();
        assert!(close(x[0], 0.0, 1e-12));
        assert!(close(x[1], 1.0, 1e-12));
    }

    #[test]
    fn least_squares_rank_deficient() {
        let a = matrix_from_rows(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        let b = DenseVector::from_vec(vec![1.0, 1.0, 1.0]);
        assert!(matches!(
            least_squares(&a, &b),
            Err(SscError::RankDeficient { .. })
        ));
    }

    #[test]
    fn matrix_from_rows_rejects_nan() {
        assert!(matrix_from_rows(1, 2, &[1.0, f64::NAN]).is_err());
        assert!(matrix_from_rows(1, 2, &[1.0]).is_err());
    }

    #[test]
    fn orthonormal_square_has_unit_determinant() {
        let mut rng = RngStream::new(3, 1).rng();
        let q = random_orthonormal(3, 3, &mut rng).unwrap();
        assert!(close(q.determinant().abs(), 1.0, 1e-10));
    }

    #[test]
    fn orthonormal_columns_gram() {
        let mut rng = RngStream::new(5, 0).rng();
        let u = random_orthonormal(5, 2, &mut rng).unwrap();
        let g = u.tr_mul(&u);
        assert!((g - DenseMatrix::identity(2, 2)).amax() < 1e-10);
    }

    #[test]
    fn orthonormal_streams_are_deterministic() {
        let a = random_orthonormal(6, 3, &mut RngStream::new(11, 1).rng()).unwrap();
        let b = random_orthonormal(6, 3, &mut RngStream::new(11, 2).rng()).unwrap();
        let c = random_orthonormal(6, 3, &mut RngStream::new(11, 1).rng()).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn orthonormal_rejects_wide() {
        assert!(random_orthonormal(2, 3, &mut RngStream::new(0, 0).rng()).is_err());
    }

    #[test]
    fn sphere_zero_sphere() {
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..20 {
            let v = uniform_sphere(1, &mut rng).unwrap();
            assert!(v[0] == 1.0 || v[0] == -1.0);
        }
        assert!(uniform_sphere(0, &mut rng).is_err());
    }

    #[test]
    fn sphere_reproducible_unit_norm() {
        let a = uniform_sphere(3, &mut RngStream::new(9, 4).rng()).unwrap();
        let b = uniform_sphere(3, &mut RngStream::new(9, 4).rng()).unwrap();
        assert_eq!(a, b);
        assert!(close(a.norm(), 1.0, 1e-12));
    }

    #[test]
    fn sphere_is_centered() {
        let mut rng = RngStream::new(21, 0).rng();
        let mut mean = DenseVector::zeros(4);
        let draws = 10_000;
        for _ in 0..draws {
            mean += uniform_sphere(4, &mut rng).unwrap();
        }
        mean /= draws as f64;
        assert!(mean.amax() < 0.05, "mean {mean}");
    }

    #[test]
    fn eigs_of_diagonal() {
        let s = DenseMatrix::from_diagonal(&DenseVector::from_vec(vec![3.0, 1.0, 2.0]));
        let (vals, vecs) = sym_eigs_smallest(&s, 2).unwrap();
        assert!(close(vals[0], 1.0, 1e-14) && close(vals[1], 2.0, 1e-14));
        assert!(close(vecs[(1, 0)].abs(), 1.0, 1e-14));
        let (vals, _) = sym_eigs_smallest(&DenseMatrix::identity(4, 4), 1).unwrap();
        assert!(close(vals[0], 1.0, 1e-14));
    }

    #[test]
    fn eigs_reject_asymmetric() {
        let s = matrix_from_rows(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(sym_eigs_smallest(&s, 1), Err(SscError::NotSymmetric(_))));
        assert!(sym_eigs_smallest(&DenseMatrix::identity(2, 2), 3).is_err());
    }

    #[test]
    fn singular_values_basic() {
        let a = DenseMatrix::from_diagonal(&DenseVector::from_vec(vec![1.0, 2.0]));
        let s = singular_values(&a).unwrap();
        assert!(close(s[0], 2.0, 1e-14) && close(s[1], 1.0, 1e-14));

        let mut rng = RngStream::new(2, 0).rng();
        let u = random_orthonormal(7, 3, &mut rng).unwrap();
        let s = singular_values(&u).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|v| close(*v, 1.0, 1e-10)));

        let v = random_orthonormal(4, 2, &mut rng).unwrap();
        let w = random_orthonormal(4, 2, &mut rng).unwrap();
        let s = singular_values(&v.tr_mul(&w)).unwrap();
        assert!(s.iter().all(|x| *x >= 0.0 && *x <= 1.0 + 1e-12));
        assert!(s[0] >= s[1]);
    }

    #[test]
    fn kmeans_two_clouds() {
        let mut rng = RngStream::new(4, 0).rng();
        let mut entries = Vec::new();
        for i in 0..20 {
            let c = if i < 10 { 0.0 } else { 10.0 };
            entries.push(c + 0.01 * rng.random::<f64>());
            entries.push(c + 0.01 * rng.random::<f64>());
        }
        let pts = matrix_from_rows(20, 2, &entries).unwrap();
        let res = kmeans(&pts, 2, 10, &RngStream::new(1, 0)).unwrap();
        assert!(res.labels[..10].iter().all(|&l| l == res.labels[0]));
        assert!(res.labels[10..].iter().all(|&l| l == res.labels[10]));
        assert_ne!(res.labels[0], res.labels[10]);
    }

    #[test]
    fn kmeans_single_cluster() {
        let pts = matrix_from_rows(3, 1, &[1.0, 2.0, 5.0]).unwrap();
        let res = kmeans(&pts, 1, 3, &RngStream::new(0, 0)).unwrap();
        assert_eq!(res.labels, vec![0, 0, 0]);
        assert!(close(res.wcss, 8.0 + 2.0 / 3.0, 1e-12));
    }

    #[test]
    fn kmeans_handles_duplicates_and_bad_l() {
        let pts = matrix_from_rows(4, 1, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let res = kmeans(&pts, 3, 2, &RngStream::new(0, 0)).unwrap();
        assert!(res.labels.iter().all(|&l| l < 3));
        assert!(kmeans(&pts, 5, 1, &RngStream::new(0, 0)).is_err());
        assert!(kmeans(&pts, 0, 1, &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn substreams_differ() {
        let root = RngStream::from_seed(7);
        assert_ne!(root.substream(0), root.substream(1));
        assert_ne!(root.substream(0).substream(1), root.substream(1).substream(0));
        assert_eq!(root.substream(5), root.substream(5));
    }
}
