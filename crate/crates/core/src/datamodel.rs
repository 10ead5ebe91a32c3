//! Union-of-subspaces data: subspace arrangements, point generation, affinities
//! and CSV ingestion.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SscError};
use crate::numerics::{
    gaussian_matrix, random_orthonormal, singular_values, uniform_sphere, DenseMatrix,
    DenseVector, RngStream,
};

/// Tolerance on `||U^T U - I||_max` for inputs that must be orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Orthonormal bases `U_l` (each `m x d_l`) of the subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceArrangement {
    pub m: usize,
    pub bases: Vec<DenseMatrix>,
}

impl SubspaceArrangement {
    pub fn new(bases: Vec<DenseMatrix>) -> Result<Self> {
        let m = bases.first().map_or(0, DenseMatrix::nrows);
        for (l, u) in bases.iter().enumerate() {
            if u.nrows() != m {
                return Err(SscError::InvalidShape(format!(
                    "basis {l} has {} rows, expected {m}",
                    u.nrows()
                )));
            }
            ensure_orthonormal(u)?;
        }
        Ok(Self { m, bases })
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(DenseMatrix::ncols).collect()
    }

    /// Largest affinity over all pairs of distinct subspaces (0 for fewer than two).
    pub fn max_affinity(&self) -> Result<f64> {
        let mut best = 0.0f64;
        for k in 0..self.len() {
            for l in (k + 1)..self.len() {
                best = best.max(affinity(&self.bases[k], &self.bases[l])?);
            }
        }
        Ok(best)
    }
}

fn ensure_orthonormal(u: &DenseMatrix) -> Result<()> {
    let k = u.ncols();
    let err = (u.tr_mul(u) - DenseMatrix::identity(k, k)).amax();
    if err > ORTHONORMAL_TOL {
        return Err(SscError::NotOrthonormal(err));
    }
    Ok(())
}

/// Independent uniformly random subspaces of the given dimensions.
pub fn sample_arrangement_random<R: Rng + ?Sized>(
    m: usize,
    dims: &[usize],
    rng: &mut R,
) -> Result<SubspaceArrangement> {
    let bases = dims
        .iter()
        .map(|&d| random_orthonormal(m, d, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubspaceArrangement { m, bases })
}

/// `L` subspaces of dimension `d` sharing a common `t`-dimensional intersection
/// and mutually orthogonal outside it; every pairwise affinity is `sqrt(t/d)`.
///
/// One Haar-random `m x (L(d-t)+t)` orthonormal matrix `U` is drawn; subspace
/// `l` takes the first `t` columns plus its own block of `d - t` columns.
pub fn sample_arrangement_shared_intersection<R: Rng + ?Sized>(
    m: usize,
    subspaces: usize,
    d: usize,
    t: usize,
    rng: &mut R,
) -> Result<SubspaceArrangement> {
    if t > d {
        return Err(SscError::InvalidShape(format!("intersection t = {t} exceeds d = {d}")));
    }
    let total = subspaces * (d - t) + t;
    if total > m {
        return Err(SscError::InvalidShape(format!(
            "L(d-t)+t = {total} exceeds ambient dimension {m}"
        )));
    }
    let u = random_orthonormal(m, total, rng)?;
    let bases = (0..subspaces)
        .map(|l| {
            let mut b = DenseMatrix::zeros(m, d);
            b.columns_mut(0, t).copy_from(&u.columns(0, t));
            b.columns_mut(t, d - t)
                .copy_from(&u.columns(t + l * (d - t), d - t));
            b
        })
        .collect();
    Ok(SubspaceArrangement { m, bases })
}

/// Subspaces `[U_core, U_l]` sharing a random `t_core`-dimensional core.
///
/// Each private part `U_l` is a uniformly random orthonormal `m x (d_l - t_core)`
/// matrix drawn inside the orthogonal complement of the core, so every basis is
/// orthonormal and all pairwise affinities are at least
/// `sqrt(t_core / min(d_k, d_l))`.
pub fn sample_arrangement_common_core<R: Rng + ?Sized>(
    m: usize,
    dims: &[usize],
    t_core: usize,
    rng: &mut R,
) -> Result<SubspaceArrangement> {
    if dims.iter().any(|&d| d < t_core || d > m) {
        return Err(SscError::InvalidShape(format!(
            "dims {dims:?} incompatible with core {t_core} in dimension {m}"
        )));
    }
    if dims.iter().any(|&d| d - t_core > m - t_core) {
        return Err(SscError::InvalidShape("private part does not fit".into()));
    }
    let core = random_orthonormal(m, t_core, rng)?;
    let mut bases = Vec::with_capacity(dims.len());
    for &d in dims {
        let extra = d - t_core;
        let mut g = gaussian_matrix(m, extra, rng);
        // project the Gaussian draw off the core, twice for numerical cleanliness
        for _ in 0..2 {
            let coeff = core.tr_mul(&g);
            g -= &core * coeff;
        }
        let private = orthonormalize(g);
        let mut b = DenseMatrix::zeros(m, d);
        b.columns_mut(0, t_core).copy_from(&core);
        b.columns_mut(t_core, extra).copy_from(&private);
        bases.push(b);
    }
    Ok(SubspaceArrangement { m, bases })
}

fn orthonormalize(g: DenseMatrix) -> DenseMatrix {
    let k = g.ncols();
    if k == 0 {
        return g;
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..k {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q
}

/// Points per subspace and noise level for [`generate_points`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub counts: Vec<usize>,
    /// Noise is `N(0, (sigma^2 / m) I_m)`.
    pub sigma: f64,
    pub rng: RngStream,
}

impl SyntheticConfig {
    /// Sampling density `(n_l - 1) / d_l` of each subspace.
    pub fn sampling_densities(&self, dims: &[usize]) -> Vec<f64> {
        self.counts
            .iter()
            .zip(dims)
            .map(|(&n, &d)| (n as f64 - 1.0) / d as f64)
            .collect()
    }
}

/// A data set: points as columns, optional ground truth and noiseless copy.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub y: DenseMatrix,
    pub truth: Option<Vec<usize>>,
    pub noiseless: Option<DenseMatrix>,
    pub arrangement: Option<SubspaceArrangement>,
}

impl DataSet {
    pub fn from_points(y: DenseMatrix) -> Self {
        Self {
            y,
            truth: None,
            noiseless: None,
            arrangement: None,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn len(&self) -> usize {
        self.y.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.y.ncols() == 0
    }
}

/// Draws `n_l` points `U_l a + z` per subspace, subspace-major.
///
/// `a` is uniform on the unit sphere of `R^{d_l}` and `z ~ N(0, (sigma^2/m) I)`.
/// Point `i` (global index) draws from `cfg.rng.substream(i)`.
pub fn generate_points(arr: &SubspaceArrangement, cfg: &SyntheticConfig) -> Result<DataSet> {
    if cfg.counts.len() != arr.len() {
        return Err(SscError::InvalidShape(format!(
            "{} counts for {} subspaces",
            cfg.counts.len(),
            arr.len()
        )));
    }
    if !(cfg.sigma >= 0.0 && cfg.sigma.is_finite()) {
        return Err(SscError::InvalidConfig(format!("sigma must be >= 0, got {}", cfg.sigma)));
    }
    if cfg.counts.contains(&0) {
        return Err(SscError::InvalidConfig("every subspace needs at least one point".into()));
    }
    let m = arr.m;
    let n: usize = cfg.counts.iter().sum();
    let noise = Normal::new(0.0, cfg.sigma / (m as f64).sqrt())
        .map_err(|e| SscError::InvalidConfig(e.to_string()))?;

    let mut x = DenseMatrix::zeros(m, n);
    let mut y = DenseMatrix::zeros(m, n);
    let mut truth = Vec::with_capacity(n);
    let mut col = 0;
    for (l, (&count, basis)) in cfg.counts.iter().zip(&arr.bases).enumerate() {
        for _ in 0..count {
            let mut rng = cfg.rng.substream(col as u64).rng();
            let a = uniform_sphere(basis.ncols(), &mut rng)?;
            let xi: DenseVector = basis * a;
            let mut yi = xi.clone();
            if cfg.sigma > 0.0 {
                for v in yi.iter_mut() {
                    *v += noise.sample(&mut rng);
                }
            }
            x.set_column(col, &xi);
            y.set_column(col, &yi);
            truth.push(l);
            col += 1;
        }
    }
    Ok(DataSet {
        y,
        truth: Some(truth),
        noiseless: Some(x),
        arrangement: Some(arr.clone()),
    })
}

/// Result of [`normalize_columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub y: DenseMatrix,
    /// Indices of all-zero columns, left unchanged.
    pub zero_columns: Vec<usize>,
}

/// Scales every nonzero column to unit Euclidean norm.
pub fn normalize_columns(y: &DenseMatrix) -> Normalized {
    let mut out = y.clone();
    let mut zero_columns = Vec::new();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let n = col.norm();
        if n > 0.0 {
            col.unscale_mut(n);
        } else {
            zero_columns.push(j);
        }
    }
    Normalized {
        y: out,
        zero_columns,
    }
}

/// `||U_k^T U_l||_F / sqrt(min(d_k, d_l))`, in `[0, 1]`.
pub fn affinity(u_k: &DenseMatrix, u_l: &DenseMatrix) -> Result<f64> {
    check_pair(u_k, u_l)?;
    let dmin = u_k.ncols().min(u_l.ncols());
    if dmin == 0 {
        return Ok(0.0);
    }
    let value = u_k.tr_mul(u_l).norm() / (dmin as f64).sqrt();
    Ok(value.min(1.0))
}

/// Principal angles between the two subspaces, ascending, in `[0, pi/2]`.
pub fn principal_angles(u_k: &DenseMatrix, u_l: &DenseMatrix) -> Result<Vec<f64>> {
    check_pair(u_k, u_l)?;
    let cosines = singular_values(&u_k.tr_mul(u_l))?;
    // descending cosines give ascending angles
    Ok(cosines.iter().map(|c| c.clamp(0.0, 1.0).acos()).collect())
}

fn check_pair(u_k: &DenseMatrix, u_l: &DenseMatrix) -> Result<()> {
    if u_k.nrows() != u_l.nrows() {
        return Err(SscError::DimensionMismatch(format!(
            "bases live in R^{} and R^{}",
            u_k.nrows(),
            u_l.nrows()
        )));
    }
    ensure_orthonormal(u_k)?;
    ensure_orthonormal(u_l)
}

/// Reads points from a headerless CSV file, one point per row.
pub fn read_points_csv(path: &Path) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_points_csv(&text)
}

pub fn parse_points_csv(text: &str) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| SscError::ParseError {
            line: e.position().map_or(line, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let values = record
            .iter()
            .map(|field| {
                let v: f64 = field.parse().map_err(|_| SscError::ParseError {
                    line,
                    message: format!("'{field}' is not a number"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(SscError::ParseError {
                        line,
                        message: format!("non-finite value '{field}'"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(SscError::DimensionMismatch(format!(
                    "line {line} has {} values, expected {}",
                    values.len(),
                    first.len()
                )));
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(SscError::ParseError {
            line: 0,
            message: "no data rows".into(),
        });
    }
    let m = rows[0].len();
    Ok(DenseMatrix::from_fn(m, rows.len(), |i, j| rows[j][i]))
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    parse_labels(&text)
}

pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<usize>().map_err(|_| SscError::ParseError {
                line: i + 1,
                message: format!("'{}' is not a nonnegative integer label", l.trim()),
            })
        })
        .collect()
}

/// Writes points (columns of `y`) one per row, full round-trip precision.
pub fn write_points_csv(path: &Path, y: &DenseMatrix) -> Result<()> {
    let mut out = String::new();
    for col in y.column_iter() {
        let row: Vec<String> = col.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
