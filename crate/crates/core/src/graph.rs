//! Affinity graph built from self-representation coefficients.

use crate::error::{Result, SscError};
use crate::numerics::{sym_eigs_smallest, DenseMatrix};
use crate::pursuit::PursuitResult;

/// Sparse `N x N` coefficient matrix; column `j` holds the coefficients of point `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    n: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl CoefficientMatrix {
    /// Assembles `B` from one pursuit result per point (in point order).
    pub fn from_results(results: &[PursuitResult]) -> Result<Self> {
        let n = results.len();
        let mut columns = Vec::with_capacity(n);
        for (j, r) in results.iter().enumerate() {
            if r.len != n {
                return Err(SscError::LengthMismatch {
                    expected: n,
                    actual: r.len,
                });
            }
            columns.push(r.coefficients.clone());
            if r.index != j {
                return Err(SscError::InvalidIndex { index: r.index, len: n });
            }
        }
        Self::from_columns(n, columns)
    }

    pub fn from_columns(n: usize, mut columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if columns.len() != n {
            return Err(SscError::NonSquare {
                rows: n,
                cols: columns.len(),
            });
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.retain(|&(_, v)| v != 0.0);
            col.sort_by_key(|&(i, _)| i);
            if let Some(&(i, _)) = col.iter().find(|&&(i, _)| i >= n) {
                return Err(SscError::InvalidIndex { index: i, len: n });
            }
            if col.iter().any(|&(i, _)| i == j) {
                return Err(SscError::NonzeroDiagonal(j));
            }
        }
        Ok(Self { n, columns })
    }

    pub fn from_dense(b: &DenseMatrix) -> Result<Self> {
        let (rows, cols) = b.shape();
        if rows != cols {
            return Err(SscError::NonSquare { rows, cols });
        }
        let columns = (0..cols)
            .map(|j| {
                (0..rows)
                    .filter(|&i| b[(i, j)] != 0.0)
                    .map(|i| (i, b[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_columns(rows, columns)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut b = DenseMatrix::zeros(self.n, self.n);
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                b[(i, j)] = v;
            }
        }
        b
    }
}

/// Symmetric, nonnegative adjacency `A = |B| + |B|^T` with zero diagonal.
///
/// Rows are stored sparsely; an edge exists exactly when its weight is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    rows: Vec<Vec<(usize, f64)>>,
}

/// `A[i][k] = |B[i][k]| + |B[k][i]|`.
pub fn build_adjacency(b: &CoefficientMatrix) -> AffinityGraph {
    let n = b.len();
    // abs_b[i] holds row i of |B|
    let mut abs_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..n {
        for &(i, v) in b.column(j) {
            abs_rows[i].push((j, v.abs()));
        }
    }
    let abs_cols: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|j| b.column(j).iter().map(|&(i, v)| (i, v.abs())).collect())
        .collect();
    let rows = (0..n)
        .map(|i| merge_sum(&abs_rows[i], &abs_cols[i]))
        .collect();
    AffinityGraph { rows }
}

// Both inputs sorted by index; `x + y` and `y + x` round identically, so the
// result is exactly symmetric.
fn merge_sum(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut p, mut q) = (0, 0);
    while p < a.len() || q < b.len() {
        match (a.get(p), b.get(q)) {
            (Some(&(i, x)), Some(&(k, y))) if i == k => {
                out.push((i, x + y));
                p += 1;
                q += 1;
            }
            (Some(&(i, x)), Some(&(k, _))) if i < k => {
                out.push((i, x));
                p += 1;
            }
            (Some(_), Some(&(k, y))) => {
                out.push((k, y));
                q += 1;
            }
            (Some(&(i, x)), None) => {
                out.push((i, x));
                p += 1;
            }
            (None, Some(&(k, y))) => {
                out.push((k, y));
                q += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

impl AffinityGraph {
    /// Builds a graph from a dense symmetric nonnegative matrix with zero diagonal.
    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows != cols {
            return Err(SscError::NonSquare { rows, cols });
        }
        for i in 0..rows {
            if a[(i, i)] != 0.0 {
                return Err(SscError::NonzeroDiagonal(i));
            }
            for k in 0..rows {
                if a[(i, k)] != a[(k, i)] {
                    return Err(SscError::NotSymmetric((a[(i, k)] - a[(k, i)]).abs()));
                }
                if a[(i, k)] < 0.0 || !a[(i, k)].is_finite() {
                    return Err(SscError::DomainError(format!(
                        "edge weight {} at ({i}, {k})",
                        a[(i, k)]
                    )));
                }
            }
        }
        let rows = (0..rows)
            .map(|i| {
                (0..cols)
                    .filter(|&k| a[(i, k)] != 0.0)
                    .map(|k| (k, a[(i, k)]))
                    .collect()
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Nonzero entries of row `i`, sorted by column.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn weight(&self, i: usize, k: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&k, |&(c, _)| c)
            .map(|p| self.rows[i][p].1)
            .unwrap_or(0.0)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.len();
        let mut a = DenseMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, w) in row {
                a[(i, k)] = w;
            }
        }
        a
    }

    /// Same graph with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(k, w)| (k, w * factor)).collect())
                .collect(),
        }
    }

    /// Symmetric normalized Laplacian `D^{-1/2} (D - A) D^{-1/2}`.
    ///
    /// A zero-degree node gets a zero row and column (its `D^{-1/2}` entry is
    /// taken as 0), so every connected component, isolated nodes included,
    /// contributes exactly one zero eigenvalue.
    pub fn normalized_laplacian(&self) -> DenseMatrix {
        let n = self.len();
        let inv_sqrt: Vec<f64> = self
            .degrees()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        let mut lap = DenseMatrix::zeros(n, n);
        for i in 0..n {
            if inv_sqrt[i] > 0.0 {
                lap[(i, i)] = 1.0;
            }
            for &(k, w) in &self.rows[i] {
                lap[(i, k)] = -w * inv_sqrt[i] * inv_sqrt[k];
            }
        }
        // entry (i,k) and (k,i) are products of the same three factors in a
        // different order; force exact symmetry for the eigensolver
        for i in 0..n {
            for k in (i + 1)..n {
                let v = lap[(i, k)];
                lap[(k, i)] = v;
            }
        }
        lap
    }
}

/// Component label for each node; labels are numbered in order of first appearance.
pub fn connected_components(g: &AffinityGraph) -> Vec<usize> {
    let n = g.len();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for &(k, _) in g.neighbors(i) {
                if labels[k] == usize::MAX {
                    labels[k] = next;
                    stack.push(k);
                }
            }
        }
        next += 1;
    }
    labels
}

pub fn component_count(g: &AffinityGraph) -> usize {
    connected_components(g).into_iter().max().map_or(0, |m| m + 1)
}

/// An edge joining points with different ground-truth labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub i: usize,
    pub k: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NfcReport {
    pub holds: bool,
    /// Each offending edge once, with `i < k`.
    pub violations: Vec<Violation>,
}

/// Checks the no-false-connections property against ground truth.
pub fn check_nfc(g: &AffinityGraph, truth: &[usize]) -> Result<NfcReport> {
    if truth.len() != g.len() {
        return Err(SscError::LengthMismatch {
            expected: g.len(),
            actual: truth.len(),
        });
    }
    let mut violations = Vec::new();
    for i in 0..g.len() {
        for &(k, w) in g.neighbors(i) {
            if i < k && truth[i] != truth[k] {
                violations.push(Violation { i, k, weight: w });
            }
        }
    }
    Ok(NfcReport {
        holds: violations.is_empty(),
        violations,
    })
}

/// Default upper limit of the eigengap search.
pub fn default_max_clusters(n: usize) -> usize {
    n.min(20)
}

/// Estimates the number of clusters as the position of the largest gap in the
/// ascending normalized-Laplacian spectrum.
///
/// Searches `k` in `[1, max_clusters]` (clamped to `N`); for `k = N` the gap is
/// taken against 2, the upper end of the spectrum. Ties go to the smallest `k`.
pub fn estimate_num_clusters_eigengap(g: &AffinityGraph, max_clusters: usize) -> Result<usize> {
    let n = g.len();
    if max_clusters == 0 {
        return Err(SscError::InvalidConfig("eigengap search needs L_max >= 1".into()));
    }
    if n == 0 {
        return Err(SscError::InvalidShape("empty graph".into()));
    }
    let l_max = max_clusters.min(n);
    let wanted = (l_max + 1).min(n);
    let (values, _) = sym_eigs_smallest(&g.normalized_laplacian(), wanted)?;
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..=l_max {
        let next = if k < n { values[k] } else { 2.0 };
        let gap = next - values[k - 1];
        if gap > best.1 {
            best = (k, gap);
        }
    }
    Ok(best.0)
}
