//! Clustering error, true/false positive counts and coefficient l1 masses.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};
use crate::graph::{check_nfc, AffinityGraph, CoefficientMatrix};
use crate::pursuit::PursuitResult;

/// Largest label count for which all matchings are enumerated.
const EXHAUSTIVE_LIMIT: usize = 8;

/// Fraction of points misassigned under the best one-to-one label matching.
pub fn clustering_error(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(SscError::LengthMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let (p, lp) = compress(pred);
    let (t, lt) = compress(truth);
    let k = lp.max(lt);
    let mut table = vec![vec![0i64; k]; k];
    for (&a, &b) in p.iter().zip(&t) {
        table[a][b] += 1;
    }
    let matched = if k <= EXHAUSTIVE_LIMIT {
        best_matching_exhaustive(&table)
    } else {
        best_matching_hungarian(&table)
    };
    Ok(1.0 - matched as f64 / pred.len() as f64)
}

/// Maps arbitrary labels onto `0..count`, in order of first appearance.
fn compress(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen: Vec<usize> = Vec::new();
    let out = labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(i) => i,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect();
    (out, seen.len())
}

/// Max total weight of a perfect matching in a square table, by enumeration.
pub(crate) fn best_matching_exhaustive(table: &[Vec<i64>]) -> i64 {
    fn go(table: &[Vec<i64>], row: usize, used: &mut [bool]) -> i64 {
        if row == table.len() {
            return 0;
        }
        let mut best = i64::MIN;
        for c in 0..table.len() {
            if !used[c] {
                used[c] = true;
                best = best.max(table[row][c] + go(table, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    let mut used = vec![false; table.len()];
    go(table, 0, &mut used)
}

/// Max total weight of a perfect matching via the Hungarian algorithm.
pub(crate) fn best_matching_hungarian(table: &[Vec<i64>]) -> i64 {
    let n = table.len();
    if n == 0 {
        return 0;
    }
    let top = table.iter().flatten().copied().max().unwrap_or(0);
    // minimise top - weight, 1-based arrays with a virtual column 0
    let cost = |i: usize, j: usize| top - table[i - 1][j - 1];
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| table[owner[j] - 1][j - 1]).sum()
}

/// Per-subspace true/false positive statistics of the coefficient supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceCounts {
    pub label: usize,
    pub points: usize,
    pub dim: usize,
    /// Average number of same-subspace support entries per point.
    pub tp_count: f64,
    /// Average number of other-subspace support entries per point.
    pub fp_count: f64,
    /// `tp_count / d`.
    pub tpr_dim: f64,
    /// `fp_count / (m - d)`.
    pub fpr_dim: f64,
    /// `tp_count / n`.
    pub tpr_size: f64,
    /// `fp_count / (N - n)`.
    pub fpr_size: f64,
}

/// TP/FP counts per subspace. `dims[l]` is the dimension of subspace `l`;
/// labels in `truth` must lie in `0..dims.len()`.
pub fn tp_fp_counts(
    results: &[PursuitResult],
    truth: &[usize],
    dims: &[usize],
    m: usize,
) -> Result<Vec<SubspaceCounts>> {
    let supports: Vec<&[usize]> = results.iter().map(|r| r.support.as_slice()).collect();
    tp_fp_from_supports(&supports, truth, dims, m)
}

/// Same as [`tp_fp_counts`] on raw support index lists.
pub fn tp_fp_from_supports(
    supports: &[&[usize]],
    truth: &[usize],
    dims: &[usize],
    m: usize,
) -> Result<Vec<SubspaceCounts>> {
    let n = truth.len();
    if supports.len() != n {
        return Err(SscError::LengthMismatch {
            expected: n,
            actual: supports.len(),
        });
    }
    let l = dims.len();
    if let Some(&bad) = truth.iter().find(|&&t| t >= l) {
        return Err(SscError::InvalidIndex { index: bad, len: l });
    }
    let mut sizes = vec![0usize; l];
    let mut tp = vec![0usize; l];
    let mut fp = vec![0usize; l];
    for (j, support) in supports.iter().enumerate() {
        let own = truth[j];
        sizes[own] += 1;
        for &i in support.iter() {
            if i >= n {
                return Err(SscError::InvalidIndex { index: i, len: n });
            }
            if i == j {
                continue;
            }
            if truth[i] == own {
                tp[own] += 1;
            } else {
                fp[own] += 1;
            }
        }
    }
    Ok((0..l)
        .map(|k| {
            let count = sizes[k];
            let avg = |total: usize| if count == 0 { 0.0 } else { total as f64 / count as f64 };
            let ratio = |x: f64, denom: usize| if denom == 0 { 0.0 } else { x / denom as f64 };
            let tp_count = avg(tp[k]);
            let fp_count = avg(fp[k]);
            SubspaceCounts {
                label: k,
                points: count,
                dim: dims[k],
                tp_count,
                fp_count,
                tpr_dim: ratio(tp_count, dims[k]),
                fpr_dim: ratio(fp_count, m.saturating_sub(dims[k])),
                tpr_size: ratio(tp_count, count),
                fpr_size: ratio(fp_count, n - count),
            }
        })
        .collect())
}

/// `(tp_l1, fp_l1)`: coefficient mass on same-/other-subspace points,
/// averaged over all points.
pub fn l1_norms(b: &CoefficientMatrix, truth: &[usize]) -> Result<(f64, f64)> {
    if b.len() != truth.len() {
        return Err(SscError::LengthMismatch {
            expected: truth.len(),
            actual: b.len(),
        });
    }
    let n = truth.len();
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let (mut tp, mut fp) = (0.0, 0.0);
    for j in 0..n {
        for &(i, v) in b.column(j) {
            if i == j {
                continue;
            }
            if truth[i] == truth[j] {
                tp += v.abs();
            } else {
                fp += v.abs();
            }
        }
    }
    Ok((tp / n as f64, fp / n as f64))
}

/// Everything measured for one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ce: f64,
    pub nfc: bool,
    pub subspaces: Vec<SubspaceCounts>,
    pub tp_l1: f64,
    pub fp_l1: f64,
}

impl MetricsReport {
    /// Computes all metrics for one run against the ground truth.
    pub fn compute(
        results: &[PursuitResult],
        b: &CoefficientMatrix,
        graph: &AffinityGraph,
        labels: &[usize],
        truth: &[usize],
        dims: &[usize],
        m: usize,
    ) -> Result<Self> {
        let ce = clustering_error(labels, truth)?;
        let nfc = check_nfc(graph, truth)?.holds;
        let subspaces = tp_fp_counts(results, truth, dims, m)?;
        let (tp_l1, fp_l1) = l1_norms(b, truth)?;
        Ok(Self {
            ce,
            nfc,
            subspaces,
            tp_l1,
            fp_l1,
        })
    }
}
