//! Greedy self-representation of data points by OMP and MP.
//!
//! Each data point `y_j` (a column of `Y`) is represented in terms of all other
//! columns. OMP keeps the residual orthogonal to every selected column; MP only
//! to the column picked in the current iteration and may therefore pick the same
//! column again.
//!
//! Correlations `Y^T r` are maintained incrementally from Gram-matrix columns,
//! so an iteration costs `O(N * s)` for OMP and `O(N + m)` for MP instead of a
//! full `O(N * m)` matrix-vector product. The residual itself is always updated
//! explicitly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};
use crate::numerics::{DenseMatrix, DenseVector};

/// Relative tolerance under which two correlations count as tied.
pub const TIE_RTOL: f64 = 1e-12;
/// Columns whose component orthogonal to the current span is below this
/// (relative) size cannot extend an OMP basis.
const DEGENERATE_RTOL: f64 = 1e-12;
/// Largest point count for which `represent_all` precomputes the Gram matrix.
const GRAM_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Omp,
    Mp,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Omp => "omp",
            Method::Mp => "mp",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stopping and selection parameters for one pursuit run.
///
/// `None` for `s_max` / `p_max` means unbounded. A run always stops at the
/// first of: residual norm `<= tau`, `s_max` iterations, `p_max` distinct
/// selected points (MP only), the iteration cap, or all candidate inner
/// products `<= zero_tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PursuitConfig {
    pub method: Method,
    pub s_max: Option<usize>,
    pub p_max: Option<usize>,
    pub tau: f64,
    /// Weak-selection relaxation in `(0, 1]`; 1 is the exact greedy rule.
    pub alpha: f64,
    pub zero_tol: f64,
    /// Absolute iteration cap, `10 * min(m, N - 1)` when unset.
    pub iter_cap: Option<usize>,
}

impl Default for PursuitConfig {
    fn default() -> Self {
        Self {
            method: Method::Omp,
            s_max: None,
            p_max: None,
            tau: 0.0,
            alpha: 1.0,
            zero_tol: 1e-12,
            iter_cap: None,
        }
    }
}

impl PursuitConfig {
    /// Data-independent stopping after `s_max` iterations.
    pub fn di(method: Method, s_max: usize) -> Self {
        Self {
            method,
            s_max: Some(s_max),
            ..Self::default()
        }
    }

    /// MP stopped once `p_max` distinct points are in the representation.
    pub fn mp_sparsity(p_max: usize) -> Self {
        Self {
            method: Method::Mp,
            p_max: Some(p_max),
            ..Self::default()
        }
    }

    /// Data-dependent stopping on the residual norm.
    pub fn dd(method: Method, tau: f64) -> Self {
        Self {
            method,
            tau,
            ..Self::default()
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn effective_iter_cap(&self, m: usize, n: usize) -> usize {
        self.iter_cap
            .unwrap_or_else(|| 10 * m.min(n.saturating_sub(1)))
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(SscError::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(SscError::InvalidConfig(format!(
                "tau must be finite and >= 0, got {}",
                self.tau
            )));
        }
        if !(self.zero_tol >= 0.0 && self.zero_tol.is_finite()) {
            return Err(SscError::InvalidConfig(format!(
                "zero_tol must be finite and >= 0, got {}",
                self.zero_tol
            )));
        }
        if self.method == Method::Omp {
            if let Some(s) = self.s_max {
                let bound = m.min(n.saturating_sub(1));
                if s > bound {
                    return Err(SscError::InvalidConfig(format!(
                        "OMP s_max = {s} exceeds min(m, N - 1) = {bound}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    SparsityReached,
    ResidualBelowTau,
    ZeroInnerProducts,
    IterCap,
}

impl StopReason {
    pub const ALL: [StopReason; 5] = [
        StopReason::MaxIterations,
        StopReason::SparsityReached,
        StopReason::ResidualBelowTau,
        StopReason::ZeroInnerProducts,
        StopReason::IterCap,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxIterations => "max_iterations",
            StopReason::SparsityReached => "sparsity_reached",
            StopReason::ResidualBelowTau => "residual_below_tau",
            StopReason::ZeroInnerProducts => "zero_inner_products",
            StopReason::IterCap => "iter_cap",
        }
    }
}

/// Sparse representation of one data point.
#[derive(Debug, Clone, PartialEq)]
pub struct PursuitResult {
    /// Index `j` of the represented point.
    pub index: usize,
    /// Number of points `N`; the coefficient vector has this length.
    pub len: usize,
    /// Nonzero coefficients `(i, b_j[i])`, sorted by `i`. Never contains `j`.
    pub coefficients: Vec<(usize, f64)>,
    /// Index selected in each iteration (may repeat for MP).
    pub selection_order: Vec<usize>,
    /// Distinct selected indices, ascending.
    pub support: Vec<usize>,
    pub residual: DenseVector,
    pub residual_norm: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

impl PursuitResult {
    pub fn dense_coefficients(&self) -> DenseVector {
        let mut b = DenseVector::zeros(self.len);
        for &(i, v) in &self.coefficients {
            b[i] = v;
        }
        b
    }

    pub fn coefficient(&self, i: usize) -> f64 {
        self.coefficients
            .binary_search_by_key(&i, |&(k, _)| k)
            .map(|pos| self.coefficients[pos].1)
            .unwrap_or(0.0)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Data matrix plus cached column norms and (optionally) its Gram matrix.
///
/// Gram entries are computed with the same kernel whether cached or not, so a
/// representation is bit-identical either way.
pub struct Dictionary<'a> {
    y: &'a DenseMatrix,
    sq_norms: Vec<f64>,
    gram: Option<Vec<f64>>,
}

impl<'a> Dictionary<'a> {
    pub fn new(y: &'a DenseMatrix) -> Self {
        let sq_norms = (0..y.ncols())
            .map(|i| {
                let c = column(y, i);
                dot(c, c)
            })
            .collect();
        Self {
            y,
            sq_norms,
            gram: None,
        }
    }

    pub fn with_gram(y: &'a DenseMatrix) -> Self {
        let mut dict = Self::new(y);
        let n = y.ncols();
        let mut g = vec![0.0; n * n];
        for k in 0..n {
            let ck = column(y, k);
            for i in 0..=k {
                let v = dot(column(y, i), ck);
                g[k * n + i] = v;
                g[i * n + k] = v;
            }
        }
        dict.gram = Some(g);
        dict
    }

    pub fn dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn len(&self) -> usize {
        self.y.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.y.ncols() == 0
    }

    fn column(&self, i: usize) -> &[f64] {
        column(self.y, i)
    }

    /// `Y^T y_i`.
    fn gram_column(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        let n = self.len();
        match &self.gram {
            Some(g) => std::borrow::Cow::Borrowed(&g[i * n..(i + 1) * n]),
            None => {
                let ci = self.column(i);
                std::borrow::Cow::Owned((0..n).map(|k| dot(self.column(k), ci)).collect())
            }
        }
    }
}

fn column(y: &DenseMatrix, i: usize) -> &[f64] {
    let m = y.nrows();
    &y.as_slice()[i * m..(i + 1) * m]
}

/// Weak/exact greedy selection over candidates with `allowed[i] == true`.
///
/// Returns `None` when the largest score is `<= zero_tol` (including the empty
/// candidate set). Otherwise the lowest index whose score reaches the
/// acceptance threshold wins.
fn select(corr: &[f64], allowed: &[bool], alpha: f64, zero_tol: f64) -> Option<usize> {
    let mut max = 0.0f64;
    for (c, &ok) in corr.iter().zip(allowed) {
        if ok {
            max = max.max(c.abs());
        }
    }
    if max <= zero_tol {
        return None;
    }
    let threshold = if alpha >= 1.0 {
        max * (1.0 - TIE_RTOL)
    } else {
        alpha * max
    };
    corr.iter()
        .zip(allowed)
        .position(|(c, &ok)| ok && c.abs() >= threshold)
}

fn check_inputs(dict: &Dictionary<'_>, j: usize, cfg: &PursuitConfig) -> Result<()> {
    let n = dict.len();
    if n < 2 {
        return Err(SscError::InvalidShape(format!(
            "self-representation needs at least 2 points, got {n}"
        )));
    }
    if j >= n {
        return Err(SscError::InvalidIndex { index: j, len: n });
    }
    cfg.validate(dict.dim(), n)
}

/// Stops that do not depend on the next selection, checked before each iteration.
fn pre_stop(
    cfg: &PursuitConfig,
    residual_norm: f64,
    iterations: usize,
    distinct: usize,
    cap: usize,
) -> Option<StopReason> {
    // a zero target has nothing to correlate with
    if iterations == 0 && residual_norm == 0.0 {
        return Some(StopReason::ZeroInnerProducts);
    }
    if residual_norm <= cfg.tau {
        return Some(StopReason::ResidualBelowTau);
    }
    if cfg.s_max.is_some_and(|s| iterations >= s) {
        return Some(StopReason::MaxIterations);
    }
    if cfg.method == Method::Mp && cfg.p_max.is_some_and(|p| distinct >= p) {
        return Some(StopReason::SparsityReached);
    }
    if iterations >= cap {
        return Some(StopReason::IterCap);
    }
    None
}

/// Runs OMP or MP according to `cfg.method`.
pub fn represent(y: &DenseMatrix, j: usize, cfg: &PursuitConfig) -> Result<PursuitResult> {
    represent_with(&Dictionary::new(y), j, cfg)
}

pub fn represent_with(dict: &Dictionary<'_>, j: usize, cfg: &PursuitConfig) -> Result<PursuitResult> {
    match cfg.method {
        Method::Omp => omp_with(dict, j, cfg),
        Method::Mp => mp_with(dict, j, cfg),
    }
}

/// OMP representation of column `j` in terms of the other columns of `y`.
///
/// `cfg.method` is ignored. Final coefficients solve the least-squares problem
/// on the selected support.
pub fn omp_represent(y: &DenseMatrix, j: usize, cfg: &PursuitConfig) -> Result<PursuitResult> {
    omp_with(&Dictionary::new(y), j, cfg)
}

/// MP representation of column `j` in terms of the other columns of `y`.
pub fn mp_represent(y: &DenseMatrix, j: usize, cfg: &PursuitConfig) -> Result<PursuitResult> {
    mp_with(&Dictionary::new(y), j, cfg)
}

fn omp_with(dict: &Dictionary<'_>, j: usize, cfg: &PursuitConfig) -> Result<PursuitResult> {
    let cfg = PursuitConfig {
        method: Method::Omp,
        ..cfg.clone()
    };
    check_inputs(dict, j, &cfg)?;
    let n = dict.len();
    let m = dict.dim();
    let cap = cfg.effective_iter_cap(m, n);
    let target = dict.column(j);

    let mut residual = target.to_vec();
    let mut corr = dict.gram_column(j).into_owned();
    let mut allowed = vec![true; n];
    allowed[j] = false;

    // Y_sel = Q R, with Q stored column by column together with Y^T q_k.
    let mut q_basis: Vec<Vec<f64>> = Vec::new();
    let mut yt_q: Vec<Vec<f64>> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut selection: Vec<usize> = Vec::new();
    let mut residual_norm = norm(&residual);

    let stop_reason = loop {
        let s = selection.len();
        if let Some(reason) = pre_stop(&cfg, residual_norm, s, s, cap) {
            break reason;
        }
        let Some(pick) = select(&corr, &allowed, cfg.alpha, cfg.zero_tol) else {
            break StopReason::ZeroInnerProducts;
        };

        // Orthogonalize the new column against the basis (two Gram-Schmidt passes).
        let v = dict.column(pick);
        let mut w = v.to_vec();
        let mut h = vec![0.0; s];
        for _ in 0..2 {
            for (k, q) in q_basis.iter().enumerate() {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
                h[k] += c;
            }
        }
        let w_norm = norm(&w);
        if w_norm <= DEGENERATE_RTOL * norm(v) {
            break StopReason::ZeroInnerProducts;
        }
        for wi in w.iter_mut() {
            *wi /= w_norm;
        }

        let mut new_yt_q = dict.gram_column(pick).into_owned();
        for (k, col) in yt_q.iter().enumerate() {
            axpy(-h[k], col, &mut new_yt_q);
        }
        for c in new_yt_q.iter_mut() {
            *c /= w_norm;
        }

        let gamma = dot(&w, &residual);
        axpy(-gamma, &w, &mut residual);
        axpy(-gamma, &new_yt_q, &mut corr);
        residual_norm = norm(&residual);

        h.push(w_norm);
        r_cols.push(h);
        q_basis.push(w);
        yt_q.push(new_yt_q);
        allowed[pick] = false;
        selection.push(pick);
    };

    // Least-squares coefficients on the final support: R x = Q^T y_j.
    let s = selection.len();
    let rhs: Vec<f64> = q_basis.iter().map(|q| dot(q, target)).collect();
    let mut x = vec![0.0; s];
    for row in (0..s).rev() {
        let mut acc = rhs[row];
        for col in (row + 1)..s {
            acc -= r_cols[col][row] * x[col];
        }
        x[row] = acc / r_cols[row][row];
    }
    let mut coefficients: Vec<(usize, f64)> = selection
        .iter()
        .copied()
        .zip(x)
        .filter(|&(_, v)| v != 0.0)
        .collect();
    coefficients.sort_by_key(|&(i, _)| i);
    let mut support = selection.clone();
    support.sort_unstable();

    Ok(PursuitResult {
        index: j,
        len: n,
        coefficients,
        support,
        residual: DenseVector::from_vec(residual),
        residual_norm,
        iterations: s,
        selection_order: selection,
        stop_reason,
    })
}

fn mp_with(dict: &Dictionary<'_>, j: usize, cfg: &PursuitConfig) -> Result<PursuitResult> {
    let cfg = PursuitConfig {
        method: Method::Mp,
        ..cfg.clone()
    };
    check_inputs(dict, j, &cfg)?;
    let n = dict.len();
    let m = dict.dim();
    let cap = cfg.effective_iter_cap(m, n);

    let mut residual = dict.column(j).to_vec();
    let mut corr = dict.gram_column(j).into_owned();
    let mut allowed = vec![true; n];
    allowed[j] = false;

    let mut b = vec![0.0; n];
    let mut selected = vec![false; n];
    let mut distinct = 0usize;
    let mut selection: Vec<usize> = Vec::new();
    let mut residual_norm = norm(&residual);

    let stop_reason = loop {
        if let Some(reason) = pre_stop(&cfg, residual_norm, selection.len(), distinct, cap) {
            break reason;
        }
        let Some(pick) = select(&corr, &allowed, cfg.alpha, cfg.zero_tol) else {
            break StopReason::ZeroInnerProducts;
        };
        let col = dict.column(pick);
        let step = dot(col, &residual) / dict.sq_norms[pick];
        b[pick] += step;
        axpy(-step, col, &mut residual);
        axpy(-step, &dict.gram_column(pick), &mut corr);
        residual_norm = norm(&residual);
        if !selected[pick] {
            selected[pick] = true;
            distinct += 1;
        }
        selection.push(pick);
    };

    let coefficients: Vec<(usize, f64)> = b
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v != 0.0)
        .map(|(i, &v)| (i, v))
        .collect();
    let support: Vec<usize> = (0..n).filter(|&i| selected[i]).collect();

    Ok(PursuitResult {
        index: j,
        len: n,
        coefficients,
        support,
        residual: DenseVector::from_vec(residual),
        residual_norm,
        iterations: selection.len(),
        selection_order: selection,
        stop_reason,
    })
}

/// Represents every column of `y`; element `j` is the result for point `j`.
///
/// Points are processed in parallel on the current rayon pool. A failing point
/// yields an `Err` entry; the rest of the batch is unaffected.
pub fn represent_all(y: &DenseMatrix, cfg: &PursuitConfig) -> Vec<Result<PursuitResult>> {
    let n = y.ncols();
    if n < 2 {
        return vec![Err(SscError::InvalidShape(format!(
            "self-representation needs at least 2 points, got {n}"
        )))];
    }
    let dict = if n <= GRAM_LIMIT {
        Dictionary::with_gram(y)
    } else {
        Dictionary::new(y)
    };
    (0..n)
        .into_par_iter()
        .map(|j| represent_with(&dict, j, cfg))
        .collect()
}
