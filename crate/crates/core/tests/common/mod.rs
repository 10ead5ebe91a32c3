//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's numerical kernels: inner products,
//! projections and linear solves are recomputed from scratch on plain vectors.
#![allow(dead_code)]

use greedy_ssc::numerics::DenseMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const TIE_RTOL: f64 = 1e-12;
pub const ZERO_TOL: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn columns(y: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..y.ncols()).map(|i| y.column(i).iter().copied().collect()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Gaussian elimination with partial pivoting on a square system.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
            b[col + 1 + i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Determinant by elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(col, pivot);
            d = -d;
        }
        d *= a[col][col];
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / pivot_row[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
        }
    }
    d
}

/// Least-squares fit of `target` on `cols[support]` through the normal equations.
pub fn normal_equations(cols: &[Vec<f64>], support: &[usize], target: &[f64]) -> Vec<f64> {
    let gram: Vec<Vec<f64>> = support
        .iter()
        .map(|&a| support.iter().map(|&b| dot(&cols[a], &cols[b])).collect())
        .collect();
    let rhs: Vec<f64> = support.iter().map(|&a| dot(&cols[a], target)).collect();
    solve(gram, rhs)
}

/// `target - sum_k x_k cols[support_k]`.
pub fn residual_of(cols: &[Vec<f64>], support: &[usize], x: &[f64], target: &[f64]) -> Vec<f64> {
    let mut r = target.to_vec();
    for (&i, &xi) in support.iter().zip(x) {
        for (rk, ck) in r.iter_mut().zip(&cols[i]) {
            *rk -= xi * ck;
        }
    }
    r
}

/// Exhaustive argmax of `|<y_i, r>|` over `allowed`, lowest index on ties.
pub fn argmax(cols: &[Vec<f64>], r: &[f64], allowed: &[bool]) -> Option<usize> {
    let scores: Vec<f64> = cols.iter().map(|c| dot(c, r).abs()).collect();
    let max = (0..cols.len())
        .filter(|&i| allowed[i])
        .map(|i| scores[i])
        .fold(0.0, f64::max);
    if max <= ZERO_TOL {
        return None;
    }
    (0..cols.len()).find(|&i| allowed[i] && scores[i] >= max * (1.0 - TIE_RTOL))
}

/// One reference run: selection order, dense coefficients, final residual.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub order: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residual: Vec<f64>,
    /// Residual after each iteration, starting with the target itself.
    pub history: Vec<Vec<f64>>,
}

/// OMP from its definition: every iteration re-solves the projection.
pub fn omp_oracle(cols: &[Vec<f64>], j: usize, s_max: usize, tau: f64) -> OracleRun {
    let n = cols.len();
    let target = &cols[j];
    let mut allowed = vec![true; n];
    allowed[j] = false;
    let mut order = Vec::new();
    let mut x = Vec::new();
    let mut r = target.clone();
    let mut history = vec![r.clone()];
    while norm(&r) > tau && order.len() < s_max {
        let Some(pick) = argmax(cols, &r, &allowed) else {
            break;
        };
        allowed[pick] = false;
        order.push(pick);
        x = normal_equations(cols, &order, target);
        r = residual_of(cols, &order, &x, target);
        history.push(r.clone());
    }
    let mut coefficients = vec![0.0; n];
    for (&i, &v) in order.iter().zip(&x) {
        coefficients[i] = v;
    }
    OracleRun {
        order,
        coefficients,
        residual: r,
        history,
    }
}

/// MP from its definition: project out the selected column only, allow reselection.
pub fn mp_oracle(cols: &[Vec<f64>], j: usize, s_max: usize, tau: f64) -> OracleRun {
    let n = cols.len();
    let mut allowed = vec![true; n];
    allowed[j] = false;
    let mut order = Vec::new();
    let mut coefficients = vec![0.0; n];
    let mut q = cols[j].clone();
    let mut history = vec![q.clone()];
    while norm(&q) > tau && order.len() < s_max {
        let Some(pick) = argmax(cols, &q, &allowed) else {
            break;
        };
        let c = &cols[pick];
        let step = dot(c, &q) / dot(c, c);
        coefficients[pick] += step;
        for (qk, ck) in q.iter_mut().zip(c) {
            *qk -= step * ck;
        }
        order.push(pick);
        history.push(q.clone());
    }
    OracleRun {
        order,
        coefficients,
        residual: q,
        history,
    }
}

/// Adjacency of disjoint random connected blocks, node order shuffled.
///
/// Within a block every pair is joined with probability `density` on top of a
/// spanning path. Returns the dense weight matrix and the block of each node.
pub fn block_graph(sizes: &[usize], density: f64, rng: &mut impl Rng) -> (DenseMatrix, Vec<usize>) {
    let n: usize = sizes.iter().sum();
    let mut labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(l, &s)| std::iter::repeat_n(l, s))
        .collect();
    labels.shuffle(rng);
    let mut a = DenseMatrix::zeros(n, n);
    for l in 0..sizes.len() {
        let nodes: Vec<usize> = (0..n).filter(|&i| labels[i] == l).collect();
        // spanning path keeps every block connected
        for w in nodes.windows(2) {
            let v = rng.random_range(0.1..1.0);
            a[(w[0], w[1])] = v;
            a[(w[1], w[0])] = v;
        }
        for (x, &i) in nodes.iter().enumerate() {
            for &k in &nodes[x + 1..] {
                if rng.random_bool(density) {
                    let v = rng.random_range(0.1..1.0);
                    a[(i, k)] = v;
                    a[(k, i)] = v;
                }
            }
        }
    }
    (a, labels)
}

/// Misclassification rate under the best label bijection, by brute force over
/// permutations (both label sets are `0..k` with `k <= 8`).
pub fn brute_force_ce(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().chain(truth).max().map_or(0, |m| m + 1);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = usize::MAX;
    permute(&mut perm, 0, &mut |p| {
        let wrong = pred.iter().zip(truth).filter(|(a, b)| p[**a] != **b).count();
        best = best.min(wrong);
    });
    best as f64 / pred.len() as f64
}

fn permute(p: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
    if at == p.len() {
        f(p);
        return;
    }
    for i in at..p.len() {
        p.swap(at, i);
        permute(p, at + 1, f);
        p.swap(at, i);
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
