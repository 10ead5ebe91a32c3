//! Closed-form clustering conditions, probability bounds and parameter ranges
//! from the SSC-OMP / SSC-MP recovery theorems, plus phase-transition curve fits.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};
use crate::pursuit::Method;

pub const C_S_MAX: f64 = 0.1;
pub const C_D_MAX: f64 = 1.0 / 18.0;
pub const C_M_MAX: f64 = 0.125;

/// Theorem-level numerical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoryConstants {
    pub c_s: f64,
    pub c_d: f64,
    pub c_m: f64,
    /// Sampling-density threshold; no numeric value is known, so there is no default.
    pub c_rho: Option<f64>,
}

impl Default for TheoryConstants {
    fn default() -> Self {
        Self {
            c_s: C_S_MAX,
            c_d: C_D_MAX,
            c_m: C_M_MAX,
            c_rho: None,
        }
    }
}

impl TheoryConstants {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, max: f64| {
            if v > 0.0 && v <= max {
                Ok(())
            } else {
                Err(SscError::DomainError(format!("{name} = {v} must lie in (0, {max}]")))
            }
        };
        check("c_s", self.c_s, C_S_MAX)?;
        check("c_d", self.c_d, C_D_MAX)?;
        check("c_m", self.c_m, C_M_MAX)?;
        if let Some(c) = self.c_rho {
            if c.is_nan() || c <= 1.0 {
                return Err(SscError::DomainError(format!("c_rho = {c} must exceed 1")));
            }
        }
        Ok(())
    }
}

/// Problem description the theorem statements are phrased in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub m: usize,
    /// Points per subspace `n_l`.
    pub counts: Vec<usize>,
    /// Subspace dimensions `d_l`.
    pub dims: Vec<usize>,
    pub sigma: f64,
    pub s_max: usize,
    pub max_aff: f64,
    pub method: Method,
    pub constants: TheoryConstants,
}

impl TheoryParams {
    /// Total number of points `N`.
    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn d_max(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    /// `rho_l = (n_l - 1) / d_l`.
    pub fn sampling_densities(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(&self.dims)
            .map(|(&n, &d)| (n as f64 - 1.0) / d as f64)
            .collect()
    }

    pub fn rho_min(&self) -> f64 {
        self.sampling_densities()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `rho_min >= c_rho`; `None` when `c_rho` is not supplied.
    pub fn density_hypothesis(&self) -> Option<bool> {
        self.constants.c_rho.map(|c| self.rho_min() >= c)
    }

    fn validate(&self) -> Result<()> {
        if self.counts.len() != self.dims.len() || self.counts.is_empty() {
            return Err(SscError::DomainError(format!(
                "{} counts for {} dimensions",
                self.counts.len(),
                self.dims.len()
            )));
        }
        if self.dims.contains(&0) || self.m == 0 {
            return Err(SscError::DomainError("dimensions must be positive".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(SscError::DomainError(format!("sigma = {}", self.sigma)));
        }
        if !(0.0..=1.0).contains(&self.max_aff) {
            return Err(SscError::DomainError(format!("max_aff = {}", self.max_aff)));
        }
        self.constants.validate()
    }
}

/// `c(sigma)` of the noise term: `10 + 13 sigma` for OMP, `22 + 29 sigma` for MP.
pub fn noise_constant(method: Method, sigma: f64) -> f64 {
    match method {
        Method::Omp => 10.0 + 13.0 * sigma,
        Method::Mp => 22.0 + 29.0 * sigma,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Both sides of the sufficient clustering condition.
pub fn clustering_condition(p: &TheoryParams) -> Result<ClusteringCondition> {
    p.validate()?;
    let n = p.n();
    if p.s_max < 1 || n < 2 {
        return Err(SscError::DomainError("need s_max >= 1 and N >= 2".into()));
    }
    let log_term = (3.0 * (n as f64).ln() + (p.s_max as f64).ln()).max(0.0);
    if log_term <= 0.0 {
        return Err(SscError::DomainError("N^3 s_max must exceed 1".into()));
    }
    let root_log = log_term.sqrt();
    let sigma = p.sigma;
    let dim_term = ((p.d_max() as f64) / p.m as f64).sqrt() * noise_constant(p.method, sigma);
    let density_term = (2.0 / p.rho_min()).sqrt() * (1.0 + 1.5 * sigma);
    let lhs = p.max_aff + 10.0 * sigma / root_log * (dim_term + density_term);
    let rhs = 1.0 / (8.0 * log_term);
    Ok(ClusteringCondition {
        lhs,
        rhs,
        satisfied: lhs <= rhs,
    })
}

/// Lower bound on the success probability; may be negative (vacuous).
pub fn success_probability_bound(p: &TheoryParams) -> f64 {
    let n = p.n() as f64;
    let c = &p.constants;
    let per_subspace: f64 = p
        .counts
        .iter()
        .zip(&p.dims)
        .map(|(&nl, &dl)| nl as f64 * (-c.c_d * dl as f64).exp())
        .sum();
    1.0 - 6.0 / n - 5.0 * n * (-c.c_m * p.m as f64).exp() - 6.0 * per_subspace
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TpLowerBound {
    pub value: u64,
    /// False when `tau` (or `sigma`) lies outside the range the bound covers;
    /// `value` is then 0.
    pub admissible: bool,
}

/// Guaranteed number of same-subspace support entries per point under
/// residual-threshold stopping with threshold `tau`.
///
/// Admissibility is checked against `tau <= 2/3 - sqrt(d/m) sigma` with the
/// dimension `d` passed in.
pub fn theorem3_tp_lower_bound(
    d: usize,
    n: usize,
    m: usize,
    sigma: f64,
    tau: f64,
    c_s: f64,
) -> Result<TpLowerBound> {
    if n <= 1 {
        return Err(SscError::DomainError(format!("need n_l >= 2, got {n}")));
    }
    if m == 0 || sigma.is_nan() || sigma < 0.0 || c_s.is_nan() || c_s <= 0.0 {
        return Err(SscError::DomainError("need m >= 1, sigma >= 0, c_s > 0".into()));
    }
    let ratio = (d as f64 / m as f64).sqrt();
    let denom = 1.0 - 1.5 * ratio * sigma;
    let upper = 2.0 / 3.0 - ratio * sigma;
    if denom <= 0.0 || !(0.0..=upper).contains(&tau) {
        return Ok(TpLowerBound {
            value: 0,
            admissible: false,
        });
    }
    let inner = (2.0 / 3.0 - tau / denom).max(0.0);
    let factor = (inner * inner / 3.0).min(c_s);
    let log_term = ((n - 1) as f64).ln() + 1.0;
    let raw = (d as f64 / log_term * factor).floor();
    Ok(TpLowerBound {
        value: raw.max(0.0) as u64,
        admissible: true,
    })
}

/// `max_l floor(c_s d_l / log((n_l - 1) e))`, the sparsity level that replaces
/// `s_max` in the residual-threshold variant of the clustering condition.
pub fn theorem3_smax(dims: &[usize], counts: &[usize], c_s: f64) -> Result<u64> {
    let mut best = 0u64;
    for (&d, &n) in dims.iter().zip(counts) {
        if n <= 1 {
            return Err(SscError::DomainError(format!("need n_l >= 2, got {n}")));
        }
        let v = (c_s * d as f64 / (((n - 1) as f64).ln() + 1.0)).floor();
        best = best.max(v.max(0.0) as u64);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauRange {
    pub upper: f64,
    /// Upper end with `sqrt(d_max/m)` replaced by 1.
    pub conservative_upper: f64,
}

/// Admissible residual thresholds `[0, upper]`.
pub fn tau_admissible_range(d_max: usize, m: usize, sigma: f64) -> Result<TauRange> {
    if m == 0 {
        return Err(SscError::DomainError("m must be >= 1".into()));
    }
    let ratio = (d_max as f64 / m as f64).sqrt();
    Ok(TauRange {
        upper: (2.0 / 3.0 - ratio * sigma).max(0.0),
        conservative_upper: (2.0 / 3.0 - sigma).max(0.0),
    })
}

/// Largest `s` in `1..=d` with `s <= c_s d / log((n-1) e / s)`, or 0 if none.
pub fn admissible_smax(d: usize, n: usize, c_s: f64) -> Result<usize> {
    if n < 2 {
        return Err(SscError::DomainError(format!("need n_l >= 2, got {n}")));
    }
    let base = ((n - 1) as f64).ln() + 1.0;
    let bound = c_s * d as f64;
    let mut best = 0;
    for s in 1..=d {
        let log_term = base - (s as f64).ln();
        // once (n-1)e/s <= 1 the right-hand side is no longer positive
        if log_term > 0.0 && s as f64 * log_term <= bound {
            best = s;
        }
    }
    Ok(best)
}

/// Phase-transition curve `rho = (c1 / (c2 - aff))^2`.
pub fn curve_fit_rho_of_aff(c1: f64, c2: f64, aff: f64) -> Result<f64> {
    let denom = c2 - aff;
    if denom.is_nan() || denom <= 0.0 {
        return Err(SscError::DomainError(format!("c2 - aff = {denom} must be positive")));
    }
    Ok((c1 / denom).powi(2))
}

/// Phase-transition curve `rho = (sigma (c5 + c6 sigma) / (c7 - sigma (c3 + sigma c4)))^2`.
pub fn curve_fit_rho_of_sigma(c: [f64; 5], sigma: f64) -> Result<f64> {
    let [c3, c4, c5, c6, c7] = c;
    let denom = c7 - sigma * (c3 + sigma * c4);
    if denom.is_nan() || denom <= 0.0 {
        return Err(SscError::DomainError(format!("denominator {denom} must be positive")));
    }
    Ok((sigma * (c5 + c6 * sigma) / denom).powi(2))
}

/// Fitted curve for the affinity axis of the phase diagram: `(0.37 / (1 - aff))^2`.
pub fn reference_rho_of_aff(aff: f64) -> Result<f64> {
    curve_fit_rho_of_aff(0.37, 1.0, aff)
}

/// Fitted curve for the noise axis of the phase diagram:
/// `(sigma (1 + 0.7 sigma) / (2.3 - 0.2 sigma - 0.5 sigma^2))^2`.
pub fn reference_rho_of_sigma(sigma: f64) -> Result<f64> {
    curve_fit_rho_of_sigma([0.2, 0.5, 1.0, 0.7, 2.3], sigma)
}
