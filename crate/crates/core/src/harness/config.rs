//! Experiment configurations. Every field has a default, so an empty TOML file
//! is a valid configuration reproducing the reference setup at desk scale.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};
use crate::pursuit::{Method, PursuitConfig};

/// Reads a TOML configuration file; missing keys take their defaults.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SscError::InvalidConfig(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| SscError::InvalidConfig(e.to_string()))
}

fn invalid(msg: impl Into<String>) -> SscError {
    SscError::InvalidConfig(msg.into())
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(invalid(format!("grid '{name}' must not be empty")))
    } else {
        Ok(())
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(invalid("trials must be >= 1"))
    } else {
        Ok(())
    }
}

fn check_nonneg(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        Some(v) => Err(invalid(format!("{name} value {v} must be finite and >= 0"))),
        None => Ok(()),
    }
}

/// Points per subspace for sampling density `rho = n / d`.
pub fn points_for_density(rho: f64, d: usize) -> usize {
    (rho * d as f64).round().max(2.0) as usize
}

/// How the subspace bases are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrangementKind {
    /// Common `t`-dimensional intersection, mutually orthogonal elsewhere.
    SharedIntersection,
    /// Common `t`-dimensional core plus independent random parts.
    CommonCore,
}

/// DI stopping variants compared in the sparsity sweeps; `u` is the swept value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiVariant {
    /// OMP with `s_max = u`.
    OmpSmax,
    /// MP with `s_max = u` and `p_max = N`.
    MpSmax,
    /// MP with `p_max = u` and no iteration budget.
    MpPmax,
}

impl DiVariant {
    pub const ALL: [DiVariant; 3] = [DiVariant::OmpSmax, DiVariant::MpSmax, DiVariant::MpPmax];

    pub fn as_str(&self) -> &'static str {
        match self {
            DiVariant::OmpSmax => "omp-smax",
            DiVariant::MpSmax => "mp-smax",
            DiVariant::MpPmax => "mp-pmax",
        }
    }

    pub fn pursuit(&self, u: usize) -> PursuitConfig {
        match self {
            DiVariant::OmpSmax => PursuitConfig::di(Method::Omp, u),
            DiVariant::MpSmax => PursuitConfig::di(Method::Mp, u),
            DiVariant::MpPmax => PursuitConfig::mp_sparsity(u),
        }
    }
}

/// Clustering error over a grid of intersection dimension, density and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub subspaces: usize,
    pub d: usize,
    pub m: usize,
    pub s_max: usize,
    /// MP target sparsity; `None` means `N`.
    pub p_max: Option<usize>,
    pub t: Vec<usize>,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            subspaces: 3,
            d: 20,
            m: 200,
            s_max: 10,
            p_max: None,
            t: vec![0, 6, 12, 18],
            rho: vec![4.0],
            sigma: vec![0.25, 0.5, 0.75, 1.0],
            methods: vec![Method::Omp, Method::Mp],
            trials: 10,
            seed: 0,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        nonempty("t", &self.t)?;
        nonempty("rho", &self.rho)?;
        nonempty("sigma", &self.sigma)?;
        nonempty("methods", &self.methods)?;
        check_nonneg("sigma", &self.sigma)?;
        if self.subspaces == 0 || self.d == 0 {
            return Err(invalid("subspaces and d must be positive"));
        }
        if let Some(&t) = self.t.iter().find(|&&t| t > self.d) {
            return Err(invalid(format!("t = {t} exceeds d = {}", self.d)));
        }
        let t_min = self.t.iter().copied().min().unwrap_or(0);
        if self.subspaces * (self.d - t_min) + t_min > self.m {
            return Err(invalid("L(d - t) + t exceeds m"));
        }
        if let Some(&r) = self.rho.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(invalid(format!("rho = {r} must be positive")));
        }
        if self.s_max > self.m {
            return Err(invalid("s_max exceeds m"));
        }
        Ok(())
    }
}

/// Residual-threshold sweep on subspaces of different dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdConfig {
    pub m: usize,
    pub dims: Vec<usize>,
    pub t_core: usize,
    pub rho: f64,
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
    pub methods: Vec<Method>,
    /// Constant of the TP lower bound.
    pub c_s: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for DdConfig {
    fn default() -> Self {
        Self {
            m: 300,
            dims: vec![20, 40, 60, 80],
            t_core: 4,
            rho: 4.0,
            sigma: vec![0.2],
            tau: vec![0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6],
            methods: vec![Method::Omp, Method::Mp],
            c_s: 0.1,
            trials: 5,
            seed: 0,
        }
    }
}

impl DdConfig {
    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        nonempty("dims", &self.dims)?;
        nonempty("sigma", &self.sigma)?;
        nonempty("tau", &self.tau)?;
        nonempty("methods", &self.methods)?;
        check_nonneg("sigma", &self.sigma)?;
        check_nonneg("tau", &self.tau)?;
        if self.dims.iter().any(|&d| d < self.t_core || d > self.m) {
            return Err(invalid("every dimension must lie in [t_core, m]"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(invalid("rho must be positive"));
        }
        if !(self.c_s > 0.0 && self.c_s <= 0.1) {
            return Err(invalid("c_s must lie in (0, 0.1]"));
        }
        Ok(())
    }
}

/// Sparsity-budget sweep (`u` = iteration budget or target sparsity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiConfig {
    pub subspaces: usize,
    pub d: usize,
    pub m: usize,
    pub sigma: f64,
    pub rho: f64,
    pub arrangement: ArrangementKind,
    pub t: usize,
    pub u: Vec<usize>,
    pub variants: Vec<DiVariant>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for DiConfig {
    fn default() -> Self {
        Self {
            subspaces: 3,
            d: 15,
            m: 80,
            sigma: 0.5,
            rho: 4.0,
            arrangement: ArrangementKind::CommonCore,
            t: 3,
            u: (1..=30).collect(),
            variants: DiVariant::ALL.to_vec(),
            trials: 10,
            seed: 0,
        }
    }
}

impl DiConfig {
    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        nonempty("u", &self.u)?;
        nonempty("variants", &self.variants)?;
        check_nonneg("sigma", &[self.sigma])?;
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(invalid("rho must be positive"));
        }
        validate_arrangement(self.arrangement, self.subspaces, self.d, self.t, self.m)?;
        let n = self.subspaces * points_for_density(self.rho, self.d);
        let u_max = self.u.iter().copied().max().unwrap_or(0);
        if self.variants.contains(&DiVariant::OmpSmax) && u_max > self.m.min(n - 1) {
            return Err(invalid(format!("u = {u_max} exceeds min(m, N - 1) for OMP")));
        }
        Ok(())
    }
}

fn validate_arrangement(
    kind: ArrangementKind,
    subspaces: usize,
    d: usize,
    t: usize,
    m: usize,
) -> Result<()> {
    if subspaces == 0 || d == 0 || t > d || d > m {
        return Err(invalid(format!(
            "invalid arrangement: L = {subspaces}, d = {d}, t = {t}, m = {m}"
        )));
    }
    if kind == ArrangementKind::SharedIntersection && subspaces * (d - t) + t > m {
        return Err(invalid("L(d - t) + t exceeds m"));
    }
    Ok(())
}

/// Noiseless sparsity-budget sweep over `(t, rho)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiselessConfig {
    pub subspaces: usize,
    pub d: usize,
    pub m: usize,
    pub arrangement: ArrangementKind,
    /// `(t, rho)` pairs.
    pub pairs: Vec<(usize, f64)>,
    /// Swept values; `None` means `1..=2d`.
    pub u: Option<Vec<usize>>,
    pub variants: Vec<DiVariant>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for NoiselessConfig {
    fn default() -> Self {
        Self {
            subspaces: 3,
            d: 15,
            m: 80,
            arrangement: ArrangementKind::SharedIntersection,
            pairs: vec![(5, 3.0), (10, 3.0), (10, 6.0)],
            u: None,
            variants: DiVariant::ALL.to_vec(),
            trials: 10,
            seed: 0,
        }
    }
}

impl NoiselessConfig {
    pub fn u_values(&self) -> Vec<usize> {
        self.u.clone().unwrap_or_else(|| (1..=2 * self.d).collect())
    }

    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        nonempty("pairs", &self.pairs)?;
        nonempty("u", &self.u_values())?;
        nonempty("variants", &self.variants)?;
        for &(t, rho) in &self.pairs {
            validate_arrangement(self.arrangement, self.subspaces, self.d, t, self.m)?;
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(invalid(format!("rho = {rho} must be positive")));
            }
            let n = self.subspaces * points_for_density(rho, self.d);
            let u_max = self.u_values().into_iter().max().unwrap_or(0);
            if self.variants.contains(&DiVariant::OmpSmax) && u_max > self.m.min(n - 1) {
                return Err(invalid(format!("u = {u_max} exceeds min(m, N - 1) for OMP")));
            }
        }
        Ok(())
    }
}

/// Clustering of an external data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    /// Points, one per CSV row.
    pub data: Option<PathBuf>,
    /// Optional ground-truth labels, one integer per row.
    pub labels: Option<PathBuf>,
    pub method: Method,
    pub s_max: Option<usize>,
    pub p_max: Option<usize>,
    pub tau: f64,
    pub alpha: f64,
    /// Number of clusters; eigengap estimate when absent.
    pub clusters: Option<usize>,
    pub max_clusters: Option<usize>,
    pub normalize: bool,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            data: None,
            labels: None,
            method: Method::Omp,
            s_max: Some(5),
            p_max: None,
            tau: 0.0,
            alpha: 1.0,
            clusters: None,
            max_clusters: None,
            normalize: true,
            seed: 0,
        }
    }
}

impl ClusterConfig {
    pub fn pursuit(&self) -> PursuitConfig {
        PursuitConfig {
            method: self.method,
            s_max: self.s_max,
            p_max: self.p_max,
            tau: self.tau,
            alpha: self.alpha,
            ..PursuitConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.is_none() {
            return Err(invalid("no data file given"));
        }
        if self.clusters == Some(0) || self.max_clusters == Some(0) {
            return Err(invalid("cluster counts must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid("alpha must lie in (0, 1]"));
        }
        check_nonneg("tau", &[self.tau])
    }
}
