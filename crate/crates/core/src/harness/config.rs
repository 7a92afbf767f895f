//! Experiment configuration, read from TOML.
//!
//! ```toml
//! experiment = "err_vs_rho"      # err_vs_rho | convergence | adaptive_compare | estimator_snapshot
//! estimators = ["tridiagonal"]   # tridiagonal | adaptive | naive
//! replicates = 20
//! seed = 1
//! output_dir = "out/err_vs_rho"
//!
//! [model]
//! family = "power_deterministic" # power_deterministic | power_random | exponential | identity
//! decay = 1.0                    # α (power families) or γ (exponential)
//! amplitude = 0.5
//!
//! [grid]
//! n = [500]
//! d = [50, 500]
//! rho = [0.1, 1.0, inf]          # `inf` (TOML float) or "inf" both mean non-private
//! alpha = [1.0]                  # decay assumed when choosing the block size
//! # k = [4, 8]                   # fixed block sizes; omit for the automatic rule
//!
//! [regime]                       # convergence only: d = d_scale·n^d_exponent, ρ = rho_scale·n^rho_exponent
//! d_scale = 1.0
//! d_exponent = 0.6
//! rho_scale = inf
//! rho_exponent = 0.0
//!
//! [params]                       # all optional
//! truncation = 10.0
//! threshold_const = 4.0
//! level_cap = 0.25
//! k0 = 7                         # default ⌈ln n⌉
//! eigen_floor = 10.0
//! block_size_mode = "experiment" # experiment | theory
//! norm = "operator"              # operator | frobenius
//! ```

use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::datagen::CovarianceModel;
use crate::error::{Error, Result};
use crate::estimators::{
    BlockSizeMode, NormKind, DEFAULT_EIGEN_FLOOR, DEFAULT_LEVEL_CAP, DEFAULT_THRESHOLD_CONST, DEFAULT_TRUNCATION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ErrVsRho,
    Convergence,
    AdaptiveCompare,
    EstimatorSnapshot,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::ErrVsRho => "err_vs_rho",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::AdaptiveCompare => "adaptive_compare",
            ExperimentKind::EstimatorSnapshot => "estimator_snapshot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Tridiagonal,
    Adaptive,
    Naive,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Tridiagonal => "tridiagonal",
            EstimatorKind::Adaptive => "adaptive",
            EstimatorKind::Naive => "naive",
        }
    }
}

fn parse_rho<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Int(v) => Ok(v as f64),
        Raw::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        },
    }
}

fn parse_rho_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "parse_rho")] f64);
    let v: Vec<Wrap> = Vec::deserialize(d)?;
    Ok(v.into_iter().map(|w| w.0).collect())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default = "default_rho_grid", deserialize_with = "parse_rho_list")]
    pub rho: Vec<f64>,
    #[serde(default = "default_alpha_grid")]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub k: Option<Vec<usize>>,
}

fn default_rho_grid() -> Vec<f64> {
    vec![f64::INFINITY]
}

fn default_alpha_grid() -> Vec<f64> {
    vec![1.0]
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            n: Vec::new(),
            d: Vec::new(),
            rho: default_rho_grid(),
            alpha: default_alpha_grid(),
            k: None,
        }
    }
}

/// Dimension and budget as functions of `n` for convergence sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    #[serde(default = "one")]
    pub d_scale: f64,
    pub d_exponent: f64,
    #[serde(default = "infinite", deserialize_with = "parse_rho")]
    pub rho_scale: f64,
    #[serde(default)]
    pub rho_exponent: f64,
}

fn one() -> f64 {
    1.0
}

fn infinite() -> f64 {
    f64::INFINITY
}

impl Regime {
    /// `d = max(1, round(d_scale · n^d_exponent))`.
    pub fn dim(&self, n: usize) -> usize {
        ((self.d_scale * (n as f64).powf(self.d_exponent)).round() as usize).max(1)
    }

    pub fn rho(&self, n: usize) -> f64 {
        if self.rho_scale.is_infinite() {
            f64::INFINITY
        } else {
            self.rho_scale * (n as f64).powf(self.rho_exponent)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorParams {
    #[serde(default = "default_truncation", deserialize_with = "parse_rho")]
    pub truncation: f64,
    #[serde(default = "default_threshold_const")]
    pub threshold_const: f64,
    #[serde(default = "default_level_cap")]
    pub level_cap: f64,
    #[serde(default)]
    pub k0: Option<usize>,
    #[serde(default = "default_eigen_floor")]
    pub eigen_floor: f64,
    #[serde(default = "default_mode")]
    pub block_size_mode: BlockSizeMode,
    #[serde(default = "default_norm")]
    pub norm: NormKind,
}

fn default_truncation() -> f64 {
    DEFAULT_TRUNCATION
}
fn default_threshold_const() -> f64 {
    DEFAULT_THRESHOLD_CONST
}
fn default_level_cap() -> f64 {
    DEFAULT_LEVEL_CAP
}
fn default_eigen_floor() -> f64 {
    DEFAULT_EIGEN_FLOOR
}
fn default_mode() -> BlockSizeMode {
    BlockSizeMode::Experiment
}
fn default_norm() -> NormKind {
    NormKind::Operator
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
            threshold_const: DEFAULT_THRESHOLD_CONST,
            level_cap: DEFAULT_LEVEL_CAP,
            k0: None,
            eigen_floor: DEFAULT_EIGEN_FLOOR,
            block_size_mode: BlockSizeMode::Experiment,
            norm: NormKind::Operator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: CovarianceModel,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub params: EstimatorParams,
    /// Write measured wall-clock time into `wall_ms`. Off by default so that
    /// identical configs produce byte-identical CSVs.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::Tridiagonal]
}

fn default_replicates() -> usize {
    20
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| {
            let field = e
                .span()
                .map(|sp| {
                    let line = s[..sp.start.min(s.len())].lines().count().max(1);
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".to_string());
            Error::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::config("estimators", "list must not be empty"));
        }
        let g = &self.grid;
        if g.n.is_empty() {
            return Err(Error::config("grid.n", "must not be empty"));
        }
        if let Some(bad) = g.n.iter().find(|&&n| n < 2) {
            return Err(Error::config("grid.n", format!("sample sizes must be >= 2, got {bad}")));
        }
        if g.alpha.is_empty() || g.alpha.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::config("grid.alpha", "must be a non-empty list of positive numbers"));
        }
        if let Some(k) = &g.k {
            if k.is_empty() || k.contains(&0) {
                return Err(Error::config("grid.k", "fixed block sizes must be a non-empty list of positive integers"));
            }
        }
        let p = &self.params;
        if !(p.truncation > 0.0) {
            return Err(Error::config("params.truncation", "must be positive"));
        }
        if !(p.threshold_const > 0.0) {
            return Err(Error::config("params.threshold_const", "must be positive"));
        }
        if !(p.level_cap > 0.0 && p.level_cap <= 1.0) {
            return Err(Error::config("params.level_cap", "must lie in (0, 1]"));
        }
        if p.k0 == Some(0) {
            return Err(Error::config("params.k0", "must be at least 1"));
        }
        if !(p.eigen_floor > 0.0) || !p.eigen_floor.is_finite() {
            return Err(Error::config("params.eigen_floor", "must be positive and finite"));
        }
        let m = &self.model;
        if !(m.decay > 0.0) {
            return Err(Error::config("model.decay", "must be positive"));
        }
        if !(m.amplitude >= 0.0) || !m.amplitude.is_finite() {
            return Err(Error::config("model.amplitude", "must be finite and >= 0"));
        }

        match self.experiment {
            ExperimentKind::Convergence => {
                let r = self
                    .regime
                    .ok_or_else(|| Error::config("regime", "convergence experiments need a [regime] table"))?;
                if !(r.d_scale > 0.0) || !r.d_exponent.is_finite() {
                    return Err(Error::config("regime.d_scale", "d_scale must be positive and d_exponent finite"));
                }
                if !(r.rho_scale > 0.0) || !r.rho_exponent.is_finite() {
                    return Err(Error::config("regime.rho_scale", "rho_scale must be positive and rho_exponent finite"));
                }
                let mut ns = g.n.clone();
                ns.sort_unstable();
                ns.dedup();
                if ns.len() < 3 {
                    return Err(Error::config("grid.n", "convergence needs at least 3 distinct sample sizes"));
                }
            }
            _ => {
                if g.d.is_empty() || g.d.contains(&0) {
                    return Err(Error::config("grid.d", "must be a non-empty list of positive integers"));
                }
                if g.rho.is_empty() || g.rho.iter().any(|r| !(*r > 0.0)) {
                    return Err(Error::config("grid.rho", "must be a non-empty list of positive values or inf"));
                }
                if self.regime.is_some() {
                    return Err(Error::config("regime", "only valid for convergence experiments"));
                }
            }
        }
        if self.experiment == ExperimentKind::EstimatorSnapshot
            && !(self.estimators.contains(&EstimatorKind::Tridiagonal) && self.estimators.contains(&EstimatorKind::Adaptive))
        {
            return Err(Error::config(
                "estimators",
                "estimator_snapshot needs both \"tridiagonal\" and \"adaptive\"",
            ));
        }
        if self.experiment == ExperimentKind::EstimatorSnapshot {
            let single = |len: usize, field: &str| {
                if len == 1 {
                    Ok(())
                } else {
                    Err(Error::config(field, "estimator_snapshot takes exactly one value"))
                }
            };
            single(g.n.len(), "grid.n")?;
            single(g.d.len(), "grid.d")?;
            single(g.rho.len(), "grid.rho")?;
            single(g.alpha.len(), "grid.alpha")?;
            if let Some(k) = &g.k {
                single(k.len(), "grid.k")?;
            }
        }
        if self.experiment == ExperimentKind::AdaptiveCompare
            && !(self.estimators.contains(&EstimatorKind::Tridiagonal) && self.estimators.contains(&EstimatorKind::Adaptive))
        {
            return Err(Error::config(
                "estimators",
                "adaptive_compare needs both \"tridiagonal\" and \"adaptive\"",
            ));
        }
        Ok(())
    }
}
