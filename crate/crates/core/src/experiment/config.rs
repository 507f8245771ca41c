//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [generator]
//! kind = "goe"        # goe | band | ring | potts
//! n = 50
//! sigma = 0.5
//!
//! [sampling]
//! alpha = 10.0
//! seeds = [1]
//!
//! [scan]
//! gamma_lo = 1e-3
//! gamma_hi = 1e3
//! points = 61
//! penalty = "l2"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gamma;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Goe,
    Band,
    Ring,
    Potts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub n: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Band width.
    #[serde(default)]
    pub w: Option<usize>,
    /// Mean-degree parameter of the Potts graph.
    #[serde(default)]
    pub d: Option<f64>,
    /// Potts states.
    #[serde(default)]
    pub q: Option<usize>,
}

fn default_sigma() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Sampling ratio `p/n`; ignored when `p` is set.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub p: Option<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "yes")]
    pub rescale_trace: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    L2,
    L1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_lo")]
    pub gamma_lo: f64,
    #[serde(default = "default_hi")]
    pub gamma_hi: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_penalty")]
    pub penalty: PenaltyKind,
}

fn default_lo() -> f64 {
    gamma::DEFAULT_GRID_LO
}
fn default_hi() -> f64 {
    gamma::DEFAULT_GRID_HI
}
fn default_points() -> usize {
    gamma::DEFAULT_GRID_POINTS
}
fn default_penalty() -> PenaltyKind {
    PenaltyKind::L2
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { gamma_lo: default_lo(), gamma_hi: default_hi(), points: default_points(), penalty: default_penalty() }
    }
}

impl ScanConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        gamma::log_grid(self.gamma_lo, self.gamma_hi, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Svg]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: None, formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PottsConfig {
    #[serde(default = "default_var_h")]
    pub sigma_h2: f64,
    #[serde(default = "default_var_j")]
    pub sigma_j2: f64,
    /// `γ_h = gamma_h_ratio · γ / n`.
    #[serde(default = "default_gamma_h_ratio")]
    pub gamma_h_ratio: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    /// Also compute train, test and generated likelihoods.
    #[serde(default)]
    pub likelihoods: bool,
    /// Size of the test and generated sets.
    #[serde(default = "default_eval_p")]
    pub eval_p: usize,
    #[serde(default = "default_ais_temps")]
    pub ais_temps: usize,
    #[serde(default = "default_ais_chains")]
    pub ais_chains: usize,
    /// Samples for Monte Carlo KL estimates when enumeration is impossible.
    #[serde(default = "default_kl_samples")]
    pub kl_samples: usize,
}

fn default_var_h() -> f64 {
    crate::potts::DEFAULT_VAR_H
}
fn default_var_j() -> f64 {
    crate::potts::DEFAULT_VAR_J
}
fn default_gamma_h_ratio() -> f64 {
    0.1
}
fn default_burn_in() -> usize {
    crate::potts::mcmc::DEFAULT_BURN_IN
}
fn default_thinning() -> usize {
    crate::potts::mcmc::DEFAULT_THINNING
}
fn default_eval_p() -> usize {
    10_000
}
fn default_ais_temps() -> usize {
    1000
}
fn default_ais_chains() -> usize {
    100
}
fn default_kl_samples() -> usize {
    10_000
}

impl Default for PottsConfig {
    fn default() -> Self {
        Self {
            sigma_h2: default_var_h(),
            sigma_j2: default_var_j(),
            gamma_h_ratio: default_gamma_h_ratio(),
            burn_in: default_burn_in(),
            thinning: default_thinning(),
            likelihoods: false,
            eval_p: default_eval_p(),
            ais_temps: default_ais_temps(),
            ais_chains: default_ais_chains(),
            kl_samples: default_kl_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorConfig {
    pub gamma: f64,
    pub betas: Vec<f64>,
    pub steps: usize,
    #[serde(default)]
    pub proposal_scale: Option<f64>,
    #[serde(default = "default_sparsity")]
    pub proposal_sparsity: f64,
}

fn default_sparsity() -> f64 {
    crate::posterior::DEFAULT_SPARSITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub potts: Option<PottsConfig>,
    #[serde(default)]
    pub posterior: Option<PosteriorConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.generator;
        if g.n < 2 {
            return Err(config_err("generator.n must be at least 2"));
        }
        if !(g.sigma > 0.0) {
            return Err(config_err("generator.sigma must be positive"));
        }
        match g.kind {
            GeneratorKind::Band if g.w.is_none() => return Err(config_err("band generator needs w")),
            GeneratorKind::Potts if g.d.is_none() || g.q.is_none() => {
                return Err(config_err("potts generator needs d and q"));
            }
            _ => {}
        }
        if self.sampling.seeds.is_empty() {
            return Err(config_err("sampling.seeds must not be empty"));
        }
        match (self.sampling.alpha, self.sampling.p) {
            (_, Some(0)) => return Err(config_err("sampling.p must be positive")),
            (Some(a), None) if !(a > 0.0) => return Err(config_err("sampling.alpha must be positive")),
            (None, None) => return Err(config_err("sampling needs alpha or p")),
            _ => {}
        }
        let s = &self.scan;
        if !(s.gamma_lo > 0.0 && s.gamma_hi > s.gamma_lo) || s.points < 2 {
            return Err(config_err("scan grid needs 0 < gamma_lo < gamma_hi and at least two points"));
        }
        if let Some(p) = &self.posterior {
            if !(p.gamma >= 0.0) || p.betas.iter().any(|b| !(*b > 0.0)) || p.betas.is_empty() {
                return Err(config_err("posterior needs gamma ≥ 0 and positive betas"));
            }
        }
        Ok(())
    }

    /// Number of samples per seed.
    pub fn sample_count(&self) -> usize {
        match (self.sampling.p, self.sampling.alpha) {
            (Some(p), _) => p,
            (None, Some(a)) => ((a * self.generator.n as f64).round() as usize).max(1),
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.sample_count() as f64 / self.generator.n as f64
    }

    pub fn wants(&self, f: Format) -> bool {
        self.outputs.formats.contains(&f)
    }

    pub fn potts_settings(&self) -> PottsConfig {
        self.potts.clone().unwrap_or_default()
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}
