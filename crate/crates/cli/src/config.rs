//! Run configuration.
//!
//! A TOML file with the sections `grid`, `window`, `solver`, `sampler` and
//! `experiment.<command>`. Every key is optional; unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! strict = false
//!
//! [grid]
//! n_modes = 512
//! dk = 0.0625
//!
//! [window]
//! t_max = 8.0
//! n_t = 257
//! pad = 4
//!
//! [solver]
//! max_iters = 200
//! residual_tol = 1e-4
//!
//! [sampler]
//! n_samples = 1000000
//! singular_cutoff = 1e-4
//!
//! [experiment.boost]
//! n_values = [8.0, 16.0, 32.0, 64.0, 128.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub strict: bool,
    pub grid: GridConfig,
    pub window: WindowConfig,
    pub solver: SolverConfig,
    pub sampler: SamplerSection,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_modes: usize,
    pub dk: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_modes: 512, dk: 0.0625 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub t_max: f64,
    pub n_t: usize,
    pub pad: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { t_max: 8.0, n_t: 257, pad: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub residual_tol: f64,
    pub ratio_stall_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_gauge: Option<f64>,
    /// Field file for the initial iterate; the unit Gaussian when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iters: 200, residual_tol: 1e-4, ratio_stall_tol: 1e-13, scale_gauge: None, init: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub n_samples: u64,
    pub singular_cutoff: f64,
    pub n_streams: u32,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self { n_samples: 1_000_000, singular_cutoff: 1e-4, n_streams: airy_core::multilinear::DEFAULT_STREAMS }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub ratio: RatioConfig,
    pub boost: BoostConfig,
    pub bilinear: BilinearConfig,
    pub multilinear: MultilinearConfig,
    pub decay: DecayConfig,
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatioConfig {
    /// Field file to evaluate; the unit Gaussian on `grid` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostConfig {
    pub n_modes: usize,
    pub dk: f64,
    /// Half width of the window in the moving frame.
    pub t_prime: f64,
    pub n_t: usize,
    pub n_values: Vec<f64>,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self { n_modes: 512, dk: 1.0 / 64.0, t_prime: 8.0, n_t: 513, n_values: vec![8.0, 16.0, 32.0, 64.0, 128.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilinearConfig {
    pub n_modes: usize,
    pub dk: f64,
    pub n1: f64,
    pub n2_values: Vec<f64>,
    /// Band fields use seeds `seed, seed + 1, ...`.
    pub n_seeds: u64,
    pub t_ref: f64,
    pub n_ref: f64,
    pub samples_per_period: f64,
    pub min_nodes: usize,
    pub reference_slope: f64,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        Self {
            n_modes: 8192,
            dk: 0.0625,
            n1: 1.0,
            n2_values: vec![8.0, 16.0, 32.0, 64.0, 128.0],
            n_seeds: 5,
            t_ref: 0.05,
            n_ref: 8.0,
            samples_per_period: 8.0,
            min_nodes: 65,
            reference_slope: -0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Indicator,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultilinearConfig {
    pub profile: ProfileKind,
    /// Half width of the indicator, or the Gaussian width.
    pub width: f64,
    pub oracle_n_modes: usize,
    pub oracle_dk: f64,
    pub oracle_t_max: f64,
    pub oracle_n_t: usize,
    pub mu_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub cutoff_sweep: Vec<f64>,
    pub scaling_s: f64,
    pub scaling_l: Vec<f64>,
    pub scaling_mu: f64,
    pub scaling_eps: f64,
    pub reference_slope: f64,
    /// Surface samples written to the dump CSV.
    pub dump_rows: usize,
}

impl Default for MultilinearConfig {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Indicator,
            width: 1.0,
            oracle_n_modes: 1280,
            oracle_dk: 1.0 / 512.0,
            oracle_t_max: 800.0,
            oracle_n_t: 32_001,
            mu_values: vec![0.0, 0.1, 1.0, 10.0],
            eps_values: vec![0.0, 0.1, 1.0],
            cutoff_sweep: vec![1e-3, 1e-2, 1e-1],
            scaling_s: 1.0,
            scaling_l: vec![4.0, 8.0, 16.0, 32.0],
            scaling_mu: 1.0,
            scaling_eps: 1.0,
            reference_slope: -0.25,
            dump_rows: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    /// Field to certify; solved from the Gaussian with `solver` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
    pub floor: f64,
    pub s_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    /// Swept in the listed order; the tail norm must not decrease along it.
    pub eps_values: Vec<f64>,
    /// Bootstrap terms and dichotomy at `mu = s^-6` for every `s`.
    pub bootstrap_eps: f64,
    pub bootstrap_samples: u64,
    /// Standard deviation of the normal draws for the bootstrap terms.
    pub bootstrap_sigma: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            field: None,
            floor: 1e-10,
            s_values: vec![1.5, 2.0, 3.0],
            mu_values: vec![0.01, 0.1, 1.0],
            eps_values: vec![1.0, 0.5, 0.1, 0.01, 1e-3, 0.0],
            bootstrap_eps: 1.0,
            bootstrap_samples: 200_000,
            bootstrap_sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub scale_n_modes: usize,
    pub scale_dk: f64,
    pub scale_ratios: Vec<f64>,
    pub sep_n_modes: usize,
    pub sep_dk: f64,
    pub separations: Vec<f64>,
    pub base_half_width: f64,
    pub base_step: f64,
    pub grading: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            scale_n_modes: 2048,
            scale_dk: 1.0 / 128.0,
            scale_ratios: vec![2.0, 4.0, 8.0, 16.0],
            sep_n_modes: 6400,
            sep_dk: 1.0 / 400.0,
            separations: vec![10.0, 100.0, 1000.0],
            base_half_width: 8.0,
            base_step: 0.0625,
            grading: 1.0,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the effective configuration in canonical TOML form.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_toml().as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
