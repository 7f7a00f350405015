//! JSON run configuration and per-experiment defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use magnon_core::bath::{spacing_for_site_count, BathParams};
use magnon_core::inhomogeneity::PhaseConvention;
use magnon_core::numeric::{linspace, logspace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    PulseSpectrum,
    OracleCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2a => "fig2a",
            Experiment::Fig2b => "fig2b",
            Experiment::Fig2c => "fig2c",
            Experiment::Fig2d => "fig2d",
            Experiment::PulseSpectrum => "pulse-spectrum",
            Experiment::OracleCheck => "oracle-check",
        }
    }
}

/// Configuration file contents. Every key is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub bath: BathParams,
    /// Target site count; overrides `bath.lattice_spacing`.
    pub n_sites: Option<usize>,
    pub zeta: Option<Vec<u8>>,
    pub p_grid: Option<Vec<f64>>,
    pub omega_grid: Option<Vec<f64>>,
    pub sigma_grid: Option<Vec<f64>>,
    /// Polarisations drawn as the fig2b band.
    pub p_bands: Option<Vec<f64>>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub phase_convention: Option<PhaseConvention>,
    pub max_ell: Option<u32>,
}

/// Anything wrong with the configuration itself (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }
}

/// Fully specified settings for one run. Its JSON form is what gets hashed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub experiment: Experiment,
    pub bath: BathParams,
    pub zeta: Vec<u8>,
    pub p_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub p_bands: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub phase_convention: PhaseConvention,
    pub max_ell: u32,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn default_sites(e: Experiment) -> usize {
    match e {
        Experiment::Fig2d => 2_000,
        _ => 50_000,
    }
}

fn default_samples(e: Experiment) -> usize {
    match e {
        Experiment::Fig2a => 500,
        Experiment::Fig2b | Experiment::Fig2c => 100,
        Experiment::Fig2d => 20,
        Experiment::PulseSpectrum => 0,
        Experiment::OracleCheck => 5,
    }
}

fn round_grid(v: Vec<f64>) -> Vec<f64> {
    // Keep decimal grids free of accumulated rounding, e.g. 0.30000000000000004.
    v.into_iter().map(|x| (x * 1e12).round() / 1e12).collect()
}

impl Resolved {
    pub fn new(cfg: RunConfig, experiment: Option<Experiment>, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self, ConfigError> {
        let experiment = experiment
            .or(cfg.experiment)
            .ok_or_else(|| bad("no experiment given (set `experiment` or pass --experiment)"))?;
        let mut bath = cfg.bath;
        bath.validate().map_err(|e| bad(e.to_string()))?;
        let n_sites = cfg.n_sites.unwrap_or_else(|| default_sites(experiment));
        if n_sites == 0 {
            return Err(bad("n_sites must be positive"));
        }
        bath.lattice_spacing = spacing_for_site_count(&bath, n_sites);

        let zeta = cfg.zeta.unwrap_or_else(|| vec![1, 2]);
        if zeta.is_empty() || zeta.iter().any(|z| *z != 1 && *z != 2) {
            return Err(bad(format!("zeta must be a non-empty subset of [1, 2], got {zeta:?}")));
        }
        let p_grid = cfg.p_grid.unwrap_or_else(|| round_grid(linspace(0.0, 1.0, 11)));
        if p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(bad("p_grid values must lie in [0, 1]"));
        }
        let p_bands = cfg.p_bands.unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
        if p_bands.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(bad("p_bands values must lie in [0, 1]"));
        }
        let omega_grid = cfg.omega_grid.unwrap_or_else(|| {
            let c = bath.omega_zn.log10();
            logspace(c - 0.5, c + 0.5, 11)
        });
        if omega_grid.iter().any(|w| !(*w > 0.0)) {
            return Err(bad("omega_grid values must be positive"));
        }
        let sigma_grid = cfg.sigma_grid.unwrap_or_else(|| logspace(-2.0, 1.0, 13));
        if sigma_grid.iter().any(|s| !(*s >= 0.0)) {
            return Err(bad("sigma_grid values must be non-negative"));
        }
        let n_samples = cfg.n_samples.unwrap_or_else(|| default_samples(experiment));
        let min = match experiment {
            Experiment::Fig2a => magnon_core::chain::MIN_SAMPLES,
            Experiment::PulseSpectrum => 0,
            _ => 1,
        };
        if n_samples < min {
            return Err(bad(format!("n_samples must be at least {min} for {}", experiment.name())));
        }
        let tol = cfg.tol.unwrap_or(magnon_core::dynamics::DEFAULT_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(bad("tol must lie in (0, 1)"));
        }
        let max_ell = cfg.max_ell.unwrap_or(25);
        if max_ell == 0 {
            return Err(bad("max_ell must be positive"));
        }
        Ok(Self {
            experiment,
            bath,
            zeta,
            p_grid,
            omega_grid,
            sigma_grid,
            p_bands,
            n_samples,
            seed: seed.or(cfg.seed).unwrap_or(0),
            tol,
            phase_convention: cfg.phase_convention.unwrap_or_default(),
            max_ell,
            out: out.or(cfg.out),
        })
    }

    /// SHA-256 of the canonical JSON of the resolved settings.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("resolved config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
