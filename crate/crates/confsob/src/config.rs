//! Run configuration: flags override the JSON config file, which overrides
//! the defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::BoxError;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "CONFSOB_WORKERS";

/// Pass thresholds of the verification suites and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Conformal identities, EL residual, moving-spheres symmetry. Set by `--tol`.
    pub identity: f64,
    /// Relative error of the direct energy quadrature.
    pub energy: f64,
    /// Relative error of the conformal distance formula.
    pub distance: f64,
    /// Most negative Gibbs gap accepted.
    pub gibbs: f64,
    /// |gap| accepted at the equality cases.
    pub gibbs_equality: f64,
    /// Most negative relative deficit accepted.
    pub deficit: f64,
    /// Finite-difference check of the log multipliers.
    pub multiplier: f64,
    /// Final deficit of a flow.
    pub flow_deficit: f64,
    /// Fit residual for membership in the family.
    pub fit_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-3,
            energy: 2e-2,
            distance: 1e-9,
            gibbs: 1e-10,
            gibbs_equality: 1e-9,
            deficit: 1e-6,
            multiplier: 1e-6,
            flow_deficit: 1e-4,
            fit_residual: 1e-2,
        }
    }
}

impl Tolerances {
    fn check(&self) -> Result<(), ConfigError> {
        let all = [
            self.identity,
            self.energy,
            self.distance,
            self.gibbs,
            self.gibbs_equality,
            self.deficit,
            self.multiplier,
            self.flow_deficit,
            self.fit_residual,
        ];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(ConfigError("tolerances must be positive and finite".into()))
        }
    }
}

/// Contents of a `--config` file; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub band_limit: Option<usize>,
    pub grid_degree: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub max_iterations: Option<usize>,
    pub step: Option<f64>,
    pub tolerances: Option<Tolerances>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self, BoxError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }

    /// Fields of `self` take precedence over those of `base`.
    pub fn over(self, base: ConfigFile) -> ConfigFile {
        ConfigFile {
            n: self.n.or(base.n),
            band_limit: self.band_limit.or(base.band_limit),
            grid_degree: self.grid_degree.or(base.grid_degree),
            tol: self.tol.or(base.tol),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            max_iterations: self.max_iterations.or(base.max_iterations),
            step: self.step.or(base.step),
            tolerances: self.tolerances.or(base.tolerances),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub band_limit: usize,
    pub grid_degree: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub max_iterations: usize,
    pub step: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Default band limit: 16 on 𝕊², 32 on 𝕊¹.
pub fn default_band_limit(n: usize) -> usize {
    if n == 1 {
        32
    } else {
        16
    }
}

impl RunConfig {
    /// Resolves `flags` over the file named by `config_path` over defaults.
    pub fn resolve(flags: ConfigFile, config_path: Option<&Path>) -> Result<Self, BoxError> {
        let file = match config_path {
            Some(p) => ConfigFile::read(p)?,
            None => ConfigFile::default(),
        };
        let merged = flags.over(file);
        let n = merged.n.unwrap_or(2);
        let band_limit = merged.band_limit.unwrap_or_else(|| default_band_limit(n));
        let grid_degree = merged.grid_degree.unwrap_or(4 * band_limit);
        let mut tolerances = merged.tolerances.unwrap_or_default();
        if let Some(t) = merged.tol {
            tolerances.identity = t;
        }
        let cfg = Self {
            n,
            band_limit,
            grid_degree,
            seed: merged.seed.unwrap_or(0),
            tolerances,
            max_iterations: merged.max_iterations.unwrap_or(2000),
            step: merged.step.unwrap_or(1e-2),
            out: merged.out,
            workers: workers_from_env()?,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.n == 0 || self.band_limit == 0 || self.grid_degree == 0 || self.max_iterations == 0 {
            return Err(ConfigError("n, band limit, grid degree and iterations must be positive".into()));
        }
        if self.grid_degree < self.band_limit {
            return Err(ConfigError(format!(
                "grid degree {} is below the band limit {}",
                self.grid_degree, self.band_limit
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(ConfigError("step must be positive".into()));
        }
        self.tolerances.check()
    }

    /// Grid-based commands exist for n ∈ {1, 2} only.
    pub fn require_grid_dimension(&self) -> Result<(), ConfigError> {
        if self.n == 1 || self.n == 2 {
            Ok(())
        } else {
            Err(ConfigError(format!("n = {} has no quadrature grid (use 1 or 2)", self.n)))
        }
    }
}

/// Worker count from the environment, defaulting to the available cores.
pub fn workers_from_env() -> Result<usize, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(ConfigError(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
