//! Run configuration: TOML files overridden by command-line flags.
//!
//! ```toml
//! problem = "linear"            # or "superlinear"
//! operator = "logarithmic"      # power:p=<float> | logarithmic | custom:<path>
//! nonlinearity = "power:q=4"    # superlinear only
//! variant = "full"              # full | plus | minus | pair
//! source = "const:1"            # const:<c> | sin:<c>
//! seed = 0
//! output_dir = "out"
//!
//! [mesh]
//! dim = 1
//! resolution = 128
//!
//! [schedule]
//! k_max = 10                    # eps_k = 2^-k, k = 0..=k_max
//! # eps = [1.0, 0.1, 0.01]      # explicit ladder instead
//!
//! [superlinear]
//! eps = 1e-4                    # regularization of J; 0 only for l > 1
//!
//! [tolerances]
//! tol = 1e-10
//! tol_final = 1e-3
//! max_iters = 200
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Linear,
    Superlinear,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub dim: usize,
    pub resolution: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { dim: 1, resolution: 128 }
    }
}

impl MeshConfig {
    /// `1d:128`, `2d:32`
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("mesh must look like 1d:<n> or 2d:<n>, got '{spec}'"));
        let (d, n) = spec.split_once(':').ok_or_else(bad)?;
        let dim = match d.trim().to_ascii_lowercase().as_str() {
            "1d" | "1" => 1,
            "2d" | "2" => 2,
            _ => return Err(bad()),
        };
        let resolution = n.trim().parse().map_err(|_| bad())?;
        Ok(MeshConfig { dim, resolution })
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Explicit continuation ladder.
    pub eps: Option<Vec<f64>>,
    /// Geometric ladder `2^-k`, `k = 0..=k_max` (default 10).
    pub k_max: Option<u32>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperlinearConfig {
    /// Regularization of the functional; `0` is allowed for `l > 1`.
    pub eps: Option<f64>,
    pub path_points: Option<usize>,
    pub max_sweeps: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol: Option<f64>,
    pub tol_final: Option<f64>,
    pub max_iters: Option<usize>,
    /// Residual target of the mountain-pass solver.
    pub mp_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// `moser`, `poincare`, `convergence` or `all`.
    pub checks: Option<Vec<String>>,
    pub q: Option<f64>,
    pub k: Option<f64>,
    pub n_max: Option<usize>,
    pub samples: Option<usize>,
    pub ladder: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub operator: String,
    pub nonlinearity: Option<String>,
    pub variant: String,
    pub source: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub mesh: MeshConfig,
    pub schedule: ScheduleConfig,
    pub superlinear: SuperlinearConfig,
    pub tolerances: Tolerances,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: Problem::Linear,
            operator: "power:p=2".into(),
            nonlinearity: None,
            variant: "full".into(),
            source: "const:1".into(),
            seed: 0,
            output_dir: PathBuf::from("out"),
            mesh: MeshConfig::default(),
            schedule: ScheduleConfig::default(),
            superlinear: SuperlinearConfig::default(),
            tolerances: Tolerances::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    /// Checks that the fields needed by `problem` are present and tolerances positive.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.problem == Problem::Superlinear && self.nonlinearity.is_none() {
            return Err(CliError::Usage("superlinear problems need a nonlinearity".into()));
        }
        if self.mesh.resolution < 2 {
            return Err(CliError::Usage("mesh resolution must be at least 2".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [("tol", t.tol), ("tol_final", t.tol_final), ("mp_tol", t.mp_tol)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(CliError::Usage(format!("tolerance {name} must be positive")));
                }
            }
        }
        if let Some(eps) = self.superlinear.eps {
            if !(eps >= 0.0) {
                return Err(CliError::Usage("superlinear eps must be nonnegative".into()));
            }
        }
        Ok(())
    }
}
