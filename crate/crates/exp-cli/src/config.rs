//! Structured experiment configuration, loaded from TOML. Every preset the
//! experiments need ships in `configs/`; the schema below is the full one.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sysid_sim::{DisturbanceModel, InputPolicy, SystemModel};

use crate::ExpError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// One of rates-toy, inflated-jet, dim-sweep, tracking-tube, bounds-table,
    /// custom.
    pub id: String,
    pub out_dir: PathBuf,
    /// Seeds 0..seeds are run.
    pub seeds: u64,
    #[serde(default)]
    pub t_grid: Vec<usize>,
    #[serde(default = "default_method")]
    pub diameter_method: String,
    #[serde(default)]
    pub diameter_budget: Option<usize>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub notes: Option<String>,
    pub system: Option<SystemConfig>,
    pub disturbance: Option<DisturbanceConfig>,
    pub input: Option<InputConfig>,
    #[serde(default)]
    pub w_hat_multipliers: Vec<f64>,
    /// State dimensions swept by the dimension-scaling experiment.
    #[serde(default)]
    pub dims: Vec<usize>,
    pub lse: Option<LseConfig>,
    pub bounds: Option<BoundsConfig>,
    pub rampc: Option<RampcConfig>,
}

fn default_method() -> String {
    "exact-vertex".into()
}

fn default_beta() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub a: Vec<Vec<f64>>,
    #[serde(default)]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    /// uniform | truncated-gaussian | boundary-uniform
    pub kind: String,
    pub w_max: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// none | iid
    pub kind: String,
    #[serde(default)]
    pub u_max: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LseConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_lambda() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.1
}

impl Default for LseConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub sigma_z: f64,
    pub p_z: f64,
    pub b_z: f64,
    pub deltas: Vec<f64>,
    pub t_values: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampcConfig {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default = "default_eta")]
    pub eta_max: f64,
    #[serde(default = "default_wmax")]
    pub w_max: f64,
    /// [a_lo, a_hi, b_lo, b_hi]
    pub theta0: [f64; 4],
    pub a_star: f64,
    pub b_star: f64,
    #[serde(default = "default_episode")]
    pub episode_len: usize,
    #[serde(default = "default_q")]
    pub q_weight: f64,
    #[serde(default = "default_r")]
    pub r_weight: f64,
    #[serde(default = "default_box")]
    pub x_max: f64,
    #[serde(default = "default_box")]
    pub u_max: f64,
}

fn default_horizon() -> usize {
    5
}
fn default_gain() -> f64 {
    -1.0
}
fn default_eta() -> f64 {
    0.01
}
fn default_wmax() -> f64 {
    0.1
}
fn default_episode() -> usize {
    400
}
fn default_q() -> f64 {
    1.0
}
fn default_r() -> f64 {
    0.1
}
fn default_box() -> f64 {
    10.0
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ExpError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ExpError> {
        let config: Self = toml::from_str(text).map_err(|e| ExpError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ExpError> {
        if self.seeds == 0 {
            return Err(ExpError::Config("need at least one seed".into()));
        }
        if !self.t_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(ExpError::Config(
                "sample-size grid must be strictly increasing".into(),
            ));
        }
        match self.diameter_method.as_str() {
            "exact-vertex" | "support-sampled" | "axis-box" => {}
            other => {
                return Err(ExpError::Config(format!(
                    "unknown diameter method '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Stable digest over the canonical serialized config; stamped into
    /// every emitted CSV so data rows are traceable to their settings.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn diameter_method(&self) -> sme_core::DiameterMethod {
        match self.diameter_method.as_str() {
            "support-sampled" => sme_core::DiameterMethod::SupportSampled,
            "axis-box" => sme_core::DiameterMethod::AxisBox,
            _ => sme_core::DiameterMethod::ExactVertex,
        }
    }

    pub fn system_model(&self) -> Result<SystemModel, ExpError> {
        let sys = self
            .system
            .as_ref()
            .ok_or_else(|| ExpError::Config("missing [system] section".into()))?;
        let n_x = sys.a.len();
        if n_x == 0 || sys.a.iter().any(|r| r.len() != n_x) {
            return Err(ExpError::Config("system matrix must be square".into()));
        }
        let a = DMatrix::from_fn(n_x, n_x, |i, j| sys.a[i][j]);
        let model = match &sys.b {
            Some(b_rows) => {
                let n_u = b_rows.first().map_or(0, |r| r.len());
                if b_rows.len() != n_x || b_rows.iter().any(|r| r.len() != n_u) {
                    return Err(ExpError::Config("input matrix shape mismatch".into()));
                }
                let b = DMatrix::from_fn(n_x, n_u, |i, j| b_rows[i][j]);
                SystemModel::new(a, b)
            }
            None => SystemModel::autonomous(a),
        };
        model.map_err(|e| ExpError::Config(e.to_string()))
    }

    pub fn x0(&self, n_x: usize) -> DVector<f64> {
        match self.system.as_ref().and_then(|s| s.x0.as_ref()) {
            Some(x0) => DVector::from_vec(x0.clone()),
            None => DVector::zeros(n_x),
        }
    }

    pub fn disturbance_model(&self, dim: usize) -> Result<DisturbanceModel, ExpError> {
        let d = self
            .disturbance
            .as_ref()
            .ok_or_else(|| ExpError::Config("missing [disturbance] section".into()))?;
        build_disturbance(&d.kind, d.w_max, d.sigma, dim)
    }

    pub fn input_policy(&self, n_u: usize) -> Result<InputPolicy, ExpError> {
        let Some(input) = &self.input else {
            return Ok(InputPolicy::None);
        };
        match input.kind.as_str() {
            "none" => Ok(InputPolicy::None),
            "iid" => {
                if n_u == 0 {
                    return Err(ExpError::Config(
                        "iid input policy on an autonomous system".into(),
                    ));
                }
                let u_max = input
                    .u_max
                    .ok_or_else(|| ExpError::Config("iid input needs u_max".into()))?;
                let model = match input.sigma {
                    Some(sigma) => DisturbanceModel::truncated_gaussian(u_max, sigma, n_u),
                    None => DisturbanceModel::uniform(u_max, n_u),
                };
                Ok(InputPolicy::IidBounded(model))
            }
            other => Err(ExpError::Config(format!("unknown input kind '{other}'"))),
        }
    }
}

pub fn build_disturbance(
    kind: &str,
    w_max: f64,
    sigma: Option<f64>,
    dim: usize,
) -> Result<DisturbanceModel, ExpError> {
    match kind {
        "uniform" => Ok(DisturbanceModel::uniform(w_max, dim)),
        "boundary-uniform" => Ok(DisturbanceModel::boundary_uniform(w_max, dim)),
        "truncated-gaussian" => {
            let sigma =
                sigma.ok_or_else(|| ExpError::Config("truncated-gaussian needs sigma".into()))?;
            Ok(DisturbanceModel::truncated_gaussian(w_max, sigma, dim))
        }
        other => Err(ExpError::Config(format!(
            "unknown disturbance kind '{other}'"
        ))),
    }
}
