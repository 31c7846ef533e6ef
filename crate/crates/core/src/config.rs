//! TOML experiment configuration.
//!
//! Keys mirror the usual simulation-settings table: lengths in metres,
//! angles in degrees, powers in dBm, rates in bits per channel use.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{db_to_linear, PathLossModel};
use crate::geometry::UserRegion;
use crate::montecarlo::{Scenario, DEFAULT_GRID_POINTS};
use crate::noma::{NomaConfig, OmaDof};
use crate::population::{mean_user_count, Placement, UserCount};

pub const DEFAULT_DROPS: u64 = 20_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossKey {
    /// `1 + d^gamma`
    #[default]
    Distance,
    /// close-in reference distance model, needs `fc_ghz`
    Ci,
}

/// Either an explicit list or an inclusive `start..=stop` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Altitudes {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Altitudes {
    pub fn resolve(&self) -> Result<Vec<f64>, ConfigError> {
        match self {
            Altitudes::List(list) => Ok(list.clone()),
            Altitudes::Range { start, stop, step } => {
                if !(*step > 0.0) || !step.is_finite() {
                    return Err(invalid("altitudes", format!("range step must be > 0, got {step}")));
                }
                if !(stop >= start) {
                    return Err(invalid("altitudes", format!("range stop {stop} is below start {start}")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..n).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

fn default_lambda() -> f64 {
    1.0
}
fn default_grid() -> usize {
    DEFAULT_GRID_POINTS
}
fn default_drops() -> u64 {
    DEFAULT_DROPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub l1_m: f64,
    pub l2_m: f64,
    pub delta_total_deg: f64,
    pub phi_e_deg: f64,
    #[serde(default = "default_lambda")]
    pub lambda_per_m2: f64,
    pub n0_dbm: f64,
    pub ptx_dbm: f64,
    #[serde(default)]
    pub pl_model: PathLossKey,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub fc_ghz: Option<f64>,
    pub m_elements: u32,
    pub beta_i_sq: f64,
    pub r_i_bpcu: f64,
    pub r_j_bpcu: f64,
    #[serde(default)]
    pub oma_dof: OmaDof,
    #[serde(default)]
    pub fixed_k: Option<usize>,
    pub altitudes: Altitudes,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_drops")]
    pub drops: u64,
    pub seed: u64,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Checks every key and builds the simulation scenario.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let finite = |key: &'static str, v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid(key, format!("must be finite, got {v}")))
            }
        };
        let l1 = finite("l1_m", self.l1_m)?;
        let l2 = finite("l2_m", self.l2_m)?;
        if l1 < 0.0 {
            return Err(invalid("l1_m", format!("must be >= 0, got {l1}")));
        }
        if l2 <= l1 {
            return Err(invalid("l2_m", format!("must exceed l1_m = {l1}, got {l2}")));
        }
        let delta = finite("delta_total_deg", self.delta_total_deg)?;
        if !(delta > 0.0 && delta < 360.0) {
            return Err(invalid("delta_total_deg", format!("must lie in (0, 360), got {delta}")));
        }
        let phi_e = finite("phi_e_deg", self.phi_e_deg)?;
        if !(phi_e > 0.0 && phi_e < 180.0) {
            return Err(invalid("phi_e_deg", format!("must lie in (0, 180), got {phi_e}")));
        }
        let lambda = finite("lambda_per_m2", self.lambda_per_m2)?;
        if lambda <= 0.0 {
            return Err(invalid("lambda_per_m2", format!("must be > 0, got {lambda}")));
        }
        let n0 = finite("n0_dbm", self.n0_dbm)?;
        let ptx = finite("ptx_dbm", self.ptx_dbm)?;

        let path_loss = match self.pl_model {
            PathLossKey::Distance => {
                let gamma = self.gamma.ok_or_else(|| invalid("gamma", "required when pl_model = \"distance\""))?;
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(invalid("gamma", format!("must be > 0, got {gamma}")));
                }
                PathLossModel::DistancePower { exponent: gamma }
            }
            PathLossKey::Ci => {
                let fc = self.fc_ghz.ok_or_else(|| invalid("fc_ghz", "required when pl_model = \"ci\""))?;
                if !(fc.is_finite() && fc > 0.0) {
                    return Err(invalid("fc_ghz", format!("must be > 0, got {fc}")));
                }
                PathLossModel::CloseIn { carrier_ghz: fc }
            }
        };
        if self.m_elements == 0 {
            return Err(invalid("m_elements", "must be >= 1"));
        }
        let beta = finite("beta_i_sq", self.beta_i_sq)?;
        if !(0.5..1.0).contains(&beta) {
            return Err(invalid("beta_i_sq", format!("must lie in [0.5, 1), got {beta}")));
        }
        for (key, v) in [("r_i_bpcu", self.r_i_bpcu), ("r_j_bpcu", self.r_j_bpcu)] {
            if !(finite(key, v)? > 0.0) {
                return Err(invalid(key, format!("must be > 0, got {v}")));
            }
        }
        let altitudes = self.altitudes.resolve()?;
        if altitudes.is_empty() {
            return Err(invalid("altitudes", "must not be empty"));
        }
        if let Some(h) = altitudes.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(invalid("altitudes", format!("every altitude must be > 0, got {h}")));
        }
        if self.grid_points < 2 {
            return Err(invalid("grid_points", format!("must be >= 2, got {}", self.grid_points)));
        }
        if self.drops == 0 {
            return Err(invalid("drops", "must be >= 1"));
        }

        let region = UserRegion::new(l1, l2, 0.5 * delta.to_radians()).map_err(|e| invalid("l2_m", e.to_string()))?;
        let users = match self.fixed_k {
            Some(k) => UserCount::Fixed(k),
            None => UserCount::Poisson {
                mean: mean_user_count(&region, lambda).map_err(|e| invalid("lambda_per_m2", e.to_string()))?,
            },
        };
        let noma = NomaConfig::new(beta, self.r_i_bpcu, self.r_j_bpcu, db_to_linear(ptx), db_to_linear(n0), self.oma_dof)
            .map_err(|e| invalid("ptx_dbm", e.to_string()))?;

        Ok(Scenario {
            region,
            users,
            placement: Placement::Uniform,
            elements: self.m_elements,
            beamwidth: phi_e.to_radians(),
            path_loss,
            noma,
            altitudes,
            grid_points: self.grid_points,
            drops: self.drops,
            seed: self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TABLE: &str = r#"
l1_m = 25.0
l2_m = 100.0
delta_total_deg = 0.4
phi_e_deg = 28.0
lambda_per_m2 = 1.0
n0_dbm = -35.0
ptx_dbm = 20.0
pl_model = "distance"
gamma = 2.0
m_elements = 10
beta_i_sq = 0.75
r_i_bpcu = 0.5
r_j_bpcu = 6.0
altitudes = { start = 10.0, stop = 150.0, step = 1.0 }
drops = 1000
seed = 1
"#;

    fn with(line: &str) -> String {
        let key = line.split('=').next().unwrap().trim();
        let mut out: Vec<String> = TABLE
            .lines()
            .filter(|l| l.split('=').next().map(str::trim) != Some(key))
            .map(String::from)
            .collect();
        out.push(line.to_string());
        out.join("\n")
    }

    fn invalid_key(text: &str) -> &'static str {
        match ConfigFile::from_toml(text).unwrap().scenario() {
            Err(ConfigError::Invalid { key, .. }) => key,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn table_config_resolves() {
        let s = ConfigFile::from_toml(TABLE).unwrap().scenario().unwrap();
        assert_eq!(s.altitudes.len(), 141);
        assert_eq!(s.altitudes[0], 10.0);
        assert_eq!(s.altitudes[140], 150.0);
        match s.users {
            UserCount::Poisson { mean } => assert!((mean - 32.72).abs() < 0.01),
            _ => panic!(),
        }
        assert!((s.noma.tx_power_mw() - 100.0).abs() < 1e-9);
        assert!((s.noma.noise_mw() - 3.162_277_660_168_379e-4).abs() < 1e-15);
        assert_eq!(s.grid_points, DEFAULT_GRID_POINTS);
    }

    #[test]
    fn integer_literals_are_accepted() {
        let text = TABLE.replace("25.0", "25").replace("100.0", "100");
        let s = ConfigFile::from_toml(&text).unwrap().scenario().unwrap();
        assert_eq!(s.region.outer(), 100.0);
    }

    #[test]
    fn validation_names_offending_key() {
        assert_eq!(invalid_key(&with("altitudes = []")), "altitudes");
        assert_eq!(invalid_key(&with("l2_m = 10.0")), "l2_m");
        assert_eq!(invalid_key(&with("beta_i_sq = 0.3")), "beta_i_sq");
        assert_eq!(invalid_key(&with("drops = 0")), "drops");
        assert_eq!(invalid_key(&with("pl_model = \"ci\"")), "fc_ghz");
        assert_eq!(invalid_key(&with("phi_e_deg = 0.0")), "phi_e_deg");
        assert_eq!(invalid_key(&with("grid_points = 1")), "grid_points");
        assert_eq!(invalid_key(&with("altitudes = [50.0, -1.0]")), "altitudes");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ConfigFile::from_toml(&with("bogus_key = 1")).unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
    }

    #[test]
    fn fixed_k_and_ci() {
        let text = with("fixed_k = 46") + "\nfc_ghz = 30.0\n";
        let text = text.replace("pl_model = \"distance\"", "pl_model = \"ci\"");
        let s = ConfigFile::from_toml(&text).unwrap().scenario().unwrap();
        assert_eq!(s.users, UserCount::Fixed(46));
        assert_eq!(s.path_loss, PathLossModel::CloseIn { carrier_ghz: 30.0 });
    }
}
