use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::policy::{Algorithm, PolicyParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

/// Everything needed to reproduce one trial. Serialized as a flat JSON
/// object; omitted keys take the defaults below and unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    /// Width of the square field in meters.
    pub field_size: f64,
    pub grid_cols: usize,
    pub grid_rows: usize,
    /// Robot count including the base station.
    pub robots: usize,
    /// Patroller speed, m/s.
    pub speed: f64,
    /// Range within which links are established.
    pub d_s: f64,
    /// Range up to which established links persist.
    pub d_c: f64,
    /// Candidate radius for the local reactive rule.
    pub delta: f64,
    pub epsilon_max: f64,
    pub epsilon_switch: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub epsilon_threshold: f64,
    /// Distance from a grid center that counts as visiting it.
    pub visit_radius: f64,
    pub start_time: i64,
    /// Last simulated second (inclusive).
    pub duration: i64,
    pub seed: u64,
    pub algorithm: Algorithm,
}

impl Default for TrialConfig {
    fn default() -> Self {
        let p = PolicyParams::default();
        TrialConfig {
            field_size: 600.0,
            grid_cols: 20,
            grid_rows: 20,
            robots: 8,
            speed: 1.25,
            d_s: 90.0,
            d_c: 180.0,
            delta: p.delta,
            epsilon_max: p.epsilon_max,
            epsilon_switch: p.epsilon_switch,
            eta1: p.eta1,
            eta2: p.eta2,
            epsilon_threshold: p.epsilon_threshold,
            visit_radius: 3.0,
            start_time: 0,
            duration: 40_000,
            seed: 0,
            algorithm: Algorithm::Lr,
        }
    }
}

impl TrialConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: TrialConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn cell_size(&self) -> f64 {
        self.field_size / self.grid_cols as f64
    }

    pub fn grids(&self) -> usize {
        self.grid_cols * self.grid_rows
    }

    pub fn policy_params(&self) -> PolicyParams {
        PolicyParams {
            epsilon_max: self.epsilon_max,
            epsilon_switch: self.epsilon_switch,
            delta: self.delta,
            eta1: self.eta1,
            eta2: self.eta2,
            epsilon_threshold: self.epsilon_threshold,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |key, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("must be non-negative, got {v}")))
            }
        };
        positive("field_size", self.field_size)?;
        if self.grid_cols == 0 {
            return Err(invalid("grid_cols", "must be at least 1"));
        }
        if self.grid_rows == 0 {
            return Err(invalid("grid_rows", "must be at least 1"));
        }
        if self.robots < 2 {
            return Err(invalid(
                "robots",
                format!("need the base plus one patroller, got {}", self.robots),
            ));
        }
        positive("speed", self.speed)?;
        positive("d_s", self.d_s)?;
        positive("d_c", self.d_c)?;
        if self.d_s >= self.d_c {
            return Err(invalid(
                "d_s",
                format!("must be below d_c ({} >= {})", self.d_s, self.d_c),
            ));
        }
        positive("delta", self.delta)?;
        let half_diagonal = self.cell_size() * std::f64::consts::SQRT_2 / 2.0;
        if self.delta < half_diagonal {
            return Err(invalid(
                "delta",
                format!("must be at least half a cell diagonal ({half_diagonal:.3} m)"),
            ));
        }
        positive("epsilon_max", self.epsilon_max)?;
        positive("epsilon_switch", self.epsilon_switch)?;
        if self.epsilon_switch >= self.epsilon_max {
            return Err(invalid("epsilon_switch", "must be below epsilon_max"));
        }
        non_negative("eta1", self.eta1)?;
        non_negative("eta2", self.eta2)?;
        non_negative("epsilon_threshold", self.epsilon_threshold)?;
        non_negative("visit_radius", self.visit_radius)?;
        if self.duration <= self.start_time {
            return Err(invalid(
                "duration",
                format!("must exceed start_time ({})", self.start_time),
            ));
        }
        Ok(())
    }
}
