//! Pipeline settings, read from a flat TOML file. Every key is optional.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adaptation::AdaptationSpec;
use crate::personality::{Anchors, RateBand};
use crate::scheduler::SchedulerConfig;
use crate::time::Millis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub stroke_lead_s: f64,
    pub hold_threshold_s: f64,
    pub prep_duration_s: f64,
    pub retract_duration_s: f64,
    pub retract_on_turn_end: bool,
    pub expanse_delta_cm: f64,
    pub height_delta_cm: f64,
    pub outwardness_delta_cm: f64,
    pub speed_factor: f64,
    pub scale_factor: f64,
    pub adapted_rate_min: f64,
    pub adapted_rate_max: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let s = SchedulerConfig::default();
        let a = AdaptationSpec::default();
        PipelineConfig {
            stroke_lead_s: 0.2,
            hold_threshold_s: s.hold_threshold.as_secs_f64(),
            prep_duration_s: s.prep_duration.as_secs_f64(),
            retract_duration_s: s.retract_duration.as_secs_f64(),
            retract_on_turn_end: s.retract_on_turn_end,
            expanse_delta_cm: a.expanse_delta_cm,
            height_delta_cm: a.height_delta_cm,
            outwardness_delta_cm: a.outwardness_delta_cm,
            speed_factor: a.speed_factor,
            scale_factor: a.scale_factor,
            adapted_rate_min: a.rate_band.min,
            adapted_rate_max: a.rate_band.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Toml(String),
    #[error("config key `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

fn secs(key: &'static str, v: f64) -> Result<Millis, ConfigError> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(ConfigError::Invalid {
            key,
            message: format!("{v} is not a non-negative number of seconds"),
        });
    }
    Millis::from_secs_f64(v).ok_or(ConfigError::Invalid {
        key,
        message: "out of range".into(),
    })
}

impl PipelineConfig {
    pub fn from_toml(source: &str) -> Result<PipelineConfig, ConfigError> {
        let cfg: PipelineConfig =
            toml::from_str(source).map_err(|e| ConfigError::Toml(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scheduler(false)?
            .validate()
            .map_err(|e| ConfigError::Invalid {
                key: "scheduler settings",
                message: e.to_string(),
            })?;
        self.lead()?;
        self.adaptation()
            .validate()
            .map_err(|e| ConfigError::Invalid {
                key: "adaptation settings",
                message: e.to_string(),
            })
    }

    pub fn lead(&self) -> Result<Millis, ConfigError> {
        secs("stroke_lead_s", self.stroke_lead_s)
    }

    pub fn scheduler(&self, strict: bool) -> Result<SchedulerConfig, ConfigError> {
        Ok(SchedulerConfig {
            hold_threshold: secs("hold_threshold_s", self.hold_threshold_s)?,
            prep_duration: secs("prep_duration_s", self.prep_duration_s)?,
            retract_duration: secs("retract_duration_s", self.retract_duration_s)?,
            retract_on_turn_end: self.retract_on_turn_end,
            strict,
        })
    }

    pub fn adaptation(&self) -> AdaptationSpec {
        AdaptationSpec {
            rate_band: RateBand {
                min: self.adapted_rate_min,
                max: self.adapted_rate_max,
            },
            expanse_delta_cm: self.expanse_delta_cm,
            height_delta_cm: self.height_delta_cm,
            outwardness_delta_cm: self.outwardness_delta_cm,
            speed_factor: self.speed_factor,
            scale_factor: self.scale_factor,
        }
    }

    /// Digest of everything that shapes the compiled scripts, including the
    /// personality anchors.
    pub fn fingerprint(&self, anchors: &Anchors) -> String {
        let canon = serde_json::to_string(&(self, anchors)).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
