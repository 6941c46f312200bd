use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::landmark::{DEFAULT_MIN_VALID_FRAMES, DEFAULT_VISIBILITY_THRESHOLD};

/// Samples per decomposition cycle: derived from the sample rate, or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecompositionPeriod {
    /// About one second of samples: `max(2, round(effective rate))`.
    #[default]
    Auto,
    Fixed(usize),
}

impl DecompositionPeriod {
    pub fn resolve(self, effective_rate_hz: f64) -> usize {
        match self {
            DecompositionPeriod::Fixed(p) => p,
            DecompositionPeriod::Auto => {
                let rounded = effective_rate_hz.round();
                if rounded.is_finite() && rounded >= 2.0 {
                    rounded as usize
                } else {
                    2
                }
            }
        }
    }
}

impl fmt::Display for DecompositionPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionPeriod::Auto => f.write_str("auto"),
            DecompositionPeriod::Fixed(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for DecompositionPeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(DecompositionPeriod::Auto);
        }
        match s.parse::<usize>() {
            Ok(p) if p >= 2 => Ok(DecompositionPeriod::Fixed(p)),
            _ => Err(Error::Config(format!(
                "decomposition period must be `auto` or an integer >= 2, got `{s}`"
            ))),
        }
    }
}

impl Serialize for DecompositionPeriod {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            DecompositionPeriod::Auto => serializer.serialize_str("auto"),
            DecompositionPeriod::Fixed(p) => serializer.serialize_u64(*p as u64),
        }
    }
}

impl<'de> Deserialize<'de> for DecompositionPeriod {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(p) => DecompositionPeriod::from_str(&p.to_string()),
            Raw::Text(s) => DecompositionPeriod::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Tunables for the ROM pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub visibility_threshold: f64,
    pub min_valid_frames: usize,
    pub decomposition_period: DecompositionPeriod,
    /// Residual outlier threshold in standard deviations.
    pub anomaly_sd: f64,
    /// Relative window below the global maximum in which competing peaks trigger review.
    pub near_tie_fraction: f64,
    /// Number of leading vectors averaged into the reference direction.
    pub baseline_window: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            visibility_threshold: DEFAULT_VISIBILITY_THRESHOLD,
            min_valid_frames: DEFAULT_MIN_VALID_FRAMES,
            decomposition_period: DecompositionPeriod::Auto,
            anomaly_sd: 3.0,
            near_tie_fraction: 0.05,
            baseline_window: 1,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility_threshold) {
            return Err(Error::Config(format!(
                "visibility_threshold {} outside [0, 1]",
                self.visibility_threshold
            )));
        }
        if self.min_valid_frames < 1 {
            return Err(Error::Config("min_valid_frames must be at least 1".into()));
        }
        if self.anomaly_sd.is_nan() || self.anomaly_sd <= 0.0 {
            return Err(Error::Config(format!(
                "anomaly_sd must be positive, got {}",
                self.anomaly_sd
            )));
        }
        if !(0.0..1.0).contains(&self.near_tie_fraction) {
            return Err(Error::Config(format!(
                "near_tie_fraction {} outside [0, 1)",
                self.near_tie_fraction
            )));
        }
        if self.baseline_window < 1 || self.baseline_window > self.min_valid_frames {
            return Err(Error::Config(format!(
                "baseline_window must be between 1 and min_valid_frames ({}), got {}",
                self.min_valid_frames, self.baseline_window
            )));
        }
        Ok(())
    }

    /// Short stable digest of every setting, stored with each result.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }
}
