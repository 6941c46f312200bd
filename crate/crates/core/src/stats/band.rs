use std::fmt;

use serde::{Deserialize, Serialize};

/// Landis–Koch agreement labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "poor/none")]
    PoorNone,
    #[serde(rename = "slight")]
    Slight,
    #[serde(rename = "fair")]
    Fair,
    #[serde(rename = "moderate")]
    Moderate,
    #[serde(rename = "substantial")]
    Substantial,
    #[serde(rename = "almost-perfect")]
    AlmostPerfect,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::PoorNone => "poor/none",
            Band::Slight => "slight",
            Band::Fair => "fair",
            Band::Moderate => "moderate",
            Band::Substantial => "substantial",
            Band::AlmostPerfect => "almost-perfect",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Upper-inclusive bands: (0, 0.2] slight up to (0.8, 1] almost perfect.
pub fn landis_koch_band(icc: f64) -> Band {
    if icc.is_nan() || icc <= 0.0 {
        Band::PoorNone
    } else if icc <= 0.2 {
        Band::Slight
    } else if icc <= 0.4 {
        Band::Fair
    } else if icc <= 0.6 {
        Band::Moderate
    } else if icc <= 0.8 {
        Band::Substantial
    } else {
        Band::AlmostPerfect
    }
}
