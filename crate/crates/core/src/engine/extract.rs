use serde::{Deserialize, Serialize};

use super::vectors::{AngleSample, AngleSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedAngle {
    pub t: f64,
    pub alpha_deg: f64,
}

impl From<AngleSample> for TimedAngle {
    fn from(s: AngleSample) -> Self {
        TimedAngle {
            t: s.t,
            alpha_deg: s.alpha_deg,
        }
    }
}

/// The extracted range of motion for one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RomResult {
    pub rom_deg: f64,
    pub peak_t: f64,
    /// Samples removed before the maximum was taken.
    pub anomalies: Vec<TimedAngle>,
    /// Every local maximum of the cleaned series.
    pub candidate_peaks: Vec<TimedAngle>,
    /// Set when two or more candidates lie within the near-tie window of the maximum.
    pub needs_review: bool,
}

impl RomResult {
    /// Candidates inside the near-tie window of `rom_deg`.
    pub fn near_tie_peaks(&self, near_tie_fraction: f64) -> Vec<TimedAngle> {
        let floor = self.rom_deg * (1.0 - near_tie_fraction);
        self.candidate_peaks
            .iter()
            .copied()
            .filter(|p| p.alpha_deg >= floor)
            .collect()
    }
}

/// Interior samples strictly above both neighbours; a flat-topped run counts once, at
/// its first sample.
pub fn local_maxima(samples: &[AngleSample]) -> Vec<AngleSample> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < samples.len() {
        let value = samples[i].alpha_deg;
        if value > samples[i - 1].alpha_deg {
            let mut j = i;
            while j + 1 < samples.len() && samples[j + 1].alpha_deg == value {
                j += 1;
            }
            if j + 1 < samples.len() && samples[j + 1].alpha_deg < value {
                peaks.push(samples[i]);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Removes the anomalous indices and takes the global maximum of what remains.
pub fn extract_rom(series: &AngleSeries, anomalies: &[usize], near_tie_fraction: f64) -> Result<RomResult> {
    let samples = series.samples();
    let mut flagged = vec![false; samples.len()];
    for &i in anomalies {
        if i < flagged.len() {
            flagged[i] = true;
        }
    }
    let (removed, kept): (Vec<_>, Vec<_>) = samples.iter().zip(&flagged).partition(|(_, &f)| f);
    let removed: Vec<TimedAngle> = removed.into_iter().map(|(s, _)| (*s).into()).collect();
    let cleaned: Vec<AngleSample> = kept.into_iter().map(|(s, _)| *s).collect();

    let peak = cleaned
        .iter()
        .copied()
        .reduce(|best, s| if s.alpha_deg > best.alpha_deg { s } else { best })
        .ok_or_else(|| Error::UnusableRecording(format!("all {} samples were removed as anomalies", samples.len())))?;

    let candidates: Vec<TimedAngle> = local_maxima(&cleaned).into_iter().map(Into::into).collect();
    let mut result = RomResult {
        rom_deg: peak.alpha_deg,
        peak_t: peak.t,
        anomalies: removed,
        candidate_peaks: candidates,
        needs_review: false,
    };
    result.needs_review = result.near_tie_peaks(near_tie_fraction).len() >= 2;
    Ok(result)
}
