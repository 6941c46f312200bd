use serde::Serialize;

use super::anomaly::detect_anomalies;
use super::config::EngineConfig;
use super::decompose::{seasonal_decompose, DecompositionResult};
use super::extract::{extract_rom, RomResult};
use super::vectors::{angle_series, segment_vectors, AngleSeries};
use crate::error::{Error, Result};
use crate::landmark::{filter_visibility, Recording};
use crate::registry::MovementDefinition;

/// A ROM result together with every intermediate product of the pipeline.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub rom: RomResult,
    pub series: AngleSeries,
    /// `None` when the series was too short to decompose.
    pub decomposition: Option<DecompositionResult>,
    pub anomaly_indices: Vec<usize>,
    /// Timestamps of frames discarded by visibility gating.
    pub dropped: Vec<f64>,
    pub period: usize,
    pub warnings: Vec<String>,
}

/// One row of the per-sample diagnostics table.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub alpha_deg: f64,
    pub trend: Option<f64>,
    pub seasonal: Option<f64>,
    pub residual: Option<f64>,
    pub anomaly: bool,
}

impl Evaluation {
    pub fn series_rows(&self) -> Vec<SeriesRow> {
        self.series
            .samples()
            .iter()
            .enumerate()
            .map(|(i, s)| SeriesRow {
                t: s.t,
                alpha_deg: s.alpha_deg,
                trend: self.decomposition.as_ref().and_then(|d| d.trend[i]),
                seasonal: self.decomposition.as_ref().map(|d| d.seasonal[i]),
                residual: self.decomposition.as_ref().and_then(|d| d.residual[i]),
                anomaly: self.anomaly_indices.contains(&i),
            })
            .collect()
    }
}

fn describe(recording: &Recording) -> String {
    let meta = recording.meta();
    format!(
        "{} (subject {}, repetition {})",
        meta.movement, meta.subject, meta.repetition
    )
}

/// Visibility gate, segment vectors, angle series, decomposition, anomaly removal and
/// peak extraction, in that order. No smoothing is applied at any stage.
pub fn evaluate_movement(
    recording: &Recording,
    movement: &MovementDefinition,
    config: &EngineConfig,
) -> Result<Evaluation> {
    evaluate_inner(recording, movement, config).map_err(|e| e.context(describe(recording)))
}

fn evaluate_inner(recording: &Recording, movement: &MovementDefinition, config: &EngineConfig) -> Result<Evaluation> {
    config.validate()?;
    let spec = movement.segment_for(recording.source());
    if spec.topology() != recording.source().topology() {
        return Err(Error::Registry(format!(
            "{} segment `{spec}` does not use the {} topology of this {} recording",
            movement.name,
            recording.source().topology(),
            recording.source()
        )));
    }

    let filtered = filter_visibility(
        recording,
        config.visibility_threshold,
        &spec.landmarks(),
        config.min_valid_frames,
    )?;
    let vectors = segment_vectors(&filtered.recording, spec)?;
    let series = angle_series(&vectors, config.baseline_window)?;

    let rate = filtered
        .recording
        .effective_rate()
        .unwrap_or(recording.meta().nominal_rate);
    let period = config.decomposition_period.resolve(rate);
    let mut warnings = Vec::new();
    let decomposition = match seasonal_decompose(&series.alphas(), period) {
        Ok(d) => Some(d),
        Err(Error::DecompositionInfeasible { len, period }) => {
            warnings.push(format!(
                "series of {len} samples is shorter than two periods ({period}); anomaly removal skipped"
            ));
            None
        }
        Err(e) => return Err(e),
    };
    let anomaly_indices = decomposition
        .as_ref()
        .map(|d| detect_anomalies(d, config.anomaly_sd))
        .unwrap_or_default();
    let rom = extract_rom(&series, &anomaly_indices, config.near_tie_fraction)?;

    Ok(Evaluation {
        rom,
        series,
        decomposition,
        anomaly_indices,
        dropped: filtered.dropped,
        period,
        warnings,
    })
}
