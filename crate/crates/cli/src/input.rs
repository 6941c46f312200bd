use std::path::Path;

use anyhow::{bail, Context, Result};

use romkit_core::engine::{evaluate_movement, Evaluation};
use romkit_core::io::{read_frames_jsonl, read_mocap_csv, AppConfig, MOCAP_RATE_HZ};
use romkit_core::landmark::{Recording, RecordingMeta, Side, Source};
use romkit_core::registry::MovementDefinition;

/// Descriptive fields that replace or complete those stored in a recording.
#[derive(Debug, Clone, Default)]
pub struct MetaOverrides {
    pub movement: Option<String>,
    pub side: Option<Side>,
    pub subject: Option<String>,
    pub repetition: Option<u32>,
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a JSONL frame file or a mocap marker CSV. Marker CSVs carry no metadata, so
/// movement and subject must be supplied.
pub fn load_recording(path: &Path, overrides: &MetaOverrides, config: &AppConfig) -> Result<Recording> {
    if is_csv(path) {
        let (Some(movement), Some(subject)) = (&overrides.movement, &overrides.subject) else {
            bail!("{}: marker CSV input needs a movement and a subject", path.display());
        };
        let meta = RecordingMeta {
            source: Source::Mocap,
            movement: movement.clone(),
            subject: subject.clone(),
            repetition: overrides.repetition.unwrap_or(1),
            nominal_rate: MOCAP_RATE_HZ,
            side: overrides.side,
        };
        return Ok(read_mocap_csv(path, &config.marker_map()?, meta)?);
    }

    let recording = read_frames_jsonl(path)?;
    let (mut meta, frames) = recording.into_parts();
    if let Some(m) = &overrides.movement {
        meta.movement = m.clone();
    }
    if let Some(s) = overrides.side {
        meta.side = Some(s);
    }
    if let Some(s) = &overrides.subject {
        meta.subject = s.clone();
    }
    if let Some(r) = overrides.repetition {
        meta.repetition = r;
    }
    Ok(Recording::new(meta, frames)?)
}

pub fn evaluate(recording: &Recording, config: &AppConfig) -> Result<(MovementDefinition, Evaluation)> {
    let meta = recording.meta();
    let definition = config
        .registry()?
        .lookup(&meta.movement, meta.side)
        .context("movement lookup")?;
    let evaluation = evaluate_movement(recording, &definition, &config.engine)?;
    Ok((definition, evaluation))
}

pub fn load_and_evaluate(
    path: &Path,
    overrides: &MetaOverrides,
    config: &AppConfig,
) -> Result<(Recording, MovementDefinition, Evaluation)> {
    let recording = load_recording(path, overrides, config)?;
    let (definition, evaluation) = evaluate(&recording, config)?;
    Ok((recording, definition, evaluation))
}
