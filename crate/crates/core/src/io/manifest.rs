//! Cohort manifests: `subject,movement,rater,repetition,side,path,rom_deg`.
//!
//! Each row names either a recording file (`path`, relative to the manifest) or a
//! precomputed `rom_deg`, never both.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::landmark::Side;

const COLUMNS: [&str; 7] = ["subject", "movement", "rater", "repetition", "side", "path", "rom_deg"];

#[derive(Debug, Clone, PartialEq)]
pub enum ManifestInput {
    Recording(PathBuf),
    Rom(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub subject: String,
    pub movement: String,
    pub rater: String,
    pub repetition: u32,
    pub side: Option<Side>,
    pub input: ManifestInput,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CohortManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct Row {
    subject: String,
    movement: String,
    rater: String,
    repetition: u32,
    side: String,
    path: String,
    rom_deg: Option<f64>,
}

impl CohortManifest {
    /// Loads and validates a manifest: unique keys, exactly one input per row, and every
    /// referenced file present.
    pub fn load(path: &Path) -> Result<Self> {
        let schema = |message: String| Error::Schema {
            path: path.to_path_buf(),
            message,
        };
        let base = path.parent().unwrap_or(Path::new("."));
        let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            kind => schema(format!("{kind:?}")),
        })?;
        let headers = reader
            .headers()
            .map_err(|e| schema(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect::<Vec<_>>();
        if headers != COLUMNS {
            return Err(schema(format!(
                "expected columns {}, found {}",
                COLUMNS.join(","),
                headers.join(",")
            )));
        }

        let mut entries = Vec::new();
        let mut keys = BTreeSet::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            };
            let row = row.map_err(|e| parse_err(e.to_string()))?;
            let side = match row.side.trim() {
                "" => None,
                s => Some(s.parse::<Side>().map_err(|e| parse_err(e.to_string()))?),
            };
            let input = match (row.path.trim(), row.rom_deg) {
                ("", Some(v)) if v.is_finite() => ManifestInput::Rom(v),
                ("", Some(v)) => return Err(parse_err(format!("rom_deg {v} is not finite"))),
                ("", None) => return Err(parse_err("row needs a path or a rom_deg".into())),
                (p, None) => {
                    let resolved = base.join(p);
                    if !resolved.is_file() {
                        return Err(parse_err(format!(
                            "recording file {} does not exist",
                            resolved.display()
                        )));
                    }
                    ManifestInput::Recording(resolved)
                }
                (_, Some(_)) => return Err(parse_err("row gives both a path and a rom_deg".into())),
            };
            let key = (
                row.subject.clone(),
                row.movement.clone(),
                row.rater.clone(),
                row.repetition,
            );
            if !keys.insert(key) {
                return Err(parse_err(format!(
                    "duplicate entry for subject {}, movement {}, rater {}, repetition {}",
                    row.subject, row.movement, row.rater, row.repetition
                )));
            }
            entries.push(ManifestEntry {
                subject: row.subject,
                movement: row.movement,
                rater: row.rater,
                repetition: row.repetition,
                side,
                input,
            });
        }
        if entries.is_empty() {
            return Err(schema("manifest has no entries".into()));
        }
        Ok(CohortManifest { entries })
    }
}
