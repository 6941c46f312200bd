//! Marker trajectory CSV exports.
//!
//! The header row holds a `Frame` or `Time` column followed by `MARKER:X`,
//! `MARKER:Y`, `MARKER:Z` triples. A blank coordinate marks the marker as occluded in
//! that row.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::landmark::{LandmarkFrame, LandmarkId, LandmarkSample, Recording, RecordingMeta, Source, Topology};

/// Capture rate assumed for frame-index columns.
pub const MOCAP_RATE_HZ: f64 = 120.0;

/// Maps vendor marker labels to mocap landmark ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarkerNameMap {
    entries: BTreeMap<String, LandmarkId>,
}

impl MarkerNameMap {
    /// With no entries every header marker must already be a canonical mocap name.
    pub fn identity() -> Self {
        MarkerNameMap::default()
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: AsRef<str>,
    {
        let mut entries = BTreeMap::new();
        for (vendor, canonical) in pairs {
            let id = LandmarkId::parse(Topology::Mocap39, canonical.as_ref())?;
            entries.insert(vendor.into(), id);
        }
        Ok(MarkerNameMap { entries })
    }

    pub fn is_identity(&self) -> bool {
        self.entries.is_empty()
    }
}

enum TimeColumn {
    Frame,
    Time,
}

struct MarkerColumns {
    id: LandmarkId,
    xyz: [usize; 3],
}

fn schema(path: &Path, message: String) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        message,
    }
}

fn parse_header(
    path: &Path,
    header: &csv::StringRecord,
    map: &MarkerNameMap,
) -> Result<(TimeColumn, usize, Vec<MarkerColumns>)> {
    let mut time = None;
    let mut axes: BTreeMap<String, [Option<usize>; 3]> = BTreeMap::new();
    for (i, cell) in header.iter().enumerate() {
        let cell = cell.trim();
        match cell.to_ascii_lowercase().as_str() {
            "frame" => time = Some((TimeColumn::Frame, i)),
            "time" => time = Some((TimeColumn::Time, i)),
            _ => {
                let (marker, axis) = cell
                    .rsplit_once(':')
                    .ok_or_else(|| schema(path, format!("column `{cell}` is not MARKER:X/Y/Z")))?;
                let slot = match axis.trim() {
                    "X" | "x" => 0,
                    "Y" | "y" => 1,
                    "Z" | "z" => 2,
                    other => return Err(schema(path, format!("column `{cell}` has unknown axis `{other}`"))),
                };
                axes.entry(marker.trim().to_string()).or_default()[slot] = Some(i);
            }
        }
    }
    let (time_kind, time_col) = time.ok_or_else(|| schema(path, "no Frame or Time column".into()))?;

    let resolve = |marker: &str, cols: &[Option<usize>; 3]| -> Result<[usize; 3]> {
        match cols {
            [Some(x), Some(y), Some(z)] => Ok([*x, *y, *z]),
            _ => Err(schema(path, format!("marker {marker} lacks one of its X/Y/Z columns"))),
        }
    };
    let mut markers = Vec::new();
    if map.is_identity() {
        for (marker, cols) in &axes {
            let id = LandmarkId::parse(Topology::Mocap39, marker).map_err(|_| {
                schema(
                    path,
                    format!("marker `{marker}` is not a mocap-39 name; supply a marker name map"),
                )
            })?;
            markers.push(MarkerColumns {
                id,
                xyz: resolve(marker, cols)?,
            });
        }
    } else {
        for (vendor, id) in &map.entries {
            let cols = axes.get(vendor).ok_or_else(|| {
                schema(
                    path,
                    format!("mapped marker `{vendor}` ({id}) is missing from the header"),
                )
            })?;
            markers.push(MarkerColumns {
                id: *id,
                xyz: resolve(vendor, cols)?,
            });
        }
    }
    Ok((time_kind, time_col, markers))
}

/// Reads a marker CSV into a mocap recording. `meta.source` must be mocap; with a
/// frame-index column the nominal rate is taken as 120 Hz.
pub fn read_mocap_csv(path: &Path, map: &MarkerNameMap, meta: RecordingMeta) -> Result<Recording> {
    if meta.source != Source::Mocap {
        return Err(schema(
            path,
            format!("marker CSV cannot hold a {} recording", meta.source),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let (time_kind, time_col, markers) = parse_header(path, &header, map)?;

    let mut frames = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let cell = |i: usize| record.get(i).unwrap_or("").trim();
        let time_text = cell(time_col);
        let t = match time_kind {
            TimeColumn::Frame => time_text
                .parse::<u64>()
                .map(|idx| idx as f64 / MOCAP_RATE_HZ)
                .map_err(|_| parse_err(format!("frame index `{time_text}` is not a non-negative integer")))?,
            TimeColumn::Time => time_text
                .parse::<f64>()
                .map_err(|_| parse_err(format!("time `{time_text}` is not a number")))?,
        };
        let mut landmarks = BTreeMap::new();
        for m in &markers {
            let texts = m.xyz.map(cell);
            let sample = if texts.iter().any(|s| s.is_empty()) {
                LandmarkSample::dropout()
            } else {
                let mut xyz = [0.0; 3];
                for (slot, text) in xyz.iter_mut().zip(texts) {
                    *slot = text
                        .parse::<f64>()
                        .map_err(|_| parse_err(format!("{} coordinate `{text}` is not a number", m.id)))?;
                }
                LandmarkSample::new(Point3::new(xyz[0], xyz[1], xyz[2]), 1.0)
            };
            landmarks.insert(m.id, sample);
        }
        frames.push(LandmarkFrame::new(t, landmarks).map_err(|e| parse_err(e.to_string()))?);
    }
    let meta = match time_kind {
        TimeColumn::Frame => RecordingMeta {
            nominal_rate: MOCAP_RATE_HZ,
            ..meta
        },
        TimeColumn::Time => meta,
    };
    Recording::new(meta, frames).map_err(|e| e.context(path.display().to_string()))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}
