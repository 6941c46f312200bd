//! Line-delimited JSON landmark streams.
//!
//! The first line is `{"header": {...}}`; each following line is one frame,
//! `{"t": 0.0667, "lm": {"NOSE": [x, y, z, visibility], ...}}`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::{LandmarkFrame, LandmarkId, LandmarkSample, Recording, RecordingMeta, Side, Source, Topology};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingFileHeader {
    pub format_version: u32,
    pub source: Source,
    pub topology: Topology,
    pub movement: String,
    pub subject: String,
    pub repetition: u32,
    pub nominal_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

impl RecordingFileHeader {
    pub fn from_meta(meta: &RecordingMeta) -> Self {
        RecordingFileHeader {
            format_version: FORMAT_VERSION,
            source: meta.source,
            topology: meta.source.topology(),
            movement: meta.movement.clone(),
            subject: meta.subject.clone(),
            repetition: meta.repetition,
            nominal_rate: meta.nominal_rate,
            side: meta.side,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.format_version != FORMAT_VERSION {
            return Err(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if self.topology != self.source.topology() {
            return Err(format!(
                "topology {} does not match source {}",
                self.topology, self.source
            ));
        }
        if !(self.nominal_rate > 0.0 && self.nominal_rate.is_finite()) {
            return Err(format!("nominal_rate {} must be positive", self.nominal_rate));
        }
        Ok(())
    }

    pub fn into_meta(self) -> RecordingMeta {
        RecordingMeta {
            source: self.source,
            movement: self.movement,
            subject: self.subject,
            repetition: self.repetition,
            nominal_rate: self.nominal_rate,
            side: self.side,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    header: RecordingFileHeader,
}

/// The wire form of one frame, shared by the file format and the HTTP API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub t: f64,
    pub lm: BTreeMap<String, Vec<f64>>,
}

impl FrameRecord {
    /// Validates names and values against `source`. Mocap arrays may omit visibility,
    /// which then defaults to 1.0.
    pub fn into_frame(self, source: Source) -> Result<LandmarkFrame> {
        let topology = source.topology();
        let mut landmarks = BTreeMap::new();
        for (name, values) in &self.lm {
            let id = LandmarkId::parse(topology, name)?;
            let visibility = match (values.len(), source) {
                (4, _) => values[3],
                (3, Source::Mocap) => 1.0,
                (n, _) => {
                    return Err(Error::InvalidFrame(format!(
                        "landmark {name} at t={}s has {n} values, expected [x, y, z, visibility]",
                        self.t
                    )))
                }
            };
            let position = Point3::new(values[0], values[1], values[2]);
            landmarks.insert(id, LandmarkSample::new(position, visibility));
        }
        LandmarkFrame::new(self.t, landmarks)
    }

    pub fn from_frame(frame: &LandmarkFrame) -> Self {
        FrameRecord {
            t: frame.t(),
            lm: frame
                .landmarks()
                .iter()
                .map(|(id, s)| {
                    let p = s.position;
                    (id.name().to_string(), vec![p.x, p.y, p.z, s.visibility])
                })
                .collect(),
        }
    }
}

fn number(out: &mut String, v: f64) {
    out.push_str(&serde_json::to_string(&v).expect("finite floats serialize"));
}

/// The header line, without its trailing newline.
pub fn header_line(meta: &RecordingMeta) -> String {
    serde_json::to_string(&HeaderLine {
        header: RecordingFileHeader::from_meta(meta),
    })
    .expect("header serializes")
}

/// One frame line in canonical form (landmarks in topology order, visibility always
/// present), without its trailing newline.
pub fn frame_line(frame: &LandmarkFrame) -> String {
    let mut out = String::from("{\"t\":");
    number(&mut out, frame.t());
    out.push_str(",\"lm\":{");
    for (i, (id, s)) in frame.landmarks().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('"');
        out.push_str(id.name());
        out.push_str("\":[");
        for (j, v) in [s.position.x, s.position.y, s.position.z, s.visibility]
            .into_iter()
            .enumerate()
        {
            if j > 0 {
                out.push(',');
            }
            number(&mut out, v);
        }
        out.push(']');
    }
    out.push_str("}}");
    out
}

pub fn to_jsonl_string(recording: &Recording) -> String {
    let mut out = header_line(recording.meta());
    out.push('\n');
    for frame in recording.frames() {
        out.push_str(&frame_line(frame));
        out.push('\n');
    }
    out
}

pub fn write_frames_jsonl(path: &Path, recording: &Recording) -> Result<()> {
    fs::write(path, to_jsonl_string(recording)).map_err(|e| Error::io(path, e))
}

/// Parses a frame file held in memory. `path` is only used in error messages.
///
/// A final line without a newline that does not parse is treated as an interrupted
/// append and skipped.
pub fn parse_frames_jsonl(text: &str, path: &Path) -> Result<Recording> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let last = lines.len();

    let first = lines
        .first()
        .ok_or_else(|| parse_err(1, "empty file; expected a header line".into()))?;
    let header: HeaderLine = serde_json::from_str(first).map_err(|e| parse_err(1, format!("invalid header: {e}")))?;
    header.header.validate().map_err(|m| parse_err(1, m))?;
    let meta = header.header.into_meta();

    let mut frames: Vec<LandmarkFrame> = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let record: FrameRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(_) if line_no == last && !complete => break,
            Err(e) => return Err(parse_err(line_no, e.to_string())),
        };
        let frame = record
            .into_frame(meta.source)
            .map_err(|e| parse_err(line_no, e.to_string()))?;
        if let Some(prev) = frames.last() {
            if frame.t() <= prev.t() {
                return Err(Error::Ordering {
                    prev: prev.t(),
                    t: frame.t(),
                }
                .context(format!("{}:{line_no}", path.display())));
            }
        }
        frames.push(frame);
    }
    Recording::new(meta, frames)
}

pub fn read_frames_jsonl(path: &Path) -> Result<Recording> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_frames_jsonl(&text, path)
}

/// Incremental writer used while a recording is still being captured.
#[derive(Debug)]
pub struct FrameAppender {
    file: fs::File,
    path: std::path::PathBuf,
}

impl FrameAppender {
    /// Creates the file and writes its header.
    pub fn create(path: &Path, meta: &RecordingMeta) -> Result<Self> {
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(file, "{}", header_line(meta)).map_err(|e| Error::io(path, e))?;
        Ok(FrameAppender {
            file,
            path: path.to_path_buf(),
        })
    }

    /// Appends frames as complete lines in one write.
    pub fn append(&mut self, frames: &[LandmarkFrame]) -> Result<()> {
        let mut buf = String::new();
        for frame in frames {
            buf.push_str(&frame_line(frame));
            buf.push('\n');
        }
        self.file
            .write_all(buf.as_bytes())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn sync(&mut self) -> Result<()> {
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }
}
