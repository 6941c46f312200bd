//! Append-only result store, one JSON object per line.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::RomResult;
use crate::error::{Error, Result};
use crate::landmark::Side;
use crate::stats::Measurement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub subject: String,
    pub movement: String,
    pub rater: String,
    pub repetition: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub rom_deg: f64,
    /// Absent for values supplied directly rather than measured from a recording.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_t: Option<f64>,
    pub needs_review: bool,
    pub anomaly_count: usize,
    pub config_fingerprint: String,
}

/// Identifies the measurement a result belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultContext {
    pub subject: String,
    pub movement: String,
    pub rater: String,
    pub repetition: u32,
    pub side: Option<Side>,
    pub config_fingerprint: String,
}

impl ResultRecord {
    pub fn new(result: &RomResult, ctx: ResultContext) -> Self {
        ResultRecord {
            subject: ctx.subject,
            movement: ctx.movement,
            rater: ctx.rater,
            repetition: ctx.repetition,
            side: ctx.side,
            rom_deg: result.rom_deg,
            peak_t: Some(result.peak_t),
            needs_review: result.needs_review,
            anomaly_count: result.anomalies.len(),
            config_fingerprint: ctx.config_fingerprint,
        }
    }

    /// A record for an externally measured ROM, such as a goniometer reading.
    pub fn supplied(rom_deg: f64, ctx: ResultContext) -> Self {
        ResultRecord {
            subject: ctx.subject,
            movement: ctx.movement,
            rater: ctx.rater,
            repetition: ctx.repetition,
            side: ctx.side,
            rom_deg,
            peak_t: None,
            needs_review: false,
            anomaly_count: 0,
            config_fingerprint: ctx.config_fingerprint,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("result records serialize")
    }

    /// Movement labels include the side for limb movements so left and right are
    /// analysed separately.
    pub fn to_measurement(&self) -> Measurement {
        let movement = match self.side {
            Some(side) => format!("{} ({side})", self.movement),
            None => self.movement.clone(),
        };
        Measurement {
            subject: self.subject.clone(),
            movement,
            rater: self.rater.clone(),
            repetition: self.repetition,
            rom_deg: self.rom_deg,
        }
    }
}

/// Appends one record as a single write so concurrent readers never see a torn line
/// from a successful call.
pub fn append_result(path: &Path, record: &ResultRecord) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut line = record.to_line();
    line.push('\n');
    file.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    file.sync_data().map_err(|e| Error::io(path, e))
}

/// Reads every complete record. A missing file reads as empty; an unterminated final
/// line is an append in progress and is skipped.
pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    parse_results(&text, path)
}

pub fn parse_results(text: &str, path: &Path) -> Result<Vec<ResultRecord>> {
    let complete_upto = text.rfind('\n').map_or(0, |i| i + 1);
    text[..complete_upto]
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::TimedAngle;

    fn record(rep: u32) -> ResultRecord {
        let rom = RomResult {
            rom_deg: 41.123456789,
            peak_t: 2.5,
            anomalies: vec![TimedAngle {
                t: 1.0,
                alpha_deg: 80.0,
            }],
            candidate_peaks: vec![],
            needs_review: false,
        };
        ResultRecord::new(
            &rom,
            ResultContext {
                subject: "s03".into(),
                movement: "Elbow Flexion".into(),
                rater: "webcam-pose".into(),
                repetition: rep,
                side: Some(Side::Left),
                config_fingerprint: "0123456789abcdef".into(),
            },
        )
    }

    #[test]
    fn append_then_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.jsonl");
        assert!(read_results(&path).unwrap().is_empty());
        append_result(&path, &record(1)).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);
        append_result(&path, &record(2)).unwrap();
        let back = read_results(&path).unwrap();
        assert_eq!(back, vec![record(1), record(2)]);
        assert_eq!(back[0].anomaly_count, 1);
        assert_eq!(back[0].to_measurement().movement, "Elbow Flexion (left)");
    }

    #[test]
    fn supplied_values_omit_the_peak_time() {
        let measured = record(1);
        let ctx = ResultContext {
            subject: "s03".into(),
            movement: "Elbow Flexion".into(),
            rater: "goniometer".into(),
            repetition: 1,
            side: None,
            config_fingerprint: "supplied".into(),
        };
        let line = ResultRecord::supplied(131.5, ctx).to_line();
        assert!(!line.contains("peak_t"));
        let back = parse_results(&format!("{line}\n"), Path::new("r")).unwrap();
        assert_eq!((back[0].rom_deg, back[0].peak_t), (131.5, None));
        assert_eq!(measured.peak_t, Some(2.5));
    }

    #[test]
    fn partial_tail_is_ignored() {
        let text = format!("{}\n{}", record(1).to_line(), &record(2).to_line()[..20]);
        assert_eq!(parse_results(&text, Path::new("r")).unwrap().len(), 1);
        let text = format!("{}\nnot json\n", record(1).to_line());
        assert!(parse_results(&text, Path::new("r")).is_err());
    }
}
