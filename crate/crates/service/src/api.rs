//! Request and response bodies. Angles in responses are rounded to two decimals.

use serde::{Deserialize, Serialize, Serializer};

use romkit_core::engine::{RomResult, TimedAngle};
use romkit_core::io::FrameRecord;
use romkit_core::landmark::{Side, Source};
use romkit_core::registry::Orientation;

pub(crate) fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn deg2<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round2(*v))
}

fn opt_deg2<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&round2(*v)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub subject: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordingStatus {
    Recording,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingSummary {
    pub recording_id: String,
    pub movement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub repetition: u32,
    pub source: Source,
    pub status: RecordingStatus,
    /// Full-precision ROM once the recording completed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rom_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub needs_review: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A session as stored on disk and returned by the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub subject: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub recordings: Vec<RecordingSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartRecording {
    pub movement: String,
    #[serde(default)]
    pub side: Option<Side>,
    pub repetition: u32,
    /// Defaults to webcam-pose.
    #[serde(default)]
    pub source: Option<Source>,
    /// Defaults to 15 Hz for webcam-pose and 120 Hz for mocap.
    #[serde(default)]
    pub nominal_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordingStarted {
    pub recording_id: String,
    pub movement: String,
    pub orientation: Orientation,
    pub orientation_hint: String,
    /// The measured segment in `A -> B` form.
    pub segment: String,
    pub segment_landmarks: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameBatch {
    pub frames: Vec<FrameRecord>,
}

/// A frame refused by the service, identified by its position in the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRejection {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveAngleUpdate {
    /// Time of the latest frame that yielded an angle.
    pub t: Option<f64>,
    #[serde(serialize_with = "opt_deg2")]
    pub alpha: Option<f64>,
    #[serde(serialize_with = "opt_deg2")]
    pub running_max: Option<f64>,
    pub frames_received: usize,
    pub dropped_low_visibility: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejected: Vec<FrameRejection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Angle {
    pub t: f64,
    #[serde(serialize_with = "deg2")]
    pub alpha_deg: f64,
}

impl From<&TimedAngle> for Angle {
    fn from(a: &TimedAngle) -> Self {
        Angle {
            t: a.t,
            alpha_deg: a.alpha_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RomResponse {
    pub recording_id: String,
    #[serde(serialize_with = "deg2")]
    pub rom_deg: f64,
    pub peak_t: f64,
    pub anomalies: Vec<Angle>,
    pub candidate_peaks: Vec<Angle>,
    pub needs_review: bool,
    pub warnings: Vec<String>,
    pub config_fingerprint: String,
}

impl RomResponse {
    pub fn new(recording_id: String, rom: &RomResult, warnings: Vec<String>, config_fingerprint: String) -> Self {
        RomResponse {
            recording_id,
            rom_deg: rom.rom_deg,
            peak_t: rom.peak_t,
            anomalies: rom.anomalies.iter().map(Angle::from).collect(),
            candidate_peaks: rom.candidate_peaks.iter().map(Angle::from).collect(),
            needs_review: rom.needs_review,
            warnings,
            config_fingerprint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub recording_id: String,
    pub repetition: u32,
    pub source: Source,
    #[serde(serialize_with = "deg2")]
    pub rom_deg: f64,
    pub needs_review: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementResults {
    pub movement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub repetitions: Vec<RepetitionResult>,
    #[serde(serialize_with = "deg2")]
    pub mean_deg: f64,
    #[serde(serialize_with = "deg2")]
    pub range_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResults {
    pub session_id: String,
    pub movements: Vec<MovementResults>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MovementInfo {
    pub name: String,
    pub orientation: Orientation,
    pub orientation_hint: String,
    pub requires_side: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}
