//! Landmark topologies, frames, recordings, and the visibility gate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::{Endpoint, SegmentSpec};

/// Default confidence floor below which a landmark sample is discarded.
pub const DEFAULT_VISIBILITY_THRESHOLD: f64 = 0.5;
/// Default minimum number of frames that must survive gating.
pub const DEFAULT_MIN_VALID_FRAMES: usize = 10;

/// Pose-estimator landmark set, in the estimator's output order.
const WEBCAM_33: [&str; 33] = [
    "NOSE", "LEYI", "LEYE", "LEYO", "REYI", "REYE", "REYO", "LEAR", "REAR", "MOUL", "MOUR", "LSHO", "RSHO", "LELB",
    "RELB", "LWRI", "RWRI", "LPNK", "RPNK", "LIDX", "RIDX", "LTHM", "RTHM", "LHIP", "RHIP", "LKNE", "RKNE", "LANK",
    "RANK", "LHEL", "RHEL", "LFTI", "RFTI",
];

/// Conventional 39-marker full-body set.
const MOCAP_39: [&str; 39] = [
    "LFHD", "RFHD", "LBHD", "RBHD", "C7", "T10", "CLAV", "STRN", "RBAK", "LSHO", "LUPA", "LELB", "LFRM", "LWRA",
    "LWRB", "LFIN", "RSHO", "RUPA", "RELB", "RFRM", "RWRA", "RWRB", "RFIN", "LASI", "RASI", "LPSI", "RPSI", "LTHI",
    "LKNE", "LTIB", "LANK", "LHEE", "LTOE", "RTHI", "RKNE", "RTIB", "RANK", "RHEE", "RTOE",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Topology {
    #[serde(rename = "webcam-33")]
    Webcam33,
    #[serde(rename = "mocap-39")]
    Mocap39,
}

impl Topology {
    pub fn landmark_names(self) -> &'static [&'static str] {
        match self {
            Topology::Webcam33 => &WEBCAM_33,
            Topology::Mocap39 => &MOCAP_39,
        }
    }

    pub fn landmarks(self) -> impl Iterator<Item = LandmarkId> {
        (0..self.landmark_names().len()).map(move |index| LandmarkId {
            topology: self,
            index: index as u8,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Webcam33 => "webcam-33",
            Topology::Mocap39 => "mocap-39",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a recording's landmarks came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    WebcamPose,
    Mocap,
}

impl Source {
    pub fn topology(self) -> Topology {
        match self {
            Source::WebcamPose => Topology::Webcam33,
            Source::Mocap => Topology::Mocap39,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Source::WebcamPose => "webcam-pose",
            Source::Mocap => "mocap",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "webcam-pose" | "webcam" => Ok(Source::WebcamPose),
            "mocap" => Ok(Source::Mocap),
            other => Err(Error::Config(format!(
                "unknown source `{other}` (expected webcam-pose or mocap)"
            ))),
        }
    }
}

/// A landmark name qualified by its topology.
///
/// Several acronyms (LSHO, LELB, LKNE, ...) exist in both topologies; they are distinct
/// ids because they come from different measurement systems.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LandmarkId {
    topology: Topology,
    index: u8,
}

impl LandmarkId {
    pub fn parse(topology: Topology, name: &str) -> Result<Self> {
        topology
            .landmark_names()
            .iter()
            .position(|candidate| *candidate == name)
            .map(|index| LandmarkId {
                topology,
                index: index as u8,
            })
            .ok_or_else(|| Error::UnknownLandmark {
                name: name.to_string(),
                topology: topology.to_string(),
            })
    }

    pub fn name(self) -> &'static str {
        self.topology.landmark_names()[self.index as usize]
    }

    pub fn topology(self) -> Topology {
        self.topology
    }
}

impl fmt::Debug for LandmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.topology, self.name())
    }
}

impl fmt::Display for LandmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkSample {
    pub position: Point3<f64>,
    /// Detector confidence in `[0, 1]`. Mocap markers carry 1.0, or 0.0 when occluded.
    pub visibility: f64,
}

impl LandmarkSample {
    pub fn new(position: Point3<f64>, visibility: f64) -> Self {
        LandmarkSample { position, visibility }
    }

    /// An occluded marker: the position is meaningless and the visibility is zero.
    pub fn dropout() -> Self {
        LandmarkSample {
            position: Point3::origin(),
            visibility: 0.0,
        }
    }
}

/// One timestamped sample of a set of landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    t: f64,
    landmarks: BTreeMap<LandmarkId, LandmarkSample>,
}

impl LandmarkFrame {
    pub fn new(t: f64, landmarks: BTreeMap<LandmarkId, LandmarkSample>) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidFrame(format!(
                "timestamp {t} must be finite and non-negative"
            )));
        }
        for (id, sample) in &landmarks {
            if !(0.0..=1.0).contains(&sample.visibility) {
                return Err(Error::InvalidFrame(format!(
                    "visibility {} of {id} at t={t}s outside [0, 1]",
                    sample.visibility
                )));
            }
            if !sample.position.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidFrame(format!("non-finite position for {id} at t={t}s")));
            }
        }
        Ok(LandmarkFrame { t, landmarks })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn landmarks(&self) -> &BTreeMap<LandmarkId, LandmarkSample> {
        &self.landmarks
    }

    pub fn get(&self, id: LandmarkId) -> Option<&LandmarkSample> {
        self.landmarks.get(&id)
    }

    pub fn position(&self, id: LandmarkId) -> Result<Point3<f64>> {
        self.get(id).map(|s| s.position).ok_or(Error::MissingLandmark {
            landmark: id.name().to_string(),
            t: self.t,
        })
    }

    /// Visibility of `id`, treating an absent landmark as fully invisible.
    pub fn visibility(&self, id: LandmarkId) -> f64 {
        self.get(id).map_or(0.0, |s| s.visibility)
    }

    /// Applies `f` to every position, keeping timestamps and visibilities.
    pub fn map_positions(&self, mut f: impl FnMut(Point3<f64>) -> Point3<f64>) -> Self {
        LandmarkFrame {
            t: self.t,
            landmarks: self
                .landmarks
                .iter()
                .map(|(id, s)| (*id, LandmarkSample::new(f(s.position), s.visibility)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(Error::Config(format!(
                "unknown side `{other}` (expected left or right)"
            ))),
        }
    }
}

/// Descriptive fields carried alongside a recording's frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub source: Source,
    pub movement: String,
    pub subject: String,
    pub repetition: u32,
    /// Informational capture rate in Hz.
    pub nominal_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

/// An ordered sequence of frames from one repetition of one movement.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    meta: RecordingMeta,
    frames: Vec<LandmarkFrame>,
}

impl Recording {
    /// Validates ordering and topology before accepting the frames.
    pub fn new(meta: RecordingMeta, frames: Vec<LandmarkFrame>) -> Result<Self> {
        let topology = meta.source.topology();
        for pair in frames.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::Ordering {
                    prev: pair[0].t,
                    t: pair[1].t,
                });
            }
        }
        for frame in &frames {
            if let Some(id) = frame.landmarks.keys().find(|id| id.topology() != topology) {
                return Err(Error::InvalidFrame(format!(
                    "landmark {id:?} at t={}s does not belong to the {topology} topology of a {} recording",
                    frame.t, meta.source
                )));
            }
        }
        Ok(Recording { meta, frames })
    }

    pub fn meta(&self) -> &RecordingMeta {
        &self.meta
    }

    pub fn source(&self) -> Source {
        self.meta.source
    }

    pub fn frames(&self) -> &[LandmarkFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Sample rate implied by the timestamps, or `None` with fewer than two frames.
    pub fn effective_rate(&self) -> Option<f64> {
        match (self.frames.first(), self.frames.last()) {
            (Some(first), Some(last)) if self.frames.len() >= 2 => {
                Some((self.frames.len() - 1) as f64 / (last.t - first.t))
            }
            _ => None,
        }
    }

    pub fn into_parts(self) -> (RecordingMeta, Vec<LandmarkFrame>) {
        (self.meta, self.frames)
    }
}

/// The outcome of visibility gating.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredRecording {
    pub recording: Recording,
    /// Timestamps of the frames that were discarded.
    pub dropped: Vec<f64>,
}

impl FilteredRecording {
    pub fn dropped_count(&self) -> usize {
        self.dropped.len()
    }
}

/// Whether every landmark in `required` reaches `threshold` in `frame`.
///
/// Removal is strict: a visibility exactly equal to the threshold is kept.
pub fn frame_passes(frame: &LandmarkFrame, threshold: f64, required: &BTreeSet<LandmarkId>) -> bool {
    required.iter().all(|id| frame.visibility(*id) >= threshold)
}

/// Drops every frame in which any required landmark falls below `threshold`.
///
/// Whole frames are dropped because a segment needs both endpoints from the same
/// instant. Fails when fewer than `min_valid_frames` frames survive.
pub fn filter_visibility(
    recording: &Recording,
    threshold: f64,
    required: &BTreeSet<LandmarkId>,
    min_valid_frames: usize,
) -> Result<FilteredRecording> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config(format!(
            "visibility threshold {threshold} outside [0, 1]"
        )));
    }
    let (kept, dropped): (Vec<&LandmarkFrame>, Vec<&LandmarkFrame>) = recording
        .frames
        .iter()
        .partition(|frame| frame_passes(frame, threshold, required));

    if kept.len() < min_valid_frames {
        let detail = match dropped.first() {
            Some(first) => format!(
                "; {} frames dropped below visibility {threshold}, first at t={}s",
                dropped.len(),
                first.t
            ),
            None => String::new(),
        };
        return Err(Error::UnusableRecording(format!(
            "{}: {} of {} frames pass visibility gating, {min_valid_frames} required{detail}",
            recording.meta.movement,
            kept.len(),
            recording.frames.len(),
        )));
    }

    Ok(FilteredRecording {
        recording: Recording {
            meta: recording.meta.clone(),
            frames: kept.into_iter().cloned().collect(),
        },
        dropped: dropped.iter().map(|f| f.t).collect(),
    })
}

fn resolve_endpoint(frame: &LandmarkFrame, endpoint: &Endpoint) -> Result<Point3<f64>> {
    match *endpoint {
        Endpoint::Single(id) => frame.position(id),
        Endpoint::Midpoint(a, b) => {
            let (pa, pb) = (frame.position(a)?, frame.position(b)?);
            Ok(Point3::from((pa.coords + pb.coords) * 0.5))
        }
    }
}

/// Resolves the two endpoints of a segment in one frame.
pub fn resolve_segment(frame: &LandmarkFrame, spec: &SegmentSpec) -> Result<(Point3<f64>, Point3<f64>)> {
    Ok((
        resolve_endpoint(frame, &spec.endpoint1)?,
        resolve_endpoint(frame, &spec.endpoint2)?,
    ))
}
