//! Segment direction vectors and their angular displacement from the start.

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::landmark::{resolve_segment, Recording};
use crate::registry::SegmentSpec;

/// Shortest endpoint separation, in input length units, that still defines a direction.
pub const DEGENERATE_EPS: f64 = 1e-9;

/// Dot products this close to +/-1 are reported as exactly 0 or 180 degrees.
pub const DOT_SNAP: f64 = 1e-12;

/// Unit direction of a segment at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentVector {
    pub t: f64,
    pub v: Vector3<f64>,
}

impl SegmentVector {
    /// `(p1 - p2) / |p1 - p2|`.
    pub fn between(t: f64, p1: Point3<f64>, p2: Point3<f64>) -> Result<Self> {
        let diff = p1 - p2;
        let length = diff.norm();
        if length.is_nan() || length < DEGENERATE_EPS {
            return Err(Error::DegenerateSegment {
                t,
                length,
                eps: DEGENERATE_EPS,
            });
        }
        Ok(SegmentVector { t, v: diff / length })
    }
}

pub fn segment_vectors(recording: &Recording, spec: &SegmentSpec) -> Result<Vec<SegmentVector>> {
    recording
        .frames()
        .iter()
        .map(|frame| {
            let (p1, p2) = resolve_segment(frame, spec)?;
            SegmentVector::between(frame.t(), p1, p2)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSample {
    pub t: f64,
    pub alpha_deg: f64,
}

/// Movement angle over time, relative to a fixed reference direction.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSeries {
    samples: Vec<AngleSample>,
    reference: Vector3<f64>,
}

impl AngleSeries {
    pub fn samples(&self) -> &[AngleSample] {
        &self.samples
    }

    pub fn reference(&self) -> Vector3<f64> {
        self.reference
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.alpha_deg).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Builds a series from precomputed samples, e.g. for replaying stored angles.
    pub fn from_samples(samples: Vec<AngleSample>, reference: Vector3<f64>) -> Result<Self> {
        for pair in samples.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::Ordering {
                    prev: pair[0].t,
                    t: pair[1].t,
                });
            }
        }
        if let Some(bad) = samples.iter().find(|s| !(0.0..=180.0).contains(&s.alpha_deg)) {
            return Err(Error::Domain(format!(
                "angle {} at t={}s outside [0, 180]",
                bad.alpha_deg, bad.t
            )));
        }
        Ok(AngleSeries { samples, reference })
    }
}

/// Angle in degrees between two unit vectors.
///
/// The dot product is clamped to `[-1, 1]` and snapped to the end points within
/// [`DOT_SNAP`], so the result is always in `[0, 180]`.
pub fn angle_between_deg(v: &Vector3<f64>, reference: &Vector3<f64>) -> f64 {
    let dot = v.dot(reference).clamp(-1.0, 1.0);
    if dot >= 1.0 - DOT_SNAP {
        0.0
    } else if dot <= -1.0 + DOT_SNAP {
        180.0
    } else {
        dot.acos().to_degrees()
    }
}

/// Reference direction: the normalised mean of the first `baseline_window` vectors.
pub fn reference_vector(vectors: &[SegmentVector], baseline_window: usize) -> Result<Vector3<f64>> {
    if vectors.is_empty() {
        return Err(Error::InsufficientData("no segment vectors".into()));
    }
    let window = baseline_window.clamp(1, vectors.len());
    if window == 1 {
        return Ok(vectors[0].v);
    }
    let sum: Vector3<f64> = vectors[..window].iter().map(|s| s.v).sum();
    let length = sum.norm();
    if length < DEGENERATE_EPS {
        return Err(Error::DegenerateSegment {
            t: vectors[0].t,
            length,
            eps: DEGENERATE_EPS,
        });
    }
    Ok(sum / length)
}

/// Angle of every vector from the reference direction.
pub fn angle_series(vectors: &[SegmentVector], baseline_window: usize) -> Result<AngleSeries> {
    let reference = reference_vector(vectors, baseline_window)?;
    let samples = vectors
        .iter()
        .map(|s| AngleSample {
            t: s.t,
            alpha_deg: angle_between_deg(&s.v, &reference),
        })
        .collect();
    Ok(AngleSeries { samples, reference })
}
