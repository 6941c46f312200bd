use std::collections::BTreeMap;

use nalgebra::{Point3, Rotation3, Unit, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use romkit_core::landmark::{LandmarkFrame, LandmarkId, LandmarkSample, Recording, RecordingMeta, Side, Source};
use romkit_core::registry::{registry_lookup, Endpoint, MovementDefinition, SegmentSpec};

/// `(t, alpha_deg)` pairs.
pub type Profile = Vec<(f64, f64)>;

/// `amplitude * sin(pi t / duration)` sampled at `fps` from 0 to `duration` inclusive.
pub fn sine_profile(amplitude_deg: f64, duration_s: f64, fps: f64) -> Profile {
    let n = (duration_s * fps).round() as usize;
    (0..=n)
        .map(|i| {
            let t = i as f64 / fps;
            (t, amplitude_deg * (std::f64::consts::PI * i as f64 / n as f64).sin())
        })
        .collect()
}

/// Adds `magnitude` degrees to the sample at each index.
pub fn with_spikes(profile: &Profile, spikes: &[(usize, f64)]) -> Profile {
    let mut out = profile.clone();
    for &(i, m) in spikes {
        out[i].1 += m;
    }
    out
}

/// Geometry of a synthetic rigid segment.
#[derive(Debug, Clone, Copy)]
pub struct SegmentGeometry {
    pub origin: Point3<f64>,
    pub length: f64,
    /// Direction of `endpoint1 - endpoint2` at alpha = 0.
    pub start: Vector3<f64>,
    /// Rotation axis, perpendicular to `start`.
    pub axis: Vector3<f64>,
    /// Half-separation of the two markers that form a midpoint endpoint.
    pub midpoint_offset: Vector3<f64>,
}

impl Default for SegmentGeometry {
    fn default() -> Self {
        SegmentGeometry {
            origin: Point3::new(0.1, 0.9, 2.0),
            length: 0.35,
            start: Vector3::new(0.0, -1.0, 0.0),
            axis: Vector3::new(0.0, 0.0, 1.0),
            midpoint_offset: Vector3::new(0.04, 0.0, 0.02),
        }
    }
}

pub fn meta(
    source: Source,
    def: &MovementDefinition,
    subject: &str,
    repetition: u32,
    nominal_rate: f64,
) -> RecordingMeta {
    RecordingMeta {
        source,
        movement: def.name.clone(),
        subject: subject.to_string(),
        repetition,
        nominal_rate,
        side: def.side,
    }
}

fn place(
    endpoint: &Endpoint,
    p: Point3<f64>,
    offset: Vector3<f64>,
    visibility: f64,
    out: &mut BTreeMap<LandmarkId, LandmarkSample>,
) {
    match *endpoint {
        Endpoint::Single(id) => {
            out.insert(id, LandmarkSample::new(p, visibility));
        }
        Endpoint::Midpoint(a, b) => {
            out.insert(a, LandmarkSample::new(p + offset, visibility));
            out.insert(b, LandmarkSample::new(p - offset, visibility));
        }
    }
}

/// Landmark positions for one segment direction.
pub fn segment_landmarks(
    spec: &SegmentSpec,
    geometry: &SegmentGeometry,
    direction: Vector3<f64>,
    visibility: f64,
) -> BTreeMap<LandmarkId, LandmarkSample> {
    let p2 = geometry.origin;
    let p1 = p2 + direction * geometry.length;
    let mut out = BTreeMap::new();
    place(&spec.endpoint2, p2, geometry.midpoint_offset, visibility, &mut out);
    place(&spec.endpoint1, p1, geometry.midpoint_offset, visibility, &mut out);
    out
}

/// Rotates the segment through `profile` about `geometry.axis`.
pub fn rotation_frames(
    spec: &SegmentSpec,
    geometry: &SegmentGeometry,
    profile: &Profile,
    visibility: f64,
) -> Vec<LandmarkFrame> {
    let axis = Unit::new_normalize(geometry.axis);
    profile
        .iter()
        .map(|&(t, alpha)| {
            let dir = Rotation3::from_axis_angle(&axis, alpha.to_radians()) * geometry.start.normalize();
            LandmarkFrame::new(t, segment_landmarks(spec, geometry, dir, visibility)).expect("fixture frame is valid")
        })
        .collect()
}

/// A complete recording of `movement` following `profile`.
pub fn rotation_recording(
    source: Source,
    movement: &str,
    side: Option<Side>,
    profile: &Profile,
    fps: f64,
) -> Recording {
    let def = registry_lookup(movement, side).expect("fixture movement is registered");
    let spec = def.segment_for(source);
    let visibility = if source == Source::Mocap { 1.0 } else { 0.9 };
    let frames = rotation_frames(spec, &SegmentGeometry::default(), profile, visibility);
    Recording::new(meta(source, &def, "s01", 1, fps), frames).expect("fixture recording is valid")
}

/// Adds isotropic Gaussian noise with standard deviation `sigma` to every coordinate.
pub fn add_noise<R: Rng>(recording: &Recording, sigma: f64, rng: &mut R) -> Recording {
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let frames = recording
        .frames()
        .iter()
        .map(|f| f.map_positions(|p| p + Vector3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng))))
        .collect();
    Recording::new(recording.meta().clone(), frames).expect("noise keeps the recording valid")
}

/// Applies `p -> scale * R p + translation` to every landmark.
pub fn transform(recording: &Recording, rotation: &Rotation3<f64>, translation: Vector3<f64>, scale: f64) -> Recording {
    let frames = recording
        .frames()
        .iter()
        .map(|f| f.map_positions(|p| Point3::from(scale * (rotation * p.coords) + translation)))
        .collect();
    Recording::new(recording.meta().clone(), frames).expect("transform keeps the recording valid")
}

/// A random rotation, translation and positive scale.
pub fn random_similarity<R: Rng>(rng: &mut R) -> (Rotation3<f64>, Vector3<f64>, f64) {
    let axis = Unit::new_normalize(Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0) + 1e-3,
    ));
    let rotation = Rotation3::from_axis_angle(&axis, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    let translation = Vector3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    );
    let scale = rng.random_range(0.1..10.0);
    (rotation, translation, scale)
}

/// An `n x k` table of angle-like values with subject and column effects.
pub fn random_table<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<Vec<f64>> {
    let col_effects: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
    (0..n)
        .map(|_| {
            let subject = rng.random_range(20.0..150.0);
            col_effects
                .iter()
                .map(|c| subject + c + rng.random_range(-8.0..8.0))
                .collect()
        })
        .collect()
}

/// A noisy oscillating series of length `len`.
pub fn random_series<R: Rng>(rng: &mut R, len: usize, period: usize) -> Vec<f64> {
    let slope = rng.random_range(-2.0..2.0);
    let amp = rng.random_range(0.0..20.0);
    (0..len)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / period as f64;
            50.0 + slope * i as f64 + amp * phase.sin() + rng.random_range(-3.0..3.0)
        })
        .collect()
}

/// Two raised-cosine excursions of 4 s each, peaking at `first` then `second` degrees.
pub fn double_peak_profile(first: f64, second: f64, fps: f64) -> Profile {
    let n = (8.0 * fps).round() as usize;
    (0..=n)
        .map(|i| {
            let t = i as f64 / fps;
            let height = if i * 2 <= n { first } else { second };
            (t, height * 0.5 * (1.0 - (std::f64::consts::PI * t / 2.0).cos()))
        })
        .collect()
}

/// A mocap recording as a vendor-style marker CSV with a `Frame` column at 120 Hz.
/// `rename` maps canonical landmark names to the header labels to emit.
pub fn mocap_csv_text(recording: &Recording, rename: &dyn Fn(&str) -> String) -> String {
    let ids: Vec<_> = recording.frames()[0].landmarks().keys().copied().collect();
    let mut text = String::from("Frame");
    for id in &ids {
        let label = rename(id.name());
        for axis in ["X", "Y", "Z"] {
            text.push_str(&format!(",{label}:{axis}"));
        }
    }
    text.push('\n');
    for frame in recording.frames() {
        text.push_str(&format!("{}", (frame.t() * 120.0).round() as u64));
        for id in &ids {
            let p = frame.position(*id).expect("fixture landmark present");
            text.push_str(&format!(",{},{},{}", p.x, p.y, p.z));
        }
        text.push('\n');
    }
    text
}
