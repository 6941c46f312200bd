//! Segment-angle time series, anomaly rejection and ROM extraction.

pub mod anomaly;
pub mod config;
pub mod decompose;
pub mod extract;
pub mod pipeline;
pub mod vectors;

pub use anomaly::detect_anomalies;
pub use config::{DecompositionPeriod, EngineConfig};
pub use decompose::{seasonal_decompose, DecompositionResult};
pub use extract::{extract_rom, local_maxima, RomResult, TimedAngle};
pub use pipeline::{evaluate_movement, Evaluation, SeriesRow};
pub use vectors::{
    angle_between_deg, angle_series, reference_vector, segment_vectors, AngleSample, AngleSeries, SegmentVector,
    DEGENERATE_EPS,
};
