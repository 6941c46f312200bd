//! File formats: landmark streams, marker CSVs, manifests, measurement tables, results
//! and config.

pub mod config;
pub mod frames;
pub mod manifest;
pub mod measurements;
pub mod mocap_csv;
pub mod results;

pub use config::AppConfig;
pub use frames::{
    frame_line, header_line, parse_frames_jsonl, read_frames_jsonl, to_jsonl_string, write_frames_jsonl, FrameAppender,
    FrameRecord, RecordingFileHeader,
};
pub use manifest::{CohortManifest, ManifestEntry, ManifestInput};
pub use measurements::{read_measurements_csv, write_measurements_csv};
pub use mocap_csv::{read_mocap_csv, MarkerNameMap, MOCAP_RATE_HZ};
pub use results::{append_result, read_results, ResultContext, ResultRecord};
