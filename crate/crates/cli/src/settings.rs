use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgAction, Args};

use romkit_core::engine::DecompositionPeriod;
use romkit_core::io::AppConfig;

/// Options shared by every command. Flags override the config file.
#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// TOML config file with engine, stats and registry settings.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Root directory for results, sessions and recordings.
    #[arg(long, global = true, env = "ROMKIT_DATA_DIR", default_value = "romkit-data")]
    pub data_dir: PathBuf,
    /// Minimum landmark visibility for a frame to be used.
    #[arg(long, global = true)]
    pub visibility_threshold: Option<f64>,
    /// Frames that must survive gating for a recording to be usable.
    #[arg(long, global = true)]
    pub min_valid_frames: Option<usize>,
    /// Decomposition period in samples, or `auto`.
    #[arg(long, global = true)]
    pub period: Option<DecompositionPeriod>,
    /// Residual threshold, in standard deviations, for anomalous samples.
    #[arg(long, global = true)]
    pub anomaly_sd: Option<f64>,
    /// Fraction below the maximum within which a second peak flags the result for review.
    #[arg(long, global = true)]
    pub near_tie: Option<f64>,
    /// Number of leading vectors averaged into the reference direction.
    #[arg(long, global = true)]
    pub baseline_window: Option<usize>,
    /// Log more (-v info, -vv debug); RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
}

impl GlobalArgs {
    pub fn load_config(&self) -> Result<AppConfig> {
        let mut config = match &self.config {
            Some(path) => AppConfig::load(path)?,
            None => AppConfig::default(),
        };
        let engine = &mut config.engine;
        if let Some(v) = self.visibility_threshold {
            engine.visibility_threshold = v;
        }
        if let Some(v) = self.min_valid_frames {
            engine.min_valid_frames = v;
        }
        if let Some(v) = self.period {
            engine.decomposition_period = v;
        }
        if let Some(v) = self.anomaly_sd {
            engine.anomaly_sd = v;
        }
        if let Some(v) = self.near_tie {
            engine.near_tie_fraction = v;
        }
        if let Some(v) = self.baseline_window {
            engine.baseline_window = v;
        }
        engine.validate().context("engine settings")?;
        Ok(config)
    }

    pub fn results_path(&self) -> PathBuf {
        self.data_dir.join("results.jsonl")
    }

    pub fn ensure_data_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.data_dir)
            .with_context(|| format!("creating data directory {}", self.data_dir.display()))?;
        Ok(&self.data_dir)
    }
}
