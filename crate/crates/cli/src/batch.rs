use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;

use romkit_core::io::{AppConfig, CohortManifest, ManifestEntry, ManifestInput, ResultContext, ResultRecord};

use crate::input::{load_and_evaluate, MetaOverrides};
use crate::settings::GlobalArgs;

/// Fingerprint stored with ROM values taken from the manifest rather than measured.
const SUPPLIED: &str = "supplied";

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// CSV manifest: subject,movement,rater,repetition,side,path,rom_deg.
    pub manifest: PathBuf,
    /// Results file to write; replaced on every run. Defaults to batch-results.jsonl in
    /// the data directory.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

fn context(entry: &ManifestEntry, fingerprint: &str) -> ResultContext {
    ResultContext {
        subject: entry.subject.clone(),
        movement: entry.movement.clone(),
        rater: entry.rater.clone(),
        repetition: entry.repetition,
        side: entry.side,
        config_fingerprint: fingerprint.to_string(),
    }
}

fn process(entry: &ManifestEntry, config: &AppConfig, fingerprint: &str) -> Result<ResultRecord> {
    match &entry.input {
        ManifestInput::Rom(rom) => Ok(ResultRecord::supplied(*rom, context(entry, SUPPLIED))),
        ManifestInput::Recording(path) => {
            let overrides = MetaOverrides {
                movement: Some(entry.movement.clone()),
                side: entry.side,
                subject: Some(entry.subject.clone()),
                repetition: Some(entry.repetition),
            };
            let (_, _, evaluation) =
                load_and_evaluate(path, &overrides, config).with_context(|| path.display().to_string())?;
            Ok(ResultRecord::new(&evaluation.rom, context(entry, fingerprint)))
        }
    }
}

fn label(entry: &ManifestEntry) -> String {
    let side = entry.side.map(|s| format!(" ({s})")).unwrap_or_default();
    format!(
        "{} {}{side} {} rep {}",
        entry.subject, entry.movement, entry.rater, entry.repetition
    )
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let tmp = path.with_extension("jsonl.tmp");
    std::fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

pub fn run(args: BatchArgs, global: &GlobalArgs) -> Result<ExitCode> {
    let config = global.load_config()?;
    let manifest = CohortManifest::load(&args.manifest)?;
    let fingerprint = config.engine.fingerprint();

    let outcomes: Vec<Result<ResultRecord>> = manifest
        .entries
        .par_iter()
        .map(|entry| process(entry, &config, &fingerprint))
        .collect();

    let mut text = String::new();
    let mut failures = 0;
    for (entry, outcome) in manifest.entries.iter().zip(&outcomes) {
        match outcome {
            Ok(record) => {
                let review = if record.needs_review { "  [needs review]" } else { "" };
                println!("ok      {}: {:.2}°{review}", label(entry), record.rom_deg);
                text.push_str(&record.to_line());
                text.push('\n');
            }
            Err(e) => {
                failures += 1;
                println!("FAILED  {}: {e:#}", label(entry));
            }
        }
    }

    let output = args
        .output
        .unwrap_or_else(|| global.data_dir.join("batch-results.jsonl"));
    write_atomic(&output, &text)?;
    let total = outcomes.len();
    println!(
        "{} of {total} entries succeeded; results written to {}",
        total - failures,
        output.display()
    );
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
