use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use romkit_core::engine::{Evaluation, RomResult};
use romkit_core::io::{append_result, ResultContext, ResultRecord};
use romkit_core::landmark::{Side, Source};

use crate::input::{load_and_evaluate, MetaOverrides};
use crate::settings::GlobalArgs;

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Frame file (.jsonl) or mocap marker export (.csv).
    pub file: PathBuf,
    /// Movement name; defaults to the one in the frame file header.
    #[arg(long)]
    pub movement: Option<String>,
    /// Body side for limb movements; defaults to the frame file header.
    #[arg(long)]
    pub side: Option<Side>,
    #[arg(long)]
    pub subject: Option<String>,
    #[arg(long)]
    pub repetition: Option<u32>,
    /// Rater label stored with the result; defaults to the recording source.
    #[arg(long)]
    pub rater: Option<String>,
    /// Print the result as a JSON object.
    #[arg(long)]
    pub json: bool,
    /// Do not append the result to the results file.
    #[arg(long)]
    pub dry_run: bool,
    /// Write per-sample angle, decomposition and anomaly flags to this CSV.
    #[arg(long, value_name = "FILE")]
    pub series_csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    file: String,
    subject: &'a str,
    movement: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<Side>,
    source: Source,
    rater: &'a str,
    repetition: u32,
    #[serde(flatten)]
    rom: &'a RomResult,
    frames: usize,
    dropped_frames: usize,
    period: usize,
    warnings: &'a [String],
    config_fingerprint: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    results_file: Option<String>,
}

fn write_series(path: &PathBuf, evaluation: &Evaluation) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in evaluation.series_rows() {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn print_text(report: &AnalyzeReport, near_tie_fraction: f64) {
    let side = report.side.map(|s| format!(", {s}")).unwrap_or_default();
    println!(
        "{}{side}: subject {}, repetition {} ({})",
        report.movement, report.subject, report.repetition, report.source
    );
    println!("ROM: {:.2}°", report.rom.rom_deg);
    println!("Peak time: {:.3} s", report.rom.peak_t);
    println!("Anomalies removed: {}", report.rom.anomalies.len());
    if report.rom.needs_review {
        let peaks: Vec<String> = report
            .rom
            .near_tie_peaks(near_tie_fraction)
            .iter()
            .map(|p| format!("{:.2}° at {:.3} s", p.alpha_deg, p.t))
            .collect();
        println!("Needs review: yes, competing peaks {}", peaks.join(", "));
    } else {
        println!("Needs review: no");
    }
    if let Some(path) = &report.results_file {
        println!("Result appended to {path}");
    }
}

pub fn run(args: AnalyzeArgs, global: &GlobalArgs) -> Result<ExitCode> {
    let config = global.load_config()?;
    let overrides = MetaOverrides {
        movement: args.movement.clone(),
        side: args.side,
        subject: args.subject.clone(),
        repetition: args.repetition,
    };
    let (recording, _, evaluation) = load_and_evaluate(&args.file, &overrides, &config)
        .with_context(|| format!("analysing {}", args.file.display()))?;
    let meta = recording.meta();
    let rater = args.rater.clone().unwrap_or_else(|| meta.source.as_str().to_string());
    let fingerprint = config.engine.fingerprint();

    if let Some(path) = &args.series_csv {
        write_series(path, &evaluation)?;
    }

    let results_file = if args.dry_run {
        None
    } else {
        global.ensure_data_dir()?;
        let path = global.results_path();
        let record = ResultRecord::new(
            &evaluation.rom,
            ResultContext {
                subject: meta.subject.clone(),
                movement: meta.movement.clone(),
                rater: rater.clone(),
                repetition: meta.repetition,
                side: meta.side,
                config_fingerprint: fingerprint.clone(),
            },
        );
        append_result(&path, &record)?;
        Some(path.display().to_string())
    };

    let report = AnalyzeReport {
        file: args.file.display().to_string(),
        subject: &meta.subject,
        movement: &meta.movement,
        side: meta.side,
        source: meta.source,
        rater: &rater,
        repetition: meta.repetition,
        rom: &evaluation.rom,
        frames: recording.len(),
        dropped_frames: evaluation.dropped.len(),
        period: evaluation.period,
        warnings: &evaluation.warnings,
        config_fingerprint: &fingerprint,
        results_file,
    };
    for warning in &evaluation.warnings {
        eprintln!("warning: {warning}");
    }
    if args.json {
        let mut out = std::io::stdout().lock();
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        print_text(&report, config.engine.near_tie_fraction);
    }
    Ok(ExitCode::SUCCESS)
}
