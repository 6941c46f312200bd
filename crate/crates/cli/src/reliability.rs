use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;

use romkit_core::io::{read_measurements_csv, read_results};
use romkit_core::stats::pivot::{movements, raters};
use romkit_core::stats::{
    cohort_report, inter_rater_table, Analysis, IccForm, InterRaterLayout, Measurement, StatsOptions,
};

use crate::settings::GlobalArgs;

#[derive(Args, Debug)]
pub struct ReliabilityArgs {
    /// Results file (.jsonl) or long-format measurement table (.csv).
    pub file: PathBuf,
    /// test-retest (repetitions of one rater) or inter-rater (reference against others).
    #[arg(long, default_value = "test-retest")]
    pub analysis: Analysis,
    /// ICC form: consistency-single, consistency-average, agreement-single or
    /// agreement-average.
    #[arg(long)]
    pub form: Option<IccForm>,
    /// Inter-rater pivot: pooled (subject x repetition rows) or averaged (subject rows).
    #[arg(long)]
    pub layout: Option<InterRaterLayout>,
    /// Rater the others are compared against in inter-rater mode.
    #[arg(long)]
    pub reference_rater: Option<String>,
    /// Print the report as a JSON object.
    #[arg(long)]
    pub json: bool,
    /// Inter-rater mode: write the paired values behind each regression to this CSV.
    #[arg(long, value_name = "FILE")]
    pub pairs_csv: Option<PathBuf>,
}

fn load(path: &Path) -> Result<Vec<Measurement>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        Ok(read_measurements_csv(path)?)
    } else {
        if !path.is_file() {
            anyhow::bail!("{}: no such results file", path.display());
        }
        Ok(read_results(path)?.iter().map(|r| r.to_measurement()).collect())
    }
}

fn write_pairs(path: &Path, data: &[Measurement], options: &StatsOptions) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(["movement", "rater", "row", "reference", "other"])?;
    let reference = &options.reference_rater;
    for movement in movements(data) {
        for other in raters(data, &movement).iter().filter(|r| *r != reference) {
            let table = inter_rater_table(data, &movement, reference, other, options.inter_rater_layout)?;
            for (label, row) in table.row_labels().iter().zip(table.rows()) {
                writer.write_record([
                    movement.as_str(),
                    other.as_str(),
                    label.as_str(),
                    &row[0].to_string(),
                    &row[1].to_string(),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn run(args: ReliabilityArgs, global: &GlobalArgs) -> Result<ExitCode> {
    let config = global.load_config()?;
    let mut options = config.stats.clone();
    if let Some(form) = args.form {
        match args.analysis {
            Analysis::TestRetest => options.test_retest_form = form,
            Analysis::InterRater => options.inter_rater_form = form,
        }
    }
    if let Some(layout) = args.layout {
        options.inter_rater_layout = layout;
    }
    if let Some(reference) = &args.reference_rater {
        options.reference_rater = reference.clone();
    }

    let data = load(&args.file)?;
    let report = cohort_report(&data, args.analysis, &options)?;
    if let Some(path) = &args.pairs_csv {
        write_pairs(path, &data, &options)?;
    }
    let mut out = std::io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        write!(out, "{}", report.render_text())?;
    }
    Ok(ExitCode::SUCCESS)
}
