//! Per-movement reliability reports and their text rendering.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::icc::{icc, IccForm, IccResult};
use super::pivot::{inter_rater_table, movements, raters, test_retest_table, InterRaterLayout, Measurement};
use super::regression::{regress, RegressionResult};
use super::sem::{mdc, sem, total_variance};
use super::table::MeasurementTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub icc: IccResult,
    pub sem_deg: f64,
    pub mdc_deg: f64,
    pub total_variance: f64,
}

pub fn reliability_report(table: &MeasurementTable, form: IccForm) -> Result<ReliabilityReport> {
    let icc = icc(table, form)?;
    let total_variance = total_variance(table)?;
    let sem_deg = sem(total_variance, icc.icc)?;
    Ok(ReliabilityReport {
        icc,
        sem_deg,
        mdc_deg: mdc(sem_deg),
        total_variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    TestRetest,
    InterRater,
}

impl Analysis {
    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::TestRetest => "test-retest",
            Analysis::InterRater => "inter-rater",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test-retest" => Ok(Analysis::TestRetest),
            "inter-rater" => Ok(Analysis::InterRater),
            _ => Err(Error::Config(format!(
                "unknown analysis `{s}`; expected test-retest or inter-rater"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsOptions {
    pub test_retest_form: IccForm,
    pub inter_rater_form: IccForm,
    pub inter_rater_layout: InterRaterLayout,
    /// Rater used as the regression predictor in inter-rater analysis.
    pub reference_rater: String,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            test_retest_form: IccForm::ConsistencyAverage,
            inter_rater_form: IccForm::ConsistencySingle,
            inter_rater_layout: InterRaterLayout::Pooled,
            reference_rater: "mocap".into(),
        }
    }
}

impl StatsOptions {
    pub fn form_for(&self, analysis: Analysis) -> IccForm {
        match analysis {
            Analysis::TestRetest => self.test_retest_form,
            Analysis::InterRater => self.inter_rater_form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementReport {
    pub movement: String,
    /// The rater for test-retest rows, `reference vs other` for inter-rater rows.
    pub rater: String,
    pub n_rows: usize,
    pub n_cols: usize,
    #[serde(flatten)]
    pub report: ReliabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub analysis: Analysis,
    pub form: IccForm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<InterRaterLayout>,
    pub rows: Vec<MovementReport>,
}

/// Reliability for every movement in `data`.
pub fn cohort_report(data: &[Measurement], analysis: Analysis, options: &StatsOptions) -> Result<CohortReport> {
    if data.is_empty() {
        return Err(Error::InsufficientData("no measurements".into()));
    }
    let form = options.form_for(analysis);
    let mut rows = Vec::new();
    for movement in movements(data) {
        let movement_raters = raters(data, &movement);
        match analysis {
            Analysis::TestRetest => {
                for rater in &movement_raters {
                    let table = test_retest_table(data, &movement, rater)?;
                    let report = reliability_report(&table, form).map_err(|e| e.context(movement.clone()))?;
                    rows.push(MovementReport {
                        movement: movement.clone(),
                        rater: rater.clone(),
                        n_rows: table.n_rows(),
                        n_cols: table.n_cols(),
                        report,
                        regression: None,
                    });
                }
            }
            Analysis::InterRater => {
                let reference = &options.reference_rater;
                if !movement_raters.contains(reference) {
                    return Err(Error::InsufficientData(format!(
                        "{movement}: reference rater {reference} has no measurements"
                    )));
                }
                let others: Vec<&String> = movement_raters.iter().filter(|r| *r != reference).collect();
                if others.is_empty() {
                    return Err(Error::InsufficientData(format!(
                        "{movement}: inter-rater analysis needs a second rater besides {reference}"
                    )));
                }
                for other in others {
                    let table = inter_rater_table(data, &movement, reference, other, options.inter_rater_layout)?;
                    let report = reliability_report(&table, form).map_err(|e| e.context(movement.clone()))?;
                    let regression =
                        regress(&table.column(0), &table.column(1)).map_err(|e| e.context(movement.clone()))?;
                    rows.push(MovementReport {
                        movement: movement.clone(),
                        rater: format!("{reference} vs {other}"),
                        n_rows: table.n_rows(),
                        n_cols: table.n_cols(),
                        report,
                        regression: Some(regression),
                    });
                }
            }
        }
    }
    Ok(CohortReport {
        analysis,
        form,
        layout: (analysis == Analysis::InterRater).then_some(options.inter_rater_layout),
        rows,
    })
}

/// `0.98 (0.96-0.99)` style interval.
pub fn format_icc(r: &IccResult) -> String {
    format!("{:.2} ({:.2} to {:.2})", r.icc, r.ci_low, r.ci_high)
}

impl CohortReport {
    /// Fixed-width text table.
    pub fn render_text(&self) -> String {
        let mut header = vec!["Movement", "Rater", "n", "ICC (95% CI)", "SE_M (°)", "MDC (°)", "Band"];
        if self.analysis == Analysis::InterRater {
            header.extend(["Slope", "Intercept", "r²"]);
        }
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                let r = &row.report;
                let mut cells = vec![
                    row.movement.clone(),
                    row.rater.clone(),
                    row.n_rows.to_string(),
                    format_icc(&r.icc),
                    format!("{:.2}", r.sem_deg),
                    format!("{:.2}", r.mdc_deg),
                    r.icc.band.to_string(),
                ];
                if let Some(reg) = &row.regression {
                    cells.extend([
                        format!("{:.3}", reg.slope),
                        format!("{:.2}", reg.intercept),
                        format!("{:.3}", reg.r_squared),
                    ]);
                }
                cells
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| {
                body.iter()
                    .map(|c| c[i].chars().count())
                    .chain([header[i].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{} reliability, ICC form {}", self.analysis, self.form);
        if let Some(layout) = self.layout {
            let _ = write!(out, ", {layout} layout");
        }
        out.push('\n');
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}", w = *w))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        out.push_str(&line(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for cells in &body {
            out.push_str(&line(cells));
            out.push('\n');
        }
        out
    }
}
