//! Cohort reliability statistics.

pub mod anova;
pub mod band;
pub mod fdist;
pub mod icc;
pub mod pivot;
pub mod regression;
pub mod report;
pub mod sem;
pub mod table;

pub use anova::{anova_decompose, AnovaTerms};
pub use band::{landis_koch_band, Band};
pub use fdist::{f_cdf, f_quantile};
pub use icc::{icc, icc_from_anova, IccForm, IccResult};
pub use pivot::{inter_rater_table, test_retest_table, InterRaterLayout, Measurement};
pub use regression::{regress, RegressionResult};
pub use report::{
    cohort_report, reliability_report, Analysis, CohortReport, MovementReport, ReliabilityReport, StatsOptions,
};
pub use sem::{mdc, sem, total_variance, Z_95};
pub use table::MeasurementTable;
