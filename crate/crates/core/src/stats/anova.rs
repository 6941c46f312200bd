use super::table::MeasurementTable;
use crate::error::Result;

/// Two-way ANOVA without replication: rows are subjects, columns are repetitions or
/// raters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaTerms {
    pub n: usize,
    pub k: usize,
    pub grand_mean: f64,
    pub ss_total: f64,
    pub ss_rows: f64,
    pub ss_cols: f64,
    pub ss_error: f64,
    pub df_rows: f64,
    pub df_cols: f64,
    pub df_error: f64,
    /// Between-subjects mean square.
    pub ms_rows: f64,
    /// Between-columns mean square.
    pub ms_cols: f64,
    pub ms_error: f64,
}

pub fn anova_decompose(table: &MeasurementTable) -> Result<AnovaTerms> {
    let (n, k) = (table.n_rows(), table.n_cols());
    let (nf, kf) = (n as f64, k as f64);
    let grand_mean = table.cells().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = table.rows().iter().map(|r| r.iter().sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| table.rows().iter().map(|r| r[j]).sum::<f64>() / nf)
        .collect();

    let ss_total = table.cells().map(|v| (v - grand_mean).powi(2)).sum::<f64>();
    let ss_rows = kf * row_means.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>();
    // Summed directly rather than by subtraction so it cannot go negative.
    let ss_error = table
        .rows()
        .iter()
        .zip(&row_means)
        .map(|(row, rm)| {
            row.iter()
                .zip(&col_means)
                .map(|(v, cm)| (v - rm - cm + grand_mean).powi(2))
                .sum::<f64>()
        })
        .sum::<f64>();

    let df_rows = nf - 1.0;
    let df_cols = kf - 1.0;
    let df_error = df_rows * df_cols;
    Ok(AnovaTerms {
        n,
        k,
        grand_mean,
        ss_total,
        ss_rows,
        ss_cols,
        ss_error,
        df_rows,
        df_cols,
        df_error,
        ms_rows: ss_rows / df_rows,
        ms_cols: ss_cols / df_cols,
        ms_error: ss_error / df_error,
    })
}
