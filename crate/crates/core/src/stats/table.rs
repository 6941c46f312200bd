use crate::error::{Error, Result};

/// Subjects in rows, repeated or paired measurements in columns, values in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTable {
    values: Vec<Vec<f64>>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl MeasurementTable {
    pub fn new(values: Vec<Vec<f64>>, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        let n = values.len();
        let k = values.first().map_or(0, Vec::len);
        if n < 2 || k < 2 {
            return Err(Error::InsufficientData(format!(
                "a measurement table needs at least 2 rows and 2 columns, got {n}x{k}"
            )));
        }
        if let Some((i, row)) = values.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::InsufficientData(format!(
                "row {i} has {} cells, expected {k}",
                row.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("measurement table contains non-finite cells".into()));
        }
        if row_labels.len() != n || col_labels.len() != k {
            return Err(Error::InsufficientData(format!(
                "labels ({} rows, {} columns) do not match a {n}x{k} table",
                row_labels.len(),
                col_labels.len()
            )));
        }
        Ok(MeasurementTable {
            values,
            row_labels,
            col_labels,
        })
    }

    /// A table with generated labels.
    pub fn from_rows(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        let k = values.first().map_or(0, Vec::len);
        Self::new(
            values,
            (1..=n).map(|i| format!("s{i}")).collect(),
            (1..=k).map(|j| format!("c{j}")).collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.values[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn cells(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        MeasurementTable {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, r)| r.iter().enumerate().map(|(j, v)| f(i, j, *v)).collect())
                .collect(),
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
        }
    }
}
