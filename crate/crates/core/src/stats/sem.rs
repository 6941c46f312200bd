use super::table::MeasurementTable;
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

/// Pooled sample variance of every cell (denominator `nk - 1`).
pub fn total_variance(table: &MeasurementTable) -> Result<f64> {
    pooled_variance(&table.cells().collect::<Vec<_>>())
}

pub(crate) fn pooled_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "total variance needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Standard error of measurement. A negative `icc` is allowed and yields a value above
/// the total standard deviation.
pub fn sem(total_variance: f64, icc: f64) -> Result<f64> {
    if !total_variance.is_finite() || total_variance < 0.0 {
        return Err(Error::Domain(format!(
            "total variance must be finite and non-negative, got {total_variance}"
        )));
    }
    if icc.is_nan() || icc > 1.0 {
        return Err(Error::Domain(format!("ICC must be at most 1, got {icc}")));
    }
    if icc == 1.0 {
        return Ok(0.0);
    }
    Ok((total_variance * (1.0 - icc)).sqrt())
}

/// Minimal detectable change at 95% confidence.
pub fn mdc(sem_deg: f64) -> f64 {
    Z_95 * std::f64::consts::SQRT_2 * sem_deg
}
