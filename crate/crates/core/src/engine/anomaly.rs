use super::decompose::DecompositionResult;

/// Residual spreads at or below this many degrees count as zero; nothing is flagged.
pub const RESIDUAL_SD_FLOOR: f64 = 1e-9;

/// Indices whose residual lies more than `k_sd` sample standard deviations from the
/// mean residual. Only defined residuals take part; edges are never flagged.
pub fn detect_anomalies(decomp: &DecompositionResult, k_sd: f64) -> Vec<usize> {
    let defined: Vec<(usize, f64)> = decomp.defined_residuals().collect();
    if defined.len() < 2 {
        return Vec::new();
    }
    let n = defined.len() as f64;
    let mean = defined.iter().map(|(_, r)| r).sum::<f64>() / n;
    let var = defined.iter().map(|(_, r)| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if sd <= RESIDUAL_SD_FLOOR {
        return Vec::new();
    }
    defined
        .into_iter()
        .filter(|(_, r)| (r - mean).abs() > k_sd * sd)
        .map(|(i, _)| i)
        .collect()
}
