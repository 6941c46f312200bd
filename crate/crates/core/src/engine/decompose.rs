//! Classical additive decomposition: centred moving-average trend, per-phase seasonal
//! means, and the residual left over.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    /// `None` within half a window of either edge.
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<f64>,
    /// Defined exactly where `trend` is.
    pub residual: Vec<Option<f64>>,
    pub period: usize,
}

impl DecompositionResult {
    pub fn len(&self) -> usize {
        self.seasonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seasonal.is_empty()
    }

    /// `(index, residual)` for every index with a defined residual.
    pub fn defined_residuals(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.residual.iter().enumerate().filter_map(|(i, r)| r.map(|r| (i, r)))
    }
}

/// Moving-average weights: `period` equal taps for odd periods, `period + 1` taps with
/// half-weighted ends for even periods.
fn trend_weights(period: usize) -> Vec<f64> {
    let p = period as f64;
    if period % 2 == 1 {
        vec![1.0 / p; period]
    } else {
        let mut w = vec![1.0 / p; period + 1];
        w[0] = 0.5 / p;
        w[period] = 0.5 / p;
        w
    }
}

pub fn seasonal_decompose(values: &[f64], period: usize) -> Result<DecompositionResult> {
    if period < 2 {
        return Err(Error::Domain(format!(
            "decomposition period must be at least 2, got {period}"
        )));
    }
    let n = values.len();
    if n < 2 * period {
        return Err(Error::DecompositionInfeasible { len: n, period });
    }

    let weights = trend_weights(period);
    let half = weights.len() / 2;
    let trend: Vec<Option<f64>> = (0..n)
        .map(|i| {
            (i >= half && i + half < n).then(|| {
                weights
                    .iter()
                    .zip(&values[i - half..=i + half])
                    .map(|(w, x)| w * x)
                    .sum()
            })
        })
        .collect();

    let mut phase_sum = vec![0.0; period];
    let mut phase_count = vec![0usize; period];
    for (i, (x, tr)) in values.iter().zip(&trend).enumerate() {
        if let Some(tr) = tr {
            phase_sum[i % period] += x - tr;
            phase_count[i % period] += 1;
        }
    }
    // n >= 2 * period guarantees every phase has at least one defined sample.
    let mut pattern: Vec<f64> = phase_sum.iter().zip(&phase_count).map(|(s, c)| s / *c as f64).collect();
    let centre = pattern.iter().sum::<f64>() / period as f64;
    pattern.iter_mut().for_each(|p| *p -= centre);

    let seasonal: Vec<f64> = (0..n).map(|i| pattern[i % period]).collect();
    let residual = values
        .iter()
        .zip(&trend)
        .zip(&seasonal)
        .map(|((x, tr), s)| tr.map(|tr| x - tr - s))
        .collect();

    Ok(DecompositionResult {
        trend,
        seasonal,
        residual,
        period,
    })
}
