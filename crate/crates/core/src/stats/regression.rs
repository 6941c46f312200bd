use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Ordinary least squares of `response` on `predictor`.
pub fn regress(predictor: &[f64], response: &[f64]) -> Result<RegressionResult> {
    if predictor.len() != response.len() {
        return Err(Error::InsufficientData(format!(
            "regression needs paired samples, got {} predictors and {} responses",
            predictor.len(),
            response.len()
        )));
    }
    let n = predictor.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "regression needs at least 3 pairs, got {n}"
        )));
    }
    if predictor.iter().chain(response).any(|v| !v.is_finite()) {
        return Err(Error::Domain("regression inputs must be finite".into()));
    }
    let nf = n as f64;
    let mx = predictor.iter().sum::<f64>() / nf;
    let my = response.iter().sum::<f64>() / nf;
    let sxx: f64 = predictor.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = response.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = predictor.iter().zip(response).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateRegression("predictor has zero variance".into()));
    }
    if syy == 0.0 {
        return Ok(RegressionResult {
            slope: 0.0,
            intercept: my,
            r_squared: 0.0,
            n,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = predictor
        .iter()
        .zip(response)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = (1.0 - ss_res / syy).clamp(0.0, 1.0);
    Ok(RegressionResult {
        slope,
        intercept,
        r_squared,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_proportional() {
        let x = [1.0, 2.0, 3.0];
        let r = regress(&x, &x).unwrap();
        assert_eq!((r.slope, r.intercept, r.r_squared), (1.0, 0.0, 1.0));
        let r = regress(&x, &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!((r.slope, r.intercept, r.r_squared, r.n), (2.0, 0.0, 1.0, 3));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            regress(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateRegression(_))
        ));
        let r = regress(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((r.slope, r.r_squared), (0.0, 0.0));
        assert!(regress(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(regress(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }
}
