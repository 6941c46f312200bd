//! Cumulative distribution and quantiles of the F distribution.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

fn check_df(df1: f64, df2: f64) -> Result<()> {
    if !(df1 > 0.0 && df1.is_finite() && df2 > 0.0 && df2.is_finite()) {
        return Err(Error::Domain(format!(
            "F degrees of freedom must be positive and finite, got ({df1}, {df2})"
        )));
    }
    Ok(())
}

/// P(X ≤ x) for X ~ F(df1, df2).
pub fn f_cdf(x: f64, df1: f64, df2: f64) -> Result<f64> {
    check_df(df1, df2)?;
    if x.is_nan() {
        return Err(Error::Domain("F cdf evaluated at NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let num = df1 * x;
    let z = num / (num + df2);
    // Evaluate whichever tail keeps the beta argument away from 1.
    if z <= 0.5 {
        Ok(beta_reg(df1 / 2.0, df2 / 2.0, z))
    } else {
        let w = df2 / (num + df2);
        Ok(1.0 - beta_reg(df2 / 2.0, df1 / 2.0, w))
    }
}

/// The `p` quantile of F(df1, df2).
pub fn f_quantile(p: f64, df1: f64, df2: f64) -> Result<f64> {
    check_df(df1, df2)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("F quantile needs 0 < p < 1, got {p}")));
    }
    let cdf = |x: f64| f_cdf(x, df1, df2).expect("df already checked");

    let mut lo = 1.0;
    let mut hi = 1.0;
    while cdf(lo) > p {
        lo /= 2.0;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    while cdf(hi) < p {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain(format!(
                "F quantile p={p} ({df1}, {df2}) could not be bracketed"
            )));
        }
    }
    // Bisect on the log scale; the bracket spans many orders of magnitude for small df.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (cdf(lo), cdf(hi));
    Ok(if (p - flo).abs() <= (fhi - p).abs() { lo } else { hi })
}
