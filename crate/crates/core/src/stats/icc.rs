//! Two-way intraclass correlation coefficients with 95% confidence intervals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::anova::{anova_decompose, AnovaTerms};
use super::band::{landis_koch_band, Band};
use super::fdist::f_quantile;
use super::table::MeasurementTable;
use crate::error::{Error, Result};

const CI_QUANTILE: f64 = 0.975;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IccForm {
    ConsistencySingle,
    ConsistencyAverage,
    AgreementSingle,
    AgreementAverage,
}

impl IccForm {
    pub const ALL: [IccForm; 4] = [
        IccForm::ConsistencySingle,
        IccForm::ConsistencyAverage,
        IccForm::AgreementSingle,
        IccForm::AgreementAverage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IccForm::ConsistencySingle => "consistency-single",
            IccForm::ConsistencyAverage => "consistency-average",
            IccForm::AgreementSingle => "agreement-single",
            IccForm::AgreementAverage => "agreement-average",
        }
    }

    fn is_average(self) -> bool {
        matches!(self, IccForm::ConsistencyAverage | IccForm::AgreementAverage)
    }
}

impl fmt::Display for IccForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IccForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IccForm::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown ICC form `{s}`; expected one of consistency-single, consistency-average, agreement-single, agreement-average"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub icc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub form: IccForm,
    /// Degrees of freedom of the subjects-versus-error F test.
    pub df1: f64,
    pub df2: f64,
    pub band: Band,
}

fn point_estimate(a: &AnovaTerms, form: IccForm) -> f64 {
    let (n, k) = (a.n as f64, a.k as f64);
    let (msr, msc, mse) = (a.ms_rows, a.ms_cols, a.ms_error);
    match form {
        IccForm::ConsistencySingle => (msr - mse) / (msr + (k - 1.0) * mse),
        IccForm::ConsistencyAverage => (msr - mse) / msr,
        IccForm::AgreementSingle => (msr - mse) / (msr + (k - 1.0) * mse + k / n * (msc - mse)),
        IccForm::AgreementAverage => (msr - mse) / (msr + (msc - mse) / n),
    }
}

fn consistency_ci(a: &AnovaTerms, average: bool) -> Result<(f64, f64)> {
    let k = a.k as f64;
    let f_obs = a.ms_rows / a.ms_error;
    let f_low = f_obs / f_quantile(CI_QUANTILE, a.df_rows, a.df_error)?;
    let f_high = f_obs * f_quantile(CI_QUANTILE, a.df_error, a.df_rows)?;
    let map = |f: f64| {
        if average {
            1.0 - 1.0 / f
        } else {
            (f - 1.0) / (f + k - 1.0)
        }
    };
    Ok((map(f_low), map(f_high)))
}

/// Single-measure absolute agreement interval with Satterthwaite degrees of freedom.
fn agreement_single_ci(a: &AnovaTerms, icc_single: f64) -> Result<(f64, f64)> {
    let (n, k) = (a.n as f64, a.k as f64);
    let (msr, msc, mse) = (a.ms_rows, a.ms_cols, a.ms_error);
    let ca = k * icc_single / (n * (1.0 - icc_single));
    let cb = 1.0 + k * icc_single * (n - 1.0) / (n * (1.0 - icc_single));
    let v =
        (ca * msc + cb * mse).powi(2) / ((ca * msc).powi(2) / (k - 1.0) + (cb * mse).powi(2) / ((n - 1.0) * (k - 1.0)));
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::UndefinedIcc(format!(
            "agreement confidence interval has no valid degrees of freedom (v = {v})"
        )));
    }
    let fl = f_quantile(CI_QUANTILE, n - 1.0, v)?;
    let fu = f_quantile(CI_QUANTILE, v, n - 1.0)?;
    let shared = k * msc + (k * n - k - n) * mse;
    let low = n * (msr - fl * mse) / (fl * shared + n * msr);
    let high = n * (fu * msr - mse) / (shared + n * fu * msr);
    Ok((low, high))
}

pub fn icc_from_anova(a: &AnovaTerms, form: IccForm) -> Result<IccResult> {
    if a.ms_rows == 0.0 && a.ms_error == 0.0 {
        return Err(Error::UndefinedIcc(
            "no between-subject or residual variance (constant subjects)".into(),
        ));
    }
    let finish = |icc: f64, ci_low: f64, ci_high: f64| IccResult {
        icc,
        ci_low,
        ci_high,
        form,
        df1: a.df_rows,
        df2: a.df_error,
        band: landis_koch_band(icc),
    };
    let icc = point_estimate(a, form);
    if !icc.is_finite() {
        return Err(Error::UndefinedIcc(format!("{form} estimator has a zero denominator")));
    }
    if icc >= 1.0 {
        return Ok(finish(1.0, 1.0, 1.0));
    }
    let (low, high) = match form {
        IccForm::ConsistencySingle | IccForm::ConsistencyAverage => {
            if a.ms_error == 0.0 {
                return Ok(finish(1.0, 1.0, 1.0));
            }
            consistency_ci(a, form.is_average())?
        }
        IccForm::AgreementSingle => agreement_single_ci(a, icc)?,
        IccForm::AgreementAverage => {
            let single = point_estimate(a, IccForm::AgreementSingle);
            let (l, h) = agreement_single_ci(a, single)?;
            let k = a.k as f64;
            let spearman_brown = |r: f64| k * r / (1.0 + (k - 1.0) * r);
            (spearman_brown(l), spearman_brown(h))
        }
    };
    Ok(finish(icc, low, high))
}

pub fn icc(table: &MeasurementTable, form: IccForm) -> Result<IccResult> {
    icc_from_anova(&anova_decompose(table)?, form)
}
