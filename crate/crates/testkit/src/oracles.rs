//! Straightforward re-derivations used as test references.

use nalgebra::Vector3;

/// Mean squares from explicit loops; the error term is obtained by subtraction.
#[derive(Debug, Clone, Copy)]
pub struct MeanSquares {
    pub msr: f64,
    pub msc: f64,
    pub mse: f64,
}

pub fn mean_squares(rows: &[Vec<f64>]) -> MeanSquares {
    let n = rows.len();
    let k = rows[0].len();
    let mut grand = 0.0;
    for row in rows {
        for v in row {
            grand += v;
        }
    }
    grand /= (n * k) as f64;

    let mut ss_total = 0.0;
    for row in rows {
        for v in row {
            ss_total += (v - grand) * (v - grand);
        }
    }
    let mut ss_rows = 0.0;
    for row in rows {
        let mut m = 0.0;
        for v in row {
            m += v;
        }
        m /= k as f64;
        ss_rows += k as f64 * (m - grand) * (m - grand);
    }
    let mut ss_cols = 0.0;
    for j in 0..k {
        let mut m = 0.0;
        for row in rows {
            m += row[j];
        }
        m /= n as f64;
        ss_cols += n as f64 * (m - grand) * (m - grand);
    }
    let ss_err = ss_total - ss_rows - ss_cols;
    MeanSquares {
        msr: ss_rows / (n - 1) as f64,
        msc: ss_cols / (k - 1) as f64,
        mse: ss_err / ((n - 1) * (k - 1)) as f64,
    }
}

/// ICC point estimates keyed by form name.
pub fn icc(rows: &[Vec<f64>], form: &str) -> f64 {
    let n = rows.len() as f64;
    let k = rows[0].len() as f64;
    let MeanSquares { msr, msc, mse } = mean_squares(rows);
    match form {
        "consistency-single" => (msr - mse) / (msr + (k - 1.0) * mse),
        "consistency-average" => (msr - mse) / msr,
        "agreement-single" => (msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / n),
        "agreement-average" => (msr - mse) / (msr + (msc - mse) / n),
        other => panic!("unknown form {other}"),
    }
}

/// Two-pass sample variance of all cells pooled.
pub fn pooled_variance(values: &[f64]) -> f64 {
    let mut mean = 0.0;
    for v in values {
        mean += v;
    }
    mean /= values.len() as f64;
    let mut ss = 0.0;
    for v in values {
        ss += (v - mean) * (v - mean);
    }
    ss / (values.len() - 1) as f64
}

/// Least squares via the 2x2 normal equations and Cramer's rule: `(slope, intercept)`.
pub fn normal_equations(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    let det = n * sxx - sx * sx;
    let intercept = (sy * sxx - sx * sxy) / det;
    let slope = (n * sxy - sx * sy) / det;
    (slope, intercept)
}

/// Unsigned angle between two vectors in degrees, via atan2 of the cross and dot
/// products.
pub fn angle_deg(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

/// Additive moving-average decomposition written out index by index.
/// Returns `(trend, seasonal, residual)`.
#[allow(clippy::type_complexity)]
pub fn decompose(x: &[f64], period: usize) -> (Vec<Option<f64>>, Vec<f64>, Vec<Option<f64>>) {
    let len = x.len();
    let half = period / 2;
    let mut trend = vec![None; len];
    for (i, slot) in trend.iter_mut().enumerate() {
        if i < half || i + half >= len {
            continue;
        }
        let value = if period % 2 == 1 {
            let mut s = 0.0;
            for v in &x[i - half..=i + half] {
                s += v;
            }
            s / period as f64
        } else {
            let mut s = 0.5 * x[i - half] + 0.5 * x[i + half];
            for v in &x[i - half + 1..i + half] {
                s += v;
            }
            s / period as f64
        };
        *slot = Some(value);
    }
    let mut phase_means = vec![0.0; period];
    for (p, mean) in phase_means.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut count = 0;
        let mut i = p;
        while i < len {
            if let Some(tr) = trend[i] {
                sum += x[i] - tr;
                count += 1;
            }
            i += period;
        }
        *mean = sum / count as f64;
    }
    let centre = phase_means.iter().sum::<f64>() / period as f64;
    let seasonal: Vec<f64> = (0..len).map(|i| phase_means[i % period] - centre).collect();
    let residual = (0..len).map(|i| trend[i].map(|tr| x[i] - tr - seasonal[i])).collect();
    (trend, seasonal, residual)
}

fn ln_gamma(z: f64) -> f64 {
    // Lanczos approximation, g = 7, with the published coefficients.
    #[allow(clippy::excessive_precision)]
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut a = C[0];
    let t = z + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Density of F(d1, d2).
pub fn f_density(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_beta = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    let ln = 0.5 * (d1 * (d1 * x).ln() + d2 * d2.ln() - (d1 + d2) * (d1 * x + d2).ln()) - x.ln() - ln_beta;
    ln.exp()
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson integral of `f` over `[a, b]`, started from 64 equal panels so a
/// narrow peak cannot hide between the first three samples.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 50)
        })
        .sum()
}

/// F cdf by quadrature of the density. Only sensible for `d1 > 2`, where the density is
/// bounded at the origin.
pub fn f_cdf_quadrature(x: f64, d1: f64, d2: f64) -> f64 {
    integrate(&|u| f_density(u, d1, d2), 0.0, x, 1e-14)
}

/// F quantile by bisection on the quadrature cdf.
pub fn f_quantile_quadrature(p: f64, d1: f64, d2: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while f_cdf_quadrature(hi, d1, d2) < p {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f_cdf_quadrature(mid, d1, d2) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_integrates_to_one() {
        let total = integrate(&|u| f_density(u, 24.0, 48.0), 0.0, 200.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn f_4_4_closed_form() {
        // F(4, 4) cdf: with z = x / (1 + x), I_z(2, 2) = 3z^2 - 2z^3.
        let x: f64 = 1.7;
        let z = x / (1.0 + x);
        let expected = 3.0 * z * z - 2.0 * z * z * z;
        assert!((f_cdf_quadrature(x, 4.0, 4.0) - expected).abs() < 1e-10);
    }
}
