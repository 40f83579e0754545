//! Descriptive statistics and the residual diagnostics used in summary
//! tables: sample moments, Jarque-Bera and Ljung-Box.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Minimum length accepted by [`summary_stats`].
pub const MIN_STATS_LEN: usize = 8;

/// Lags used for the Ljung-Box tests in [`summary_stats`].
pub const LJUNG_BOX_LAGS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (denominator `n - 1`).
    pub std: f64,
    pub skewness: f64,
    /// Non-excess kurtosis; 3 for a normal distribution.
    pub kurtosis: f64,
    pub jarque_bera: TestResult,
    pub ljung_box_levels: TestResult,
    pub ljung_box_squares: TestResult,
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation with denominator `n - 1`.
pub fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)).sqrt()
}

/// Median; `NaN` for empty input.
pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Central moments `(m2, m3, m4)` with denominator `n`.
fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let m = mean(x);
    let n = x.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Skewness and non-excess kurtosis from population moments.
pub fn skew_kurt(x: &[f64]) -> Result<(f64, f64)> {
    let (m2, m3, m4) = central_moments(x);
    if !(m2 > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    Ok((m3 / m2.powf(1.5), m4 / (m2 * m2)))
}

fn chi2_sf(stat: f64, dof: usize) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(stat)
}

/// `n/6 * (S^2 + (K - 3)^2 / 4)` against chi-squared(2).
pub fn jarque_bera(x: &[f64]) -> Result<TestResult> {
    let (s, k) = skew_kurt(x)?;
    let n = x.len() as f64;
    let statistic = n / 6.0 * (s * s + (k - 3.0).powi(2) / 4.0);
    Ok(TestResult { statistic, p_value: chi2_sf(statistic, 2) })
}

/// Sample autocorrelations at lags `1..=max_lag`.
pub fn autocorrelations(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let denom: f64 = d.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    Ok((1..=max_lag)
        .map(|k| d[k..].iter().zip(&d[..d.len() - k]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect())
}

/// `n (n + 2) sum_k rho_k^2 / (n - k)` against chi-squared(`lags`).
pub fn ljung_box(x: &[f64], lags: usize) -> Result<TestResult> {
    if x.len() <= lags {
        return Err(Error::TooShort { len: x.len(), min: lags + 1 });
    }
    let n = x.len() as f64;
    let rho = autocorrelations(x, lags)?;
    let statistic = n
        * (n + 2.0)
        * rho.iter().enumerate().map(|(i, r)| r * r / (n - (i + 1) as f64)).sum::<f64>();
    Ok(TestResult { statistic, p_value: chi2_sf(statistic, lags) })
}

/// Moments, normality and serial-correlation tests of one column.
pub fn summary_stats(x: &[f64]) -> Result<SummaryStats> {
    if x.len() < MIN_STATS_LEN {
        return Err(Error::TooShort { len: x.len(), min: MIN_STATS_LEN });
    }
    if let Some(row) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { column: "series".into(), row });
    }
    let (skewness, kurtosis) = skew_kurt(x)?;
    let squares: Vec<f64> = x.iter().map(|v| v * v).collect();
    Ok(SummaryStats {
        n: x.len(),
        mean: mean(x),
        std: std_dev(x),
        skewness,
        kurtosis,
        jarque_bera: jarque_bera(x)?,
        ljung_box_levels: ljung_box(x, LJUNG_BOX_LAGS)?,
        ljung_box_squares: ljung_box(&squares, LJUNG_BOX_LAGS)?,
    })
}
