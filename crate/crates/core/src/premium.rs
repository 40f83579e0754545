//! Risk-premium decomposition into market and hedge components, and the
//! linear model with high-volatility dummies.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{self, DummyForm, EstimationResult, ModelSpec, OptimizerConfig};
use crate::model::{Cov2, ExcessReturnSeries, FilterOutput, MeanParams, RsModelParams, YearMonth};
use crate::stats::median;

/// Default probability above which a month counts as high volatility.
pub const DEFAULT_DUMMY_THRESHOLD: f64 = 0.75;

/// Monthly premium paths; `total = market + hedge` elementwise.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PremiumPaths {
    pub market: Vec<f64>,
    pub hedge: Vec<f64>,
    pub total: Vec<f64>,
}

impl PremiumPaths {
    fn from_parts(market: Vec<f64>, hedge: Vec<f64>) -> Self {
        let total = market.iter().zip(&hedge).map(|(m, h)| m + h).collect();
        Self { market, hedge, total }
    }
}

/// `l11 * smm_t` and `l12 * smb_t` along a covariance path.
pub fn linear_premium(mean: &MeanParams, h_path: &[Cov2]) -> PremiumPaths {
    PremiumPaths::from_parts(
        h_path.iter().map(|h| mean.l11 * h.smm()).collect(),
        h_path.iter().map(|h| mean.l12 * h.smb()).collect(),
    )
}

/// State premiums weighted by the smoothed state probabilities.
pub fn rs_premium(params: &RsModelParams, filter: &FilterOutput) -> Result<PremiumPaths> {
    if filter.smoothed.len() != filter.state_cov.len() {
        return Err(Error::LengthMismatch {
            detail: format!(
                "smoothed {}, state covariances {}",
                filter.smoothed.len(),
                filter.state_cov.len()
            ),
        });
    }
    let (m1, m2) = (&params.regime1.mean, &params.regime2.mean);
    let mut market = Vec::with_capacity(filter.len());
    let mut hedge = Vec::with_capacity(filter.len());
    for (pr, h) in filter.smoothed.iter().zip(&filter.state_cov) {
        market.push(pr[0] * m1.l11 * h[0].smm() + pr[1] * m2.l11 * h[1].smm());
        hedge.push(pr[0] * m1.l12 * h[0].smb() + pr[1] * m2.l12 * h[1].smb());
    }
    Ok(PremiumPaths::from_parts(market, hedge))
}

/// Median monthly premium times 12.
pub fn annualized_median_premium(total: &[f64]) -> Result<f64> {
    if total.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(median(total) * 12.0)
}

/// `true` where the high-volatility probability exceeds `threshold`.
pub fn dummy_indicator(high_vol_probs: &[f64], threshold: f64) -> Result<Vec<bool>> {
    let d: Vec<bool> = high_vol_probs.iter().map(|&p| p > threshold).collect();
    if d.iter().all(|&x| !x) {
        return Err(Error::DegenerateDummy(0));
    }
    if d.iter().all(|&x| x) {
        return Err(Error::DegenerateDummy(1));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DummyModelOptions {
    pub threshold: f64,
    pub restricted: bool,
    pub form: DummyForm,
    pub optimizer: OptimizerConfig,
}

impl Default for DummyModelOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_DUMMY_THRESHOLD,
            restricted: true,
            form: DummyForm::Interaction,
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// Fits the single-regime model with dummy interactions for months whose
/// high-volatility probability exceeds the threshold.
pub fn fit_dummy_model(
    series: &ExcessReturnSeries,
    high_vol_probs: &[f64],
    opts: &DummyModelOptions,
) -> Result<EstimationResult> {
    if high_vol_probs.len() != series.len() {
        return Err(Error::LengthMismatch {
            detail: format!("probabilities {}, series {}", high_vol_probs.len(), series.len()),
        });
    }
    let dummy = dummy_indicator(high_vol_probs, opts.threshold)?;
    let spec = ModelSpec { n_regimes: 1, restricted: opts.restricted, dummy: Some(opts.form) };
    let start = estimation::default_start(series, &spec)?;
    estimation::fit_inner(series, &spec, &opts.optimizer, &start, Some(&dummy))
}

/// Writes `date,market,hedge,total`.
pub fn write_premium_csv<W: Write>(w: W, dates: &[YearMonth], paths: &PremiumPaths) -> Result<()> {
    if dates.len() != paths.total.len() {
        return Err(Error::LengthMismatch {
            detail: format!("dates {}, premium {}", dates.len(), paths.total.len()),
        });
    }
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["date", "market", "hedge", "total"])?;
    for (t, d) in dates.iter().enumerate() {
        wtr.write_record([
            d.to_string(),
            paths.market[t].to_string(),
            paths.hedge[t].to_string(),
            paths.total[t].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
