//! Two-state Markov-switching BEKK-in-mean.
//!
//! Each state has its own mean coefficients and BEKK matrices. Both state
//! recursions are driven by a single recombined `(H_{t-1}, e_{t-1})` pair:
//! the state covariances and means are collapsed with the state
//! probabilities using the law of total variance, so the likelihood never
//! depends on the full state history.
//!
//! The forward filter predicts with the transition matrix and updates with
//! the state densities; a backward pass gives the full-sample smoothed
//! probabilities.

use serde::{Deserialize, Serialize};

use crate::bekk::{conditional_mean, cov_step, PresampleInnovation, MIN_DET};
use crate::error::{Error, Result};
use crate::model::{Cov2, ExcessReturnSeries, FilterOutput, RsModelParams, Vec2};

/// Lower bound applied to the mixture density inside the log.
pub const PROB_FLOOR: f64 = 1e-300;

/// State distribution before the first observation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProbs {
    /// Stationary distribution of the chain.
    #[default]
    Stationary,
    /// Explicit `P(s_0 = k)`.
    Given(Vec2),
}

/// Probabilities used to collapse the state moments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecombineWeights {
    #[default]
    ExAnte,
    Filtered,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RsOptions {
    pub initial: InitialProbs,
    pub weights: RecombineWeights,
    pub eps0: PresampleInnovation,
}

/// `((1-q), (1-p)) / ((1-p) + (1-q))`.
pub fn stationary_dist(p: f64, q: f64) -> Result<Vec2> {
    crate::model::check_prob("p", p)?;
    crate::model::check_prob("q", q)?;
    let (stay1, stay2) = (1.0 - p, 1.0 - q);
    let denom = stay1 + stay2;
    if denom <= 0.0 {
        return Err(Error::NoStationaryDistribution);
    }
    Ok([stay2 / denom, stay1 / denom])
}

/// One-step prediction `P' f` of the state distribution.
pub fn ex_ante_step(filtered_prev: Vec2, p: f64, q: f64) -> Vec2 {
    let [f1, f2] = filtered_prev;
    let e1 = p * f1 + (1.0 - q) * f2;
    let e2 = (1.0 - p) * f1 + q * f2;
    let s = e1 + e2;
    [e1 / s, e2 / s]
}

/// Bayes update of the state distribution. `None` when both weighted
/// densities vanish.
pub fn filter_step(ex_ante: Vec2, density1: f64, density2: f64) -> Option<Vec2> {
    let w1 = ex_ante[0] * density1;
    let w2 = ex_ante[1] * density2;
    let s = w1 + w2;
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    Some([w1 / s, w2 / s])
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Collapses two conditional distributions into one.
///
/// Returns the innovation of `obs` around the mixture mean and the mixture
/// covariance `w1 H1 + w2 H2 + w1 w2 (m1 - m2)(m1 - m2)'`.
pub fn recombine(
    weights: Vec2,
    mean1: Vec2,
    mean2: Vec2,
    h1: &Cov2,
    h2: &Cov2,
    obs: Vec2,
) -> (Vec2, Cov2) {
    let [w1, w2] = weights;
    let mbar = [w1 * mean1[0] + w2 * mean2[0], w1 * mean1[1] + w2 * mean2[1]];
    let d = [mean1[0] - mean2[0], mean1[1] - mean2[1]];
    let ww = w1 * w2;
    let cov = Cov2::from_psd_parts(
        w1 * h1.smm() + w2 * h2.smm() + ww * d[0] * d[0],
        w1 * h1.sbb() + w2 * h2.sbb() + ww * d[1] * d[1],
        w1 * h1.smb() + w2 * h2.smb() + ww * d[0] * d[1],
    );
    ([obs[0] - mbar[0], obs[1] - mbar[1]], cov)
}

/// Mixture log-likelihood with its filter output.
#[derive(Debug, Clone, PartialEq)]
pub struct RsLikelihood {
    pub loglik: f64,
    pub contributions: Vec<f64>,
    pub filter: FilterOutput,
}

/// Forward filter plus smoother with default options.
pub fn rs_log_likelihood(
    series: &ExcessReturnSeries,
    params: &RsModelParams,
    h0: &Cov2,
) -> Result<RsLikelihood> {
    rs_log_likelihood_with(series, params, h0, &RsOptions::default())
}

pub fn rs_log_likelihood_with(
    series: &ExcessReturnSeries,
    params: &RsModelParams,
    h0: &Cov2,
    opts: &RsOptions,
) -> Result<RsLikelihood> {
    let mut out = rs_forward(series, params, h0, opts)?;
    out.filter.smoothed = smooth(&out.filter.filtered, &out.filter.ex_ante, params.p, params.q)?;
    Ok(out)
}

/// Forward pass only; `filter.smoothed` is left empty.
pub(crate) fn rs_forward(
    series: &ExcessReturnSeries,
    params: &RsModelParams,
    h0: &Cov2,
    opts: &RsOptions,
) -> Result<RsLikelihood> {
    let (p, q) = (params.p, params.q);
    let init = match opts.initial {
        InitialProbs::Stationary => stationary_dist(p, q)?,
        InitialProbs::Given(v) => v,
    };
    let n = series.len();
    let mut f = FilterOutput {
        ex_ante: Vec::with_capacity(n),
        filtered: Vec::with_capacity(n),
        smoothed: Vec::new(),
        state_cov: Vec::with_capacity(n),
        agg_cov: Vec::with_capacity(n),
        agg_innov: Vec::with_capacity(n),
        floored: Vec::new(),
    };
    let mut contributions = Vec::with_capacity(n);
    let mut loglik = 0.0;
    let mut h_prev = *h0;
    let mut eps_prev = opts.eps0.value();
    let mut filt = init;
    let log_floor = PROB_FLOOR.ln();

    for t in 0..n {
        let ea = ex_ante_step(filt, p, q);
        let obs = series.obs(t);
        let mut h = [Cov2::identity(); 2];
        let mut mu = [[0.0; 2]; 2];
        let mut lw = [0.0; 2];
        for k in 0..2 {
            let reg = params.regime(k);
            h[k] = cov_step(&h_prev, eps_prev, reg);
            let det = h[k].det();
            if !(det >= MIN_DET) {
                return Err(Error::NearSingular { t, state: Some(k + 1), det });
            }
            mu[k] = conditional_mean(&h[k], &reg.mean);
            let e = [obs[0] - mu[k][0], obs[1] - mu[k][1]];
            lw[k] = ea[k].ln() + h[k].log_density(e);
        }
        let lse = log_sum_exp(lw[0], lw[1]);
        if lse.is_nan() {
            return Err(Error::DegenerateLikelihood { t });
        }
        if lse < log_floor {
            f.floored.push(t);
            loglik += log_floor;
            contributions.push(log_floor);
            filt = ea;
        } else {
            loglik += lse;
            contributions.push(lse);
            filt = [(lw[0] - lse).exp(), (lw[1] - lse).exp()];
        }
        let w = match opts.weights {
            RecombineWeights::ExAnte => ea,
            RecombineWeights::Filtered => filt,
        };
        let (innov, agg) = recombine(w, mu[0], mu[1], &h[0], &h[1], obs);
        f.ex_ante.push(ea);
        f.filtered.push(filt);
        f.state_cov.push(h);
        f.agg_cov.push(agg);
        f.agg_innov.push(innov);
        h_prev = agg;
        eps_prev = innov;
    }
    Ok(RsLikelihood { loglik, contributions, filter: f })
}

/// Backward smoothing pass seeded with the last filtered probability.
pub fn smooth(filtered: &[Vec2], ex_ante: &[Vec2], p: f64, q: f64) -> Result<Vec<Vec2>> {
    let n = filtered.len();
    if ex_ante.len() != n {
        return Err(Error::LengthMismatch {
            detail: format!("filtered {n}, ex_ante {}", ex_ante.len()),
        });
    }
    let mut out = vec![[0.0; 2]; n];
    let Some(last) = filtered.last() else {
        return Ok(out);
    };
    out[n - 1] = *last;
    for t in (0..n - 1).rev() {
        let next = out[t + 1];
        let mut ratio = [0.0; 2];
        for k in 0..2 {
            if next[k] > 0.0 {
                if ex_ante[t + 1][k] <= 0.0 {
                    return Err(Error::DegenerateSmoother { t });
                }
                ratio[k] = next[k] / ex_ante[t + 1][k];
            }
        }
        let s1 = filtered[t][0] * (p * ratio[0] + (1.0 - p) * ratio[1]);
        let s2 = filtered[t][1] * ((1.0 - q) * ratio[0] + q * ratio[1]);
        let s = s1 + s2;
        if !(s > 0.0) {
            return Err(Error::DegenerateSmoother { t });
        }
        out[t] = [s1 / s, s2 / s];
    }
    Ok(out)
}
