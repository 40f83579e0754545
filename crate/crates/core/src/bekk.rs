//! Single-regime diagonal BEKK(1,1) GARCH-in-mean.
//!
//! ```text
//! r_t = mu(H_t) + e_t,         e_t ~ N(0, H_t)
//! H_t = C C' + A' e_{t-1} e_{t-1}' A + B' H_{t-1} B
//! ```
//!
//! `mu` is affine in the entries of `H_t`. The innovation that feeds the
//! next covariance step is the mean-equation residual, so `H` and `e` are
//! computed together in one forward pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BekkParams, Cov2, ExcessReturnSeries, MeanParams, Vec2};

/// Determinant below which a conditional covariance is treated as singular.
pub const MIN_DET: f64 = 1e-18;

/// How the innovation before the first observation is set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresampleInnovation {
    #[default]
    Zero,
    Fixed(Vec2),
}

impl PresampleInnovation {
    pub fn value(&self) -> Vec2 {
        match self {
            PresampleInnovation::Zero => [0.0, 0.0],
            PresampleInnovation::Fixed(e) => *e,
        }
    }
}

/// One covariance update.
pub fn cov_step(h_prev: &Cov2, eps_prev: Vec2, params: &BekkParams) -> Cov2 {
    let cc = params.intercept();
    let (a1, a2, b1, b2) = (params.a11, params.a22, params.b11, params.b22);
    let (e1, e2) = (eps_prev[0], eps_prev[1]);
    let ae1 = a1 * e1;
    let ae2 = a2 * e2;
    Cov2::from_psd_parts(
        cc.smm() + ae1 * ae1 + b1 * b1 * h_prev.smm(),
        cc.sbb() + ae2 * ae2 + b2 * b2 * h_prev.sbb(),
        cc.smb() + ae1 * ae2 + b1 * b2 * h_prev.smb(),
    )
}

/// Expected excess returns given the conditional covariance.
pub fn conditional_mean(h: &Cov2, m: &MeanParams) -> Vec2 {
    [
        m.l10 + m.l11 * h.smm() + m.l12 * h.smb(),
        m.l20 + m.l21 * h.smb() + m.l22 * h.sbb(),
    ]
}

/// Log-likelihood and the covariance and innovation paths it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodPath {
    pub loglik: f64,
    /// Per-observation log density.
    pub contributions: Vec<f64>,
    pub cov: Vec<Cov2>,
    pub innov: Vec<Vec2>,
}

/// Gaussian quasi-log-likelihood with the pre-sample covariance `h0` and a
/// zero pre-sample innovation.
pub fn log_likelihood(
    series: &ExcessReturnSeries,
    params: &BekkParams,
    h0: &Cov2,
) -> Result<LikelihoodPath> {
    log_likelihood_with(series, params, h0, PresampleInnovation::Zero)
}

pub fn log_likelihood_with(
    series: &ExcessReturnSeries,
    params: &BekkParams,
    h0: &Cov2,
    eps0: PresampleInnovation,
) -> Result<LikelihoodPath> {
    run_recursion(series, params, h0, eps0, |_, h| conditional_mean(h, &params.mean))
}

/// Forward pass with an arbitrary mean function of `(t, H_t)`.
pub(crate) fn run_recursion<F>(
    series: &ExcessReturnSeries,
    params: &BekkParams,
    h0: &Cov2,
    eps0: PresampleInnovation,
    mean_fn: F,
) -> Result<LikelihoodPath>
where
    F: Fn(usize, &Cov2) -> Vec2,
{
    let n = series.len();
    let mut out = LikelihoodPath {
        loglik: 0.0,
        contributions: Vec::with_capacity(n),
        cov: Vec::with_capacity(n),
        innov: Vec::with_capacity(n),
    };
    let mut h = *h0;
    let mut eps = eps0.value();
    for t in 0..n {
        h = cov_step(&h, eps, params);
        let det = h.det();
        if !(det >= MIN_DET) {
            return Err(Error::NearSingular { t, state: None, det });
        }
        let mu = mean_fn(t, &h);
        let r = series.obs(t);
        eps = [r[0] - mu[0], r[1] - mu[1]];
        let ll = h.log_density(eps);
        if !ll.is_finite() {
            return Err(Error::NearSingular { t, state: None, det });
        }
        out.loglik += ll;
        out.contributions.push(ll);
        out.cov.push(h);
        out.innov.push(eps);
    }
    Ok(out)
}
