//! Quasi-maximum-likelihood fitting for the single-regime and switching
//! models.
//!
//! Parameters are optimized in an unconstrained coordinate system: the
//! staying probabilities go through a logit, everything else is used as is.
//! Pinned coefficients (the hedge prices of risk in the restricted model)
//! are not part of the vector at all. The optimizer additionally works on
//! per-coordinate rescaled values so that the simplex and the jitter of the
//! restarts are meaningful for both tiny covariance constants and large
//! prices of risk.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bekk::{self, PresampleInnovation};
use crate::error::{Error, Result};
use crate::model::{
    BekkParams, Cov2, DummyParams, ExcessReturnSeries, FilterOutput, MeanParams, ModelParams,
    RsModelParams,
};
use crate::optim::{self, Tolerances};
use crate::regime::{self, RsOptions};
use crate::stats::median;

/// Which model to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// 1 (linear) or 2 (switching).
    pub n_regimes: u8,
    /// Pin the hedge prices of risk `l21 = l22 = 0`.
    pub restricted: bool,
    /// High-volatility dummy terms in the market equation (single regime only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dummy: Option<DummyForm>,
}

impl ModelSpec {
    pub fn single(restricted: bool) -> Self {
        Self { n_regimes: 1, restricted, dummy: None }
    }

    pub fn switching(restricted: bool) -> Self {
        Self { n_regimes: 2, restricted, dummy: None }
    }

    fn validate(&self) -> Result<()> {
        match (self.n_regimes, self.dummy) {
            (1, _) | (2, None) => Ok(()),
            (2, Some(_)) => Err(Error::InvalidConfig("dummy terms need a single-regime model".into())),
            (n, _) => Err(Error::InvalidConfig(format!("n_regimes must be 1 or 2, got {n}"))),
        }
    }
}

/// Dummy terms added to the market equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DummyForm {
    /// `D * smm` and `D * smb`.
    Interaction,
    /// Interactions plus a level shift `D`.
    InteractionAndLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n_restarts: usize,
    pub max_iterations: usize,
    pub loglik_tol: f64,
    pub param_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { n_restarts: 4, max_iterations: 20_000, loglik_tol: 1e-8, param_tol: 1e-6, seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_restarts < 1 || self.max_iterations < 1 {
            return Err(Error::InvalidConfig("n_restarts and max_iterations must be >= 1".into()));
        }
        if !(self.loglik_tol > 0.0 && self.param_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be > 0".into()));
        }
        Ok(())
    }
}

/// Fitted model with convergence metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub spec: ModelSpec,
    pub params: ModelParams,
    pub loglik: f64,
    /// Names of the free parameters, in vector order.
    pub param_names: Vec<String>,
    /// Robust standard errors aligned with `param_names`; `None` when the
    /// fit did not converge or the information matrix was singular.
    pub std_errors: Option<Vec<f64>>,
    pub n_iterations: usize,
    pub n_restarts: usize,
    pub converged: bool,
}

impl EstimationResult {
    /// Free parameter values aligned with `param_names`.
    pub fn values(&self) -> Vec<f64> {
        let mut v = to_unconstrained(&self.params, &self.spec).unwrap_or_default();
        let k = v.len();
        if self.spec.n_regimes == 2 && k >= 2 {
            v[k - 2] = logistic(v[k - 2]);
            v[k - 1] = logistic(v[k - 1]);
        }
        v
    }
}

// ---------------------------------------------------------------------------
// Parameter vector layout

fn mean_names(restricted: bool) -> &'static [&'static str] {
    if restricted {
        &["lambda10", "lambda11", "lambda12", "lambda20"]
    } else {
        &["lambda10", "lambda11", "lambda12", "lambda20", "lambda21", "lambda22"]
    }
}

const COV_NAMES: [&str; 7] = ["c11", "c12", "c22", "a11", "a22", "b11", "b22"];

/// Names of the free parameters, in vector order.
pub fn param_names(spec: &ModelSpec) -> Vec<String> {
    let block = || mean_names(spec.restricted).iter().chain(COV_NAMES.iter()).copied();
    match spec.n_regimes {
        2 => {
            let mut v: Vec<String> = block().map(|n| format!("{n}_s1")).collect();
            v.extend(block().map(|n| format!("{n}_s2")));
            v.push("p".into());
            v.push("q".into());
            v
        }
        _ => {
            let mut v: Vec<String> = block().map(String::from).collect();
            match spec.dummy {
                Some(DummyForm::Interaction) => {
                    v.extend(["lambda11d".into(), "lambda12d".into()]);
                }
                Some(DummyForm::InteractionAndLevel) => {
                    v.extend(["lambda10d".into(), "lambda11d".into(), "lambda12d".into()]);
                }
                None => {}
            }
            v
        }
    }
}

fn block_len(restricted: bool) -> usize {
    mean_names(restricted).len() + COV_NAMES.len()
}

fn pack_bekk(b: &BekkParams, restricted: bool, out: &mut Vec<f64>) -> Result<()> {
    let m = &b.mean;
    if restricted {
        if !m.is_restricted() {
            return Err(Error::InvalidParameters(
                "restricted model requires lambda21 = lambda22 = 0".into(),
            ));
        }
        out.extend([m.l10, m.l11, m.l12, m.l20]);
    } else {
        out.extend([m.l10, m.l11, m.l12, m.l20, m.l21, m.l22]);
    }
    out.extend([b.c11, b.c12, b.c22, b.a11, b.a22, b.b11, b.b22]);
    Ok(())
}

fn unpack_bekk(v: &[f64], restricted: bool) -> BekkParams {
    let (mean, rest) = if restricted {
        (MeanParams::restricted(v[0], v[1], v[2], v[3]), &v[4..])
    } else {
        (
            MeanParams { l10: v[0], l11: v[1], l12: v[2], l20: v[3], l21: v[4], l22: v[5] },
            &v[6..],
        )
    };
    BekkParams {
        mean,
        c11: rest[0],
        c12: rest[1],
        c22: rest[2],
        a11: rest[3],
        a22: rest[4],
        b11: rest[5],
        b22: rest[6],
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn checked_logit(name: &'static str, p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(logit(p))
    } else {
        Err(Error::InvalidProbability { name, value: p })
    }
}

/// Parameters to the unconstrained optimizer coordinates.
pub fn to_unconstrained(params: &ModelParams, spec: &ModelSpec) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(param_names(spec).len());
    match (params, spec.n_regimes, spec.dummy) {
        (ModelParams::Single(b), 1, None) => pack_bekk(b, spec.restricted, &mut out)?,
        (ModelParams::Switching(rs), 2, None) => {
            pack_bekk(&rs.regime1, spec.restricted, &mut out)?;
            pack_bekk(&rs.regime2, spec.restricted, &mut out)?;
            out.push(checked_logit("p", rs.p)?);
            out.push(checked_logit("q", rs.q)?);
        }
        (ModelParams::Dummy(d), 1, Some(form)) => {
            pack_bekk(&d.base, spec.restricted, &mut out)?;
            if form == DummyForm::InteractionAndLevel {
                out.push(d.l10d);
            } else if d.l10d != 0.0 {
                return Err(Error::InvalidParameters("level dummy not in this model".into()));
            }
            out.extend([d.l11d, d.l12d]);
        }
        _ => {
            return Err(Error::InvalidParameters(
                "parameter family does not match the model spec".into(),
            ))
        }
    }
    Ok(out)
}

/// Inverse of [`to_unconstrained`].
pub fn from_unconstrained(v: &[f64], spec: &ModelSpec) -> Result<ModelParams> {
    let expected = param_names(spec).len();
    if v.len() != expected {
        return Err(Error::InvalidParameters(format!(
            "expected {expected} values, got {}",
            v.len()
        )));
    }
    let k = block_len(spec.restricted);
    Ok(match (spec.n_regimes, spec.dummy) {
        (2, _) => ModelParams::Switching(RsModelParams {
            regime1: unpack_bekk(&v[..k], spec.restricted),
            regime2: unpack_bekk(&v[k..2 * k], spec.restricted),
            p: logistic(v[2 * k]),
            q: logistic(v[2 * k + 1]),
        }),
        (_, Some(form)) => {
            let base = unpack_bekk(&v[..k], spec.restricted);
            let extra = &v[k..];
            let (l10d, l11d, l12d) = match form {
                DummyForm::Interaction => (0.0, extra[0], extra[1]),
                DummyForm::InteractionAndLevel => (extra[0], extra[1], extra[2]),
            };
            ModelParams::Dummy(DummyParams { base, l10d, l11d, l12d })
        }
        _ => ModelParams::Single(unpack_bekk(v, spec.restricted)),
    })
}

/// Derivative of each natural parameter with respect to its unconstrained
/// coordinate.
fn natural_jacobian_diag(u: &[f64], spec: &ModelSpec) -> Vec<f64> {
    let mut d = vec![1.0; u.len()];
    if spec.n_regimes == 2 {
        let k = u.len();
        for i in [k - 2, k - 1] {
            let p = logistic(u[i]);
            d[i] = p * (1.0 - p);
        }
    }
    d
}

// ---------------------------------------------------------------------------
// Likelihood in unconstrained coordinates

/// Everything needed to evaluate a model's likelihood at a vector.
struct Objective<'a> {
    series: &'a ExcessReturnSeries,
    spec: ModelSpec,
    h0: Cov2,
    dummy: Option<&'a [bool]>,
}

impl Objective<'_> {
    fn contributions(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        let params = from_unconstrained(u, &self.spec)?;
        match params {
            ModelParams::Single(b) => {
                let out = bekk::log_likelihood(self.series, &b, &self.h0)?;
                Ok((out.loglik, out.contributions))
            }
            ModelParams::Switching(rs) => {
                let out = regime::rs_forward(self.series, &rs, &self.h0, &RsOptions::default())?;
                Ok((out.loglik, out.contributions))
            }
            ModelParams::Dummy(d) => {
                let dummy = self.dummy.ok_or_else(|| {
                    Error::InvalidConfig("dummy model evaluated without a dummy path".into())
                })?;
                let out = dummy_log_likelihood(self.series, &d, dummy, &self.h0)?;
                Ok((out.loglik, out.contributions))
            }
        }
    }

    fn loglik(&self, u: &[f64]) -> Option<f64> {
        self.contributions(u).ok().map(|(l, _)| l).filter(|l| l.is_finite())
    }
}

/// Market-equation mean with high-volatility dummy terms.
pub(crate) fn dummy_log_likelihood(
    series: &ExcessReturnSeries,
    params: &DummyParams,
    dummy: &[bool],
    h0: &Cov2,
) -> Result<bekk::LikelihoodPath> {
    if dummy.len() != series.len() {
        return Err(Error::LengthMismatch {
            detail: format!("dummy {}, series {}", dummy.len(), series.len()),
        });
    }
    bekk::run_recursion(series, &params.base, h0, PresampleInnovation::Zero, |t, h| {
        let mut mu = bekk::conditional_mean(h, &params.base.mean);
        if dummy[t] {
            mu[0] += params.l10d + params.l11d * h.smm() + params.l12d * h.smb();
        }
        mu
    })
}

// ---------------------------------------------------------------------------
// Starting values and scaling

const START_A: f64 = 0.2;
const START_B: f64 = 0.9;
const START_P: f64 = 0.85;
const START_Q: f64 = 0.75;
const JITTER_SD: f64 = 0.5;

fn start_bekk(h: &Cov2, c_scale: f64) -> BekkParams {
    let shrink = (1.0 - START_A * START_A - START_B * START_B).sqrt() * c_scale;
    let (l11, l21, l22) = h.cholesky(0.0);
    BekkParams {
        mean: MeanParams::default(),
        c11: l11 * shrink,
        c12: l21 * shrink,
        c22: l22 * shrink,
        a11: START_A,
        a22: START_A,
        b11: START_B,
        b22: START_B,
    }
}

/// Default starting point for `spec`.
pub fn default_start(series: &ExcessReturnSeries, spec: &ModelSpec) -> Result<ModelParams> {
    let h = series.sample_covariance()?;
    Ok(match (spec.n_regimes, spec.dummy) {
        (2, _) => ModelParams::Switching(RsModelParams {
            regime1: start_bekk(&h, 0.6),
            regime2: start_bekk(&h, 1.6),
            p: START_P,
            q: START_Q,
        }),
        (_, Some(_)) => ModelParams::Dummy(DummyParams {
            base: start_bekk(&h, 1.0),
            l10d: 0.0,
            l11d: 0.0,
            l12d: 0.0,
        }),
        _ => ModelParams::Single(start_bekk(&h, 1.0)),
    })
}

/// Typical magnitude of each free coordinate, from the data's scale.
fn coordinate_scales(series: &ExcessReturnSeries, spec: &ModelSpec) -> Result<Vec<f64>> {
    let h = series.sample_covariance()?;
    let (sm, sb) = (h.smm().sqrt(), h.sbb().sqrt());
    let c = 0.3 * (1.0 - START_A * START_A - START_B * START_B).sqrt();
    let scale_for = |name: &str| -> f64 {
        let base = name.split("_s").next().unwrap_or(name);
        match base {
            "lambda10" | "lambda10d" => 0.1 * sm,
            "lambda11" | "lambda11d" => 0.1 / sm,
            "lambda12" | "lambda12d" => 0.1 / sb,
            "lambda20" => 0.1 * sb,
            "lambda21" => 0.1 / sm,
            "lambda22" => 0.1 / sb,
            "c11" => c * sm,
            "c12" | "c22" => c * sb,
            "a11" | "a22" => 0.1,
            "b11" | "b22" => 0.05,
            _ => 0.5,
        }
    };
    Ok(param_names(spec).iter().map(|n| scale_for(n)).collect())
}

// ---------------------------------------------------------------------------
// Optimization driver

struct Optimum {
    u: Vec<f64>,
    loglik: f64,
    iterations: usize,
    converged: bool,
}

fn run_restarts(
    objective: &Objective<'_>,
    u0: &[f64],
    scales: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Optimum> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<Vec<f64>> = (0..cfg.n_restarts)
        .map(|i| {
            if i == 0 {
                u0.iter().zip(scales).map(|(u, s)| u / s).collect()
            } else {
                u0.iter()
                    .zip(scales)
                    .map(|(u, s)| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        u / s + JITTER_SD * z
                    })
                    .collect()
            }
        })
        .collect();

    let neg_ll = |z: &[f64]| -> f64 {
        let u: Vec<f64> = z.iter().zip(scales).map(|(z, s)| z * s).collect();
        objective.loglik(&u).map_or(f64::INFINITY, |l| -l)
    };
    let tol = Tolerances {
        f_tol: cfg.loglik_tol,
        x_tol: cfg.param_tol,
        max_iterations: cfg.max_iterations,
    };
    let simplex_step = vec![1.0; u0.len()];

    let results: Vec<(f64, optim::Minimum, usize)> = starts
        .par_iter()
        .map(|z0| {
            let f0 = neg_ll(z0);
            let nm = optim::nelder_mead(neg_ll, z0, &simplex_step, &tol);
            let polished = optim::bfgs(neg_ll, &nm.x, &tol);
            let iters = nm.iterations + polished.iterations;
            let best = if polished.f <= nm.f { polished } else { optim::Minimum { converged: false, ..nm } };
            (f0, best, iters)
        })
        .collect();

    let best = results
        .iter()
        .enumerate()
        .filter(|(_, (_, m, _))| m.f.is_finite())
        .min_by(|a, b| a.1 .1.f.total_cmp(&b.1 .1.f).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| {
            Error::EstimationFailed("no restart produced a finite likelihood".into())
        })?;
    let (_, m, iters) = &results[best];
    Ok(Optimum {
        u: m.x.iter().zip(scales).map(|(z, s)| z * s).collect(),
        loglik: -m.f,
        iterations: *iters,
        converged: m.converged,
    })
}

/// Fits `spec` by QML from the default starting values.
pub fn fit(
    series: &ExcessReturnSeries,
    spec: &ModelSpec,
    cfg: &OptimizerConfig,
) -> Result<EstimationResult> {
    let start = default_start(series, spec)?;
    fit_from(series, spec, cfg, &start)
}

/// Fits `spec` starting the first restart at `start`.
pub fn fit_from(
    series: &ExcessReturnSeries,
    spec: &ModelSpec,
    cfg: &OptimizerConfig,
    start: &ModelParams,
) -> Result<EstimationResult> {
    if spec.dummy.is_some() {
        return Err(Error::InvalidConfig("dummy models are fitted with a dummy path".into()));
    }
    fit_inner(series, spec, cfg, start, None)
}

pub(crate) fn fit_inner(
    series: &ExcessReturnSeries,
    spec: &ModelSpec,
    cfg: &OptimizerConfig,
    start: &ModelParams,
    dummy: Option<&[bool]>,
) -> Result<EstimationResult> {
    spec.validate()?;
    cfg.validate()?;
    let h0 = series.sample_covariance()?;
    let objective = Objective { series, spec: *spec, h0, dummy };
    let u0 = to_unconstrained(start, spec)?;
    let scales = coordinate_scales(series, spec)?;
    let opt = run_restarts(&objective, &u0, &scales, cfg)?;

    let params = canonical_signs(from_unconstrained(&opt.u, spec)?);
    let u = to_unconstrained(&params, spec)?;
    let loglik = objective.loglik(&u).unwrap_or(opt.loglik);

    let mut result = EstimationResult {
        spec: *spec,
        params,
        loglik,
        param_names: param_names(spec),
        std_errors: None,
        n_iterations: opt.iterations,
        n_restarts: cfg.n_restarts,
        converged: opt.converged,
    };
    if let ModelParams::Switching(rs) = &result.params {
        let filter = regime::rs_log_likelihood(series, rs, &h0)?.filter;
        result = normalize_labels(result, &filter).0;
    }
    if result.converged {
        result.std_errors = robust_std_errors_inner(&result, series, dummy).ok();
    }
    Ok(result)
}

/// Resolves the sign symmetries of the BEKK quadratic forms: `C` is only
/// identified up to the signs of its columns, `A` and `B` up to a joint
/// sign flip.
fn canonical_bekk(mut b: BekkParams) -> BekkParams {
    if b.c11 < 0.0 {
        b.c11 = -b.c11;
        b.c12 = -b.c12;
    }
    b.c22 = b.c22.abs();
    if b.a11 < 0.0 {
        b.a11 = -b.a11;
        b.a22 = -b.a22;
    }
    if b.b11 < 0.0 {
        b.b11 = -b.b11;
        b.b22 = -b.b22;
    }
    b
}

fn canonical_signs(p: ModelParams) -> ModelParams {
    match p {
        ModelParams::Single(b) => ModelParams::Single(canonical_bekk(b)),
        ModelParams::Switching(rs) => ModelParams::Switching(RsModelParams {
            regime1: canonical_bekk(rs.regime1),
            regime2: canonical_bekk(rs.regime2),
            ..rs
        }),
        ModelParams::Dummy(d) => ModelParams::Dummy(DummyParams { base: canonical_bekk(d.base), ..d }),
    }
}

// ---------------------------------------------------------------------------
// Standard errors

/// Inverse Hessian and outer product of scores in unconstrained coordinates.
pub struct Information {
    pub hessian: Vec<Vec<f64>>,
    pub opg: Vec<Vec<f64>>,
}

/// Numerical Hessian of `sum(contribs)` and the outer-product-of-gradients
/// matrix of the per-observation contributions at `u`.
pub fn information<F>(contribs: F, u: &[f64]) -> Result<Information>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let total = |x: &[f64]| contribs(x).map_or(f64::NAN, |c| c.iter().sum());
    let hessian = optim::hessian(&total, u);
    let scores = optim::jacobian(&contribs, u).ok_or_else(|| {
        Error::EstimationFailed("likelihood undefined near the estimate".into())
    })?;
    let k = u.len();
    let mut opg = vec![vec![0.0; k]; k];
    for s in &scores {
        for i in 0..k {
            for j in 0..k {
                opg[i][j] += s[i] * s[j];
            }
        }
    }
    Ok(Information { hessian, opg })
}

/// Inverse via the eigendecomposition of the unit-diagonal rescaling
/// `D M D`, `D = diag(|m_ii|^-1/2)`, so the singularity test does not
/// depend on the units of the coordinates.
fn invert_symmetric(m: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let k = m.len();
    let mat = DMatrix::from_fn(k, k, |i, j| m[i][j]);
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularInformation { eigenvalues: vec![f64::NAN] });
    }
    if (0..k).any(|i| mat[(i, i)] == 0.0) {
        return Err(Error::SingularInformation { eigenvalues: vec![0.0] });
    }
    let d = DVector::from_fn(k, |i, _| 1.0 / mat[(i, i)].abs().sqrt());
    let scaled = DMatrix::from_fn(k, k, |i, j| mat[(i, j)] * d[i] * d[j]);
    let eig = SymmetricEigen::new(scaled);
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let small: Vec<f64> =
        eig.eigenvalues.iter().copied().filter(|v| v.abs() <= 1e-10 * max).collect();
    if max == 0.0 || !small.is_empty() {
        return Err(Error::SingularInformation { eigenvalues: small });
    }
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v));
    let inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    Ok(DMatrix::from_fn(k, k, |i, j| inv[(i, j)] * d[i] * d[j]))
}

/// Sandwich covariance `H^-1 G H^-1` in the coordinates of `info`.
pub fn sandwich_covariance(info: &Information) -> Result<DMatrix<f64>> {
    let k = info.hessian.len();
    let hinv = invert_symmetric(&info.hessian)?;
    let g = DMatrix::from_fn(k, k, |i, j| info.opg[i][j]);
    Ok(&hinv * g * &hinv)
}

/// Hessian-only covariance `-H^-1`.
pub fn hessian_covariance(info: &Information) -> Result<DMatrix<f64>> {
    Ok(-invert_symmetric(&info.hessian)?)
}

fn mapped_std_errors(cov: &DMatrix<f64>, jac: &[f64]) -> Vec<f64> {
    (0..jac.len()).map(|i| cov[(i, i)].max(0.0).sqrt() * jac[i].abs()).collect()
}

/// Robust (sandwich) standard errors of the free parameters, mapped back
/// to natural coordinates by the delta method.
pub fn robust_std_errors(result: &EstimationResult, series: &ExcessReturnSeries) -> Result<Vec<f64>> {
    if result.spec.dummy.is_some() {
        return Err(Error::InvalidConfig("use the dummy model's own standard errors".into()));
    }
    robust_std_errors_inner(result, series, None)
}

/// Standard errors from the inverse Hessian alone.
pub fn hessian_std_errors(result: &EstimationResult, series: &ExcessReturnSeries) -> Result<Vec<f64>> {
    let (info, jac) = information_at(result, series, None)?;
    Ok(mapped_std_errors(&hessian_covariance(&info)?, &jac))
}

pub(crate) fn robust_std_errors_inner(
    result: &EstimationResult,
    series: &ExcessReturnSeries,
    dummy: Option<&[bool]>,
) -> Result<Vec<f64>> {
    let (info, jac) = information_at(result, series, dummy)?;
    Ok(mapped_std_errors(&sandwich_covariance(&info)?, &jac))
}

fn information_at(
    result: &EstimationResult,
    series: &ExcessReturnSeries,
    dummy: Option<&[bool]>,
) -> Result<(Information, Vec<f64>)> {
    let objective =
        Objective { series, spec: result.spec, h0: series.sample_covariance()?, dummy };
    let u = to_unconstrained(&result.params, &result.spec)?;
    let info = information(|x: &[f64]| objective.contributions(x).ok().map(|(_, c)| c), &u)?;
    Ok((info, natural_jacobian_diag(&u, &result.spec)))
}

// ---------------------------------------------------------------------------
// Label normalization

/// Orders the states so that state 1 has the lower median market variance.
/// Returns the (possibly) relabeled result and filter output.
pub fn normalize_labels(
    result: EstimationResult,
    filter: &FilterOutput,
) -> (EstimationResult, FilterOutput) {
    let ModelParams::Switching(rs) = result.params else {
        return (result, filter.clone());
    };
    let var1: Vec<f64> = filter.state_cov.iter().map(|c| c[0].smm()).collect();
    let var2: Vec<f64> = filter.state_cov.iter().map(|c| c[1].smm()).collect();
    let (m1, m2) = (median(&var1), median(&var2));
    if !(m1 > m2) {
        return (result, filter.clone());
    }
    let k = block_len(result.spec.restricted);
    let std_errors = result.std_errors.as_ref().map(|se| {
        let mut v = Vec::with_capacity(se.len());
        v.extend_from_slice(&se[k..2 * k]);
        v.extend_from_slice(&se[..k]);
        v.push(se[2 * k + 1]);
        v.push(se[2 * k]);
        v
    });
    let relabeled = EstimationResult {
        params: ModelParams::Switching(rs.swapped()),
        std_errors,
        ..result
    };
    (relabeled, filter.swapped())
}
