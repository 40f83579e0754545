//! Synthetic data from both model families, for oracle tests and
//! parameter-recovery experiments.
//!
//! The switching simulator advances each period with the realized state's
//! own lagged covariance and innovation; there is no recombination because
//! the generator always knows the state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bekk::{conditional_mean, cov_step};
use crate::error::Result;
use crate::model::{BekkParams, Cov2, ExcessReturnSeries, RsModelParams, Vec2, YearMonth};
use crate::regime::stationary_dist;

/// Diagonal floor used when factoring a covariance for sampling.
pub const CHOLESKY_FLOOR: f64 = 1e-12;

/// First month of simulated series.
pub fn simulation_start() -> YearMonth {
    YearMonth::new(2000, 1).expect("valid month")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub series: ExcessReturnSeries,
    /// Conditional covariance used to draw each observation.
    pub cov: Vec<Cov2>,
    /// Hidden state per period (0 = state 1); all zeros for a single regime.
    pub states: Vec<usize>,
}

fn draw(rng: &mut ChaCha8Rng, h: &Cov2) -> Vec2 {
    let (l11, l21, l22) = h.cholesky(CHOLESKY_FLOOR);
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    [l11 * z1, l21 * z1 + l22 * z2]
}

/// Simulates `t` periods from a single-regime model with pre-sample
/// covariance `h0` and zero pre-sample innovation.
pub fn simulate_single(params: &BekkParams, t: usize, h0: &Cov2, seed: u64) -> Result<Simulation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rm, mut rb) = (Vec::with_capacity(t), Vec::with_capacity(t));
    let mut cov = Vec::with_capacity(t);
    let mut h = *h0;
    let mut eps = [0.0, 0.0];
    for _ in 0..t {
        h = cov_step(&h, eps, params);
        eps = draw(&mut rng, &h);
        let mu = conditional_mean(&h, &params.mean);
        rm.push(mu[0] + eps[0]);
        rb.push(mu[1] + eps[1]);
        cov.push(h);
    }
    let series = ExcessReturnSeries::from_returns(simulation_start(), rm, rb)?;
    Ok(Simulation { series, cov, states: vec![0; t] })
}

/// Simulates `t` periods from the switching model, with the initial state
/// drawn from the chain's stationary distribution.
pub fn simulate_rs(params: &RsModelParams, t: usize, h0: &Cov2, seed: u64) -> Result<Simulation> {
    let pi = stationary_dist(params.p, params.q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rm, mut rb) = (Vec::with_capacity(t), Vec::with_capacity(t));
    let mut cov = Vec::with_capacity(t);
    let mut states = Vec::with_capacity(t);
    let mut h = *h0;
    let mut eps = [0.0, 0.0];
    let mut state = if rng.random::<f64>() < pi[0] { 0 } else { 1 };
    for i in 0..t {
        if i > 0 {
            let stay = if state == 0 { params.p } else { params.q };
            if rng.random::<f64>() >= stay {
                state = 1 - state;
            }
        }
        let reg = params.regime(state);
        h = cov_step(&h, eps, reg);
        eps = draw(&mut rng, &h);
        let mu = conditional_mean(&h, &reg.mean);
        rm.push(mu[0] + eps[0]);
        rb.push(mu[1] + eps[1]);
        cov.push(h);
        states.push(state);
    }
    let series = ExcessReturnSeries::from_returns(simulation_start(), rm, rb)?;
    Ok(Simulation { series, cov, states })
}
