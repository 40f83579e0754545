#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rsbekk::{BekkParams, Cov2, ExcessReturnSeries, MeanParams, RsModelParams, YearMonth};

pub const LN_2PI: f64 = 1.8378770664093453;

pub fn start() -> YearMonth {
    YearMonth::new(1990, 1).unwrap()
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Gaussian noise series with the given scale.
pub fn noise_series(rng: &mut ChaCha8Rng, t: usize, scale: f64) -> ExcessReturnSeries {
    let rm = (0..t).map(|_| scale * normal(rng)).collect();
    let rb = (0..t).map(|_| scale * normal(rng)).collect();
    ExcessReturnSeries::from_returns(start(), rm, rb).unwrap()
}

pub fn random_mean(rng: &mut ChaCha8Rng, scale: f64) -> MeanParams {
    MeanParams {
        l10: uniform(rng, -0.5, 0.5) * scale,
        l11: uniform(rng, -0.05, 0.05),
        l12: uniform(rng, -0.05, 0.05),
        l20: uniform(rng, -0.5, 0.5) * scale,
        l21: uniform(rng, -0.05, 0.05),
        l22: uniform(rng, -0.05, 0.05),
    }
}

/// Covariance-stationary BEKK block with unit-order intercept.
pub fn random_bekk(rng: &mut ChaCha8Rng) -> BekkParams {
    let a11 = uniform(rng, -0.5, 0.5);
    let a22 = uniform(rng, -0.5, 0.5);
    BekkParams {
        mean: random_mean(rng, 1.0),
        c11: uniform(rng, 0.3, 1.5),
        c12: uniform(rng, -0.5, 0.5),
        c22: uniform(rng, 0.3, 1.5),
        a11,
        a22,
        b11: uniform(rng, 0.0, 1.0) * (1.0 - a11 * a11).sqrt() * 0.95,
        b22: uniform(rng, 0.0, 1.0) * (1.0 - a22 * a22).sqrt() * 0.95,
    }
}

/// Block with `A = B = 0`, so its covariance is the constant `CC'`.
pub fn constant_bekk(rng: &mut ChaCha8Rng) -> BekkParams {
    BekkParams { a11: 0.0, a22: 0.0, b11: 0.0, b22: 0.0, ..random_bekk(rng) }
}

pub fn random_rs(rng: &mut ChaCha8Rng, constant: bool) -> RsModelParams {
    let block = |rng: &mut ChaCha8Rng| if constant { constant_bekk(rng) } else { random_bekk(rng) };
    let regime1 = block(rng);
    let regime2 = block(rng);
    RsModelParams::new(regime1, regime2, uniform(rng, 0.05, 0.95), uniform(rng, 0.05, 0.95)).unwrap()
}

/// `CC'` for lower-triangular `C = [[c11, 0], [c12, c22]]`, by explicit
/// matrix product.
#[allow(clippy::needless_range_loop)]
pub fn intercept_matrix(b: &BekkParams) -> [[f64; 2]; 2] {
    let c = [[b.c11, 0.0], [b.c12, b.c22]];
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j] += c[i][k] * c[j][k];
            }
        }
    }
    out
}

/// Bivariate normal density written out with the explicit 2x2 inverse.
pub fn normal_density(h: [[f64; 2]; 2], e: [f64; 2]) -> f64 {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let inv = [[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]];
    let q = e[0] * (inv[0][0] * e[0] + inv[0][1] * e[1]) + e[1] * (inv[1][0] * e[0] + inv[1][1] * e[1]);
    (-LN_2PI - 0.5 * det.ln() - 0.5 * q).exp()
}

/// Exhaustive enumeration over all `2^T` state paths of `obs` of a model whose
/// blocks have constant covariances. Returns the log-likelihood and the
/// posterior `P(s_t = k | all data)`.
pub fn enumerate_paths(obs: &[[f64; 2]], rs: &RsModelParams) -> (f64, Vec<[f64; 2]>) {
    let n = obs.len();
    let (p, q) = (rs.p, rs.q);
    let pi = [(1.0 - q) / (2.0 - p - q), (1.0 - p) / (2.0 - p - q)];
    let trans = [[p, 1.0 - p], [1.0 - q, q]];
    let dens: Vec<[f64; 2]> = (0..n)
        .map(|t| {
            let y = obs[t];
            let mut d = [0.0; 2];
            for (k, block) in [&rs.regime1, &rs.regime2].into_iter().enumerate() {
                let h = intercept_matrix(block);
                let m = &block.mean;
                let mu = [
                    m.l10 + m.l11 * h[0][0] + m.l12 * h[0][1],
                    m.l20 + m.l21 * h[0][1] + m.l22 * h[1][1],
                ];
                d[k] = normal_density(h, [y[0] - mu[0], y[1] - mu[1]]);
            }
            d
        })
        .collect();
    let mut total = 0.0;
    let mut marg = vec![[0.0; 2]; n];
    for path in 0..(1usize << n) {
        let s = |t: usize| (path >> t) & 1;
        let mut w = pi[s(0)] * dens[0][s(0)];
        for t in 1..n {
            w *= trans[s(t - 1)][s(t)] * dens[t][s(t)];
        }
        total += w;
        for (t, m) in marg.iter_mut().enumerate() {
            m[s(t)] += w;
        }
    }
    let post = marg.iter().map(|m| [m[0] / total, m[1] / total]).collect();
    (total.ln(), post)
}

/// Moments, Jarque-Bera and Ljung-Box written directly from their textbook
/// definitions.
pub fn literal_jb(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    let s = m3 / m2.powf(1.5);
    let k = m4 / (m2 * m2);
    n / 6.0 * (s * s + (k - 3.0) * (k - 3.0) / 4.0)
}

pub fn literal_lb(x: &[f64], lags: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let mut q = 0.0;
    for k in 1..=lags {
        let mut ck = 0.0;
        for t in k..n {
            ck += (x[t] - m) * (x[t - k] - m);
        }
        let r = ck / c0;
        q += r * r / (n - k) as f64;
    }
    (n * (n + 2)) as f64 * q
}

pub fn cov_close(a: &Cov2, b: &Cov2, tol: f64) -> bool {
    (a.smm() - b.smm()).abs() <= tol && (a.sbb() - b.sbb()).abs() <= tol && (a.smb() - b.smb()).abs() <= tol
}
