//! Derivative-free simplex search, a BFGS polish on central-difference
//! gradients, and finite-difference Hessians.
//!
//! Everything here minimizes. Objectives return `f64::INFINITY` for points
//! where the model cannot be evaluated.

/// Finite-difference step for coordinate value `x`.
pub fn fd_step(x: f64) -> f64 {
    (1e-5 * x.abs()).max(1e-5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Stop when the objective improves by less than this...
    pub f_tol: f64,
    /// ...and no coordinate moves by more than this.
    pub x_tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead with dimension-adaptive coefficients.
///
/// The initial simplex is `x0` plus `step[i]` along each axis.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], tol: &Tolerances) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
    let rho = 0.75 - 1.0 / (2.0 * nf);
    let sigma = 1.0 - 1.0 / nf;

    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < tol.max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fv = order.iter().map(|&i| fv[i]).collect();

        let spread = fv[n] - fv[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if fv[0].is_finite() && spread <= tol.f_tol && size <= tol.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < fv[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
            continue;
        }
        if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < fv[n] {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fv[n].min(fr) {
            simplex[n] = xc;
            fv[n] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + sigma * (*x - b);
            }
            fv[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=n).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), f: fv[best], iterations, evaluations: evals, converged }
}

/// Central-difference gradient.
pub fn gradient<F>(f: &F, x: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian of a vector-valued function; rows are
/// outputs, columns are coordinates.
pub fn jacobian<F>(f: &F, x: &[f64]) -> Option<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let k = x.len();
    let mut xp = x.to_vec();
    let mut cols = Vec::with_capacity(k);
    for i in 0..k {
        let h = fd_step(x[i]);
        xp[i] = x[i] + h;
        let fp = f(&xp)?;
        xp[i] = x[i] - h;
        let fm = f(&xp)?;
        xp[i] = x[i];
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
    }
    let m = cols.first().map_or(0, |c| c.len());
    Some((0..m).map(|r| cols.iter().map(|c| c[r]).collect()).collect())
}

/// Smallest second difference, in objective units, accepted when choosing
/// a Hessian step; below this the difference is dominated by rounding of
/// the objective.
const MIN_CURVATURE_SIGNAL: f64 = 1e-2;

/// Central-difference Hessian, symmetric by construction.
///
/// Each coordinate starts at [`fd_step`] and widens tenfold (at most six
/// times) while its second difference stays below a fixed signal level,
/// so weakly curved directions are not swamped by rounding.
pub fn hessian<F>(f: &F, x: &[f64]) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let k = x.len();
    let f0 = f(x);
    let mut out = vec![vec![0.0; k]; k];
    let mut xp = x.to_vec();
    let second = |xp: &mut Vec<f64>, i: usize, h: f64| {
        xp[i] = x[i] + h;
        let fp = f(xp);
        xp[i] = x[i] - h;
        let fm = f(xp);
        xp[i] = x[i];
        fp - 2.0 * f0 + fm
    };
    let mut h = vec![0.0; k];
    for i in 0..k {
        let mut step = fd_step(x[i]);
        let mut d = second(&mut xp, i, step);
        for _ in 0..6 {
            if !(d.is_finite() && d.abs() < MIN_CURVATURE_SIGNAL) {
                break;
            }
            let wider = second(&mut xp, i, step * 10.0);
            if !wider.is_finite() {
                break;
            }
            step *= 10.0;
            d = wider;
        }
        h[i] = step;
        out[i][i] = d / (step * step);
    }
    for i in 0..k {
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                xp[i] = x[i] + si * h[i];
                xp[j] = x[j] + sj * h[j];
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                + corner(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Quasi-Newton refinement with numerical gradients and a backtracking
/// Armijo line search. Stops when a step improves `f` by less than
/// `f_tol` while moving no coordinate more than `x_tol`, or when no
/// descent step can be found at finite-difference resolution.
pub fn bfgs<F>(f: F, x0: &[f64], tol: &Tolerances) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1usize;
    let mut g = gradient(&f, &x);
    evals += 2 * n;
    let mut hinv = identity(n);
    let mut first = true;
    let mut iterations = 0;
    let mut converged = false;

    if !fx.is_finite() {
        return Minimum { x, f: fx, iterations, evaluations: evals, converged };
    }

    while iterations < tol.max_iterations {
        iterations += 1;
        if g.iter().any(|v| !v.is_finite()) {
            break;
        }
        let mut dir: Vec<f64> = mat_vec(&hinv, &g).iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            hinv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if first {
            // Keep the first trial step modest in scaled coordinates.
            let norm = dot(&dir, &dir).sqrt();
            if norm > 1.0 {
                dir.iter_mut().for_each(|d| *d /= norm);
                slope /= norm;
            }
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let fnew = f(&xn);
            evals += 1;
            if fnew.is_finite() && fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            converged = true;
            break;
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let gn = gradient(&f, &xn);
        evals += 2 * n;
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let improvement = fx - fnew;
        let max_step = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x = xn;
        fx = fnew;
        g = gn;

        if improvement < tol.f_tol && max_step < tol.x_tol {
            converged = true;
            break;
        }

        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if first {
                let scale = sy / dot(&y, &y);
                hinv = identity(n);
                hinv.iter_mut().enumerate().for_each(|(i, r)| r[i] = scale);
                first = false;
            }
            bfgs_update(&mut hinv, &s, &y, sy);
        }
    }
    Minimum { x, f: fx, iterations, evaluations: evals, converged }
}

fn bfgs_update(hinv: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(hinv, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            hinv[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| dot(r, v)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
