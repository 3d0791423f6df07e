//! Exact and tapered Gaussian log-likelihoods, their theta- and sigma2-
//! scores, the closed-form sigma2 estimator at fixed theta, and joint
//! (theta, sigma2) box maximization for the exponential model.
//!
//! The exponential family takes the O(n) path through the tridiagonal
//! precision; tapered likelihoods go through the banded factorization. During
//! optimization a non-positive-definite evaluation counts as -inf rather than
//! aborting the search.

use serde::Serialize;
use thiserror::Error;

use crate::covmodel::{dcov_dtheta, taper_value, CovError, CovFamily, CovModel, TaperSpec};
use crate::linalg::{
    band_from_fn, build_dense, build_tapered, ou_log_det, ou_precision, trace_band_product,
    LinalgError,
};
use crate::simulate::Design;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cov(#[from] CovError),
    #[error("dataset length mismatch: {n_design} locations vs {n_obs} observations")]
    LengthMismatch { n_design: usize, n_obs: usize },
    #[error("non-finite observation at index {0}")]
    NonFiniteObservation(usize),
    #[error("invalid {name} range [{lo}, {hi}]: need 0 < lo <= hi")]
    InvalidBox { name: &'static str, lo: f64, hi: f64 },
}

/// A design paired with one realization of the process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub design: Design,
    pub x: Vec<f64>,
}

impl Dataset {
    pub fn new(design: Design, x: Vec<f64>) -> Result<Self, FitError> {
        if design.len() != x.len() {
            return Err(FitError::LengthMismatch {
                n_design: design.len(),
                n_obs: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(FitError::NonFiniteObservation(i));
        }
        Ok(Self { design, x })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Optimization box J = [a, b] x [w, v] for (theta, sigma2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamBox {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub sigma2_lo: f64,
    pub sigma2_hi: f64,
}

impl ParamBox {
    pub fn new(a: f64, b: f64, w: f64, v: f64) -> Result<Self, FitError> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && a <= b) {
            return Err(FitError::InvalidBox {
                name: "theta",
                lo: a,
                hi: b,
            });
        }
        if !(w.is_finite() && v.is_finite() && w > 0.0 && w <= v) {
            return Err(FitError::InvalidBox {
                name: "sigma2",
                lo: w,
                hi: v,
            });
        }
        Ok(Self {
            theta_lo: a,
            theta_hi: b,
            sigma2_lo: w,
            sigma2_hi: v,
        })
    }
}

/// Outcome of an estimator run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub theta_hat: f64,
    pub sigma2_hat: f64,
    /// sigma2_hat * theta_hat^(2 nu), recomputed from the two fields.
    pub microergodic: f64,
    pub loglik: f64,
    pub tapered: bool,
    pub n: usize,
    pub converged: bool,
    pub evaluations: usize,
}

const LN_2PI: f64 = 1.8378770664093453;

fn univariate_loglik(x: f64, sigma2: f64) -> f64 {
    -0.5 * LN_2PI - 0.5 * sigma2.ln() - x * x / (2.0 * sigma2)
}

/// Exact Gaussian log-likelihood
/// -(n/2) log 2pi - (1/2) log det V - (1/2) x' V^{-1} x.
/// The exponential family avoids any dense factorization.
pub fn exact_loglik(data: &Dataset, model: &CovModel) -> Result<f64, FitError> {
    let n = data.n();
    if n == 1 {
        return Ok(univariate_loglik(data.x[0], model.sigma2));
    }
    let (log_det, quad) = match model.family {
        CovFamily::Exponential => {
            let prec = ou_precision(&data.design, model.theta, model.sigma2)?;
            (
                ou_log_det(&data.design, model.theta, model.sigma2),
                prec.quad_form(&data.x),
            )
        }
        CovFamily::Matern => {
            let f = build_dense(&data.design, model).cholesky()?;
            (f.log_det(), f.quad_form(&data.x))
        }
    };
    Ok(-0.5 * n as f64 * LN_2PI - 0.5 * log_det - 0.5 * quad)
}

/// Tapered log-likelihood through the banded factorization; the identity
/// taper delegates to `exact_loglik` so both paths agree bit for bit.
pub fn tapered_loglik(
    data: &Dataset,
    model: &CovModel,
    taper: &TaperSpec,
) -> Result<f64, FitError> {
    if taper.is_none() {
        return exact_loglik(data, model);
    }
    let n = data.n();
    let f = build_tapered(&data.design, model, taper).cholesky()?;
    Ok(-0.5 * n as f64 * LN_2PI - 0.5 * f.log_det() - 0.5 * f.quad_form(&data.x))
}

/// Sum over pairs of y_i y_j g(|t_i - t_j|) with zero diagonal.
fn offdiag_pair_sum(t: &[f64], y: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    let n = t.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..i {
            acc += 2.0 * y[i] * y[j] * g(t[i] - t[j]);
        }
    }
    acc
}

/// Score in theta of the exact log-likelihood:
/// -(1/2) tr(V^{-1} dV/dtheta) + (1/2) x' V^{-1} (dV/dtheta) V^{-1} x,
/// with the analytic Matérn derivative of the covariance.
pub fn dloglik_dtheta(data: &Dataset, model: &CovModel) -> Result<f64, FitError> {
    let n = data.n();
    if n == 1 {
        return Ok(0.0);
    }
    let t = data.design.points();
    match model.family {
        CovFamily::Exponential => {
            let prec = ou_precision(&data.design, model.theta, model.sigma2)?;
            // V^{-1} is tridiagonal and dV has a zero diagonal, so the trace
            // only sees adjacent pairs.
            let gaps = data.design.gaps();
            let mut tr = 0.0;
            for (i, g) in gaps.iter().enumerate() {
                tr += 2.0 * prec.offdiag_inv(i) * dcov_dtheta(model, *g);
            }
            let y = prec.apply(&data.x);
            let quad = offdiag_pair_sum(t, &y, |h| dcov_dtheta(model, h));
            Ok(-0.5 * tr + 0.5 * quad)
        }
        CovFamily::Matern => {
            let f = build_dense(&data.design, model).cholesky()?;
            let inv = f.inverse();
            let mut tr = 0.0;
            for i in 0..n {
                for j in 0..i {
                    tr += 2.0 * inv.at(i, j) * dcov_dtheta(model, t[i] - t[j]);
                }
            }
            let y = f.solve(&data.x);
            let quad = offdiag_pair_sum(t, &y, |h| dcov_dtheta(model, h));
            Ok(-0.5 * tr + 0.5 * quad)
        }
    }
}

/// Tapered analog of the theta score:
/// -(1/2) tr(Vt^{-1} (dV/dtheta o T)) + (1/2) x' Vt^{-1} (dV/dtheta o T) Vt^{-1} x,
/// where the trace uses the banded selected inverse.
pub fn tapered_dloglik_dtheta(
    data: &Dataset,
    model: &CovModel,
    taper: &TaperSpec,
) -> Result<f64, FitError> {
    if taper.is_none() {
        return dloglik_dtheta(data, model);
    }
    let n = data.n();
    if n == 1 {
        return Ok(0.0);
    }
    let vt = build_tapered(&data.design, model, taper);
    let f = vt.cholesky()?;
    let dvt = band_from_fn(&data.design, taper, |h| {
        dcov_dtheta(model, h) * taper_value(taper, h)
    });
    let z = f.selected_inverse();
    let tr = trace_band_product(&z, &dvt);
    let y = f.solve(&data.x);
    // y' (dV o T) y over the band only; the matrix is zero outside it.
    let bw = dvt.bandwidth();
    let mut quad = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(bw)..i {
            quad += 2.0 * y[i] * y[j] * dvt.at(i, j);
        }
    }
    Ok(-0.5 * tr + 0.5 * quad)
}

fn correlation_quad(data: &Dataset, model: &CovModel) -> Result<f64, FitError> {
    let corr = model.correlation();
    if data.n() == 1 {
        return Ok(data.x[0] * data.x[0]);
    }
    match corr.family {
        CovFamily::Exponential => Ok(ou_precision(&data.design, corr.theta, 1.0)?
            .quad_form(&data.x)),
        CovFamily::Matern => Ok(build_dense(&data.design, &corr)
            .cholesky()?
            .quad_form(&data.x)),
    }
}

/// Score in sigma2 of the exact log-likelihood:
/// -n/(2 sigma2) + x' R^{-1} x / (2 sigma2^2) with R the correlation matrix.
pub fn dloglik_dsigma2(data: &Dataset, model: &CovModel) -> Result<f64, FitError> {
    let q = correlation_quad(data, model)?;
    let s2 = model.sigma2;
    Ok(-0.5 * data.n() as f64 / s2 + 0.5 * q / (s2 * s2))
}

/// Tapered analog of the sigma2 score, with the tapered correlation matrix.
pub fn tapered_dloglik_dsigma2(
    data: &Dataset,
    model: &CovModel,
    taper: &TaperSpec,
) -> Result<f64, FitError> {
    if taper.is_none() {
        return dloglik_dsigma2(data, model);
    }
    let corr = model.correlation();
    let q = build_tapered(&data.design, &corr, taper)
        .cholesky()?
        .quad_form(&data.x);
    let s2 = model.sigma2;
    Ok(-0.5 * data.n() as f64 / s2 + 0.5 * q / (s2 * s2))
}

fn correlation_model(theta1: f64, nu: f64) -> Result<CovModel, FitError> {
    let model = if nu == 0.5 {
        CovModel::exponential(1.0, theta1)?
    } else {
        CovModel::matern(1.0, theta1, nu)?
    };
    Ok(model)
}

/// Closed-form sigma2 MLE with theta fixed at theta1:
/// sigma2_hat = x' R^{-1} x / n on the exact path, and the tapered-correlation
/// analog on the tapered path.
pub fn sigma2_mle_fixed_theta(
    data: &Dataset,
    theta1: f64,
    nu: f64,
    taper: &TaperSpec,
) -> Result<FitResult, FitError> {
    let corr = correlation_model(theta1, nu)?;
    let n = data.n();
    let (q, log_det_r) = if taper.is_none() {
        if n == 1 {
            (data.x[0] * data.x[0], 0.0)
        } else {
            match corr.family {
                CovFamily::Exponential => (
                    ou_precision(&data.design, theta1, 1.0)?.quad_form(&data.x),
                    ou_log_det(&data.design, theta1, 1.0),
                ),
                CovFamily::Matern => {
                    let f = build_dense(&data.design, &corr).cholesky()?;
                    (f.quad_form(&data.x), f.log_det())
                }
            }
        }
    } else {
        let f = build_tapered(&data.design, &corr, taper).cholesky()?;
        (f.quad_form(&data.x), f.log_det())
    };
    let sigma2_hat = q / n as f64;
    let loglik =
        -0.5 * n as f64 * LN_2PI - 0.5 * (n as f64 * sigma2_hat.ln() + log_det_r) - 0.5 * n as f64;
    Ok(FitResult {
        theta_hat: theta1,
        sigma2_hat,
        microergodic: sigma2_hat * theta1.powf(2.0 * nu),
        loglik,
        tapered: !taper.is_none(),
        n,
        converged: true,
        evaluations: 1,
    })
}

struct ProfilePoint {
    loglik: f64,
    sigma2: f64,
}

/// Profile objective at theta for the exponential model: the inner sigma2
/// optimum is x' R_theta^{-1} x / n clamped into the box.
fn exponential_profile(
    data: &Dataset,
    pbox: &ParamBox,
    taper: &TaperSpec,
    theta: f64,
) -> Option<ProfilePoint> {
    let n = data.n() as f64;
    let (q, log_det_r) = if taper.is_none() {
        if data.n() == 1 {
            (data.x[0] * data.x[0], 0.0)
        } else {
            let prec = ou_precision(&data.design, theta, 1.0).ok()?;
            (
                prec.quad_form(&data.x),
                ou_log_det(&data.design, theta, 1.0),
            )
        }
    } else {
        let corr = CovModel::exponential(1.0, theta).ok()?;
        let f = build_tapered(&data.design, &corr, taper).cholesky().ok()?;
        (f.quad_form(&data.x), f.log_det())
    };
    let sigma2 = (q / n).clamp(pbox.sigma2_lo, pbox.sigma2_hi);
    let loglik = -0.5 * n * LN_2PI - 0.5 * (n * sigma2.ln() + log_det_r) - 0.5 * q / sigma2;
    if loglik.is_finite() {
        Some(ProfilePoint { loglik, sigma2 })
    } else {
        None
    }
}

const THETA_GRID_POINTS: usize = 64;
const GOLDEN_RATIO: f64 = 0.6180339887498949;
const GOLDEN_REL_TOL: f64 = 1e-6;

/// Joint (theta, sigma2) MLE for the exponential model over a box:
/// closed-form profile in sigma2, then a 64-point grid scan refined by
/// golden-section search in theta.
pub fn joint_mle_exponential(
    data: &Dataset,
    pbox: &ParamBox,
    taper: &TaperSpec,
) -> Result<FitResult, FitError> {
    let (a, b) = (pbox.theta_lo, pbox.theta_hi);
    let mut evaluations = 0usize;
    let mut best: Option<(f64, ProfilePoint)> = None;

    let mut consider = |theta: f64, evals: &mut usize| -> Option<f64> {
        *evals += 1;
        let p = exponential_profile(data, pbox, taper, theta)?;
        let ll = p.loglik;
        match &best {
            Some((_, cur)) if cur.loglik >= ll => {}
            _ => best = Some((theta, p)),
        }
        Some(ll)
    };

    if a == b {
        consider(a, &mut evaluations);
    } else {
        let step = (b - a) / (THETA_GRID_POINTS - 1) as f64;
        let mut best_idx = 0usize;
        let mut best_ll = f64::NEG_INFINITY;
        for i in 0..THETA_GRID_POINTS {
            let theta = a + step * i as f64;
            if let Some(ll) = consider(theta, &mut evaluations) {
                if ll > best_ll {
                    best_ll = ll;
                    best_idx = i;
                }
            }
        }
        if best_ll.is_finite() {
            // Golden-section refinement on the bracketing grid interval.
            let mut lo = a + step * best_idx.saturating_sub(1) as f64;
            let mut hi = (a + step * (best_idx + 1) as f64).min(b);
            let tol = GOLDEN_REL_TOL * (b - a);
            let mut c = hi - GOLDEN_RATIO * (hi - lo);
            let mut d = lo + GOLDEN_RATIO * (hi - lo);
            let mut fc = consider(c, &mut evaluations).unwrap_or(f64::NEG_INFINITY);
            let mut fd = consider(d, &mut evaluations).unwrap_or(f64::NEG_INFINITY);
            while hi - lo > tol {
                if fc > fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - GOLDEN_RATIO * (hi - lo);
                    fc = consider(c, &mut evaluations).unwrap_or(f64::NEG_INFINITY);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + GOLDEN_RATIO * (hi - lo);
                    fd = consider(d, &mut evaluations).unwrap_or(f64::NEG_INFINITY);
                }
            }
        }
    }

    let n = data.n();
    match best {
        Some((theta_hat, p)) => Ok(FitResult {
            theta_hat,
            sigma2_hat: p.sigma2,
            microergodic: p.sigma2 * theta_hat.powf(1.0),
            loglik: p.loglik,
            tapered: !taper.is_none(),
            n,
            converged: true,
            evaluations,
        }),
        None => Ok(FitResult {
            theta_hat: f64::NAN,
            sigma2_hat: f64::NAN,
            microergodic: f64::NAN,
            loglik: f64::NEG_INFINITY,
            tapered: !taper.is_none(),
            n,
            converged: false,
            evaluations,
        }),
    }
}
