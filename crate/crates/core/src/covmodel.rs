//! Stationary covariance models (exponential, Matérn), compactly supported
//! Wendland tapers, the tapered product covariance, spectral densities, and
//! the numeric taper diagnostics.
//!
//! Spectral convention: K(h) = int e^{i lambda h} f(lambda) d lambda, so a
//! correlation function has a unit-mass spectral density and a covariance
//! integrates to sigma^2.

use serde::Serialize;
use thiserror::Error;

use crate::quad::{cosine_transform, QuadError};
use crate::special::{bessel_k_unchecked, gamma_fn, SpecialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CovError {
    #[error("invalid {name}: must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("exponential family fixes nu = 1/2, got {0}")]
    ExponentialNu(f64),
    #[error("taper family None has no integrable spectral density")]
    NoSpectralDensity,
    #[error("check_a3 requires lambda_max > 10, got {0}")]
    LambdaMaxTooSmall(f64),
    #[error("not enough usable points to fit a decay exponent")]
    DecayFitUnderdetermined,
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn check_positive(name: &'static str, value: f64) -> Result<f64, CovError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CovError::InvalidParameter { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CovFamily {
    Exponential,
    Matern,
}

/// A stationary isotropic covariance specification: family, variance, inverse
/// range and smoothness. The exponential family pins nu = 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovModel {
    pub family: CovFamily,
    pub sigma2: f64,
    pub theta: f64,
    pub nu: f64,
}

impl CovModel {
    pub fn exponential(sigma2: f64, theta: f64) -> Result<Self, CovError> {
        Ok(Self {
            family: CovFamily::Exponential,
            sigma2: check_positive("sigma2", sigma2)?,
            theta: check_positive("theta", theta)?,
            nu: 0.5,
        })
    }

    pub fn matern(sigma2: f64, theta: f64, nu: f64) -> Result<Self, CovError> {
        Ok(Self {
            family: CovFamily::Matern,
            sigma2: check_positive("sigma2", sigma2)?,
            theta: check_positive("theta", theta)?,
            nu: check_positive("nu", nu)?,
        })
    }

    /// Same family and smoothness at different (theta, sigma2).
    pub fn with_params(&self, theta: f64, sigma2: f64) -> Result<Self, CovError> {
        Ok(Self {
            family: self.family,
            sigma2: check_positive("sigma2", sigma2)?,
            theta: check_positive("theta", theta)?,
            nu: self.nu,
        })
    }

    /// Unit-variance version of this model.
    pub fn correlation(&self) -> Self {
        Self { sigma2: 1.0, ..*self }
    }

    /// The microergodic combination sigma2 * theta^(2 nu).
    pub fn microergodic(&self) -> f64 {
        self.sigma2 * self.theta.powf(2.0 * self.nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaperFamily {
    WendlandOne,
    WendlandTwo,
    None,
}

/// A compactly supported correlation taper with range gamma. `TaperFamily::None`
/// is the identity taper (no compact support; `gamma` is unused and infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaperSpec {
    pub family: TaperFamily,
    pub gamma: f64,
}

impl TaperSpec {
    pub fn wendland_one(gamma: f64) -> Result<Self, CovError> {
        Ok(Self {
            family: TaperFamily::WendlandOne,
            gamma: check_positive("gamma", gamma)?,
        })
    }

    pub fn wendland_two(gamma: f64) -> Result<Self, CovError> {
        Ok(Self {
            family: TaperFamily::WendlandTwo,
            gamma: check_positive("gamma", gamma)?,
        })
    }

    pub fn none() -> Self {
        Self {
            family: TaperFamily::None,
            gamma: f64::INFINITY,
        }
    }

    pub fn is_none(&self) -> bool {
        self.family == TaperFamily::None
    }
}

/// Covariance value K(h) at lag h >= 0. K(0) = sigma2 exactly; Matérn values
/// past the Bessel underflow edge are exactly 0.
pub fn cov(model: &CovModel, h: f64) -> f64 {
    debug_assert!(h >= 0.0);
    if h == 0.0 {
        return model.sigma2;
    }
    match model.family {
        CovFamily::Exponential => model.sigma2 * (-model.theta * h).exp(),
        CovFamily::Matern => {
            let nu = model.nu;
            let x = model.theta * h;
            let scale = model.sigma2 / (gamma_unchecked(nu) * (nu - 1.0).exp2());
            scale * x.powf(nu) * bessel_k_unchecked(nu, x)
        }
    }
}

/// Analytic derivative of the covariance with respect to theta.
///
/// Exponential: -sigma2 h e^{-theta h}. Matérn: via
/// d/dx [x^nu K_nu(x)] = -x^nu K_{nu-1}(x), using K_{-a} = K_a.
pub fn dcov_dtheta(model: &CovModel, h: f64) -> f64 {
    debug_assert!(h >= 0.0);
    if h == 0.0 {
        return 0.0;
    }
    match model.family {
        CovFamily::Exponential => -model.sigma2 * h * (-model.theta * h).exp(),
        CovFamily::Matern => {
            let nu = model.nu;
            let x = model.theta * h;
            let scale = model.sigma2 / (gamma_unchecked(nu) * (nu - 1.0).exp2());
            -scale * h * x.powf(nu) * bessel_k_unchecked((nu - 1.0).abs(), x)
        }
    }
}

fn gamma_unchecked(x: f64) -> f64 {
    // Model constructors guarantee x > 0.
    gamma_fn(x).expect("positive argument")
}

/// Taper correlation value in [0, 1]; exactly 0 for h >= gamma.
pub fn taper_value(taper: &TaperSpec, h: f64) -> f64 {
    debug_assert!(h >= 0.0);
    match taper.family {
        TaperFamily::None => 1.0,
        TaperFamily::WendlandOne => {
            let s = h / taper.gamma;
            if s >= 1.0 {
                0.0
            } else {
                let u = 1.0 - s;
                let u2 = u * u;
                u2 * u2 * (1.0 + 4.0 * s)
            }
        }
        TaperFamily::WendlandTwo => {
            let s = h / taper.gamma;
            if s >= 1.0 {
                0.0
            } else {
                let u = 1.0 - s;
                let u2 = u * u;
                u2 * u2 * u2 * (1.0 + 6.0 * s + 35.0 * s * s / 3.0)
            }
        }
    }
}

/// Tapered covariance: cov(h) * K_tap(h), exactly 0 for h >= gamma.
pub fn tapered_cov(model: &CovModel, taper: &TaperSpec, h: f64) -> f64 {
    let t = taper_value(taper, h);
    if t == 0.0 {
        0.0
    } else {
        cov(model, h) * t
    }
}

/// Matérn/exponential spectral density under the K(h) = int e^{i lambda h} f
/// convention: f(lambda) = sigma2 c theta^(2 nu) / (theta^2 + lambda^2)^(nu + 1/2)
/// with c = Gamma(nu + 1/2) / (Gamma(nu) sqrt(pi)), so f integrates to sigma2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    pub sigma2: f64,
    pub theta: f64,
    pub nu: f64,
    /// The normalization constant c of the closed form.
    pub coeff: f64,
}

impl SpectralDensity {
    pub fn eval(&self, lambda: f64) -> f64 {
        let denom = (self.theta * self.theta + lambda * lambda).powf(self.nu + 0.5);
        self.sigma2 * self.coeff * self.theta.powf(2.0 * self.nu) / denom
    }
}

/// Spectral density of a Matérn or exponential model.
pub fn matern_spectral(model: &CovModel) -> SpectralDensity {
    let nu = model.nu;
    let coeff = gamma_unchecked(nu + 0.5)
        / (gamma_unchecked(nu) * std::f64::consts::PI.sqrt());
    SpectralDensity {
        sigma2: model.sigma2,
        theta: model.theta,
        nu,
        coeff,
    }
}

const SPECTRAL_TOL: f64 = 1e-12;

/// Taper spectral density f_tap(lambda) = (1/pi) int_0^gamma K_tap(h) cos(lambda h) dh,
/// evaluated on a grid.
pub fn taper_spectral(taper: &TaperSpec, lambda_grid: &[f64]) -> Result<Vec<f64>, CovError> {
    if taper.is_none() {
        return Err(CovError::NoSpectralDensity);
    }
    let g = taper.gamma;
    lambda_grid
        .iter()
        .map(|&lambda| {
            let v = cosine_transform(&|h| taper_value(taper, h), 0.0, g, lambda, SPECTRAL_TOL)?;
            Ok(v / std::f64::consts::PI)
        })
        .collect()
}

/// Least-squares slope and intercept of ln(y) against ln(x), skipping
/// non-positive values.
fn fit_log_log(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), CovError> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(CovError::DecayFitUnderdetermined);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept))
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Result of the empirical condition-(A3) check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct A3Report {
    pub satisfied: bool,
    pub fitted_epsilon: f64,
    pub fitted_m: f64,
}

/// Fits the tail decay of the taper spectral density and tests it against the
/// threshold epsilon > max{1/2, 1 - nu}.
pub fn check_a3(taper: &TaperSpec, nu: f64, lambda_max: f64) -> Result<A3Report, CovError> {
    check_positive("nu", nu)?;
    if !(lambda_max > 10.0) {
        return Err(CovError::LambdaMaxTooSmall(lambda_max));
    }
    if taper.is_none() {
        return Err(CovError::NoSpectralDensity);
    }
    let lo = (lambda_max / 4.0).min(100.0);
    let grid = log_spaced(lo, lambda_max, 32);
    let f = taper_spectral(taper, &grid)?;
    let (slope, _) = fit_log_log(&grid, &f)?;
    // f ~ lambda^slope maps onto (1 + lambda^2)^(slope/2).
    let total_exponent = -slope / 2.0;
    let fitted_epsilon = total_exponent - nu - 0.5;
    let fitted_m = grid
        .iter()
        .zip(&f)
        .map(|(&l, &v)| v * (1.0 + l * l).powf(total_exponent))
        .fold(0.0f64, f64::max);
    let threshold = (0.5f64).max(1.0 - nu);
    Ok(A3Report {
        satisfied: fitted_epsilon > threshold,
        fitted_epsilon,
        fitted_m,
    })
}

/// Relative spectral perturbation (f_tilde - f)/f of the tapered model, with
/// its fitted tail decay exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma4Report {
    pub lambda: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Fitted r of |ratio| ~ lambda^(-r); infinite for the identity taper.
    pub fitted_r: f64,
}

const LEMMA4_TOL: f64 = 1e-13;

/// Computes (f_tilde(lambda) - f(lambda)) / f(lambda) on a grid, where
/// f_tilde is the spectral density of the tapered covariance.
///
/// The perturbation is evaluated directly as the cosine transform of
/// K(h) (K_tap(h) - 1), which equals the spectral convolution of f with
/// f_tap minus f (transform of a product = convolution of transforms); the
/// direct form avoids the cancellation of computing f_tilde and f separately.
pub fn lemma4_ratio(
    model: &CovModel,
    taper: &TaperSpec,
    lambda_grid: &[f64],
) -> Result<Lemma4Report, CovError> {
    if taper.is_none() {
        return Ok(Lemma4Report {
            lambda: lambda_grid.to_vec(),
            ratio: vec![0.0; lambda_grid.len()],
            fitted_r: f64::INFINITY,
        });
    }
    let f = matern_spectral(model);
    let g = taper.gamma;
    // Past h_max the exponential Matérn tail is below 1e-21 of sigma2.
    let h_max = g + 50.0 / model.theta;
    let mut ratio = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let inside = cosine_transform(
            &|h| cov(model, h) * (taper_value(taper, h) - 1.0),
            0.0,
            g,
            lambda,
            LEMMA4_TOL,
        )?;
        let tail = cosine_transform(&|h| cov(model, h), g, h_max, lambda, LEMMA4_TOL)?;
        let diff = (inside - tail) / std::f64::consts::PI;
        ratio.push(diff / f.eval(lambda));
    }
    let abs_ratio: Vec<f64> = ratio.iter().map(|r| r.abs()).collect();
    let fitted_r = fit_log_log(lambda_grid, &abs_ratio)
        .map(|(slope, _)| -slope)
        .unwrap_or(f64::NAN);
    Ok(Lemma4Report {
        lambda: lambda_grid.to_vec(),
        ratio,
        fitted_r,
    })
}

/// The (A2) slope constant c with K_tap'(h) = c h + o(h) as h -> 0+,
/// from the analytic expansion of the Wendland polynomials.
pub fn check_a2_slope(taper: &TaperSpec) -> Result<f64, CovError> {
    let g2 = taper.gamma * taper.gamma;
    match taper.family {
        TaperFamily::WendlandOne => Ok(-20.0 / g2),
        TaperFamily::WendlandTwo => Ok(-56.0 / (3.0 * g2)),
        TaperFamily::None => Err(CovError::NoSpectralDensity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;
    use approx::assert_relative_eq;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn matern_half_reduces_to_exponential() {
        let e = CovModel::exponential(1.3, 2.1).unwrap();
        let m = CovModel::matern(1.3, 2.1, 0.5).unwrap();
        let mut h = 1e-4;
        while h <= 20.0 / 2.1 {
            assert_relative_eq!(cov(&m, h), cov(&e, h), max_relative = 1e-12);
            h *= 1.31;
        }
    }

    #[test]
    fn matern_three_halves_closed_form() {
        let m = CovModel::matern(1.0, 2.0, 1.5).unwrap();
        assert_relative_eq!(cov(&m, 0.5), 2.0 / std::f64::consts::E, max_relative = 1e-12);
        // sigma2 (1 + theta h) e^{-theta h} across lags
        let m2 = CovModel::matern(0.7, 1.4, 1.5).unwrap();
        for h in [0.01, 0.3, 2.0, 9.5] {
            let x = 1.4 * h;
            assert_relative_eq!(cov(&m2, h), 0.7 * (1.0 + x) * (-x).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn cov_at_zero_is_sigma2() {
        for model in [
            CovModel::exponential(2.7, 0.3).unwrap(),
            CovModel::matern(0.4, 5.0, 2.2).unwrap(),
        ] {
            assert_eq!(cov(&model, 0.0), model.sigma2);
        }
    }

    #[test]
    fn cov_underflows_to_exact_zero() {
        let m = CovModel::matern(1.0, 1.0, 1.0).unwrap();
        assert_eq!(cov(&m, 900.0), 0.0);
    }

    #[test]
    fn cov_nonincreasing() {
        for model in [
            CovModel::exponential(1.0, 3.0).unwrap(),
            CovModel::matern(2.0, 1.0, 0.7).unwrap(),
            CovModel::matern(1.0, 4.0, 2.5).unwrap(),
        ] {
            let mut prev = cov(&model, 0.0);
            for i in 1..=400 {
                let v = cov(&model, i as f64 * 0.05);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn wendland_one_hand_value() {
        let t = TaperSpec::wendland_one(1.0).unwrap();
        // (1 - 0.5)^4 (1 + 2) = 0.0625 * 3
        assert_eq!(taper_value(&t, 0.5), 0.1875);
    }

    #[test]
    fn taper_compact_support_and_bounds() {
        for taper in [
            TaperSpec::wendland_one(0.7).unwrap(),
            TaperSpec::wendland_two(0.7).unwrap(),
        ] {
            assert_eq!(taper_value(&taper, 0.0), 1.0);
            assert_eq!(taper_value(&taper, 0.7), 0.0);
            assert_eq!(taper_value(&taper, 5.0), 0.0);
            let mut prev = 1.0;
            for i in 1..=700 {
                let h = i as f64 * 0.001;
                let v = taper_value(&taper, h);
                assert!((0.0..=1.0).contains(&v));
                // Lipschitz continuity, generous analytic bound on |K_tap'|.
                assert!((v - prev).abs() <= 25.0 / 0.7 * 0.001 + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn tapered_cov_product_and_identity() {
        let m = CovModel::exponential(1.0, 1.0).unwrap();
        let t = TaperSpec::wendland_one(1.0).unwrap();
        assert_relative_eq!(
            tapered_cov(&m, &t, 0.5),
            (-0.5f64).exp() * 0.1875,
            max_relative = 1e-14
        );
        assert_eq!(tapered_cov(&m, &t, 1.0), 0.0);
        assert_eq!(tapered_cov(&m, &t, 3.0), 0.0);
        let none = TaperSpec::none();
        for h in [0.0, 0.2, 1.7] {
            assert_eq!(tapered_cov(&m, &none, h), cov(&m, h));
        }
    }

    #[test]
    fn spectral_coeff_exponential() {
        let m = CovModel::exponential(1.0, 1.0).unwrap();
        let f = matern_spectral(&m);
        assert_relative_eq!(f.coeff, 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(f.eval(0.0), 1.0 / PI, max_relative = 1e-13);
    }

    #[test]
    fn spectral_at_zero() {
        let m = CovModel::matern(2.0, 3.0, 1.2).unwrap();
        let f = matern_spectral(&m);
        assert_relative_eq!(f.eval(0.0), 2.0 * f.coeff / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn spectral_integrates_to_sigma2() {
        for model in [
            CovModel::exponential(1.7, 0.8).unwrap(),
            CovModel::matern(0.9, 2.0, 1.4).unwrap(),
        ] {
            let f = matern_spectral(&model);
            let cut = 4000.0;
            let body =
                2.0 * integrate_adaptive(&|l| f.eval(l), 0.0, cut, 1e-10).unwrap();
            // Tail: 2 int_cut^inf sigma2 c theta^(2nu) lambda^-(2nu+1) dlambda
            let tail = 2.0 * model.sigma2 * f.coeff * model.theta.powf(2.0 * model.nu)
                * cut.powf(-2.0 * model.nu) / (2.0 * model.nu);
            assert_relative_eq!(body + tail, model.sigma2, max_relative = 1e-6);
        }
    }

    #[test]
    fn taper_spectral_unit_mass() {
        let t = TaperSpec::wendland_one(1.0).unwrap();
        // f_tap is smooth and ~lambda^-4; integrate the body and bound the tail.
        let grid_mass =
            2.0 * integrate_adaptive(
                &|l| taper_spectral(&t, &[l]).unwrap()[0],
                0.0,
                400.0,
                1e-8,
            )
            .unwrap();
        assert!((grid_mass - 1.0).abs() < 1e-3);
    }

    #[test]
    fn taper_spectral_tail_limits() {
        // lambda^4 g1 -> 120/(pi gamma^3), lambda^6 g2 -> 17920/(pi gamma^5)
        let w1 = TaperSpec::wendland_one(1.0).unwrap();
        let v1 = taper_spectral(&w1, &[2000.0]).unwrap()[0];
        assert_relative_eq!(2000.0f64.powi(4) * v1, 120.0 / PI, max_relative = 1e-2);

        let w2 = TaperSpec::wendland_two(1.0).unwrap();
        let v2 = taper_spectral(&w2, &[900.0]).unwrap()[0];
        assert_relative_eq!(900.0f64.powi(6) * v2, 17920.0 / PI, max_relative = 1e-2);

        assert!(taper_spectral(&TaperSpec::none(), &[1.0]).is_err());
    }

    #[test]
    fn a3_wendland_thresholds() {
        let w1 = TaperSpec::wendland_one(1.0).unwrap();
        let w2 = TaperSpec::wendland_two(1.0).unwrap();
        let r = check_a3(&w1, 0.5, 800.0).unwrap();
        assert!(r.satisfied, "W1 nu=0.5 should satisfy (A3): {r:?}");
        assert_relative_eq!(r.fitted_epsilon, 1.0, max_relative = 0.05);
        let r = check_a3(&w2, 1.5, 800.0).unwrap();
        assert!(r.satisfied, "W2 nu=1.5 should satisfy (A3): {r:?}");
        let r = check_a3(&w1, 1.5, 800.0).unwrap();
        assert!(!r.satisfied, "W1 nu=1.5 should fail (A3): {r:?}");
        assert!(check_a3(&w1, 0.5, 5.0).is_err());
        assert!(check_a3(&TaperSpec::none(), 0.5, 100.0).is_err());
    }

    #[test]
    fn lemma4_identity_taper_is_zero() {
        let m = CovModel::matern(1.0, 1.0, 1.0).unwrap();
        let report = lemma4_ratio(&m, &TaperSpec::none(), &[1.0, 10.0, 100.0]).unwrap();
        assert!(report.ratio.iter().all(|&r| r == 0.0));
        assert!(report.fitted_r.is_infinite());
    }

    #[test]
    fn lemma4_finite_at_origin_and_small_for_wide_taper() {
        // Narrow taper: the perturbation is large but must stay finite.
        let m = CovModel::exponential(1.0, 1.0).unwrap();
        let t = TaperSpec::wendland_two(0.05).unwrap();
        let report = lemma4_ratio(&m, &t, &[0.0, 0.5, 1.0]).unwrap();
        for r in report.ratio {
            assert!(r.is_finite());
        }
        // Taper near 1 over the effective correlation length: ratio small.
        let short_range = CovModel::exponential(1.0, 50.0).unwrap();
        let wide = TaperSpec::wendland_two(0.9).unwrap();
        let report = lemma4_ratio(&short_range, &wide, &[0.0, 1.0]).unwrap();
        for r in report.ratio {
            assert!(r.abs() < 0.15, "ratio for wide taper too large: {r}");
        }
    }

    #[test]
    fn lemma4_decay_exponent_exceeds_one() {
        let m = CovModel::exponential(1.0, 1.0).unwrap();
        let t = TaperSpec::wendland_two(0.4).unwrap();
        let grid = log_spaced(20.0, 200.0, 17);
        let report = lemma4_ratio(&m, &t, &grid).unwrap();
        assert!(
            report.fitted_r > 1.0,
            "fitted decay exponent {} should exceed 1",
            report.fitted_r
        );
    }

    #[test]
    fn a2_slope_values_and_fd_oracle() {
        let w1 = TaperSpec::wendland_one(1.0).unwrap();
        assert_eq!(check_a2_slope(&w1).unwrap(), -20.0);
        let w1b = TaperSpec::wendland_one(2.0).unwrap();
        assert_eq!(check_a2_slope(&w1b).unwrap(), -5.0);
        assert!(check_a2_slope(&TaperSpec::none()).is_err());

        // Finite-difference slope of K_tap'(h)/h at h = 1e-4.
        for taper in [w1, TaperSpec::wendland_two(0.8).unwrap()] {
            let c = check_a2_slope(&taper).unwrap();
            let h = 1e-4;
            let d = 1e-6;
            let fd = (taper_value(&taper, h + d) - taper_value(&taper, h - d)) / (2.0 * d);
            assert_relative_eq!(fd / h, c, max_relative = 1e-3);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(CovModel::exponential(0.0, 1.0).is_err());
        assert!(CovModel::matern(1.0, -2.0, 0.5).is_err());
        assert!(CovModel::matern(1.0, 1.0, f64::NAN).is_err());
        assert!(TaperSpec::wendland_one(0.0).is_err());
    }
}
