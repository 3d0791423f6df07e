//! Normal CDF and the one-sample Kolmogorov-Smirnov test used by the Monte
//! Carlo summaries.
//!
//! erf comes from its Taylor series for |x| <= 3 and the Laplace continued
//! fraction for the complement beyond; both converge to full double
//! precision in this range split.

/// Error function.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= 3.0 {
        erf_series(x)
    } else {
        1.0 - erfc_cf(x)
    }
}

/// Complementary error function.
pub(crate) fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= 3.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// erf(x) = (2/sqrt(pi)) sum_k (-1)^k x^(2k+1) / (k! (2k+1)), |x| <= 3.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        term *= -x2 / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...)))),
/// evaluated by the Lentz algorithm; accurate for x >= 3.
fn erfc_cf(x: f64) -> f64 {
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..300 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d == 0.0 {
            d = f64::MIN_POSITIVE;
        }
        c = x + a / c;
        if c == 0.0 {
            c = f64::MIN_POSITIVE;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov asymptotic tail probability
/// Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2).
fn kolmogorov_tail(t: f64) -> f64 {
    if t < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * t * t).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `sample` against N(0, target_var). Returns the KS
/// statistic and the asymptotic p-value with Stephens' small-sample factor
/// (sqrt(n) + 0.12 + 0.11/sqrt(n)).
pub(crate) fn ks_test_normal(sample: &[f64], target_var: f64) -> (f64, f64) {
    let n = sample.len();
    let sd = target_var.sqrt();
    let mut u: Vec<f64> = sample.iter().map(|&z| z / sd).collect();
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d = 0.0f64;
    for (i, &z) in u.iter().enumerate() {
        let cdf = normal_cdf(z);
        d = d.max(cdf - i as f64 / n as f64);
        d = d.max((i + 1) as f64 / n as f64 - cdf);
    }
    let sqrt_n = (n as f64).sqrt();
    let p = kolmogorov_tail((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    (d, p)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub(crate) fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}
