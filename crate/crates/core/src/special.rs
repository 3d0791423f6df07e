//! Gamma function and the modified Bessel function of the second kind `K_nu`,
//! the two special functions behind the Matérn covariance and its spectral
//! density.
//!
//! `K_nu` follows the classic two-regime scheme for fractional orders: the
//! order is reduced to `mu in [-1/2, 1/2]`, then a Temme power series handles
//! `x <= 2` and the Steed/Thompson-Barnett continued fraction handles `x > 2`,
//! followed by the upward order recurrence. Both regimes are evaluated in
//! exp-scaled form so values stay representable out to the underflow edge.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    /// Argument outside the function domain.
    #[error("argument must be positive and finite, got {0}")]
    Domain(f64),
    /// Bessel order must be a positive finite real.
    #[error("Bessel order must be positive and finite, got {0}")]
    Order(f64),
}

/// Positive smoothness order for [`bessel_k`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, SpecialError> {
        if nu.is_finite() && nu > 0.0 {
            Ok(Self(nu))
        } else {
            Err(SpecialError::Order(nu))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64, SpecialError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(SpecialError::Domain(x));
    }
    if x < 0.5 {
        // Gamma(x) = Gamma(x + 1) / x keeps the Lanczos argument in range.
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(SQRT_2PI.ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Gamma function for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64, SpecialError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(SpecialError::Domain(x));
    }
    if x < 0.5 {
        return Ok(gamma_fn(x + 1.0)? / x);
    }
    if x > 20.0 {
        // Direct evaluation would overflow t^(z+1/2) long before Gamma itself
        // overflows; go through log space instead.
        return Ok(ln_gamma(x)?.exp());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(SQRT_2PI * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

// Taylor coefficients of 1/Gamma(1+x) = sum_k C_K[k] x^k (Abramowitz & Stegun
// 6.1.34, shifted by one index).
const INV_GAMMA1P_COEFFS: [f64; 30] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_9,
    -0.042_002_635_034_095_24,
    0.166_538_611_382_291_49,
    -0.042_197_734_555_544_34,
    -0.009_621_971_527_876_973,
    0.007_218_943_246_663_1,
    -0.001_165_167_591_859_065,
    -0.000_215_241_674_114_951,
    0.000_128_050_282_388_116_2,
    -0.000_020_134_854_780_788_24,
    -1.250_493_482_142_670_7e-6,
    1.133_027_231_981_695_9e-6,
    -2.056_338_416_977_607e-7,
    6.116_095_104_481_416e-9,
    5.002_007_644_469_223e-9,
    -1.181_274_570_487_020_1e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_205_7e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_506_8e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
    -1.181_259_301_697_458_8e-16,
    1.186_692_254_751_600_3e-18,
    1.412_380_655_318_031_8e-18,
    -2.298_745_684_435_370_2e-19,
    1.714_406_321_927_337_4e-20,
];

/// Temme auxiliaries: gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)]/(2 mu) and
/// gam2 = [1/Gamma(1-mu) + 1/Gamma(1+mu)]/2, stable through mu = 0.
fn temme_gammas(mu: f64) -> (f64, f64) {
    let m2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    let mut p = 1.0;
    let mut k = 0;
    while k < INV_GAMMA1P_COEFFS.len() {
        g2 += INV_GAMMA1P_COEFFS[k] * p;
        if k + 1 < INV_GAMMA1P_COEFFS.len() {
            g1 -= INV_GAMMA1P_COEFFS[k + 1] * p;
        }
        p *= m2;
        k += 2;
    }
    (g1, g2)
}

const TEMME_EPS: f64 = 1e-17;
const TEMME_MAX_ITER: usize = 500;

/// Temme series for (K_mu(x), K_{mu+1}(x)), unscaled, valid for x <= 2 and
/// |mu| <= 1/2.
fn bessel_k_temme(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = std::f64::consts::PI * mu;
    let fact = if pimu.abs() < 1e-30 { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < 1e-30 { 1.0 } else { e.sinh() / e };
    let (gam1, gam2) = temme_gammas(mu);
    let gampl = gam2 - mu * gam1; // 1/Gamma(1 + mu)
    let gammi = gam2 + mu * gam1; // 1/Gamma(1 - mu)
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e = e.exp();
    let mut p = 0.5 * e / gampl;
    let mut q = 0.5 / (e * gammi);
    let mut c = 1.0;
    let d2 = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..=TEMME_MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= d2 / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * TEMME_EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

const CF2_EPS: f64 = 1e-16;
const CF2_MAX_ITER: usize = 20_000;

/// Thompson-Barnett CF2 for (e^x K_mu(x), e^x K_{mu+1}(x)), valid for x > 2
/// and |mu| <= 1/2.
fn bessel_k_cf2_scaled(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..CF2_MAX_ITER {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < CF2_EPS {
            break;
        }
    }
    h = a1 * h;
    let kmu = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = kmu * (mu + x + 0.5 - h) / x;
    (kmu, k1)
}

/// e^x K_nu(x) for nu > 0, x > 0. No argument checks; callers validate.
pub(crate) fn bessel_k_scaled_unchecked(nu: f64, x: f64) -> f64 {
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let (mut km, mut kp) = if x <= 2.0 {
        let (a, b) = bessel_k_temme(mu, x);
        let ex = x.exp();
        (a * ex, b * ex)
    } else {
        bessel_k_cf2_scaled(mu, x)
    };
    for i in 1..=nl {
        let knext = km + (2.0 * (mu + i as f64) / x) * kp;
        km = kp;
        kp = knext;
    }
    km
}

/// K_nu(x); returns 0 once e^{-x} pushes the value past the underflow edge.
pub(crate) fn bessel_k_unchecked(nu: f64, x: f64) -> f64 {
    bessel_k_scaled_unchecked(nu, x) * (-x).exp()
}

/// Modified Bessel function of the second kind of positive real order.
pub fn bessel_k(nu: BesselOrder, x: f64) -> Result<f64, SpecialError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(SpecialError::Domain(x));
    }
    Ok(bessel_k_unchecked(nu.get(), x))
}

/// e^x K_nu(x), usable where the plain value underflows.
pub fn bessel_k_scaled(nu: BesselOrder, x: f64) -> Result<f64, SpecialError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(SpecialError::Domain(x));
    }
    Ok(bessel_k_scaled_unchecked(nu.get(), x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn gamma_known_values() {
        // (x, Gamma(x)) frozen from a 30-digit reference evaluation.
        let cases = [
            (0.1, 9.513507698668731836),
            (0.5, 1.772453850905516027),
            (1.0, 1.0),
            (1.5, 0.8862269254527580136),
            (2.5, 1.32934038817913702),
            (4.0, 6.0),
            (7.37, 1454.617666201382022),
            (15.2, 149037380723.3863969),
            (35.1, 4.207371974005294707e38),
            (101.3, 3.722616312784273436e158),
            (170.0, 4.269068009004705275e304),
            (0.001, 999.4237724845954661),
            (1e-8, 99999999.42278434499),
        ];
        for (x, want) in cases {
            let got = gamma_fn(x).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_domain_errors() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
        assert!(gamma_fn(f64::INFINITY).is_err());
    }

    #[test]
    fn bessel_k_reference_values() {
        // (nu, x, K_nu(x)) frozen from a 40-digit reference evaluation.
        let cases = [
            (0.5, 1.0, 0.4610685044478945584),
            (1.5, 2.0, 0.1799066579520921711),
            (2.5, 0.3, 75.1521401643748905),
            (0.3, 0.001, 14.40654752904102718),
            (0.3, 1e-6, 116.164630606269119),
            (1.0, 1e-4, 9999.999508686404478),
            (1.0, 0.5, 1.656441120003300894),
            (1.0, 10.0, 1.86487734538255846e-5),
            (2.0, 50.0, 3.547931838858197738e-23),
            (0.75, 600.0, 1.356463695600830937e-262),
            (3.7, 2.0, 1.481972449756603144),
            (5.5, 30.0, 3.497556919053825575e-14),
            (0.25, 1.9999, 0.1153925103089446736),
            (0.25, 2.0001, 0.1153640452562057529),
            (1.2, 700.0, 4.674578671109229889e-306),
            (0.5, 1e-8, 12533.14124782358928),
            (4.2, 0.02, 974165716.9814462392),
        ];
        for (nu, x, want) in cases {
            let got = bessel_k(BesselOrder::new(nu).unwrap(), x).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn bessel_k_half_integer_closed_forms() {
        // K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
        // K_{3/2}(x) = sqrt(pi/(2x)) e^{-x} (1 + 1/x)
        // K_{5/2}(x) = sqrt(pi/(2x)) e^{-x} (1 + 3/x + 3/x^2)
        let mut x = 1e-6;
        while x <= 100.0 {
            let base = (PI / (2.0 * x)).sqrt() * (-x).exp();
            let closed = [
                base,
                base * (1.0 + 1.0 / x),
                base * (1.0 + 3.0 / x + 3.0 / (x * x)),
            ];
            for (i, nu) in [0.5, 1.5, 2.5].into_iter().enumerate() {
                let got = bessel_k(BesselOrder::new(nu).unwrap(), x).unwrap();
                assert_relative_eq!(got, closed[i], max_relative = 1e-10);
            }
            x *= 2.3;
        }
    }

    #[test]
    fn bessel_k_scaled_identity() {
        // K_{1/2}(x) e^x sqrt(x) = sqrt(pi/2) for any x.
        let half = BesselOrder::new(0.5).unwrap();
        for x in [1e-6, 0.01, 1.0, 5.0, 100.0, 650.0] {
            let v = bessel_k_scaled(half, x).unwrap() * x.sqrt();
            assert_relative_eq!(v, (PI / 2.0).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn bessel_k_monotone_decreasing_in_x() {
        for nu in [0.2, 0.5, 1.0, 1.7, 3.2] {
            let order = BesselOrder::new(nu).unwrap();
            let mut prev = f64::INFINITY;
            let mut x = 1e-4;
            while x < 500.0 {
                let v = bessel_k(order, x).unwrap();
                assert!(v < prev, "K_{nu}({x}) not decreasing");
                prev = v;
                x *= 1.7;
            }
        }
    }

    #[test]
    fn bessel_k_recurrence() {
        // K_{nu+1}(x) = K_{nu-1}(x) + (2 nu / x) K_nu(x)
        for nu in [0.3, 0.5, 1.0, 2.4, 4.1] {
            let mut x = 1e-3;
            while x < 300.0 {
                let km = bessel_k_unchecked((nu - 1.0f64).abs(), x);
                let k0 = bessel_k_unchecked(nu, x);
                let kp = bessel_k_unchecked(nu + 1.0, x);
                if kp > 1e-290 {
                    let rhs = km + 2.0 * nu / x * k0;
                    assert_relative_eq!(kp, rhs, max_relative = 1e-8);
                }
                x *= 2.9;
            }
        }
    }

    #[test]
    fn bessel_k_underflows_to_zero() {
        let v = bessel_k(BesselOrder::new(0.5).unwrap(), 800.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn bessel_k_domain_errors() {
        let nu = BesselOrder::new(1.0).unwrap();
        assert!(bessel_k(nu, 0.0).is_err());
        assert!(bessel_k(nu, -1.0).is_err());
        assert!(bessel_k(nu, f64::NAN).is_err());
        assert!(BesselOrder::new(0.0).is_err());
        assert!(BesselOrder::new(-2.0).is_err());
    }
}
