//! Monte Carlo harness for the fixed-domain limit claims: asymptotic
//! normality of the microergodic estimators, tapered-vs-exact likelihood gap
//! growth, and the bounded trace gap between equivalent Gaussian measures.
//!
//! Replicates run concurrently; stream seeds are derived per replicate index
//! so the output is identical regardless of scheduling.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::covmodel::{
    check_a3, dcov_dtheta, taper_value, A3Report, CovError, CovFamily, CovModel, TaperSpec,
};
use crate::likelihood::{
    joint_mle_exponential, sigma2_mle_fixed_theta, Dataset, FitError, ParamBox,
};
use crate::linalg::{
    band_from_fn, build_dense, build_tapered, ou_log_det, ou_precision, trace_band_product,
    LinalgError,
};
use crate::simulate::{jittered_design, regular_design, sample_gp, Design, Seed, SimError};
use crate::stats;

/// Stream offsets for seed derivation: replicate r uses child(r), the design
/// for size n uses child(2^32 + n), the gap-trace realization child(2^33 + n).
const DESIGN_STREAM: u64 = 1 << 32;
const GAP_STREAM: u64 = 1 << 33;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("replicates must be at least 2, got {0}")]
    TooFewReplicates(usize),
    #[error("n_list must be nonempty and strictly increasing")]
    BadNList,
    #[error("gap trace needs n_list covering at least a factor-8 range")]
    GapRangeTooNarrow,
    #[error("too many failed replicates at n = {n}: {failed} of {total} (cap 1%)")]
    TooManyFailures { n: usize, failed: usize, total: usize },
    #[error("normality check needs at least 30 values, got {0}")]
    TooFewForNormality(usize),
    #[error("degenerate statistics: target or sample variance is not positive")]
    DegenerateStatistics,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Cov(#[from] CovError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Regular,
    Jittered { jitter_frac: f64 },
}

fn make_design(kind: DesignKind, n: usize, seed: &Seed) -> Result<Design, SimError> {
    match kind {
        DesignKind::Regular => regular_design(n),
        DesignKind::Jittered { jitter_frac } => {
            jittered_design(n, jitter_frac, seed.child(DESIGN_STREAM + n as u64))
        }
    }
}

/// Which estimator the harness runs per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WorkingSpec {
    /// Joint (theta, sigma2) maximization over a box, exponential model.
    ExponentialBox(ParamBox),
    /// Closed-form sigma2 at a fixed theta1 (any smoothness).
    MaternFixedTheta { theta1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub truth: CovModel,
    pub working: WorkingSpec,
    pub taper: TaperSpec,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub seed: Seed,
    pub design_kind: DesignKind,
}

impl McConfig {
    fn validate(&self) -> Result<(), McError> {
        if self.replicates < 2 {
            return Err(McError::TooFewReplicates(self.replicates));
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(McError::BadNList);
        }
        Ok(())
    }
}

/// The limit variance 2 (sigma0^2 theta0^(2 nu))^2 of the standardized
/// microergodic statistic.
pub fn target_variance(truth: &CovModel) -> f64 {
    let m = truth.microergodic();
    2.0 * m * m
}

/// Moment and distribution summary for one estimator variant at one n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    /// Standardized statistics sqrt(n) (microergodic_hat - microergodic_0).
    pub z: Vec<f64>,
    pub mean: f64,
    pub var: f64,
    pub target_var: f64,
    pub var_ratio: f64,
    /// KS statistic/p-value against N(0, target_var); NaN below 30 replicates.
    pub ks_stat: f64,
    pub ks_p: f64,
}

fn summarize(z: Vec<f64>, target_var: f64) -> VariantSummary {
    let mean = stats::mean(&z);
    let var = if z.len() > 1 { stats::variance(&z) } else { f64::NAN };
    let (ks_stat, ks_p) = if z.len() >= 30 && var > 0.0 {
        stats::ks_test_normal(&z, target_var)
    } else {
        (f64::NAN, f64::NAN)
    };
    VariantSummary {
        mean,
        var,
        target_var,
        var_ratio: var / target_var,
        ks_stat,
        ks_p,
        z,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McPerN {
    pub n: usize,
    pub failed_replicates: usize,
    pub exact: VariantSummary,
    pub tapered: VariantSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McMetadata {
    pub seed_root: u64,
    pub replicates: usize,
    pub design_kind: DesignKind,
    pub rng: &'static str,
    pub normal_transform: &'static str,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub truth: CovModel,
    pub taper: TaperSpec,
    pub a3: Option<A3Report>,
    pub a3_warning: Option<String>,
    pub per_n: Vec<McPerN>,
    pub metadata: McMetadata,
}

/// Runs the Theorem-2/Theorem-5 experiment: per replicate, simulate from the
/// truth and fit both the exact and the tapered estimator; standardize the
/// microergodic estimates and summarize moments plus a KS test per n.
pub fn mc_microergodic(config: &McConfig) -> Result<McSummary, McError> {
    config.validate()?;
    let start = Instant::now();
    let truth = config.truth;
    let taper = config.taper;

    let a3 = if !taper.is_none() && truth.family == CovFamily::Matern {
        Some(check_a3(&taper, truth.nu, 400.0)?)
    } else {
        None
    };
    let a3_warning = a3.and_then(|r| {
        (!r.satisfied).then(|| {
            format!(
                "taper does not satisfy condition (A3) for nu = {}: fitted epsilon {:.3}",
                truth.nu, r.fitted_epsilon
            )
        })
    });

    let micro0 = truth.microergodic();
    let target = target_variance(&truth);
    let identity = TaperSpec::none();
    let mut per_n = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let design = make_design(config.design_kind, n, &config.seed)?;
        let fits: Vec<Option<(f64, f64)>> = (0..config.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let data = sample_gp(&design, &truth, config.seed.child(r)).ok()?;
                match config.working {
                    WorkingSpec::ExponentialBox(pbox) => {
                        let e = joint_mle_exponential(&data, &pbox, &identity).ok()?;
                        let t = joint_mle_exponential(&data, &pbox, &taper).ok()?;
                        (e.converged && t.converged).then_some((e.microergodic, t.microergodic))
                    }
                    WorkingSpec::MaternFixedTheta { theta1 } => {
                        let e = sigma2_mle_fixed_theta(&data, theta1, truth.nu, &identity).ok()?;
                        let t = sigma2_mle_fixed_theta(&data, theta1, truth.nu, &taper).ok()?;
                        Some((e.microergodic, t.microergodic))
                    }
                }
            })
            .collect();
        let failed = fits.iter().filter(|f| f.is_none()).count();
        if failed * 100 > config.replicates {
            return Err(McError::TooManyFailures {
                n,
                failed,
                total: config.replicates,
            });
        }
        let sqrt_n = (n as f64).sqrt();
        let mut z_exact = Vec::with_capacity(config.replicates - failed);
        let mut z_tapered = Vec::with_capacity(config.replicates - failed);
        for fit in fits.into_iter().flatten() {
            z_exact.push(sqrt_n * (fit.0 - micro0));
            z_tapered.push(sqrt_n * (fit.1 - micro0));
        }
        per_n.push(McPerN {
            n,
            failed_replicates: failed,
            exact: summarize(z_exact, target),
            tapered: summarize(z_tapered, target),
        });
    }

    Ok(McSummary {
        truth,
        taper,
        a3,
        a3_warning,
        per_n,
        metadata: McMetadata {
            seed_root: config.seed.root,
            replicates: config.replicates,
            design_kind: config.design_kind,
            rng: "chacha8",
            normal_transform: "polar",
            runtime_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// Moments and KS result of `normality_check`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityReport {
    pub ks_stat: f64,
    pub ks_p: f64,
    pub mean: f64,
    pub var: f64,
    pub var_ratio: f64,
}

/// One-sample Kolmogorov-Smirnov check of z against N(0, target_var), with
/// the asymptotic p-value formula; needs at least 30 values.
pub fn normality_check(z: &[f64], target_var: f64) -> Result<NormalityReport, McError> {
    if z.len() < 30 {
        return Err(McError::TooFewForNormality(z.len()));
    }
    if !(target_var > 0.0) {
        return Err(McError::DegenerateStatistics);
    }
    let var = stats::variance(z);
    if !(var > 0.0) {
        return Err(McError::DegenerateStatistics);
    }
    let (ks_stat, ks_p) = stats::ks_test_normal(z, target_var);
    Ok(NormalityReport {
        ks_stat,
        ks_p,
        mean: stats::mean(z),
        var,
        var_ratio: var / target_var,
    })
}

/// Gap evaluations at one working parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapPoint {
    pub theta: f64,
    pub sigma2: f64,
    /// l_tap - l at this point.
    pub loglik_gap: f64,
    pub loglik_gap_per_sqrt_n: f64,
    /// Tapered-minus-exact score gap: the theta score for the exponential
    /// family, the sigma2 score for the Matérn fixed-theta path.
    pub score_gap: f64,
    pub score_gap_per_sqrt_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAtN {
    pub n: usize,
    pub points: Vec<GapPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTrace {
    pub per_n: Vec<GapAtN>,
}

const LN_2PI: f64 = 1.8378770664093453;

/// Per-theta factorized quantities of the unit-variance working model.
struct ThetaQuantities {
    log_det_r: f64,
    quad_r: f64,
    log_det_t: f64,
    quad_t: f64,
    /// tr(R^{-1} dR), x'R^{-1}(dR)R^{-1}x and tapered analogs; only for the
    /// exponential score path.
    theta_score_parts: Option<(f64, f64, f64, f64)>,
}

fn theta_quantities(
    data: &Dataset,
    truth_family: CovFamily,
    nu: f64,
    theta: f64,
    taper: &TaperSpec,
) -> Result<ThetaQuantities, McError> {
    let corr = match truth_family {
        CovFamily::Exponential => CovModel::exponential(1.0, theta)?,
        CovFamily::Matern => CovModel::matern(1.0, theta, nu)?,
    };
    let t = data.design.points();
    let n = t.len();

    // Exact correlation-scale quantities.
    let (log_det_r, quad_r, exact_score): (f64, f64, Option<(f64, f64)>) = match corr.family {
        CovFamily::Exponential => {
            let prec = ou_precision(&data.design, theta, 1.0)?;
            let mut tr = 0.0;
            for (i, g) in data.design.gaps().iter().enumerate() {
                tr += 2.0 * prec.offdiag_inv(i) * dcov_dtheta(&corr, *g);
            }
            let y = prec.apply(&data.x);
            let mut w = 0.0;
            for i in 0..n {
                for j in 0..i {
                    w += 2.0 * y[i] * y[j] * dcov_dtheta(&corr, t[i] - t[j]);
                }
            }
            (
                ou_log_det(&data.design, theta, 1.0),
                prec.quad_form(&data.x),
                Some((tr, w)),
            )
        }
        CovFamily::Matern => {
            let f = build_dense(&data.design, &corr).cholesky()?;
            (f.log_det(), f.quad_form(&data.x), None)
        }
    };

    // Tapered quantities; the identity taper reuses the exact path values so
    // gaps vanish identically.
    if taper.is_none() {
        return Ok(ThetaQuantities {
            log_det_r,
            quad_r,
            log_det_t: log_det_r,
            quad_t: quad_r,
            theta_score_parts: exact_score.map(|(tr, w)| (tr, w, tr, w)),
        });
    }

    let vt = build_tapered(&data.design, &corr, taper);
    let f = vt.cholesky()?;
    let (log_det_t, quad_t) = (f.log_det(), f.quad_form(&data.x));
    let theta_score_parts = match exact_score {
        Some((tr, w)) => {
            let dvt = band_from_fn(&data.design, taper, |h| {
                dcov_dtheta(&corr, h) * taper_value(taper, h)
            });
            let z = f.selected_inverse();
            let tr_t = trace_band_product(&z, &dvt);
            let y = f.solve(&data.x);
            let bw = dvt.bandwidth();
            let mut w_t = 0.0;
            for i in 0..n {
                for j in i.saturating_sub(bw)..i {
                    w_t += 2.0 * y[i] * y[j] * dvt.at(i, j);
                }
            }
            Some((tr, w, tr_t, w_t))
        }
        None => None,
    };
    Ok(ThetaQuantities {
        log_det_r,
        quad_r,
        log_det_t,
        quad_t,
        theta_score_parts,
    })
}

/// One realization per n: the likelihood gap l_tap - l and the matching score
/// gap at each working parameter point, raw and sqrt(n)-normalized.
///
/// The exponential family reports theta-score gaps; the Matérn path reports
/// sigma2-score gaps at the fixed working theta.
pub fn gap_trace(
    truth: &CovModel,
    params_grid: &[(f64, f64)],
    taper: &TaperSpec,
    n_list: &[usize],
    seed: &Seed,
) -> Result<GapTrace, McError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(McError::BadNList);
    }
    if (n_list[n_list.len() - 1] as f64) < 8.0 * n_list[0] as f64 {
        return Err(McError::GapRangeTooNarrow);
    }
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let design = regular_design(n)?;
        let data = sample_gp(&design, truth, seed.child(GAP_STREAM + n as u64))?;
        let nf = n as f64;
        let sqrt_n = nf.sqrt();

        let mut thetas: Vec<f64> = Vec::new();
        for &(theta, _) in params_grid {
            if !thetas.contains(&theta) {
                thetas.push(theta);
            }
        }
        let mut points = Vec::with_capacity(params_grid.len());
        for &theta in &thetas {
            let q = theta_quantities(&data, truth.family, truth.nu, theta, taper)?;
            for &(th, sigma2) in params_grid.iter().filter(|p| p.0 == theta) {
                let l_exact =
                    -0.5 * nf * LN_2PI - 0.5 * (nf * sigma2.ln() + q.log_det_r)
                        - 0.5 * q.quad_r / sigma2;
                let l_tap =
                    -0.5 * nf * LN_2PI - 0.5 * (nf * sigma2.ln() + q.log_det_t)
                        - 0.5 * q.quad_t / sigma2;
                let loglik_gap = l_tap - l_exact;
                let score_gap = match q.theta_score_parts {
                    Some((tr, w, tr_t, w_t)) => {
                        let s_exact = -0.5 * tr + 0.5 * w / sigma2;
                        let s_tap = -0.5 * tr_t + 0.5 * w_t / sigma2;
                        s_tap - s_exact
                    }
                    None => {
                        let s4 = sigma2 * sigma2;
                        0.5 * (q.quad_t - q.quad_r) / s4
                    }
                };
                points.push(GapPoint {
                    theta: th,
                    sigma2,
                    loglik_gap,
                    loglik_gap_per_sqrt_n: loglik_gap / sqrt_n,
                    score_gap,
                    score_gap_per_sqrt_n: score_gap / sqrt_n,
                });
            }
        }
        per_n.push(GapAtN { n, points });
    }
    Ok(GapTrace { per_n })
}

/// trace(V0 V1^{-1}) - n, by factorizing V1 and solving against the columns
/// of V0. Bounded in n exactly when the two measures are equivalent.
pub fn trace_gap_theorem3(
    design: &Design,
    f0_model: &CovModel,
    f1_model: &CovModel,
) -> Result<f64, McError> {
    let n = design.len();
    let v0 = build_dense(design, f0_model);
    let f1 = build_dense(design, f1_model).cholesky()?;
    let mut col = vec![0.0; n];
    let mut trace = 0.0;
    for j in 0..n {
        for i in 0..n {
            col[i] = v0.at(i, j);
        }
        trace += f1.solve(&col)[j];
    }
    Ok(trace - n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{
        dloglik_dsigma2, dloglik_dtheta, exact_loglik, tapered_dloglik_dsigma2,
        tapered_dloglik_dtheta, tapered_loglik,
    };
    use crate::simulate::sample_standard_normals;
    use approx::assert_relative_eq;

    #[test]
    fn target_variance_examples() {
        let exp = CovModel::exponential(1.0, 1.0).unwrap();
        assert_eq!(target_variance(&exp), 2.0);
        let mat = CovModel::matern(1.0, 1.0, 1.0).unwrap();
        assert_eq!(target_variance(&mat), 2.0);
        let other = CovModel::exponential(2.0, 0.5).unwrap();
        assert_eq!(target_variance(&other), 2.0);
    }

    #[test]
    fn mc_is_deterministic_and_validates() {
        let truth = CovModel::exponential(1.0, 1.0).unwrap();
        let config = McConfig {
            truth,
            working: WorkingSpec::ExponentialBox(ParamBox::new(0.25, 4.0, 0.25, 4.0).unwrap()),
            taper: TaperSpec::wendland_one(0.3).unwrap(),
            n_list: vec![24],
            replicates: 2,
            seed: Seed::new(777),
            design_kind: DesignKind::Regular,
        };
        let a = mc_microergodic(&config).unwrap();
        let b = mc_microergodic(&config).unwrap();
        assert_eq!(a.per_n[0].exact.z, b.per_n[0].exact.z);
        assert_eq!(a.per_n[0].tapered.z, b.per_n[0].tapered.z);
        assert_eq!(a.per_n[0].exact.target_var, target_variance(&truth));

        let mut bad = config.clone();
        bad.replicates = 1;
        assert!(matches!(
            mc_microergodic(&bad),
            Err(McError::TooFewReplicates(1))
        ));
        let mut bad = config.clone();
        bad.n_list = vec![32, 32];
        assert!(matches!(mc_microergodic(&bad), Err(McError::BadNList)));
    }

    #[test]
    fn mc_matern_path_runs_and_warns_on_a3() {
        let truth = CovModel::matern(1.0, 1.0, 1.5).unwrap();
        let config = McConfig {
            truth,
            working: WorkingSpec::MaternFixedTheta { theta1: 2.0 },
            // W1 fails (A3) at nu = 1.5, so the run must carry a warning.
            taper: TaperSpec::wendland_one(0.3).unwrap(),
            n_list: vec![16, 24],
            replicates: 4,
            seed: Seed::new(5),
            design_kind: DesignKind::Jittered { jitter_frac: 0.2 },
        };
        let summary = mc_microergodic(&config).unwrap();
        assert!(summary.a3_warning.is_some());
        assert_eq!(summary.per_n.len(), 2);
        assert_eq!(summary.per_n[0].exact.z.len(), 4);
        assert_eq!(summary.metadata.normal_transform, "polar");
    }

    #[test]
    fn normality_check_contract() {
        assert!(matches!(
            normality_check(&[0.0; 10], 1.0),
            Err(McError::TooFewForNormality(10))
        ));
        assert!(matches!(
            normality_check(&[0.0; 64], 1.0),
            Err(McError::DegenerateStatistics)
        ));
        let z = sample_standard_normals(500, 42);
        let r = normality_check(&z, 1.0).unwrap();
        assert!(r.ks_p > 0.01);
        assert!((r.var_ratio - 1.0).abs() < 0.3);
    }

    #[test]
    fn normality_check_self_calibration() {
        // i.i.d. N(0, tv) samples should pass at the 1% level in at least 98%
        // of meta-replicates.
        let tv: f64 = 3.7;
        let meta = 300;
        let mut pass = 0;
        for m in 0..meta {
            let z: Vec<f64> = sample_standard_normals(500, 9000 + m)
                .into_iter()
                .map(|v| v * tv.sqrt())
                .collect();
            if normality_check(&z, tv).unwrap().ks_p > 0.01 {
                pass += 1;
            }
        }
        assert!(
            pass * 100 >= meta * 98,
            "only {pass}/{meta} meta-replicates passed"
        );
    }

    #[test]
    fn gap_trace_identity_taper_is_exactly_zero() {
        let truth = CovModel::exponential(1.0, 1.0).unwrap();
        let grid = [(0.5, 0.5), (1.0, 1.0), (2.0, 1.5)];
        let trace = gap_trace(
            &truth,
            &grid,
            &TaperSpec::none(),
            &[16, 128],
            &Seed::new(3),
        )
        .unwrap();
        for at_n in &trace.per_n {
            for p in &at_n.points {
                assert_eq!(p.loglik_gap, 0.0);
                assert_eq!(p.score_gap, 0.0);
            }
        }
        assert!(matches!(
            gap_trace(&truth, &grid, &TaperSpec::none(), &[16, 64], &Seed::new(3)),
            Err(McError::GapRangeTooNarrow)
        ));
    }

    #[test]
    fn gap_trace_matches_public_ops() {
        let seed = Seed::new(99);
        for truth in [
            CovModel::exponential(1.0, 1.2).unwrap(),
            CovModel::matern(1.0, 1.5, 1.0).unwrap(),
        ] {
            let taper = TaperSpec::wendland_two(0.35).unwrap();
            let grid = [(1.5, 0.7), (1.5, 1.3), (0.8, 1.0)];
            let trace = gap_trace(&truth, &grid, &taper, &[8, 64], &seed).unwrap();
            for at_n in &trace.per_n {
                let design = regular_design(at_n.n).unwrap();
                let data = sample_gp(&design, &truth, seed.child(GAP_STREAM + at_n.n as u64))
                    .unwrap();
                for p in &at_n.points {
                    let model = truth.with_params(p.theta, p.sigma2).unwrap();
                    let want_gap = tapered_loglik(&data, &model, &taper).unwrap()
                        - exact_loglik(&data, &model).unwrap();
                    assert_relative_eq!(p.loglik_gap, want_gap, max_relative = 1e-9, epsilon = 1e-9);
                    let want_score = match truth.family {
                        CovFamily::Exponential => {
                            tapered_dloglik_dtheta(&data, &model, &taper).unwrap()
                                - dloglik_dtheta(&data, &model).unwrap()
                        }
                        CovFamily::Matern => {
                            tapered_dloglik_dsigma2(&data, &model, &taper).unwrap()
                                - dloglik_dsigma2(&data, &model).unwrap()
                        }
                    };
                    assert_relative_eq!(p.score_gap, want_score, max_relative = 1e-8, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn theorem3_identical_models_give_zero() {
        let d = regular_design(40).unwrap();
        let m = CovModel::matern(1.0, 1.0, 0.5).unwrap();
        let gap = trace_gap_theorem3(&d, &m, &m).unwrap();
        assert!(gap.abs() < 1e-8, "trace gap {gap}");
    }

    #[test]
    fn theorem3_matched_bounded_mismatched_grows() {
        let matched: Vec<f64> = [32usize, 64, 128, 256]
            .iter()
            .map(|&n| {
                let d = regular_design(n).unwrap();
                let f0 = CovModel::matern(1.0, 1.0, 0.5).unwrap();
                let f1 = CovModel::matern(0.5, 2.0, 0.5).unwrap();
                trace_gap_theorem3(&d, &f0, &f1).unwrap()
            })
            .collect();
        let lo = matched.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = matched.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi / lo < 1.5, "matched trace gap not flat: {matched:?}");

        let mismatched: Vec<f64> = [32usize, 128]
            .iter()
            .map(|&n| {
                let d = regular_design(n).unwrap();
                let f0 = CovModel::matern(1.0, 1.0, 0.5).unwrap();
                let f1 = CovModel::matern(1.0, 2.0, 0.5).unwrap();
                trace_gap_theorem3(&d, &f0, &f1).unwrap().abs()
            })
            .collect();
        assert!(
            mismatched[1] > 3.0 * mismatched[0],
            "mismatched trace gap did not grow: {mismatched:?}"
        );
    }
}
