use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::decompose::{decompose_paired, ConvolutionReport, DecomposeOptions};
use crate::dist::Law;
use crate::error::{invalid, Result};
use crate::stats::{covariance_and_se, gaussian_check, RngSpec};

/// Estimated functional `f`; `S_n` is its plug-in estimate from the empirical law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum Functional {
    Mean,
    /// Distribution function at up to three points.
    Cdf { points: Vec<f64> },
}

impl Functional {
    fn dim(&self) -> usize {
        match self {
            Functional::Mean => 1,
            Functional::Cdf { points } => points.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Functional::Cdf { points } = self {
            if points.is_empty() || points.len() > 3 || points.iter().any(|p| !p.is_finite()) {
                return Err(invalid("cdf functional needs one to three finite points"));
            }
        }
        Ok(())
    }

    fn at(&self, x: f64, j: usize) -> f64 {
        match self {
            Functional::Mean => x,
            Functional::Cdf { points } => f64::from(x <= points[j]),
        }
    }

    fn value(&self, base: &Law) -> Vec<f64> {
        match self {
            Functional::Mean => vec![base.mean()],
            Functional::Cdf { points } => points.iter().map(|&p| base.cdf(p)).collect(),
        }
    }

    /// Covariance of one observation's influence vector.
    fn covariance(&self, base: &Law) -> Vec<Vec<f64>> {
        match self {
            Functional::Mean => vec![vec![base.variance()]],
            Functional::Cdf { points } => {
                let f: Vec<f64> = points.iter().map(|&p| base.cdf(p)).collect();
                (0..points.len())
                    .map(|j| (0..points.len()).map(|k| base.cdf(points[j].min(points[k])) - f[j] * f[k]).collect())
                    .collect()
            }
        }
    }
}

/// Competing estimator `T_n` built on `S_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "competitor", rename_all = "snake_case")]
pub enum LimitCompetitor {
    SameAsS,
    /// `T_n = S_n + c·(mean of n centered Exp(1) variables)` per coordinate.
    AuxNoise { c: f64 },
    /// Weights `(1 ± δ)/n` alternating, `δ² = kappa − 1`, so `n Σ a_i² = kappa`.
    Weighted { kappa: f64 },
    /// `T_n = S_n + c·(E − 1)/√n` with a single `E ~ Exp(1)`: the limit is not Gaussian.
    SkewNoise { c: f64 },
}

impl LimitCompetitor {
    fn validate(&self, n_list: &[usize]) -> Result<()> {
        match *self {
            LimitCompetitor::AuxNoise { c } | LimitCompetitor::SkewNoise { c } if !c.is_finite() => {
                Err(invalid("noise scale must be finite"))
            }
            LimitCompetitor::Weighted { kappa } if !(1.0..2.0).contains(&kappa) => {
                Err(invalid("kappa must lie in [1, 2) so all weights are positive"))
            }
            LimitCompetitor::Weighted { .. } if n_list.iter().any(|n| n % 2 == 1) => {
                Err(invalid("alternating weights need even sample sizes"))
            }
            _ => Ok(()),
        }
    }

    /// Limit covariance of `√n(T − S)` given the covariance of `√n S`.
    fn nu_covariance(&self, sigma: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let d = sigma.len();
        let diag = |v: f64| (0..d).map(|j| (0..d).map(|k| if j == k { v } else { 0.0 }).collect()).collect();
        match *self {
            LimitCompetitor::SameAsS => diag(0.0),
            LimitCompetitor::AuxNoise { c } | LimitCompetitor::SkewNoise { c } => diag(c * c),
            LimitCompetitor::Weighted { kappa } => {
                sigma.iter().map(|r| r.iter().map(|v| (kappa - 1.0) * v).collect()).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussLimitOptions {
    pub base: Law,
    pub functional: Functional,
    pub competitor: LimitCompetitor,
    pub n_list: Vec<usize>,
    pub reps: usize,
}

/// Diagnostics at one sample size.
#[derive(Clone, Debug, Serialize)]
pub struct GaussLimitStep {
    pub n: usize,
    /// KS distances to the limiting normal for each coordinate of `(√n(S−f), √n(T−f))`
    /// and for the two linear combinations.
    pub gaussian_ks: Vec<(String, f64)>,
    pub ks_threshold: f64,
    pub var_s: Vec<f64>,
    pub var_diff: Vec<f64>,
    /// `Cov(√n f(S), √n f(T − S))` with standard error, per coordinate.
    pub cov: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussLimitReport {
    pub limit_cov_s: Vec<Vec<f64>>,
    pub limit_cov_nu: Vec<Vec<f64>>,
    pub steps: Vec<GaussLimitStep>,
    /// Some Gaussianity diagnostic failed: the limit theorem does not apply.
    pub premise_violated: bool,
    pub variance_converged: bool,
    pub covariance_zero: bool,
    /// Decomposition of the first coordinate at the largest `n`.
    pub decomposition: ConvolutionReport,
    pub nu_sup_error: f64,
    pub nu_tol: f64,
    pub pass: bool,
}

fn normal_ks(values: &[f64], var: f64) -> Result<f64> {
    if var > 1e-15 {
        return gaussian_check(values, 0.0, var);
    }
    Ok(if values.iter().all(|v| v.abs() < 1e-9) { 0.0 } else { 1.0 })
}

/// Joint law of `(√n(S_n − f), √n(T_n − f))` for each `n`, compared with the Gaussian limit
/// `(S, S + (T − S))` with `T − S` independent of `S`.
pub fn asymptotic_gaussian_convolution(opts: &GaussLimitOptions, rng: &RngSpec) -> Result<GaussLimitReport> {
    opts.base.validate()?;
    opts.functional.validate()?;
    opts.competitor.validate(&opts.n_list)?;
    if opts.n_list.is_empty() || opts.n_list.contains(&0) || opts.reps < 2 {
        return Err(invalid("need a non-empty list of positive sample sizes and reps >= 2"));
    }
    let d = opts.functional.dim();
    let f0 = opts.functional.value(&opts.base);
    let sigma = opts.functional.covariance(&opts.base);
    let sigma_nu = opts.competitor.nu_covariance(&sigma);
    let reps = opts.reps;

    let mut steps = Vec::new();
    let mut last: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
    for (idx, &n) in opts.n_list.iter().enumerate() {
        let root = (n as f64).sqrt();
        let rows = rng.derive(idx as u64).replicate(reps, |r| {
            let mut s = vec![0.0; d];
            let mut t = vec![0.0; d];
            let delta = match opts.competitor {
                LimitCompetitor::Weighted { kappa } => (kappa - 1.0).sqrt(),
                _ => 0.0,
            };
            for i in 0..n {
                let x = opts.base.sample(r);
                let w = if i % 2 == 0 { 1.0 + delta } else { 1.0 - delta };
                for j in 0..d {
                    let g = opts.functional.at(x, j);
                    s[j] += g;
                    t[j] += w * g;
                }
            }
            let mut out = Vec::with_capacity(2 * d);
            for j in 0..d {
                let sj = s[j] / n as f64;
                let tj = match opts.competitor {
                    LimitCompetitor::SameAsS => sj,
                    LimitCompetitor::Weighted { .. } => t[j] / n as f64,
                    LimitCompetitor::AuxNoise { c } => {
                        let e: f64 = (0..n).map(|_| r.sample::<f64, _>(Exp1) - 1.0).sum();
                        sj + c * e / n as f64
                    }
                    LimitCompetitor::SkewNoise { c } => sj + c * (r.sample::<f64, _>(Exp1) - 1.0) / root,
                };
                out.push(root * (sj - f0[j]));
                out.push(root * (tj - f0[j]));
            }
            out
        });
        let col = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
        let s_cols: Vec<Vec<f64>> = (0..d).map(|j| col(2 * j)).collect();
        let t_cols: Vec<Vec<f64>> = (0..d).map(|j| col(2 * j + 1)).collect();
        let diff_cols: Vec<Vec<f64>> =
            (0..d).map(|j| t_cols[j].iter().zip(&s_cols[j]).map(|(a, b)| a - b).collect()).collect();

        let mut gaussian_ks = Vec::new();
        for j in 0..d {
            gaussian_ks.push((format!("s[{j}]"), normal_ks(&s_cols[j], sigma[j][j])?));
            gaussian_ks.push((format!("t[{j}]"), normal_ks(&t_cols[j], sigma[j][j] + sigma_nu[j][j])?));
        }
        // Sum of all coordinates: 4·1ᵀΣ1 + 1ᵀΣ_ν1. Difference direction: 1ᵀΣ_ν1.
        let total = |m: &[Vec<f64>]| m.iter().flatten().sum::<f64>();
        let sum: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
        gaussian_ks.push(("sum".into(), normal_ks(&sum, 4.0 * total(&sigma) + total(&sigma_nu))?));
        let dsum: Vec<f64> = (0..reps).map(|i| diff_cols.iter().map(|c| c[i]).sum()).collect();
        gaussian_ks.push(("t_minus_s".into(), normal_ks(&dsum, total(&sigma_nu))?));

        let var = |v: &[f64]| covariance_and_se(v, v).map(|c| c.0);
        let var_s = s_cols.iter().map(|c| var(c)).collect::<Result<Vec<_>>>()?;
        let var_diff = diff_cols.iter().map(|c| var(c)).collect::<Result<Vec<_>>>()?;
        let cov = (0..d).map(|j| covariance_and_se(&s_cols[j], &diff_cols[j])).collect::<Result<Vec<_>>>()?;
        steps.push(GaussLimitStep {
            n,
            gaussian_ks,
            ks_threshold: 1.63 / (reps as f64).sqrt() + 1.0 / root,
            var_s,
            var_diff,
            cov,
        });
        last = Some((s_cols, t_cols));
    }
    let (s_cols, t_cols) = last.expect("non-empty n_list");
    let final_step = steps.last().expect("non-empty n_list");

    let premise_violated = steps.iter().any(|s| s.gaussian_ks.iter().any(|(_, v)| *v > s.ks_threshold));
    let rel_ok = |got: f64, want: f64| {
        if want > 1e-15 {
            (got / want - 1.0).abs() <= 0.1
        } else {
            got < 1e-18
        }
    };
    let variance_converged = (0..d)
        .all(|j| rel_ok(final_step.var_s[j], sigma[j][j]) && rel_ok(final_step.var_diff[j], sigma_nu[j][j]));
    let covariance_zero = final_step.cov.iter().all(|(c, se)| c.abs() <= 3.0 * se.max(1e-300));

    let sd = sigma[0][0].sqrt();
    let decomposition = decompose_paired(
        &s_cols[0],
        &t_cols[0],
        &Law::Normal { mean: 0.0, var: sigma[0][0] },
        DecomposeOptions { step: 0.05 * sd, band: (3.0 / sd).min(8.0), dt: 0.05 / sd, ..DecomposeOptions::default() },
    )?;
    let vnu = sigma_nu[0][0];
    let nu_sup_error = decomposition.nu_sup_error(decomposition.nu_hat.freqs().freqs().last().copied().unwrap_or(0.0), |t| {
        Complex64::new((-0.5 * vnu * t * t).exp(), 0.0)
    });
    let nu_tol = 6.0 / (reps as f64).sqrt();
    let pass = !premise_violated
        && variance_converged
        && covariance_zero
        && nu_sup_error <= nu_tol
        && decomposition.verdict == crate::dist::SpreadVerdict::Probability;
    Ok(GaussLimitReport {
        limit_cov_s: sigma,
        limit_cov_nu: sigma_nu,
        steps,
        premise_violated,
        variance_converged,
        covariance_zero,
        decomposition,
        nu_sup_error,
        nu_tol,
        pass,
    })
}
