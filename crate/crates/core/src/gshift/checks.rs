use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{girsanov_logdensity, mean_estimator, simulate_paths, time_index, PathGrid, SignalParam};
use crate::conv::{decompose_paired, regularity_threshold, ConvolutionReport, DecomposeOptions};
use crate::dist::Law;
use crate::error::{invalid, Result};
use crate::stats::{covariance_and_se, ks_two_sample, mean_and_se, RngSpec, StreamRng};

/// Path-valued estimators built on the mean path `S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum PathEstimator {
    Mean,
    /// `S + c·B'/√n` with an independent Brownian path `B'`.
    NoisyMean { noise_c: f64 },
    /// `S + v/√n` with the fixed path `v(t) = bias·t`.
    BiasedMean { bias: f64 },
    /// `max(S, 0)` pointwise.
    Clipped,
}

impl PathEstimator {
    /// `(S, T)` at `paths`.
    fn estimate(&self, paths: &PathGrid, rng: &mut StreamRng) -> (Vec<f64>, Vec<f64>) {
        let s = mean_estimator(paths);
        let root = (paths.count() as f64).sqrt();
        let m = paths.steps();
        let t = match *self {
            PathEstimator::Mean => s.clone(),
            PathEstimator::NoisyMean { noise_c } => {
                let sd = (1.0 / m as f64).sqrt();
                let mut b = 0.0;
                s.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        if j > 0 {
                            b += sd * rng.sample::<f64, _>(StandardNormal);
                        }
                        v + noise_c * b / root
                    })
                    .collect()
            }
            PathEstimator::BiasedMean { bias } => {
                s.iter().enumerate().map(|(j, v)| v + bias * paths.time(j) / root).collect()
            }
            PathEstimator::Clipped => s.iter().map(|v| v.max(0.0)).collect(),
        };
        (s, t)
    }

    /// Law of the factor `ν_t` when the estimator is equivariant.
    pub fn expected_nu(&self, t: f64) -> Option<Law> {
        match *self {
            PathEstimator::Mean => Some(Law::Dirac { at: 0.0 }),
            PathEstimator::NoisyMean { noise_c } if noise_c == 0.0 => Some(Law::Dirac { at: 0.0 }),
            PathEstimator::NoisyMean { noise_c } => Some(Law::Normal { mean: 0.0, var: noise_c * noise_c * t }),
            PathEstimator::BiasedMean { bias } => Some(Law::Dirac { at: bias * t }),
            PathEstimator::Clipped => None,
        }
    }
}

fn check_setup(n: usize, reps: usize, times: &[f64], steps: usize) -> Result<Vec<usize>> {
    if n == 0 || reps < 2 || times.is_empty() {
        return Err(invalid("need n >= 1, reps >= 2 and at least one time"));
    }
    times.iter().map(|&t| time_index(t, steps)).collect()
}

/// Monte Carlo mean of `exp(log density)` under `P_0ⁿ`.
#[derive(Clone, Debug, Serialize)]
pub struct GirsanovMean {
    pub mean: f64,
    pub se: f64,
    pub pass: bool,
}

pub fn girsanov_unit_mean(theta: &SignalParam, n: usize, reps: usize, rng: &RngSpec) -> Result<GirsanovMean> {
    check_setup(n, reps, &[1.0], theta.steps())?;
    let zero = SignalParam::zero(theta.steps())?;
    let lr = rng.replicate(reps, |r| {
        let p = simulate_paths(n, &zero, r).expect("validated sizes");
        girsanov_logdensity(&p, theta).expect("same grid").exp()
    });
    let (mean, se) = mean_and_se(&lr)?;
    Ok(GirsanovMean { mean, se, pass: (mean - 1.0).abs() <= 3.0 * se })
}

/// `E_θ[1{X_1(1) <= c}]` directly and by reweighting draws under `θ = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct GirsanovChange {
    pub exact: f64,
    pub direct_mean: f64,
    pub direct_se: f64,
    pub reweighted_mean: f64,
    pub reweighted_se: f64,
    pub combined_se: f64,
    pub pass: bool,
}

pub fn girsanov_change_of_measure(
    theta: &SignalParam,
    n: usize,
    c: f64,
    reps: usize,
    rng: &RngSpec,
) -> Result<GirsanovChange> {
    check_setup(n, reps, &[1.0], theta.steps())?;
    let m = theta.steps();
    let zero = SignalParam::zero(m)?;
    let direct = rng.derive(0).replicate(reps, |r| {
        let p = simulate_paths(n, theta, r).expect("validated sizes");
        f64::from(p.path(0)[m] <= c)
    });
    let weighted = rng.derive(1).replicate(reps, |r| {
        let p = simulate_paths(n, &zero, r).expect("validated sizes");
        f64::from(p.path(0)[m] <= c) * girsanov_logdensity(&p, theta).expect("same grid").exp()
    });
    let (direct_mean, direct_se) = mean_and_se(&direct)?;
    let (reweighted_mean, reweighted_se) = mean_and_se(&weighted)?;
    let combined_se = direct_se.hypot(reweighted_se);
    let exact = Normal::new(0.0, 1.0).expect("standard normal").cdf(c - theta.primitive()[m]);
    Ok(GirsanovChange {
        exact,
        direct_mean,
        direct_se,
        reweighted_mean,
        reweighted_se,
        combined_se,
        pass: (direct_mean - reweighted_mean).abs() <= 3.0 * combined_se,
    })
}

/// Moments of `√n(S − h(θ))` at a set of times.
#[derive(Clone, Debug, Serialize)]
pub struct MeanMoments {
    pub times: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

pub fn mean_estimator_moments(
    theta: &SignalParam,
    n: usize,
    reps: usize,
    times: &[f64],
    rng: &RngSpec,
) -> Result<MeanMoments> {
    let idx = check_setup(n, reps, times, theta.steps())?;
    let h = theta.primitive();
    let root = (n as f64).sqrt();
    let rows = rng.replicate(reps, |r| {
        let s = mean_estimator(&simulate_paths(n, theta, r).expect("validated sizes"));
        idx.iter().map(|&j| root * (s[j] - h[j])).collect::<Vec<f64>>()
    });
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let cols: Vec<Vec<f64>> = (0..idx.len()).map(col).collect();
    let cov = (0..idx.len())
        .map(|a| (0..idx.len()).map(|b| covariance_and_se(&cols[a], &cols[b]).map(|c| c.0)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanMoments { times: times.to_vec(), cov })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TimeKs {
    pub t: f64,
    pub ks: f64,
}

/// Draws of `√n(T − h(θ0))` and `√n(S − h(θ0))` at the time indices, paths drawn under `theta`.
fn marginals(
    est: &PathEstimator,
    theta: &SignalParam,
    h0: &[f64],
    n: usize,
    reps: usize,
    idx: &[usize],
    rng: &RngSpec,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let root = (n as f64).sqrt();
    let rows = rng.replicate(reps, |r| {
        let p = simulate_paths(n, theta, r).expect("validated sizes");
        let (s, t) = est.estimate(&p, r);
        idx.iter().map(|&j| (root * (t[j] - h0[j]), root * (s[j] - h0[j]))).collect::<Vec<_>>()
    });
    let t = (0..idx.len()).map(|k| rows.iter().map(|r| r[k].0).collect()).collect();
    let s = (0..idx.len()).map(|k| rows.iter().map(|r| r[k].1).collect()).collect();
    (t, s)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    /// Per local parameter, KS distances per time.
    pub per_eta: Vec<Vec<TimeKs>>,
    pub max_ks: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Compares `L(√n(T − h(ϑ0)) − h(η) | ϑ0 + η/√n)` with `L(√n(T − h(ϑ0)) | ϑ0)` per time.
pub fn equivariance_check(
    est: &PathEstimator,
    theta0: &SignalParam,
    etas: &[SignalParam],
    n: usize,
    reps: usize,
    times: &[f64],
    rng: &RngSpec,
) -> Result<EquivarianceReport> {
    let idx = check_setup(n, reps, times, theta0.steps())?;
    let h0 = theta0.primitive();
    let (base, _) = marginals(est, theta0, &h0, n, reps, &idx, &rng.derive(0));
    let root = (n as f64).sqrt();
    let mut per_eta = Vec::new();
    for (e, eta) in etas.iter().enumerate() {
        let theta = theta0.plus(&eta.scaled(1.0 / root))?;
        let he = eta.primitive();
        let (moved, _) = marginals(est, &theta, &h0, n, reps, &idx, &rng.derive(e as u64 + 1));
        let row = idx
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let shifted: Vec<f64> = moved[k].iter().map(|v| v - he[j]).collect();
                Ok(TimeKs { t: times[k], ks: ks_two_sample(&shifted, &base[k])? })
            })
            .collect::<Result<Vec<_>>>()?;
        per_eta.push(row);
    }
    let max_ks = per_eta.iter().flatten().map(|r| r.ks).fold(0.0, f64::max);
    let threshold = regularity_threshold(reps);
    Ok(EquivarianceReport { per_eta, max_ks, threshold, pass: max_ks <= threshold })
}

/// `L(√n S | Pⁿ_{η/√n}) = L(X_1 | P_η)`, compared through per-time KS distances.
pub fn sufficiency_identity_check(
    eta: &SignalParam,
    n: usize,
    reps: usize,
    times: &[f64],
    rng: &RngSpec,
) -> Result<Vec<TimeKs>> {
    let idx = check_setup(n, reps, times, eta.steps())?;
    let root = (n as f64).sqrt();
    let local = eta.scaled(1.0 / root);
    let lhs = rng.derive(0).replicate(reps, |r| {
        let s = mean_estimator(&simulate_paths(n, &local, r).expect("validated sizes"));
        idx.iter().map(|&j| root * s[j]).collect::<Vec<f64>>()
    });
    let rhs = rng.derive(1).replicate(reps, |r| {
        let p = simulate_paths(1, eta, r).expect("validated sizes");
        idx.iter().map(|&j| p.path(0)[j]).collect::<Vec<f64>>()
    });
    (0..idx.len())
        .map(|k| {
            let a: Vec<f64> = lhs.iter().map(|r| r[k]).collect();
            let b: Vec<f64> = rhs.iter().map(|r| r[k]).collect();
            Ok(TimeKs { t: times[k], ks: ks_two_sample(&a, &b)? })
        })
        .collect()
}

/// Decomposition `Q_t = ν_t ∗ N(0, t)` at one time.
#[derive(Clone, Debug, Serialize)]
pub struct MarginalConvolution {
    pub t: f64,
    pub report: ConvolutionReport,
    /// `sup |ν̂_t − φ_ν|` on the scaled band, when `ν_t` is known.
    pub nu_sup_error: Option<f64>,
}

/// Per-time decomposition of `√n(T − h(ϑ0))(t)` under `ϑ0` against `√n(S − h(ϑ0))(t) ~ N(0, t)`.
/// Lattice step and band are rescaled by `√t` so every time is compared on the same standardized scale.
pub fn marginal_convolution_check(
    est: &PathEstimator,
    theta0: &SignalParam,
    n: usize,
    reps: usize,
    times: &[f64],
    opts: DecomposeOptions,
    rng: &RngSpec,
) -> Result<Vec<MarginalConvolution>> {
    let idx = check_setup(n, reps, times, theta0.steps())?;
    let h0 = theta0.primitive();
    let (target, efficient) = marginals(est, theta0, &h0, n, reps, &idx, rng);
    times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let sd = t.sqrt();
            let scaled = DecomposeOptions { step: opts.step * sd, band: opts.band / sd, dt: opts.dt / sd, ..opts };
            let report = decompose_paired(&efficient[k], &target[k], &Law::Normal { mean: 0.0, var: t }, scaled)?;
            let nu_sup_error = est.expected_nu(t).map(|law| report.nu_sup_error(scaled.band, |s| law.charfn(s)));
            Ok(MarginalConvolution { t, report, nu_sup_error })
        })
        .collect()
}
