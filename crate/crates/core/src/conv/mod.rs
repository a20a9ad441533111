//! Regular estimators and the convolution structure of their limit laws.

mod decompose;
mod gauss_limit;
mod kernel;
mod rao;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dist::Law;
use crate::error::{invalid, Result};
use crate::lan::LocalModel;
use crate::stats::{gaussian_check, independence_check, ks_two_sample, mean_and_se, RngSpec, StreamRng};

pub use decompose::{decompose_paired, ConvolutionReport, DecomposeOptions};
pub use gauss_limit::{
    asymptotic_gaussian_convolution, Functional, GaussLimitOptions, GaussLimitReport, GaussLimitStep,
    LimitCompetitor,
};
pub use kernel::{apply_convolution_kernel, ConvolutionKernel};
pub use rao::{rao_covariance_check, Family, LinearStat, RaoCase, RaoReport};

/// Estimator sequences `T_n` for a one-dimensional local model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum Estimator {
    /// Parameter from the sample mean.
    Mean,
    /// Mean-based estimate plus `c·Z/√n` with independent `Z ~ N(0,1)`.
    NoisyMean { noise_c: f64 },
    /// Parameter from the sample median.
    Median,
    /// Parameter from the first observation alone.
    FirstObs,
    /// Parameter from a weighted mean; the pattern is cycled over the sample and normalized.
    WeightedMean { weights: Vec<f64> },
}

impl Estimator {
    pub fn validate(&self) -> Result<()> {
        match self {
            Estimator::NoisyMean { noise_c } if !noise_c.is_finite() => Err(invalid("noise_c must be finite")),
            Estimator::WeightedMean { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(invalid("weights must be non-empty, finite and non-negative"));
                }
                if weights.iter().sum::<f64>() <= 0.0 {
                    return Err(invalid("weights must not all vanish"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `T_n` at `data`; `rng` supplies any auxiliary randomization.
    pub fn evaluate(&self, model: &dyn LocalModel, data: &[f64], rng: &mut StreamRng) -> f64 {
        let n = data.len();
        let mean = || data.iter().sum::<f64>() / n as f64;
        match self {
            Estimator::Mean => model.from_mean(mean()),
            Estimator::NoisyMean { noise_c } => {
                let z: f64 = rng.sample(StandardNormal);
                model.from_mean(mean()) + noise_c * z / (n as f64).sqrt()
            }
            Estimator::Median => model.from_median(median(data)),
            Estimator::FirstObs => model.from_mean(data[0]),
            Estimator::WeightedMean { weights } => {
                let (mut s, mut w) = (0.0, 0.0);
                for (x, c) in data.iter().zip(weights.iter().cycle()) {
                    s += c * x;
                    w += c;
                }
                model.from_mean(s / w)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Estimator::Mean => "mean".into(),
            Estimator::NoisyMean { noise_c } => format!("noisy_mean(c={noise_c})"),
            Estimator::Median => "median".into(),
            Estimator::FirstObs => "first_obs".into(),
            Estimator::WeightedMean { weights } => format!("weighted_mean({weights:?})"),
        }
    }
}

fn median(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    let n = v.len();
    let mid = n / 2;
    let (_, hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let hi = *hi;
    if n % 2 == 1 {
        return hi;
    }
    let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo + hi)
}

fn check_sizes(n: usize, reps: usize) -> Result<()> {
    if n == 0 || reps < 2 {
        return Err(invalid("need n >= 1 and at least two replications"));
    }
    Ok(())
}

/// Draws under `P_{n,θ}` of `(X_n, √n(T_n − ϑ0))`.
pub fn simulate_pairs(
    model: &dyn LocalModel,
    est: &Estimator,
    n: usize,
    theta: f64,
    reps: usize,
    rng: &RngSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sizes(n, reps)?;
    est.validate()?;
    let root = (n as f64).sqrt();
    let t0 = model.theta0();
    let rows = rng.replicate(reps, |r| {
        let x = model.sample(n, theta, r);
        (model.central_seq(n, &x), root * (est.evaluate(model, &x, r) - t0))
    });
    Ok(rows.into_iter().unzip())
}

fn residuals(model: &dyn LocalModel, central: &[f64], target: &[f64]) -> Vec<f64> {
    let s2 = model.sigma().powi(2);
    target.iter().zip(central).map(|(t, x)| t - x / s2).collect()
}

/// KS threshold for two-sample comparisons: 0.03 at `10^4` replications, scaled with `1/√reps`.
pub fn regularity_threshold(reps: usize) -> f64 {
    0.03 * (1e4 / reps as f64).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub thetas: Vec<f64>,
    /// Pairwise KS distances of `√n(T_n − ϑ0 − θ/√n)` across `thetas`, as `(i, j, ks)`.
    pub pairwise: Vec<(usize, usize, f64)>,
    pub max_pairwise_ks: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// The law of `√n(T_n − (ϑ0 + θ/√n))` under `P_{n,θ}` should not depend on `θ`.
pub fn regularity_check(
    model: &dyn LocalModel,
    est: &Estimator,
    thetas: &[f64],
    n: usize,
    reps: usize,
    rng: &RngSpec,
) -> Result<RegularityReport> {
    if !thetas.contains(&0.0) {
        return Err(invalid("theta list must contain 0"));
    }
    let laws: Vec<Vec<f64>> = thetas
        .iter()
        .enumerate()
        .map(|(i, &th)| {
            let (_, t) = simulate_pairs(model, est, n, th, reps, &rng.derive(i as u64))?;
            Ok(t.into_iter().map(|v| v - th).collect())
        })
        .collect::<Result<_>>()?;
    let mut pairwise = Vec::new();
    for i in 0..laws.len() {
        for j in i + 1..laws.len() {
            pairwise.push((i, j, ks_two_sample(&laws[i], &laws[j])?));
        }
    }
    let max_pairwise_ks = pairwise.iter().map(|p| p.2).fold(0.0, f64::max);
    let threshold = regularity_threshold(reps);
    Ok(RegularityReport {
        thetas: thetas.to_vec(),
        pairwise,
        max_pairwise_ks,
        threshold,
        pass: max_pairwise_ks <= threshold,
    })
}

/// `Q = ν ∗ N(0, 1/σ²)` at `θ = 0`, with `ν` the law of `√n(T_n − ϑ0) − X_n/σ²`.
pub fn convolution_decompose(
    model: &dyn LocalModel,
    est: &Estimator,
    n: usize,
    reps: usize,
    opts: DecomposeOptions,
    rng: &RngSpec,
) -> Result<ConvolutionReport> {
    let (x, t) = simulate_pairs(model, est, n, 0.0, reps, rng)?;
    let s2 = model.sigma().powi(2);
    let efficient: Vec<f64> = x.iter().map(|v| v / s2).collect();
    decompose_paired(&efficient, &t, &Law::Normal { mean: 0.0, var: 1.0 / s2 }, opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct EfficiencyReport {
    /// `P̂(|√n(T_n − ϑ0) − X_n/σ²| > 0.1)`.
    pub exceed_fraction: f64,
    pub difference_var: f64,
    pub difference_var_se: f64,
    /// KS distance of `√n(T_n − ϑ0)` to `N(0, 1/σ²)`.
    pub ks_to_efficient: f64,
}

pub fn efficiency_check(
    model: &dyn LocalModel,
    est: &Estimator,
    n: usize,
    reps: usize,
    rng: &RngSpec,
) -> Result<EfficiencyReport> {
    let (x, t) = simulate_pairs(model, est, n, 0.0, reps, rng)?;
    let d = residuals(model, &x, &t);
    let exceed_fraction = d.iter().filter(|v| v.abs() > 0.1).count() as f64 / d.len() as f64;
    let (m, _) = mean_and_se(&d)?;
    let sq: Vec<f64> = d.iter().map(|v| (v - m).powi(2)).collect();
    let (difference_var, difference_var_se) = mean_and_se(&sq)?;
    let ks_to_efficient = gaussian_check(&t, 0.0, 1.0 / model.sigma().powi(2))?;
    Ok(EfficiencyReport { exceed_fraction, difference_var, difference_var_se, ks_to_efficient })
}

#[derive(Clone, Debug, Serialize)]
pub struct JointIndependence {
    pub theta_alt: f64,
    /// Independence statistic of `(X_n, residual)` under `P_{n,0}`.
    pub independence_null: f64,
    /// The same under `P_{n,θ_alt}`.
    pub independence_alt: f64,
    /// KS distance between the residual laws under the two parameters.
    pub residual_ks: f64,
}

/// `(X_n, √n(T_n − ϑ0) − X_n/σ²)` under `θ = 0` and `θ = theta_alt`: the coordinates should be
/// independent under both and the residual law should not move.
pub fn joint_independence_pipeline(
    model: &dyn LocalModel,
    est: &Estimator,
    n: usize,
    reps: usize,
    theta_alt: f64,
    rng: &RngSpec,
) -> Result<JointIndependence> {
    if theta_alt == 0.0 || !theta_alt.is_finite() {
        return Err(invalid("theta_alt must be finite and non-zero"));
    }
    let (x0, t0) = simulate_pairs(model, est, n, 0.0, reps, &rng.derive(0))?;
    let (x1, t1) = simulate_pairs(model, est, n, theta_alt, reps, &rng.derive(1))?;
    let r0 = residuals(model, &x0, &t0);
    let r1 = residuals(model, &x1, &t1);
    Ok(JointIndependence {
        theta_alt,
        independence_null: independence_check(&x0, &r0)?,
        independence_alt: independence_check(&x1, &r1)?,
        residual_ks: ks_two_sample(&r0, &r1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lan::GaussianLocationModel;

    #[test]
    fn median_of_even_and_odd_samples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn efficient_mean_has_zero_residual() {
        let m = GaussianLocationModel { theta0: 0.5 };
        let rep = efficiency_check(&m, &Estimator::Mean, 50, 2000, &RngSpec::new(1, 2).unwrap()).unwrap();
        assert_eq!(rep.exceed_fraction, 0.0);
        assert!(rep.difference_var < 1e-20);
    }

    #[test]
    fn weighted_mean_with_equal_weights_is_the_mean() {
        let m = GaussianLocationModel { theta0: 0.0 };
        let mut r = RngSpec::new(2, 1).unwrap().stream(0);
        let x = m.sample(7, 0.0, &mut r);
        let a = Estimator::WeightedMean { weights: vec![2.0] }.evaluate(&m, &x, &mut r);
        let b = Estimator::Mean.evaluate(&m, &x, &mut r);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn theta_list_must_contain_zero() {
        let m = GaussianLocationModel { theta0: 0.0 };
        let rng = RngSpec::new(1, 1).unwrap();
        assert!(regularity_check(&m, &Estimator::Mean, &[1.0], 10, 10, &rng).is_err());
    }
}
