//! Local models `P_{n,θ} = P^n_{ϑ0 + θ/√n}` and checks of their LAN structure.

mod checks;

use rand::Rng;
use rand_distr::{Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stats::StreamRng;

pub use checks::{
    central_clt_check, change_of_measure_check, lan_remainder, third_lemma_limit_check, unit_mean_check,
    ChangeOfMeasure, PairSecond, RemainderReport, Statistic, ThirdLemmaReport, UnitMean, DEFAULT_CLIP,
};

/// A local parametric model with LAN scale `sigma` at `theta0`.
pub trait LocalModel: Sync {
    fn sigma(&self) -> f64;
    fn theta0(&self) -> f64;
    /// `n` observations from `P_{n,θ}`.
    fn sample(&self, n: usize, theta: f64, rng: &mut StreamRng) -> Vec<f64>;
    /// `log dP_{n,θ}/dP_{n,0}` at `data`.
    fn loglik_ratio(&self, n: usize, theta: f64, data: &[f64]) -> f64;
    /// Central sequence `X_n`.
    fn central_seq(&self, n: usize, data: &[f64]) -> f64;
    /// Parameter estimate built from a sample mean.
    fn from_mean(&self, mean: f64) -> f64;
    /// Parameter estimate built from a sample median.
    fn from_median(&self, median: f64) -> f64;
}

/// `N(ϑ0 + θ/√n, 1)` observations; LAN holds with zero remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianLocationModel {
    pub theta0: f64,
}

impl LocalModel for GaussianLocationModel {
    fn sigma(&self) -> f64 {
        1.0
    }

    fn theta0(&self) -> f64 {
        self.theta0
    }

    fn sample(&self, n: usize, theta: f64, rng: &mut StreamRng) -> Vec<f64> {
        let loc = self.theta0 + theta / (n as f64).sqrt();
        (0..n).map(|_| loc + rng.sample::<f64, _>(StandardNormal)).collect()
    }

    fn loglik_ratio(&self, n: usize, theta: f64, data: &[f64]) -> f64 {
        let d = theta / (n as f64).sqrt();
        data.iter().map(|x| d * (x - self.theta0) - 0.5 * d * d).sum()
    }

    fn central_seq(&self, n: usize, data: &[f64]) -> f64 {
        data.iter().map(|x| x - self.theta0).sum::<f64>() / (n as f64).sqrt()
    }

    fn from_mean(&self, mean: f64) -> f64 {
        mean
    }

    fn from_median(&self, median: f64) -> f64 {
        median
    }
}

/// Gamma observations with shape `alpha` and scale `exp(ϑ0 + θ/√n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaScaleModel {
    pub alpha: f64,
    pub theta0: f64,
}

impl GammaScaleModel {
    pub fn new(alpha: f64, theta0: f64) -> Result<Self> {
        if !(alpha > 0.0) || !theta0.is_finite() {
            return Err(invalid("gamma scale model needs alpha > 0 and finite theta0"));
        }
        Ok(Self { alpha, theta0 })
    }
}

impl LocalModel for GammaScaleModel {
    fn sigma(&self) -> f64 {
        self.alpha.sqrt()
    }

    fn theta0(&self) -> f64 {
        self.theta0
    }

    fn sample(&self, n: usize, theta: f64, rng: &mut StreamRng) -> Vec<f64> {
        let scale = (self.theta0 + theta / (n as f64).sqrt()).exp();
        let law = Gamma::new(self.alpha, scale).expect("validated shape and finite scale");
        (0..n).map(|_| rng.sample(law)).collect()
    }

    fn loglik_ratio(&self, n: usize, theta: f64, data: &[f64]) -> f64 {
        let d = theta / (n as f64).sqrt();
        let s: f64 = data.iter().sum::<f64>() * (-self.theta0).exp();
        -(n as f64) * self.alpha * d - (-d).exp_m1() * s
    }

    fn central_seq(&self, n: usize, data: &[f64]) -> f64 {
        let e = (-self.theta0).exp();
        data.iter().map(|x| x * e - self.alpha).sum::<f64>() / (n as f64).sqrt()
    }

    fn from_mean(&self, mean: f64) -> f64 {
        (mean / self.alpha).ln()
    }

    fn from_median(&self, median: f64) -> f64 {
        let unit = statrs::distribution::Gamma::new(self.alpha, 1.0).expect("validated shape");
        (median / statrs::distribution::ContinuousCDF::inverse_cdf(&unit, 0.5)).ln()
    }
}

/// Built-in model selected by configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    GaussianLocation {
        #[serde(default)]
        theta0: f64,
    },
    GammaScale {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        theta0: f64,
    },
}

fn default_alpha() -> f64 {
    2.0
}

impl ModelSpec {
    pub fn build(&self) -> Result<Box<dyn LocalModel>> {
        Ok(match *self {
            ModelSpec::GaussianLocation { theta0 } => {
                if !theta0.is_finite() {
                    return Err(invalid("theta0 must be finite"));
                }
                Box::new(GaussianLocationModel { theta0 })
            }
            ModelSpec::GammaScale { alpha, theta0 } => Box::new(GammaScaleModel::new(alpha, theta0)?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::GaussianLocation { .. } => "gaussian_location",
            ModelSpec::GammaScale { .. } => "gamma_scale",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngSpec;

    #[test]
    fn zero_local_parameter_gives_zero_llr() {
        let mut rng = RngSpec::new(1, 1).unwrap().stream(0);
        let g = GammaScaleModel::new(2.0, 0.3).unwrap();
        let x = g.sample(50, 0.0, &mut rng);
        assert_eq!(g.loglik_ratio(50, 0.0, &x), 0.0);
        let m = GaussianLocationModel { theta0: 1.0 };
        let y = m.sample(50, 0.0, &mut rng);
        assert_eq!(m.loglik_ratio(50, 0.0, &y), 0.0);
    }

    #[test]
    fn gamma_llr_matches_density_ratio() {
        let g = GammaScaleModel::new(2.5, 0.2).unwrap();
        let x = [0.3, 1.7, 4.2];
        let n = 3;
        let theta = 0.8;
        let logpdf = |x: f64, s: f64| (g.alpha - 1.0) * x.ln() - x / s - g.alpha * s.ln();
        let s1 = (g.theta0 + theta / (n as f64).sqrt()).exp();
        let s0 = g.theta0.exp();
        let direct: f64 = x.iter().map(|&v| logpdf(v, s1) - logpdf(v, s0)).sum();
        assert!((g.loglik_ratio(n, theta, &x) - direct).abs() < 1e-12);
    }
}
