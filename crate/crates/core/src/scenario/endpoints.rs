use serde::{Deserialize, Serialize};

use super::estimators::decomposition_checks;
use super::{mc_scaled, Artifact, Run, Scenario, Tolerances, Validate};
use crate::conv::{regularity_threshold, DecomposeOptions};
use crate::dist::Law;
use crate::error::{Error, Result};
use crate::extremes::{
    asymptotic_independence_check, cf_nonvanishing_check, endpoint_convolution_check, endpoint_regularity_check,
    exact_lower_extreme_tv, levy_convolution_check, levy_equivariance_check, levy_increment_inverse,
    levy_increment_transform, levy_simulate, CfSource, EndpointEstimator, EndpointShift, LevyEstimator, LevyShiftModel,
};
use crate::report::Check;
use crate::stats::RngSpec;

/// Spacing of the transform scan for non-vanishing checks.
const SCAN_DT: f64 = 0.01;

fn uniform_half() -> Law {
    Law::Uniform { lo: 0.0, hi: 0.5 }
}

fn default_band() -> f64 {
    8.0
}

fn default_floor() -> f64 {
    1e-3
}

fn default_reps() -> usize {
    100_000
}

fn default_check_reps() -> usize {
    20_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointsScenario {
    #[serde(default = "EndpointsScenario::default_n")]
    n: usize,
    #[serde(default = "default_reps")]
    reps: usize,
    /// `extremes` or `noisy_extremes`.
    #[serde(default = "EndpointsScenario::default_estimator")]
    estimator: String,
    #[serde(default = "uniform_half")]
    lower_noise: Law,
    #[serde(default = "uniform_half")]
    upper_noise: Law,
    #[serde(default = "default_band")]
    band: f64,
    #[serde(default = "default_floor")]
    floor: f64,
    /// Sample sizes for the exact TV sequence.
    #[serde(default = "EndpointsScenario::default_tv_n")]
    tv_n: Vec<usize>,
    /// Sample size of the independence check.
    #[serde(default = "EndpointsScenario::default_independence_n")]
    independence_n: usize,
    /// Endpoint shift compared with zero in the regularity check, as `[lower, upper]`.
    #[serde(default = "EndpointsScenario::default_theta")]
    theta: [f64; 2],
    #[serde(default = "default_check_reps")]
    check_reps: usize,
}

impl EndpointsScenario {
    fn default_n() -> usize {
        500
    }
    fn default_estimator() -> String {
        "noisy_extremes".into()
    }
    fn default_tv_n() -> Vec<usize> {
        vec![10, 50, 100, 500, 1000]
    }
    fn default_independence_n() -> usize {
        1000
    }
    fn default_theta() -> [f64; 2] {
        [1.0, -1.0]
    }

    fn estimator(&self) -> Result<EndpointEstimator> {
        match self.estimator.as_str() {
            "extremes" => Ok(EndpointEstimator::Extremes),
            "noisy_extremes" => {
                Ok(EndpointEstimator::NoisyExtremes { lower_noise: self.lower_noise, upper_noise: self.upper_noise })
            }
            other => Err(Error::Config(format!("unknown endpoint estimator `{other}`"))),
        }
    }

    fn expected(&self) -> [Law; 2] {
        match self.estimator.as_str() {
            "noisy_extremes" => [self.lower_noise, self.upper_noise],
            _ => [Law::Dirac { at: 0.0 }; 2],
        }
    }
}

impl Validate for EndpointsScenario {
    fn validate(&self) -> Result<()> {
        self.estimator()?;
        self.lower_noise.validate()?;
        self.upper_noise.validate()?;
        if self.n == 0 || self.independence_n == 0 || self.reps < 2 || self.check_reps < 2 {
            return Err(Error::Config("sample sizes must be positive and replication counts at least 2".into()));
        }
        if self.tv_n.is_empty() || self.tv_n.contains(&0) || self.tv_n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("tv_n must be strictly increasing positive sizes".into()));
        }
        if !(self.band > 0.0 && self.floor > 0.0) {
            return Err(Error::Config("band and floor must be positive".into()));
        }
        let theta = EndpointShift { lower: self.theta[0], upper: self.theta[1] };
        if !theta.lower.is_finite() || !theta.upper.is_finite() || theta.upper - theta.lower <= -(self.n as f64) {
            return Err(Error::Config("theta must be finite and keep the endpoints ordered".into()));
        }
        Ok(())
    }
}

impl Scenario for EndpointsScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        let scaled = mc_scaled(0.03, 100_000, self.reps);
        vec![
            ("exact_tv_largest_n", 0.01),
            ("independence", mc_scaled(0.02, 100_000, self.reps)),
            ("reference_cf_min_modulus", 1e-12),
            ("nu_cf_sup_error", scaled),
            ("round_trip_tv", scaled),
            ("regularity_ks", regularity_threshold(self.check_reps)),
        ]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let mut run = Run { checks: Vec::new(), artifacts: Vec::new() };
        let tv = self.tv_n.iter().map(|&n| exact_lower_extreme_tv(n)).collect::<Result<Vec<f64>>>()?;
        run.checks.push(Check::holds("exact_tv_strictly_decreasing", tv.windows(2).all(|w| w[1] < w[0])));
        let last = *tv.last().expect("tv_n is non-empty");
        run.checks.push(Check::le("exact_tv_largest_n", last, tol.get("exact_tv_largest_n")));
        let rows = self.tv_n.iter().zip(&tv).map(|(n, v)| vec![*n as f64, *v]).collect();
        run.artifacts.push(Artifact::table("exact_tv", &["n", "tv"], rows));

        let ind = asymptotic_independence_check(&[self.independence_n], self.reps, &rng.derive(1))?;
        run.checks.push(Check::le("extremes_independence", ind[0].1, tol.get("independence")));

        let exp = cf_nonvanishing_check(&CfSource::Law { law: Law::Exponential { rate: 1.0 } }, self.band, SCAN_DT, 0.0)?;
        run.checks.push(Check::ge("reference_cf_min_modulus", exp.min_modulus, tol.get("reference_cf_min_modulus")));

        let est = self.estimator()?;
        let opts = DecomposeOptions::with_band(self.band, self.floor);
        let [lower, upper] = endpoint_convolution_check(&est, self.n, self.reps, opts, &rng.derive(2))?;
        let [el, eu] = self.expected();
        decomposition_checks("lower", lower, Some(el), self.band, tol.get("nu_cf_sup_error"), tol.get("round_trip_tv"), &mut run);
        decomposition_checks("upper", upper, Some(eu), self.band, tol.get("nu_cf_sup_error"), tol.get("round_trip_tv"), &mut run);

        let thetas = [EndpointShift::ZERO, EndpointShift { lower: self.theta[0], upper: self.theta[1] }];
        let reg = endpoint_regularity_check(&est, self.n, &thetas, self.check_reps, &rng.derive(3))?;
        run.checks.push(Check::le("regularity_ks_lower", reg.max_ks[0], tol.get("regularity_ks")));
        run.checks.push(Check::le("regularity_ks_upper", reg.max_ks[1], tol.get("regularity_ks")));
        Ok(run)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyScenario {
    #[serde(default = "LevyScenario::default_times")]
    times: Vec<f64>,
    #[serde(default = "LevyScenario::default_alpha")]
    alpha: f64,
    /// Shift compared with zero in the equivariance check.
    #[serde(default = "LevyScenario::default_theta")]
    theta: Vec<f64>,
    /// `identity` or `noisy`.
    #[serde(default = "LevyScenario::default_estimator")]
    estimator: String,
    #[serde(default = "LevyScenario::default_noise")]
    noise: Law,
    /// Coordinate receiving the noise and decomposed.
    #[serde(default = "LevyScenario::default_coord")]
    coord: usize,
    #[serde(default = "default_reps")]
    reps: usize,
    #[serde(default = "default_check_reps")]
    check_reps: usize,
    #[serde(default = "default_band")]
    band: f64,
    #[serde(default = "default_floor")]
    floor: f64,
}

impl LevyScenario {
    fn default_times() -> Vec<f64> {
        vec![1.0, 2.0, 3.0]
    }
    fn default_alpha() -> f64 {
        2.0
    }
    fn default_theta() -> Vec<f64> {
        vec![1.0, 0.0, 0.0]
    }
    fn default_estimator() -> String {
        "noisy".into()
    }
    fn default_noise() -> Law {
        Law::Uniform { lo: 0.0, hi: 0.3 }
    }
    fn default_coord() -> usize {
        1
    }

    fn model(&self) -> Result<LevyShiftModel> {
        LevyShiftModel::new(self.times.clone(), self.alpha, vec![0.0; self.times.len()])
    }

    fn estimator(&self) -> Result<LevyEstimator> {
        match self.estimator.as_str() {
            "identity" => Ok(LevyEstimator::Identity),
            "noisy" => Ok(LevyEstimator::Noisy { coord: self.coord, noise: self.noise }),
            other => Err(Error::Config(format!("unknown levy estimator `{other}`"))),
        }
    }
}

impl Validate for LevyScenario {
    fn validate(&self) -> Result<()> {
        let m = self.model()?;
        m.with_shift(self.theta.clone())?;
        self.estimator()?;
        self.noise.validate()?;
        if self.coord >= m.dim() {
            return Err(Error::Config("coord out of range".into()));
        }
        if self.reps < 2 || self.check_reps < 2 || !(self.band > 0.0 && self.floor > 0.0) {
            return Err(Error::Config("replication counts must be at least 2 and band, floor positive".into()));
        }
        Ok(())
    }
}

impl Scenario for LevyScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        let scaled = mc_scaled(0.03, 100_000, self.reps);
        vec![
            ("increment_round_trip", 1e-14),
            ("reference_cf_min_modulus", 1e-12),
            ("nu_cf_sup_error", scaled),
            ("round_trip_tv", scaled),
            ("equivariance_ks", regularity_threshold(self.check_reps)),
        ]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let mut run = Run { checks: Vec::new(), artifacts: Vec::new() };
        let model = self.model()?;
        let shifted = model.with_shift(self.theta.clone())?;

        let x = levy_simulate(&shifted, self.check_reps, &rng.derive(1))?;
        let back = levy_increment_inverse(&levy_increment_transform(&x)?)?;
        let err = back
            .rows()
            .zip(x.rows())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs() / v.abs().max(1.0)))
            .fold(0.0, f64::max);
        run.checks.push(Check::le("increment_round_trip", err, tol.get("increment_round_trip")));

        let shape = model.increment_shapes()[self.coord];
        let reference = CfSource::Law { law: Law::Gamma { shape, scale: 1.0 } };
        let scan = cf_nonvanishing_check(&reference, self.band, SCAN_DT, 0.0)?;
        run.checks.push(Check::ge("reference_cf_min_modulus", scan.min_modulus, tol.get("reference_cf_min_modulus")));

        let est = self.estimator()?;
        let opts = DecomposeOptions::with_band(self.band, self.floor);
        let rep = levy_convolution_check(&model, &est, self.coord, self.reps, opts, &rng.derive(2))?;
        let expected = match est {
            LevyEstimator::Noisy { noise, .. } => noise,
            LevyEstimator::Identity => Law::Dirac { at: 0.0 },
        };
        decomposition_checks("", rep, Some(expected), self.band, tol.get("nu_cf_sup_error"), tol.get("round_trip_tv"), &mut run);

        let shifts = [vec![0.0; model.dim()], self.theta.clone()];
        let eq = levy_equivariance_check(&model, &est, &shifts, self.check_reps, &rng.derive(3))?;
        let worst = eq.max_ks.iter().copied().fold(0.0, f64::max);
        run.checks.push(Check::le("equivariance_ks", worst, tol.get("equivariance_ks")));
        run.artifacts.push(Artifact::samples("observations", x));
        Ok(run)
    }
}
