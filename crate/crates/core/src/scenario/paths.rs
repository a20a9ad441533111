use serde::{Deserialize, Serialize};

use super::estimators::decomposition_checks;
use super::{mc_scaled, z_score, Artifact, Run, Scenario, Tolerances, Validate};
use crate::conv::{regularity_threshold, DecomposeOptions};
use crate::error::{Error, Result};
use crate::gshift::{
    equivariance_check, girsanov_change_of_measure, girsanov_unit_mean, marginal_convolution_check, simulate_paths,
    sufficiency_identity_check, time_index, PathEstimator, SignalParam,
};
use crate::report::Check;
use crate::stats::RngSpec;

/// Level `c` of the event `{X_1(1) <= c}` in the change-of-measure check.
const EVENT_LEVEL: f64 = 0.5;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GshiftScenario {
    /// Number of observed paths for the estimator checks.
    #[serde(default = "GshiftScenario::default_n")]
    n: usize,
    /// Time steps per path for the estimator checks.
    #[serde(rename = "M", default = "GshiftScenario::default_m")]
    m: usize,
    /// Replications for the per-time factor decomposition.
    #[serde(default = "GshiftScenario::default_reps")]
    reps: usize,
    #[serde(default = "GshiftScenario::default_times")]
    times: Vec<f64>,
    /// `mean`, `noisy_mean`, `biased_mean` or `clipped`.
    #[serde(default = "GshiftScenario::default_estimator")]
    estimator: String,
    #[serde(default = "GshiftScenario::default_noise_c")]
    noise_c: f64,
    #[serde(default = "GshiftScenario::default_bias")]
    bias: f64,
    /// Replications for the sufficiency and equivariance comparisons.
    #[serde(default = "GshiftScenario::default_check_reps")]
    check_reps: usize,
    #[serde(default = "GshiftScenario::default_girsanov_n")]
    girsanov_n: usize,
    #[serde(rename = "girsanov_M", default = "GshiftScenario::default_girsanov_m")]
    girsanov_m: usize,
    #[serde(default = "GshiftScenario::default_check_reps")]
    girsanov_reps: usize,
    /// Number of sample paths written to `paths.csv`.
    #[serde(default = "GshiftScenario::default_export")]
    export_paths: usize,
}

impl GshiftScenario {
    fn default_n() -> usize {
        4
    }
    fn default_m() -> usize {
        64
    }
    fn default_reps() -> usize {
        100_000
    }
    fn default_times() -> Vec<f64> {
        vec![0.25, 0.5, 1.0]
    }
    fn default_estimator() -> String {
        "noisy_mean".into()
    }
    fn default_noise_c() -> f64 {
        0.5
    }
    fn default_bias() -> f64 {
        0.4
    }
    fn default_check_reps() -> usize {
        10_000
    }
    fn default_girsanov_n() -> usize {
        5
    }
    fn default_girsanov_m() -> usize {
        512
    }
    fn default_export() -> usize {
        20
    }

    fn estimator(&self) -> Result<PathEstimator> {
        Ok(match self.estimator.as_str() {
            "mean" => PathEstimator::Mean,
            "noisy_mean" => PathEstimator::NoisyMean { noise_c: self.noise_c },
            "biased_mean" => PathEstimator::BiasedMean { bias: self.bias },
            "clipped" => PathEstimator::Clipped,
            other => return Err(Error::Config(format!("unknown path estimator `{other}`"))),
        })
    }
}

impl Validate for GshiftScenario {
    fn validate(&self) -> Result<()> {
        self.estimator()?;
        if self.n == 0 || self.girsanov_n == 0 || self.m == 0 || self.girsanov_m == 0 {
            return Err(Error::Config("n, M, girsanov_n and girsanov_M must be positive".into()));
        }
        if self.reps < 2 || self.check_reps < 2 || self.girsanov_reps < 2 {
            return Err(Error::Config("replication counts must be at least 2".into()));
        }
        if self.times.is_empty() {
            return Err(Error::Config("times must not be empty".into()));
        }
        for &t in &self.times {
            if !(t > 0.0) {
                return Err(Error::Config("times must be positive".into()));
            }
            time_index(t, self.m)?;
        }
        if !self.noise_c.is_finite() || !self.bias.is_finite() {
            return Err(Error::Config("noise_c and bias must be finite".into()));
        }
        Ok(())
    }
}

impl Scenario for GshiftScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        let scaled = mc_scaled(0.03, 100_000, self.reps);
        vec![
            ("girsanov_z", 3.0),
            ("sufficiency_ks", mc_scaled(0.02, 10_000, self.check_reps)),
            ("equivariance_ks", regularity_threshold(self.check_reps)),
            ("nu_cf_sup_error", scaled),
            ("round_trip_tv", scaled),
        ]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let mut run = Run { checks: Vec::new(), artifacts: Vec::new() };
        let gm = self.girsanov_m;
        let signals = [
            ("u", SignalParam::from_fn(gm, |u| u)?),
            ("1", SignalParam::from_fn(gm, |_| 1.0)?),
            ("2u", SignalParam::from_fn(gm, |u| 2.0 * u)?),
        ];
        for (k, (label, theta)) in signals.iter().enumerate() {
            let g = girsanov_unit_mean(theta, self.girsanov_n, self.girsanov_reps, &rng.derive(10 + k as u64))?;
            run.checks.push(Check::le(format!("girsanov_unit_mean_z_{label}"), z_score(g.mean, 1.0, g.se), tol.get("girsanov_z")).with_se(g.se));
        }
        let c = girsanov_change_of_measure(&signals[1].1, self.girsanov_n, EVENT_LEVEL, self.girsanov_reps, &rng.derive(13))?;
        let z = z_score(c.direct_mean, c.reweighted_mean, c.combined_se);
        run.checks.push(Check::le("girsanov_change_of_measure_z", z, tol.get("girsanov_z")).with_se(c.combined_se));

        let m = self.m;
        let etas = [
            ("zero", SignalParam::zero(m)?),
            ("one", SignalParam::from_fn(m, |_| 1.0)?),
            ("bump", SignalParam::from_fn(m, |u| 6.0 * u * (1.0 - u) * 2f64.sqrt())?),
        ];
        for (k, (label, eta)) in etas.iter().enumerate() {
            let rows = sufficiency_identity_check(eta, self.n, self.check_reps, &self.times, &rng.derive(20 + k as u64))?;
            for r in rows {
                run.checks.push(Check::le(format!("sufficiency_ks_{label}_t{}", r.t), r.ks, tol.get("sufficiency_ks")));
            }
        }

        let est = self.estimator()?;
        let theta0 = SignalParam::zero(m)?;
        let shifts = [SignalParam::from_fn(m, |_| 1.0)?, SignalParam::from_fn(m, |u| 3.0 * u)?];
        let eq = equivariance_check(&est, &theta0, &shifts, self.n, self.check_reps, &self.times, &rng.derive(30))?;
        run.checks.push(Check::le("equivariance_ks", eq.max_ks, tol.get("equivariance_ks")));

        let opts = DecomposeOptions::default();
        let marg = marginal_convolution_check(&est, &theta0, self.n, self.reps, &self.times, opts, &rng.derive(40))?;
        for mc in marg {
            let band = opts.band / mc.t.sqrt();
            let prefix = format!("t{}", mc.t);
            decomposition_checks(&prefix, mc.report, est.expected_nu(mc.t), band, tol.get("nu_cf_sup_error"), tol.get("round_trip_tv"), &mut run);
        }

        if self.export_paths > 0 {
            let mut r = rng.derive(50).stream(0);
            run.artifacts.push(Artifact::paths("paths", simulate_paths(self.export_paths, &theta0, &mut r)?));
        }
        Ok(run)
    }
}
