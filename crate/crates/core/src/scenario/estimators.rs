use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lan::model_spec;
use super::{mc_scaled, Artifact, Run, Scenario, Tolerances, Validate};
use crate::conv::{
    apply_convolution_kernel, asymptotic_gaussian_convolution, convolution_decompose, joint_independence_pipeline,
    rao_covariance_check, regularity_check, ConvolutionKernel, ConvolutionReport, DecomposeOptions, Estimator, Family,
    Functional, GaussLimitOptions, LimitCompetitor, LinearStat,
};
use crate::dist::{check_spread, convolve_grids, distance_tv, DeconvolveOptions, Law, ProductGridMeasure, SpreadVerdict};
use crate::error::{Error, Result};
use crate::report::Check;
use crate::stats::RngSpec;

/// Standard checks and artifacts of one `Q = ν ∗ P` decomposition. `expected` is the law of `ν`
/// when it is known in closed form.
pub(super) fn decomposition_checks(
    prefix: &str,
    rep: ConvolutionReport,
    expected: Option<Law>,
    band: f64,
    cf_tol: f64,
    tv_tol: f64,
    run: &mut Run,
) {
    let name = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{prefix}_{s}") };
    run.checks.push(Check::holds(name("verdict_probability"), rep.verdict == SpreadVerdict::Probability));
    if let Some(law) = expected {
        run.checks.push(Check::le(name("nu_cf_sup_error"), rep.nu_sup_error(band, |t| law.charfn(t)), cf_tol));
    }
    run.checks.push(Check::le(name("round_trip_tv"), rep.round_trip_tv, tv_tol));
    run.artifacts.push(Artifact::measure(name("q"), rep.q));
    run.artifacts.push(Artifact::measure(name("p"), rep.p));
    run.artifacts.push(Artifact::measure(name("nu"), rep.nu));
    run.artifacts.push(Artifact::charfn(name("nu_hat"), rep.nu_hat));
}

fn gaussian() -> String {
    "gaussian_location".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvScenario {
    #[serde(default = "gaussian")]
    model: String,
    #[serde(default)]
    theta0: f64,
    #[serde(default = "ConvScenario::two")]
    alpha: f64,
    /// `mean`, `noisy_mean`, `median`, `first_obs` or `weighted_mean`.
    #[serde(default = "ConvScenario::default_estimator")]
    estimator: String,
    #[serde(default = "ConvScenario::default_noise_c")]
    noise_c: f64,
    #[serde(default = "ConvScenario::default_weights")]
    weights: Vec<f64>,
    #[serde(default = "ConvScenario::default_n")]
    n: usize,
    /// Local parameters for the regularity check; must contain 0. The last nonzero entry is
    /// also the alternative for the residual-invariance check.
    #[serde(default = "ConvScenario::default_thetas")]
    theta_list: Vec<f64>,
    #[serde(default = "ConvScenario::default_reps")]
    reps: usize,
    #[serde(default = "ConvScenario::default_band")]
    band: f64,
    #[serde(default = "ConvScenario::default_floor")]
    floor: f64,
    #[serde(default = "ConvScenario::default_step")]
    step: f64,
}

impl ConvScenario {
    fn two() -> f64 {
        2.0
    }
    fn default_estimator() -> String {
        "noisy_mean".into()
    }
    fn default_noise_c() -> f64 {
        0.5
    }
    fn default_weights() -> Vec<f64> {
        vec![1.0, 2.0]
    }
    fn default_n() -> usize {
        200
    }
    fn default_thetas() -> Vec<f64> {
        vec![0.0, 1.0]
    }
    fn default_reps() -> usize {
        100_000
    }
    fn default_band() -> f64 {
        3.0
    }
    fn default_floor() -> f64 {
        1e-3
    }
    fn default_step() -> f64 {
        0.05
    }

    fn estimator(&self) -> Result<Estimator> {
        let e = match self.estimator.as_str() {
            "mean" => Estimator::Mean,
            "noisy_mean" => Estimator::NoisyMean { noise_c: self.noise_c },
            "median" => Estimator::Median,
            "first_obs" => Estimator::FirstObs,
            "weighted_mean" => Estimator::WeightedMean { weights: self.weights.clone() },
            other => return Err(Error::Config(format!("unknown estimator `{other}`"))),
        };
        e.validate()?;
        Ok(e)
    }

    fn options(&self) -> DecomposeOptions {
        DecomposeOptions { step: self.step, band: self.band, dt: 0.05f64.min(self.band / 20.0), ..Default::default() }
    }

    fn expected_nu(&self) -> Option<Law> {
        match self.estimator.as_str() {
            "mean" => Some(Law::Dirac { at: 0.0 }),
            "noisy_mean" if self.noise_c == 0.0 => Some(Law::Dirac { at: 0.0 }),
            "noisy_mean" => Some(Law::Normal { mean: 0.0, var: self.noise_c * self.noise_c }),
            _ => None,
        }
    }
}

impl Validate for ConvScenario {
    fn validate(&self) -> Result<()> {
        model_spec(&self.model, self.theta0, self.alpha)?;
        self.estimator()?;
        if self.n == 0 || self.reps < 2 {
            return Err(Error::Config("conv needs n >= 1 and reps >= 2".into()));
        }
        if !self.theta_list.contains(&0.0) || self.theta_list.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("theta_list must be finite and contain 0".into()));
        }
        if !(self.band > 0.0 && self.floor > 0.0 && self.step > 0.0) {
            return Err(Error::Config("band, floor and step must be positive".into()));
        }
        Ok(())
    }
}

impl Scenario for ConvScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        let scaled = mc_scaled(0.02, 100_000, self.reps);
        vec![
            ("regularity_ks", crate::conv::regularity_threshold(self.reps)),
            ("nu_cf_sup_error", 0.02),
            ("nu_variance", 0.05),
            ("round_trip_tv", scaled),
            ("residual_ks", scaled),
            ("independence", scaled),
        ]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let model = model_spec(&self.model, self.theta0, self.alpha)?.build()?;
        let model = model.as_ref();
        let est = self.estimator()?;
        let mut run = Run { checks: Vec::new(), artifacts: Vec::new() };

        let reg = regularity_check(model, &est, &self.theta_list, self.n, self.reps, &rng.derive(1))?;
        run.checks.push(Check::le("regularity_ks", reg.max_pairwise_ks, tol.get("regularity_ks")));

        let rep = convolution_decompose(model, &est, self.n, self.reps, self.options(), &rng.derive(2))?;
        if self.estimator == "median" && self.model == "gaussian_location" {
            let c = Check::le("nu_variance", (rep.nu_var - (PI / 2.0 - 1.0)).abs(), tol.get("nu_variance"));
            run.checks.push(c.with_se(rep.nu_var_se));
        }
        let expected = self.expected_nu();
        decomposition_checks("", rep, expected, self.band, tol.get("nu_cf_sup_error"), tol.get("round_trip_tv"), &mut run);

        if let Some(&alt) = self.theta_list.iter().rev().find(|t| **t != 0.0) {
            let j = joint_independence_pipeline(model, &est, self.n, self.reps, alt, &rng.derive(3))?;
            run.checks.push(Check::le("residual_ks", j.residual_ks, tol.get("residual_ks")));
            run.checks.push(Check::le("independence_null", j.independence_null, tol.get("independence")));
            run.checks.push(Check::le("independence_alt", j.independence_alt, tol.get("independence")));
        }
        Ok(run)
    }
}

/// One `(S, T)` pair of linear statistics for the exact covariance check.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaoCaseSpec {
    family: Family,
    n: usize,
    s: LinearStat,
    t: LinearStat,
    functionals: Vec<i64>,
    /// Whether `S` is declared optimal, so `Cov(S, T − S)` must vanish exactly.
    optimal: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaoScenario {
    #[serde(default = "RaoScenario::default_cases")]
    cases: Vec<RaoCaseSpec>,
    #[serde(default = "RaoScenario::default_reps")]
    reps: usize,
}

impl RaoScenario {
    fn default_cases() -> Vec<RaoCaseSpec> {
        let gauss = Family::Gaussian { mean: 0.0, var_num: 1, var_den: 1 };
        vec![
            RaoCaseSpec {
                family: gauss,
                n: 12,
                s: LinearStat::Mean,
                t: LinearStat::Weighted { pattern: vec![1, 2, 3, 4] },
                functionals: vec![1, 2],
                optimal: true,
            },
            RaoCaseSpec {
                family: Family::Bernoulli { p_num: 3, p_den: 10 },
                n: 10,
                s: LinearStat::Mean,
                t: LinearStat::FirstObs,
                functionals: vec![1],
                optimal: true,
            },
            RaoCaseSpec {
                family: gauss,
                n: 10,
                s: LinearStat::FirstObs,
                t: LinearStat::Mean,
                functionals: vec![1],
                optimal: false,
            },
        ]
    }
    fn default_reps() -> usize {
        20_000
    }
}

impl Validate for RaoScenario {
    fn validate(&self) -> Result<()> {
        if self.cases.is_empty() || self.reps < 2 {
            return Err(Error::Config("rao needs at least one case and reps >= 2".into()));
        }
        for c in &self.cases {
            if c.n == 0 || c.functionals.is_empty() {
                return Err(Error::Config("each case needs n >= 1 and at least one functional".into()));
            }
            c.s.coefficients(c.n)?;
            c.t.coefficients(c.n)?;
        }
        Ok(())
    }
}

impl Scenario for RaoScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        vec![("mc_cov_z", 3.0)]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let mut checks = Vec::new();
        let mut rows = Vec::new();
        for (i, spec) in self.cases.iter().enumerate() {
            let rep = rao_covariance_check(spec.family, spec.n, &spec.s, &spec.t, &spec.functionals, self.reps, &rng.derive(i as u64))?;
            for c in rep.cases {
                let tag = format!("case{i}_f{}", c.functional);
                let verdict = if spec.optimal { "exact_zero" } else { "flagged_nonzero" };
                checks.push(Check::holds(format!("{tag}_{verdict}"), c.exact_zero == spec.optimal));
                let z = super::z_score(c.mc_cov, c.exact_cov_value, c.mc_cov_se);
                checks.push(Check::le(format!("{tag}_mc_cov_z"), z, tol.get("mc_cov_z")).with_se(c.mc_cov_se));
                checks.push(Check::holds(format!("{tag}_unbiased"), c.unbiased));
                if spec.optimal {
                    checks.push(Check::holds(format!("{tag}_variance_ordering"), c.variance_ordering));
                }
                rows.push(vec![i as f64, c.functional as f64, c.exact_cov_value, c.mc_cov, c.mc_cov_se]);
            }
        }
        let table = Artifact::table("covariances", &["case", "functional", "exact", "mc", "mc_se"], rows);
        Ok(Run { checks, artifacts: vec![table] })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussLimitScenario {
    #[serde(default = "GaussLimitScenario::default_base")]
    base: Law,
    #[serde(default = "GaussLimitScenario::default_functional")]
    functional: Functional,
    #[serde(default = "GaussLimitScenario::default_competitor")]
    competitor: LimitCompetitor,
    #[serde(default = "GaussLimitScenario::default_n_list")]
    n_list: Vec<usize>,
    #[serde(default = "GaussLimitScenario::default_reps")]
    reps: usize,
}

impl GaussLimitScenario {
    fn default_base() -> Law {
        Law::Normal { mean: 0.0, var: 1.0 }
    }
    fn default_functional() -> Functional {
        Functional::Mean
    }
    fn default_competitor() -> LimitCompetitor {
        LimitCompetitor::AuxNoise { c: 0.5 }
    }
    fn default_n_list() -> Vec<usize> {
        vec![50, 200]
    }
    fn default_reps() -> usize {
        10_000
    }

    fn options(&self) -> GaussLimitOptions {
        GaussLimitOptions {
            base: self.base,
            functional: self.functional.clone(),
            competitor: self.competitor,
            n_list: self.n_list.clone(),
            reps: self.reps,
        }
    }
}

impl Validate for GaussLimitScenario {
    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.n_list.is_empty() || self.n_list.contains(&0) || self.reps < 2 {
            return Err(Error::Config("gauss_limit needs positive sample sizes and reps >= 2".into()));
        }
        Ok(())
    }
}

impl Scenario for GaussLimitScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        vec![("nu_cf_sup_error", 6.0 / (self.reps as f64).sqrt())]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let r = asymptotic_gaussian_convolution(&self.options(), rng)?;
        let mut checks = vec![Check::holds("premise_gaussian_limit", !r.premise_violated)];
        let last = r.steps.last().expect("n_list is non-empty");
        for (label, ks) in &last.gaussian_ks {
            checks.push(Check::le(format!("gaussian_ks_{label}"), *ks, last.ks_threshold));
        }
        checks.push(Check::holds("variance_converged", r.variance_converged));
        checks.push(Check::holds("covariance_zero", r.covariance_zero));
        checks.push(Check::le("nu_cf_sup_error", r.nu_sup_error, tol.get("nu_cf_sup_error")));
        let d = r.decomposition;
        let artifacts = vec![
            Artifact::measure("q", d.q),
            Artifact::measure("p", d.p),
            Artifact::measure("nu", d.nu),
            Artifact::charfn("nu_hat", d.nu_hat),
        ];
        Ok(Run { checks, artifacts })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelScenario {
    #[serde(default = "KernelScenario::default_step")]
    step: f64,
    /// Variance of the Gaussian noise factor.
    #[serde(default = "KernelScenario::one")]
    noise_var: f64,
    /// Diagonal entry `a` of the linear map.
    #[serde(default = "KernelScenario::one")]
    scale: f64,
    #[serde(default = "KernelScenario::default_h")]
    h: f64,
    #[serde(default = "KernelScenario::default_h_alt")]
    h_alt: f64,
}

impl KernelScenario {
    fn default_step() -> f64 {
        0.01
    }
    fn one() -> f64 {
        1.0
    }
    fn default_h() -> f64 {
        0.5
    }
    fn default_h_alt() -> f64 {
        1.5
    }
}

impl Validate for KernelScenario {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.noise_var > 0.0 && self.scale > 0.0) || !self.h.is_finite() || !self.h_alt.is_finite() {
            return Err(Error::Config("kernel needs positive step, noise_var, scale and finite shifts".into()));
        }
        Ok(())
    }
}

impl Scenario for KernelScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        vec![("kernel_tv", 1e-4), ("equivariance_tv", 1e-6)]
    }

    fn run(&self, _rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let p = Law::Normal { mean: 0.0, var: 1.0 }.discretize(self.step)?;
        let noise = Law::Normal { mean: 0.0, var: self.noise_var }.discretize(self.step)?;
        let k = ConvolutionKernel { noise: ProductGridMeasure::from_factors(vec![noise])?, map: vec![vec![self.scale]] };
        let pp = ProductGridMeasure::from_factors(vec![p])?;
        let out = apply_convolution_kernel(&k, &pp, &[self.h])?.marginal(0)?;
        let a = self.scale;
        let exact = Law::Normal { mean: a * self.h, var: a * a + self.noise_var }.discretize(self.step)?;
        let alt = apply_convolution_kernel(&k, &pp, &[self.h_alt])?.marginal(0)?;
        let moved = out.shift(a * (self.h_alt - self.h))?;
        let checks = vec![
            Check::le("kernel_tv", distance_tv(&out.clone().into(), &exact.into())?, tol.get("kernel_tv")),
            Check::le("equivariance_tv", distance_tv(&alt.into(), &moved.into())?, tol.get("equivariance_tv")),
        ];
        Ok(Run { checks, artifacts: vec![Artifact::measure("kernel_image", out)] })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Expect {
    Probability,
    NotProbability,
    InsufficientBand,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadScenario {
    #[serde(default = "SpreadScenario::default_q")]
    q: Law,
    #[serde(default = "SpreadScenario::default_p")]
    p: Law,
    #[serde(default = "SpreadScenario::default_step")]
    step: f64,
    #[serde(default = "SpreadScenario::default_band")]
    band: f64,
    #[serde(default = "SpreadScenario::default_floor")]
    floor: f64,
    /// Verdict the deconvolution must reach.
    #[serde(default = "SpreadScenario::default_expect")]
    expect: Expect,
}

impl SpreadScenario {
    fn default_q() -> Law {
        Law::Normal { mean: 0.0, var: 2.0 }
    }
    fn default_p() -> Law {
        Law::Normal { mean: 0.0, var: 1.0 }
    }
    fn default_step() -> f64 {
        0.01
    }
    fn default_band() -> f64 {
        4.0
    }
    fn default_floor() -> f64 {
        1e-3
    }
    fn default_expect() -> Expect {
        Expect::Probability
    }
}

impl Validate for SpreadScenario {
    fn validate(&self) -> Result<()> {
        self.q.validate()?;
        self.p.validate()?;
        DeconvolveOptions::new(self.band, self.floor)?;
        if !(self.step > 0.0) {
            return Err(Error::Config("step must be positive".into()));
        }
        Ok(())
    }
}

impl Scenario for SpreadScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        vec![("round_trip_tv", 2e-3)]
    }

    fn run(&self, _rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let q = self.q.discretize(self.step)?;
        let p = self.p.discretize(self.step)?;
        let s = check_spread(&q, &p, DeconvolveOptions::new(self.band, self.floor)?)?;
        let got = match s.verdict {
            SpreadVerdict::Probability => Expect::Probability,
            SpreadVerdict::NotProbability => Expect::NotProbability,
            SpreadVerdict::InsufficientBand => Expect::InsufficientBand,
        };
        let mut run = Run { checks: vec![Check::holds("verdict_as_expected", got == self.expect)], artifacts: Vec::new() };
        if let Some(nu) = s.nu {
            let back = convolve_grids(&nu, &p)?;
            run.checks.push(Check::le("round_trip_tv", distance_tv(&back.into(), &q.into())?, tol.get("round_trip_tv")));
            run.artifacts.push(Artifact::measure("nu", nu));
        }
        Ok(run)
    }
}
