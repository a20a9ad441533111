use serde::{Deserialize, Serialize};

use super::{mc_scaled, z_score, Run, Scenario, Tolerances, Validate};
use crate::error::{Error, Result};
use crate::lan::{
    central_clt_check, change_of_measure_check, lan_remainder, third_lemma_limit_check, unit_mean_check, LocalModel,
    ModelSpec, PairSecond, Statistic,
};
use crate::report::Check;
use crate::scenario::Artifact;
use crate::stats::RngSpec;

/// Builds a model from the flat keys `model`, `theta0`, `alpha`.
pub(super) fn model_spec(model: &str, theta0: f64, alpha: f64) -> Result<ModelSpec> {
    let spec = match model {
        "gaussian_location" => ModelSpec::GaussianLocation { theta0 },
        "gamma_scale" => ModelSpec::GammaScale { alpha, theta0 },
        other => return Err(Error::Config(format!("unknown model `{other}`"))),
    };
    spec.build()?;
    Ok(spec)
}

fn gaussian() -> String {
    "gaussian_location".into()
}

fn two() -> f64 {
    2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanScenario {
    #[serde(default = "gaussian")]
    model: String,
    #[serde(default)]
    theta0: f64,
    #[serde(default = "two")]
    alpha: f64,
    #[serde(default = "LanScenario::default_n")]
    n: usize,
    #[serde(default = "LanScenario::default_theta")]
    theta: f64,
    #[serde(default = "LanScenario::default_reps")]
    reps: usize,
    /// Bound applied to the change-of-measure statistics.
    #[serde(default = "LanScenario::default_clip")]
    clip: f64,
}

impl LanScenario {
    fn default_n() -> usize {
        100
    }
    fn default_theta() -> f64 {
        1.0
    }
    fn default_reps() -> usize {
        10_000
    }
    fn default_clip() -> f64 {
        crate::lan::DEFAULT_CLIP
    }

    fn statistics(&self, model: &dyn LocalModel) -> [Statistic; 3] {
        // Null mean of one observation, so the indicator is non-degenerate.
        let first_cut = match self.model.as_str() {
            "gamma_scale" => self.alpha * self.theta0.exp(),
            _ => model.theta0(),
        };
        [Statistic::CentralSeqBelow { c: 1.0 }, Statistic::CosCentralSeq, Statistic::FirstObsBelow { c: first_cut }]
    }
}

impl Validate for LanScenario {
    fn validate(&self) -> Result<()> {
        model_spec(&self.model, self.theta0, self.alpha)?;
        if self.n == 0 || self.reps < 2 || !self.theta.is_finite() || !(self.clip > 0.0) {
            return Err(Error::Config("lan needs n >= 1, reps >= 2, finite theta and positive clip".into()));
        }
        Ok(())
    }
}

impl Scenario for LanScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        let clt = 2.0 / (self.reps as f64).sqrt()
            + if self.model == "gaussian_location" { 0.0 } else { 1.0 / (self.n as f64).sqrt() };
        vec![("remainder_max", 1e-12), ("central_clt_ks", clt), ("z", 3.0)]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let model = model_spec(&self.model, self.theta0, self.alpha)?.build()?;
        let model = model.as_ref();
        let mut checks = Vec::new();
        let mut artifacts = Vec::new();

        let rem = lan_remainder(model, self.n, self.theta, self.reps, &rng.derive(1))?;
        if self.model == "gaussian_location" {
            checks.push(Check::le("remainder_max", rem.max_abs, tol.get("remainder_max")));
        } else {
            // The remainder only vanishes in probability: it must shrink when n grows tenfold.
            let big = lan_remainder(model, 10 * self.n, self.theta, self.reps, &rng.derive(2))?;
            checks.push(Check::le("remainder_exceed_fraction_10n", big.exceed_fraction, rem.exceed_fraction));
        }
        checks.push(Check::le("remainder_nonfinite", rem.nonfinite as f64, 0.0));
        artifacts.push(Artifact::samples("remainders", rem.remainders));

        let ks = central_clt_check(model, self.n, 0.0, self.reps, &rng.derive(3))?;
        checks.push(Check::le("central_clt_ks", ks, tol.get("central_clt_ks")));

        let u = unit_mean_check(model, self.n, self.theta, self.reps, &rng.derive(4))?;
        checks.push(Check::le("likelihood_ratio_unit_mean_z", z_score(u.mean, 1.0, u.se), tol.get("z")).with_se(u.se));

        for (k, stat) in self.statistics(model).into_iter().enumerate() {
            let c = change_of_measure_check(model, stat, self.n, self.theta, self.reps, self.clip, &rng.derive(10 + k as u64))?;
            let name = format!("change_of_measure_{}", stat.label());
            checks.push(Check::le(&name, z_score(c.difference, 0.0, c.combined_se), tol.get("z")).with_se(c.combined_se));
            checks.push(Check::holds(format!("{name}_no_weight_collapse"), !c.weight_collapse));
        }
        Ok(Run { checks, artifacts })
    }
}

fn third_n_list() -> Vec<usize> {
    vec![20, 2000]
}

fn gamma() -> String {
    "gamma_scale".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThirdLemmaScenario {
    #[serde(default = "gamma")]
    model: String,
    #[serde(default)]
    theta0: f64,
    #[serde(default = "two")]
    alpha: f64,
    /// Second coordinate of the pair: `central_seq` or `root_n_mean`.
    #[serde(default = "ThirdLemmaScenario::default_second")]
    second: PairSecond,
    #[serde(default = "third_n_list")]
    n_list: Vec<usize>,
    #[serde(default = "LanScenario::default_theta")]
    theta: f64,
    #[serde(default = "ThirdLemmaScenario::default_reps")]
    reps: usize,
}

impl ThirdLemmaScenario {
    fn default_second() -> PairSecond {
        PairSecond::CentralSeq
    }
    fn default_reps() -> usize {
        100_000
    }
}

impl Validate for ThirdLemmaScenario {
    fn validate(&self) -> Result<()> {
        model_spec(&self.model, self.theta0, self.alpha)?;
        if self.n_list.is_empty() || self.n_list.contains(&0) || self.reps < 2 || !self.theta.is_finite() {
            return Err(Error::Config("third_lemma needs positive sample sizes, reps >= 2 and finite theta".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_list must be strictly increasing".into()));
        }
        Ok(())
    }
}

impl Scenario for ThirdLemmaScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        vec![("limit_gap", mc_scaled(0.03, 100_000, self.reps))]
    }

    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let model = model_spec(&self.model, self.theta0, self.alpha)?.build()?;
        let r = third_lemma_limit_check(model.as_ref(), self.second, &self.n_list, self.theta, self.reps, rng)?;
        let last = *r.gaps.last().expect("n_list is non-empty");
        let mut checks = vec![Check::le("limit_gap", last, tol.get("limit_gap"))];
        if r.gaps.len() > 1 && self.model != "gaussian_location" {
            checks.push(Check::le("gap_shrinks", last, r.gaps[0]));
        }
        checks.push(Check::holds("no_weight_collapse", !r.weight_collapse));
        let rows = r.n_list.iter().zip(&r.gaps).zip(&r.ess_fractions).map(|((n, g), e)| vec![*n as f64, *g, *e]).collect();
        Ok(Run { checks, artifacts: vec![Artifact::table("gaps", &["n", "gap", "ess_fraction"], rows)] })
    }
}
