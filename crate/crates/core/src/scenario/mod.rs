//! Named verification scenarios driven by flat JSON configs.
//!
//! A config is one JSON object. The keys `scenario`, `seed`, `streams`, `out` and
//! `tolerances` are shared; every other key belongs to the selected scenario and is
//! checked against its parameter list.

mod artifact;
mod config;
mod endpoints;
mod estimators;
mod lan;
mod nonuniq;
mod paths;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::report::{Check, Report};
use crate::stats::RngSpec;

pub use artifact::{Artifact, ArtifactData};
pub use config::{parse_override, ScenarioConfig, DEFAULT_SEED, DEFAULT_STREAMS};

/// Catalog entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// The mathematical statement the scenario exercises.
    pub anchor: &'static str,
}

/// Threshold values keyed by check family; every key has a default.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    fn resolve(defaults: Vec<(&'static str, f64)>, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut map: BTreeMap<String, f64> = defaults.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        for (k, v) in overrides {
            let Some(slot) = map.get_mut(k) else {
                let known: Vec<&str> = map.keys().map(String::as_str).collect();
                return Err(Error::Config(format!("unknown tolerance `{k}`; expected one of {known:?}")));
            };
            if !v.is_finite() {
                return Err(Error::Config(format!("tolerance `{k}` must be finite")));
            }
            *slot = *v;
        }
        Ok(Self(map))
    }

    /// Declared tolerance; panics on an undeclared name, which is a programming error.
    pub fn get(&self, name: &str) -> f64 {
        match self.0.get(name) {
            Some(v) => *v,
            None => panic!("tolerance `{name}` was not declared"),
        }
    }
}

/// Output of one scenario body.
pub(crate) struct Run {
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

/// A validated, ready-to-run scenario.
pub(crate) trait Scenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)>;
    fn run(&self, rng: &RngSpec, tol: &Tolerances) -> Result<Run>;
}

struct Entry {
    info: ScenarioInfo,
    build: fn(Map<String, Value>) -> Result<(Box<dyn Scenario>, Value)>,
}

/// Deserializes the scenario keys into `P`, validates them, and returns the resolved echo.
pub(crate) fn build<P>(params: Map<String, Value>) -> Result<(Box<dyn Scenario>, Value)>
where
    P: Scenario + DeserializeOwned + Serialize + Validate + 'static,
{
    let p: P = serde_json::from_value(Value::Object(params)).map_err(|e| Error::Config(e.to_string()))?;
    p.validate().map_err(|e| match e {
        Error::Config(m) | Error::InvalidArgument(m) | Error::Unsupported(m) => Error::Config(m),
        other => Error::Config(other.to_string()),
    })?;
    let echo = serde_json::to_value(&p)?;
    Ok((Box::new(p), echo))
}

pub(crate) trait Validate {
    fn validate(&self) -> Result<()>;
}

const REGISTRY: &[Entry] = &[
    Entry {
        info: ScenarioInfo {
            name: "lan",
            description: "LAN remainder, central-sequence CLT, likelihood-ratio mean and change of measure",
            anchor: "local asymptotic normality of the log-likelihood ratio",
        },
        build: build::<lan::LanScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "third_lemma",
            description: "joint law under the alternative against the reweighted null law",
            anchor: "Le Cam's third lemma and the limit density exp(θx − θ²σ²/2)",
        },
        build: build::<lan::ThirdLemmaScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "conv",
            description: "regularity, factor recovery Q = ν ∗ P and residual invariance for a scalar estimator",
            anchor: "convolution theorem for regular estimators in LAN models",
        },
        build: build::<estimators::ConvScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "rao",
            description: "exact rational covariance Cov(S, T − S) with Monte Carlo confirmation",
            anchor: "equivalent characterisations of optimal unbiased estimators",
        },
        build: build::<estimators::RaoScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "gauss_limit",
            description: "Gaussian joint limit of two estimators and the covariance of the factor",
            anchor: "limit convolution theorem under joint Gaussian asymptotics",
        },
        build: build::<estimators::GaussLimitScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "kernel",
            description: "convolution kernel applied to a shifted Gaussian lattice law",
            anchor: "convolution kernel carrying the efficient experiment into the estimator law",
        },
        build: build::<estimators::KernelScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "spread",
            description: "decides whether one lattice law is a spread of another by deconvolution",
            anchor: "uniqueness of the convolution factor through non-vanishing transforms",
        },
        build: build::<estimators::SpreadScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "gshift",
            description: "Girsanov density, sufficiency identity, equivariance and per-time factors on paths",
            anchor: "signal plus white noise: Brownian drift experiment",
        },
        build: build::<paths::GshiftScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "endpoints",
            description: "exact TV of the lower extreme, extreme independence and endpoint factor recovery",
            anchor: "regular estimators of uniform endpoints and their exponential limits",
        },
        build: build::<endpoints::EndpointsScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "levy",
            description: "gamma-process shift model: increment transform, equivariance and factor recovery",
            anchor: "shift experiments of a Lévy process observed at finitely many times",
        },
        build: build::<endpoints::LevyScenario>,
    },
    Entry {
        info: ScenarioInfo {
            name: "nonuniq",
            description: "μ ≠ ν with μ ∗ η = ν ∗ η for band-limited η; Gaussian η separates them",
            anchor: "non-uniqueness of convolution factors for band-limited transforms",
        },
        build: build::<nonuniq::NonuniqScenario>,
    },
];

pub fn list_scenarios() -> Vec<ScenarioInfo> {
    REGISTRY.iter().map(|e| e.info).collect()
}

/// A config whose scenario keys passed validation.
pub struct Prepared {
    name: &'static str,
    scenario: Box<dyn Scenario>,
    rng: RngSpec,
    tolerances: Tolerances,
    echo: Value,
}

impl Prepared {
    /// Resolved config including every default; feeding it back reproduces the run.
    pub fn echo(&self) -> &Value {
        &self.echo
    }
}

/// Validates a config without running it. All errors are [`Error::Config`].
pub fn prepare(config: &ScenarioConfig) -> Result<Prepared> {
    let entry = REGISTRY.iter().find(|e| e.info.name == config.scenario).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.info.name).collect();
        Error::Config(format!("unknown scenario `{}`; expected one of {names:?}", config.scenario))
    })?;
    let rng = RngSpec::new(config.seed, config.streams).map_err(|e| Error::Config(e.to_string()))?;
    let (scenario, params) = (entry.build)(config.params.clone())?;
    let tolerances = Tolerances::resolve(scenario.tolerances(), &config.tolerances)?;
    let mut echo = Map::new();
    echo.insert("scenario".into(), Value::from(entry.info.name));
    echo.insert("seed".into(), Value::from(config.seed));
    echo.insert("streams".into(), Value::from(config.streams));
    echo.insert("tolerances".into(), serde_json::to_value(&tolerances)?);
    if let Value::Object(p) = params {
        echo.extend(p);
    }
    Ok(Prepared { name: entry.info.name, scenario, rng, tolerances, echo: Value::Object(echo) })
}

/// Report plus the artifacts the scenario produced.
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    /// Writes `report.json` and every artifact under `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&self.report)?)?;
        for a in &self.artifacts {
            a.write_to(dir)?;
        }
        Ok(())
    }
}

pub fn execute(prepared: &Prepared) -> Result<Outcome> {
    let start = Instant::now();
    let run = prepared.scenario.run(&prepared.rng, &prepared.tolerances)?;
    let mut report = Report::new(prepared.name, prepared.echo.clone(), prepared.rng.master_seed, run.checks);
    report.duration_secs = start.elapsed().as_secs_f64();
    Ok(Outcome { report, artifacts: run.artifacts })
}

/// [`prepare`] then [`execute`]; artifacts are written when the config names an output directory.
pub fn run(config: &ScenarioConfig) -> Result<Outcome> {
    let prepared = prepare(config)?;
    let outcome = execute(&prepared)?;
    if let Some(dir) = &config.out {
        outcome.write_to(dir)?;
    }
    Ok(outcome)
}

/// `|a − b| / se`, with `0/0 = 0`.
pub(crate) fn z_score(a: f64, b: f64, se: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / se
    }
}

/// Monte Carlo tolerance calibrated at `base_reps` and widened as `1/√reps` below it.
pub(crate) fn mc_scaled(tol: f64, base_reps: usize, reps: usize) -> f64 {
    tol * (base_reps as f64 / reps as f64).sqrt().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_are_unique() {
        let list = list_scenarios();
        assert!(list.len() >= 8);
        for (i, a) in list.iter().enumerate() {
            assert!(list[i + 1..].iter().all(|b| b.name != a.name));
            assert!(!a.description.is_empty() && !a.anchor.is_empty());
        }
    }

    #[test]
    fn tolerance_overrides() {
        let defaults = vec![("a", 1.0), ("b", 2.0)];
        let mut o = BTreeMap::new();
        o.insert("b".to_string(), 5.0);
        let t = Tolerances::resolve(defaults.clone(), &o).unwrap();
        assert_eq!((t.get("a"), t.get("b")), (1.0, 5.0));
        o.insert("c".to_string(), 1.0);
        assert!(matches!(Tolerances::resolve(defaults, &o), Err(Error::Config(_))));
    }

    #[test]
    fn scaled_tolerances() {
        assert_eq!(mc_scaled(0.02, 100_000, 100_000), 0.02);
        assert_eq!(mc_scaled(0.02, 100_000, 1_000_000), 0.02);
        assert!((mc_scaled(0.02, 100_000, 25_000) - 0.04).abs() < 1e-15);
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
    }
}
