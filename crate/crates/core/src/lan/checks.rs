use serde::{Deserialize, Serialize};

use super::LocalModel;
use crate::error::{invalid, Result};
use crate::stats::{gaussian_check, joint_cf_gap, mean_and_se, Pairs, RngSpec, SampleSet};

/// Default clipping bound for test statistics.
pub const DEFAULT_CLIP: f64 = 1e6;
/// Effective sample size below this fraction of the replications counts as weight collapse.
pub const COLLAPSE_FRACTION: f64 = 0.01;

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(invalid("at least two replications are required"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RemainderReport {
    /// Finite remainders `R_n = llr - (θ X_n - θ²σ²/2)` under `P_{n,0}`.
    pub remainders: SampleSet,
    pub max_abs: f64,
    /// Fraction of finite remainders with `|R_n| > 0.1`.
    pub exceed_fraction: f64,
    pub nonfinite: usize,
}

pub fn lan_remainder(model: &dyn LocalModel, n: usize, theta: f64, reps: usize, rng: &RngSpec) -> Result<RemainderReport> {
    if reps == 0 || n == 0 {
        return Err(invalid("need n >= 1 and reps >= 1"));
    }
    let s2 = model.sigma().powi(2);
    let raw = rng.replicate(reps, |r| {
        let x = model.sample(n, 0.0, r);
        model.loglik_ratio(n, theta, &x) - (theta * model.central_seq(n, &x) - 0.5 * theta * theta * s2)
    });
    let finite: Vec<f64> = raw.iter().copied().filter(|v| v.is_finite()).collect();
    let nonfinite = raw.len() - finite.len();
    let max_abs = finite.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let exceed_fraction = finite.iter().filter(|v| v.abs() > 0.1).count() as f64 / finite.len().max(1) as f64;
    let remainders = SampleSet::from_column(finite)?.with_seed(*rng);
    Ok(RemainderReport { remainders, max_abs, exceed_fraction, nonfinite })
}

/// KS distance of the law of `X_n` under `P_{n,θ}` to `N(θσ², σ²)`.
pub fn central_clt_check(model: &dyn LocalModel, n: usize, theta: f64, reps: usize, rng: &RngSpec) -> Result<f64> {
    check_reps(reps)?;
    let x = rng.replicate(reps, |r| model.central_seq(n, &model.sample(n, theta, r)));
    let s2 = model.sigma().powi(2);
    gaussian_check(&x, theta * s2, s2)
}

/// Bounded test statistics of the data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    /// `1{X_n <= c}`.
    CentralSeqBelow { c: f64 },
    /// `X_n`, clipped.
    CentralSeq,
    /// `cos(X_n)`.
    CosCentralSeq,
    /// `1{x_1 <= c}`.
    FirstObsBelow { c: f64 },
}

impl Statistic {
    pub fn eval(&self, model: &dyn LocalModel, n: usize, data: &[f64]) -> f64 {
        match *self {
            Statistic::CentralSeqBelow { c } => f64::from(u8::from(model.central_seq(n, data) <= c)),
            Statistic::CentralSeq => model.central_seq(n, data),
            Statistic::CosCentralSeq => model.central_seq(n, data).cos(),
            Statistic::FirstObsBelow { c } => f64::from(u8::from(data[0] <= c)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Statistic::CentralSeqBelow { c } => format!("ind_central_le_{c}"),
            Statistic::CentralSeq => "central".into(),
            Statistic::CosCentralSeq => "cos_central".into(),
            Statistic::FirstObsBelow { c } => format!("ind_first_le_{c}"),
        }
    }
}

/// Direct mean of `g` under `P_{n,θ}` against the likelihood-ratio reweighted mean under `P_{n,0}`.
#[derive(Clone, Debug, Serialize)]
pub struct ChangeOfMeasure {
    pub direct_mean: f64,
    pub direct_se: f64,
    pub reweighted_mean: f64,
    pub reweighted_se: f64,
    pub difference: f64,
    /// Standard error of the per-replication difference (both sides share random numbers).
    pub combined_se: f64,
    pub ess_fraction: f64,
    pub weight_collapse: bool,
    pub pass: bool,
}

/// Both sides are driven by the same random numbers in each replication, so at `θ = 0`
/// they coincide exactly.
pub fn change_of_measure_check(
    model: &dyn LocalModel,
    stat: Statistic,
    n: usize,
    theta: f64,
    reps: usize,
    clip: f64,
    rng: &RngSpec,
) -> Result<ChangeOfMeasure> {
    check_reps(reps)?;
    if !(clip > 0.0) {
        return Err(invalid("clip bound must be positive"));
    }
    let rows = rng.replicate(reps, |r| {
        let mut twin = r.clone();
        let x = model.sample(n, theta, r);
        let direct = stat.eval(model, n, &x).clamp(-clip, clip);
        let y = model.sample(n, 0.0, &mut twin);
        let w = model.loglik_ratio(n, theta, &y).exp();
        (direct, stat.eval(model, n, &y).clamp(-clip, clip) * w, w)
    });
    let direct: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let reweighted: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diffs: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let (direct_mean, direct_se) = mean_and_se(&direct)?;
    let (reweighted_mean, reweighted_se) = mean_and_se(&reweighted)?;
    let (difference, combined_se) = mean_and_se(&diffs)?;
    let ess_fraction = ess_fraction(rows.iter().map(|r| r.2));
    let weight_collapse = ess_fraction < COLLAPSE_FRACTION;
    let pass = !weight_collapse && difference.abs() <= 3.0 * combined_se;
    Ok(ChangeOfMeasure {
        direct_mean,
        direct_se,
        reweighted_mean,
        reweighted_se,
        difference,
        combined_se,
        ess_fraction,
        weight_collapse,
        pass,
    })
}

fn ess_fraction(weights: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut s2, mut k) = (0.0, 0.0, 0usize);
    for w in weights {
        s += w;
        s2 += w * w;
        k += 1;
    }
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2 / k as f64
    }
}

/// MC mean of `exp(llr)` under `P_{n,0}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct UnitMean {
    pub mean: f64,
    pub se: f64,
    pub pass: bool,
}

pub fn unit_mean_check(model: &dyn LocalModel, n: usize, theta: f64, reps: usize, rng: &RngSpec) -> Result<UnitMean> {
    check_reps(reps)?;
    let w = rng.replicate(reps, |r| model.loglik_ratio(n, theta, &model.sample(n, 0.0, r)).exp());
    let (mean, se) = mean_and_se(&w)?;
    Ok(UnitMean { mean, se, pass: (mean - 1.0).abs() <= 3.0 * se })
}

/// Second coordinate of the pair statistic `(X_n, S_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSecond {
    CentralSeq,
    /// `√n (x̄ - ϑ0)`.
    RootNMean,
}

impl PairSecond {
    fn eval(&self, model: &dyn LocalModel, n: usize, data: &[f64]) -> f64 {
        match self {
            PairSecond::CentralSeq => model.central_seq(n, data),
            PairSecond::RootNMean => {
                (n as f64).sqrt() * (data.iter().sum::<f64>() / n as f64 - model.theta0())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThirdLemmaReport {
    pub n_list: Vec<usize>,
    /// Joint CF gap between the direct law under `θ` and the reweighted null law, per `n`.
    pub gaps: Vec<f64>,
    pub ess_fractions: Vec<f64>,
    pub weight_collapse: bool,
}

/// Compares the law of `(X_n, S_n)` under `P_{n,θ}` with the null law reweighted by the
/// limit density `exp(θx - θ²σ²/2)`.
pub fn third_lemma_limit_check(
    model: &dyn LocalModel,
    second: PairSecond,
    n_list: &[usize],
    theta: f64,
    reps: usize,
    rng: &RngSpec,
) -> Result<ThirdLemmaReport> {
    check_reps(reps)?;
    if n_list.is_empty() {
        return Err(invalid("n_list must not be empty"));
    }
    let s2 = model.sigma().powi(2);
    let mut gaps = Vec::new();
    let mut ess = Vec::new();
    for &n in n_list {
        let rows = rng.derive(n as u64).replicate(reps, |r| {
            let mut twin = r.clone();
            let x = model.sample(n, theta, r);
            let y = model.sample(n, 0.0, &mut twin);
            let xy = model.central_seq(n, &y);
            [model.central_seq(n, &x), second.eval(model, n, &x), xy, second.eval(model, n, &y)]
        });
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        let (a1, a2, b1, b2) = (col(0), col(1), col(2), col(3));
        let w: Vec<f64> = b1.iter().map(|x| (theta * x - 0.5 * theta * theta * s2).exp()).collect();
        ess.push(ess_fraction(w.iter().copied()));
        gaps.push(joint_cf_gap(
            Pairs { x: &a1, y: &a2, weights: None },
            Pairs { x: &b1, y: &b2, weights: Some(&w) },
        )?);
    }
    let weight_collapse = ess.iter().any(|e| *e < COLLAPSE_FRACTION);
    Ok(ThirdLemmaReport { n_list: n_list.to_vec(), gaps, ess_fractions: ess, weight_collapse })
}
