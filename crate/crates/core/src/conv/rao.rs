use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stats::{covariance_and_se, mean_and_se, RngSpec};

/// IID observation family with rational variance, so covariances of linear statistics are exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `N(mean, var_num/var_den)`.
    Gaussian { mean: f64, var_num: u32, var_den: u32 },
    /// `Bernoulli(p_num/p_den)`.
    Bernoulli { p_num: u32, p_den: u32 },
}

impl Family {
    fn validate(&self) -> Result<()> {
        match *self {
            Family::Gaussian { mean, var_num, var_den } if !mean.is_finite() || var_num == 0 || var_den == 0 => {
                Err(invalid("gaussian family needs a finite mean and positive variance"))
            }
            Family::Bernoulli { p_num, p_den } if p_den == 0 || p_num == 0 || p_num >= p_den => {
                Err(invalid("bernoulli family needs 0 < p < 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn variance(&self) -> BigRational {
        match *self {
            Family::Gaussian { var_num, var_den, .. } => ratio(var_num.into(), var_den.into()),
            Family::Bernoulli { p_num, p_den } => {
                let p = ratio(p_num.into(), p_den.into());
                p.clone() * (BigRational::from_integer(1.into()) - p)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Family::Gaussian { mean, .. } => mean,
            Family::Bernoulli { p_num, p_den } => p_num as f64 / p_den as f64,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Family::Gaussian { mean, var_num, var_den } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + (var_num as f64 / var_den as f64).sqrt() * z
            }
            Family::Bernoulli { p_num, p_den } => f64::from(rng.gen_range(0..p_den) < p_num),
        }
    }
}

fn ratio(a: BigInt, b: BigInt) -> BigRational {
    BigRational::new(a, b)
}

/// Linear statistic `Σ c_i X_i` with rational coefficients summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stat", rename_all = "snake_case")]
pub enum LinearStat {
    Mean,
    FirstObs,
    /// Weights proportional to the integer pattern, cycled over the sample.
    Weighted { pattern: Vec<u32> },
}

impl LinearStat {
    pub fn coefficients(&self, n: usize) -> Result<Vec<BigRational>> {
        let raw: Vec<u64> = match self {
            LinearStat::Mean => vec![1; n],
            LinearStat::FirstObs => (0..n).map(|i| u64::from(i == 0)).collect(),
            LinearStat::Weighted { pattern } => {
                if pattern.is_empty() {
                    return Err(invalid("weight pattern must be non-empty"));
                }
                pattern.iter().cycle().take(n).map(|&w| u64::from(w)).collect()
            }
        };
        let total: u64 = raw.iter().sum();
        if total == 0 {
            return Err(invalid("weights must not all vanish"));
        }
        Ok(raw.into_iter().map(|w| ratio(w.into(), total.into())).collect())
    }

    pub fn label(&self) -> String {
        match self {
            LinearStat::Mean => "mean".into(),
            LinearStat::FirstObs => "first_obs".into(),
            LinearStat::Weighted { pattern } => format!("weighted{pattern:?}"),
        }
    }
}

/// Closed-form and Monte Carlo covariance `Cov(f(S), f(T) − f(S))` for one pair `(S, T)`.
#[derive(Clone, Debug, Serialize)]
pub struct RaoCase {
    pub family: Family,
    pub n: usize,
    pub s: String,
    pub t: String,
    /// Scalar multiplier `a` of the functional `f(x) = a·x`.
    pub functional: i64,
    /// Exact covariance as a reduced fraction.
    pub exact_cov: String,
    pub exact_cov_value: f64,
    pub exact_zero: bool,
    pub exact_var_s: f64,
    pub exact_var_t: f64,
    pub mc_cov: f64,
    pub mc_cov_se: f64,
    /// `|mc_cov − exact_cov| <= 3 SE`.
    pub mc_agrees: bool,
    /// `Var(f(T)) − Var(f(S)) − Var(f(T − S))` from the Monte Carlo draws.
    pub additivity_residual: f64,
    /// Means of `S` and `T` within 3 SE of the family mean.
    pub unbiased: bool,
    /// Zero covariance implies `Var(f(S)) <= Var(f(T))`.
    pub variance_ordering: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RaoReport {
    pub cases: Vec<RaoCase>,
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// For IID data with variance `σ²` and `S = Σ s_i X_i`, `T = Σ t_i X_i`:
/// `Cov(S, T − S) = σ²(Σ s_i t_i − Σ s_i²)`.
pub fn rao_covariance_check(
    family: Family,
    n: usize,
    s: &LinearStat,
    t: &LinearStat,
    functionals: &[i64],
    reps: usize,
    rng: &RngSpec,
) -> Result<RaoReport> {
    family.validate()?;
    if n == 0 || reps < 2 || functionals.is_empty() {
        return Err(invalid("need n >= 1, reps >= 2 and at least one functional"));
    }
    let cs = s.coefficients(n)?;
    let ct = t.coefficients(n)?;
    let var = family.variance();
    let ss = dot(&cs, &cs);
    let st = dot(&cs, &ct);
    let tt = dot(&ct, &ct);
    let base_cov = var.clone() * (st - ss.clone());

    let cs_f: Vec<f64> = cs.iter().map(to_f64).collect();
    let ct_f: Vec<f64> = ct.iter().map(to_f64).collect();
    let draws = rng.replicate(reps, |r| {
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..n {
            let x = family.sample(r);
            a += cs_f[i] * x;
            b += ct_f[i] * x;
        }
        (a, b)
    });
    let (sv, tv): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    let (ms, ses) = mean_and_se(&sv)?;
    let (mt, set) = mean_and_se(&tv)?;
    let mu = family.mean();
    let unbiased = (ms - mu).abs() <= 3.0 * ses.max(1e-300) && (mt - mu).abs() <= 3.0 * set.max(1e-300);

    let mut cases = Vec::new();
    for &a in functionals {
        let a2 = BigRational::from_integer(BigInt::from(a) * BigInt::from(a));
        let exact = a2.clone() * base_cov.clone();
        let fs: Vec<f64> = sv.iter().map(|v| a as f64 * v).collect();
        let ft: Vec<f64> = tv.iter().map(|v| a as f64 * v).collect();
        let diff: Vec<f64> = ft.iter().zip(&fs).map(|(x, y)| x - y).collect();
        let (mc_cov, mc_cov_se) = covariance_and_se(&fs, &diff)?;
        let var_of = |v: &[f64]| covariance_and_se(v, v).map(|c| c.0);
        let additivity_residual = var_of(&ft)? - var_of(&fs)? - var_of(&diff)?;
        let exact_value = to_f64(&exact);
        let exact_var_s = to_f64(&(a2.clone() * var.clone() * ss.clone()));
        let exact_var_t = to_f64(&(a2 * var.clone() * tt.clone()));
        let exact_zero = exact.is_zero();
        cases.push(RaoCase {
            family,
            n,
            s: s.label(),
            t: t.label(),
            functional: a,
            exact_cov: exact.to_string(),
            exact_cov_value: exact_value,
            exact_zero,
            exact_var_s,
            exact_var_t,
            mc_cov,
            mc_cov_se,
            mc_agrees: (mc_cov - exact_value).abs() <= 3.0 * mc_cov_se.max(1e-300),
            additivity_residual,
            unbiased,
            variance_ordering: !exact_zero || exact_var_s <= exact_var_t,
        });
    }
    Ok(RaoReport { cases })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_versus_mean_has_exactly_zero_covariance() {
        let fam = Family::Gaussian { mean: 0.0, var_num: 2, var_den: 1 };
        let t = LinearStat::Weighted { pattern: vec![1, 2, 3] };
        let rep = rao_covariance_check(fam, 10, &LinearStat::Mean, &t, &[1, -3], 4000, &RngSpec::new(5, 2).unwrap())
            .unwrap();
        for c in &rep.cases {
            assert!(c.exact_zero, "{}", c.exact_cov);
            assert_eq!(c.exact_cov, "0");
            assert!(c.exact_var_s < c.exact_var_t);
        }
    }

    #[test]
    fn first_observation_is_flagged() {
        let fam = Family::Gaussian { mean: 1.0, var_num: 1, var_den: 1 };
        let rep =
            rao_covariance_check(fam, 5, &LinearStat::FirstObs, &LinearStat::Mean, &[1], 4000, &RngSpec::new(6, 2).unwrap())
                .unwrap();
        assert_eq!(rep.cases[0].exact_cov, "-4/5");
        assert!(!rep.cases[0].exact_zero);
    }

    #[test]
    fn bernoulli_variance_is_exact() {
        let fam = Family::Bernoulli { p_num: 3, p_den: 10 };
        assert_eq!(fam.variance(), ratio(21.into(), 100.into()));
        assert!(Family::Bernoulli { p_num: 3, p_den: 3 }.validate().is_err());
    }
}
