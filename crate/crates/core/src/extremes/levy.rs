use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::conv::{decompose_paired, regularity_threshold, ConvolutionReport, DecomposeOptions};
use crate::dist::Law;
use crate::error::{invalid, Result};
use crate::stats::{ks_two_sample, RngSpec, SampleSet, StreamRng};

const MAX_TIMES: usize = 8;

/// `X_i = Z_{t_i} + ϑ_i` for a Gamma process `Z` with `Z_t ~ Gamma(α t, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyShiftModel {
    pub times: Vec<f64>,
    pub alpha: f64,
    pub shift: Vec<f64>,
}

impl LevyShiftModel {
    pub fn new(times: Vec<f64>, alpha: f64, shift: Vec<f64>) -> Result<Self> {
        let m = Self { times, alpha, shift };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let m = self.times.len();
        if m == 0 || m > MAX_TIMES || self.shift.len() != m {
            return Err(invalid(format!("need 1..={MAX_TIMES} times with one shift each")));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || self.shift.iter().any(|s| !s.is_finite()) {
            return Err(invalid("alpha must be positive and shifts finite"));
        }
        let mut prev = 0.0;
        for &t in &self.times {
            if !(t > prev && t.is_finite()) {
                return Err(invalid("observation times must be positive and strictly increasing"));
            }
            prev = t;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.times.len()
    }

    /// Shape `α·(t_i − t_{i−1})` of each increment.
    pub fn increment_shapes(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let s = self.alpha * (t - prev);
                prev = t;
                s
            })
            .collect()
    }

    pub fn with_shift(&self, shift: Vec<f64>) -> Result<Self> {
        Self::new(self.times.clone(), self.alpha, shift)
    }

    fn draw(&self, rng: &mut StreamRng) -> Vec<f64> {
        let mut z = 0.0;
        self.increment_shapes()
            .iter()
            .zip(&self.shift)
            .map(|(&shape, s)| {
                z += Gamma::new(shape, 1.0).expect("validated shape").sample(rng);
                z + s
            })
            .collect()
    }
}

pub fn levy_simulate(model: &LevyShiftModel, reps: usize, rng: &RngSpec) -> Result<SampleSet> {
    model.validate()?;
    let rows = rng.replicate(reps, |r| model.draw(r));
    Ok(SampleSet::new(model.dim(), rows.into_iter().flatten().collect())?.with_seed(*rng))
}

/// `Y_i = X_i − X_{i−1}` with `X_0 = 0`, row by row.
pub fn levy_increment_transform(rows: &SampleSet) -> Result<SampleSet> {
    let out: Vec<f64> = rows
        .rows()
        .flat_map(|r| {
            let mut prev = 0.0;
            r.iter()
                .map(move |&x| {
                    let y = x - prev;
                    prev = x;
                    y
                })
                .collect::<Vec<_>>()
        })
        .collect();
    SampleSet::new(rows.dim(), out)
}

/// Cumulative sums, inverting [`levy_increment_transform`].
pub fn levy_increment_inverse(rows: &SampleSet) -> Result<SampleSet> {
    let out: Vec<f64> = rows
        .rows()
        .flat_map(|r| {
            r.iter()
                .scan(0.0, |acc, &y| {
                    *acc += y;
                    Some(*acc)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    SampleSet::new(rows.dim(), out)
}

/// `s_i = ϑ_i − ϑ_{i−1}` with `ϑ_0 = 0`.
pub fn levy_shift_increments(shift: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    shift
        .iter()
        .map(|&v| {
            let s = v - prev;
            prev = v;
            s
        })
        .collect()
}

/// Estimators of the shift vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum LevyEstimator {
    Identity,
    /// Identity plus independent noise on one cumulative coordinate.
    Noisy { coord: usize, noise: Law },
}

impl LevyEstimator {
    fn validate(&self, dim: usize) -> Result<()> {
        if let LevyEstimator::Noisy { coord, noise } = self {
            noise.validate()?;
            if *coord >= dim {
                return Err(invalid("noise coordinate out of range"));
            }
        }
        Ok(())
    }

    fn apply(&self, mut x: Vec<f64>, rng: &mut StreamRng) -> Vec<f64> {
        if let LevyEstimator::Noisy { coord, noise } = self {
            x[*coord] += noise.sample(rng);
        }
        x
    }
}

fn increments(x: &[f64]) -> Vec<f64> {
    levy_shift_increments(x)
}

/// Decomposition of the `coord`-th increment of `T(X)` recentered by `s_coord`, against
/// `Gamma(α Δt_coord, 1)`.
pub fn levy_convolution_check(
    model: &LevyShiftModel,
    est: &LevyEstimator,
    coord: usize,
    reps: usize,
    opts: DecomposeOptions,
    rng: &RngSpec,
) -> Result<ConvolutionReport> {
    model.validate()?;
    est.validate(model.dim())?;
    if coord >= model.dim() {
        return Err(invalid("coordinate out of range"));
    }
    let s = levy_shift_increments(&model.shift)[coord];
    let rows = rng.replicate(reps, |r| {
        let x = model.draw(r);
        let eff = increments(&x)[coord] - s;
        let t = increments(&est.apply(x, r))[coord] - s;
        (eff, t)
    });
    let (eff, target): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let shape = model.increment_shapes()[coord];
    decompose_paired(&eff, &target, &Law::Gamma { shape, scale: 1.0 }, opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevyEquivariance {
    /// Largest pairwise KS distance per coordinate of `T(X) − ϑ`.
    pub max_ks: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
}

/// Laws of `T(X) − ϑ` should coincide for all tested shift vectors.
pub fn levy_equivariance_check(
    model: &LevyShiftModel,
    est: &LevyEstimator,
    shifts: &[Vec<f64>],
    reps: usize,
    rng: &RngSpec,
) -> Result<LevyEquivariance> {
    est.validate(model.dim())?;
    let d = model.dim();
    let laws: Vec<Vec<Vec<f64>>> = shifts
        .iter()
        .enumerate()
        .map(|(k, sh)| {
            let m = model.with_shift(sh.clone())?;
            let rows = rng.derive(k as u64).replicate(reps, |r| {
                let t = est.apply(m.draw(r), r);
                t.iter().zip(sh).map(|(a, b)| a - b).collect::<Vec<f64>>()
            });
            Ok((0..d).map(|c| rows.iter().map(|r| r[c]).collect()).collect())
        })
        .collect::<Result<_>>()?;
    let mut max_ks = vec![0.0f64; d];
    for i in 0..laws.len() {
        for j in i + 1..laws.len() {
            for c in 0..d {
                max_ks[c] = max_ks[c].max(ks_two_sample(&laws[i][c], &laws[j][c])?);
            }
        }
    }
    let threshold = regularity_threshold(reps);
    let pass = max_ks.iter().all(|k| *k <= threshold);
    Ok(LevyEquivariance { max_ks, threshold, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increment_transform_round_trip() {
        let s = SampleSet::new(3, vec![1.0, 2.5, 2.75, 0.1, 0.2, 0.3]).unwrap();
        let y = levy_increment_transform(&s).unwrap();
        assert_eq!(y.row(0), &[1.0, 1.5, 0.25]);
        let back = levy_increment_inverse(&y).unwrap();
        for (i, r) in back.rows().enumerate() {
            for (a, b) in r.iter().zip(s.row(i)) {
                assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
            }
        }
        assert_eq!(levy_shift_increments(&[2.0, 2.0, 2.0]), vec![2.0, 0.0, 0.0]);
        assert_eq!(levy_shift_increments(&[0.5, 1.0, 3.0, 3.0, 3.0])[3..], [0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_times() {
        assert!(LevyShiftModel::new(vec![1.0, 1.0], 2.0, vec![0.0, 0.0]).is_err());
        assert!(LevyShiftModel::new([1.0; 9].iter().enumerate().map(|(i, _)| i as f64 + 1.0).collect(), 2.0, vec![0.0; 9]).is_err());
    }
}
