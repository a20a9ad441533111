//! Brownian signal-plus-noise observations `X_i = B_i + h(θ)` on a time grid.

mod checks;
mod poly;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stats::StreamRng;

pub use checks::{
    equivariance_check, girsanov_change_of_measure, girsanov_unit_mean, marginal_convolution_check,
    mean_estimator_moments, sufficiency_identity_check, EquivarianceReport, GirsanovChange, GirsanovMean,
    MarginalConvolution, MeanMoments, PathEstimator, TimeKs,
};
pub use poly::{Poly, PolyParamGen};

/// `n` paths observed at `t_j = j/M`, stored row-major with `M + 1` values per path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathGrid {
    steps: usize,
    values: Vec<f64>,
}

impl PathGrid {
    pub fn new(steps: usize, values: Vec<f64>) -> Result<Self> {
        if steps < 2 || values.is_empty() || !values.len().is_multiple_of(steps + 1) {
            return Err(invalid("path values must hold whole paths of M + 1 >= 3 points"));
        }
        if values.chunks(steps + 1).any(|p| p[0] != 0.0) {
            return Err(invalid("paths must start at 0"));
        }
        Ok(Self { steps, values })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn count(&self) -> usize {
        self.values.len() / (self.steps + 1)
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 / self.steps as f64
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.values[i * (self.steps + 1)..(i + 1) * (self.steps + 1)]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.steps + 1)
    }

    /// Rows `path,t,x`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["path", "t", "x"])?;
        for (i, p) in self.paths().enumerate() {
            for (j, x) in p.iter().enumerate() {
                out.write_record(&[i.to_string(), self.time(j).to_string(), x.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Signal `θ` sampled at the step midpoints `(j − ½)/M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalParam {
    theta: Vec<f64>,
}

impl SignalParam {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 || theta.iter().any(|v| !v.is_finite()) {
            return Err(invalid("signal needs at least two finite midpoint values"));
        }
        Ok(Self { theta })
    }

    pub fn from_fn(steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..steps).map(|j| f((j as f64 + 0.5) / steps as f64)).collect())
    }

    pub fn zero(steps: usize) -> Result<Self> {
        Self::new(vec![0.0; steps])
    }

    pub fn steps(&self) -> usize {
        self.theta.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    fn dt(&self) -> f64 {
        1.0 / self.theta.len() as f64
    }

    /// `h(θ)(t_j) = Σ_{k<=j} θ_k Δt`, with `h(0) = 0`.
    pub fn primitive(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut h = Vec::with_capacity(self.theta.len() + 1);
        let mut acc = 0.0;
        h.push(0.0);
        for v in &self.theta {
            acc += v * dt;
            h.push(acc);
        }
        h
    }

    /// `‖θ‖² = Σ θ_k² Δt`.
    pub fn norm_sq(&self) -> f64 {
        self.theta.iter().map(|v| v * v).sum::<f64>() * self.dt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { theta: self.theta.iter().map(|v| c * v).collect() }
    }

    pub fn plus(&self, other: &SignalParam) -> Result<Self> {
        if self.steps() != other.steps() {
            return Err(invalid("signals live on different grids"));
        }
        Ok(Self { theta: self.theta.iter().zip(&other.theta).map(|(a, b)| a + b).collect() })
    }
}

/// Index of time `t` on a grid of `steps` steps; `t` must be a grid point in `(0, 1]`.
pub fn time_index(t: f64, steps: usize) -> Result<usize> {
    let j = (t * steps as f64).round();
    if !(t > 0.0 && t <= 1.0) || (j - t * steps as f64).abs() > 1e-9 {
        return Err(invalid(format!("time {t} is not a grid point of 1/{steps}")));
    }
    Ok(j as usize)
}

/// Appends one path `B + h(θ)` with independent `N(0, Δt)` increments.
fn push_path(theta: &SignalParam, rng: &mut StreamRng, out: &mut Vec<f64>) {
    let dt = theta.dt();
    let sd = dt.sqrt();
    let mut x = 0.0;
    out.push(0.0);
    for v in &theta.theta {
        x += v * dt + sd * rng.sample::<f64, _>(StandardNormal);
        out.push(x);
    }
}

/// `n` independent paths under `P_θ`.
pub fn simulate_paths(n: usize, theta: &SignalParam, rng: &mut StreamRng) -> Result<PathGrid> {
    if n == 0 {
        return Err(invalid("need at least one path"));
    }
    let mut values = Vec::with_capacity(n * (theta.steps() + 1));
    for _ in 0..n {
        push_path(theta, rng, &mut values);
    }
    PathGrid::new(theta.steps(), values)
}

/// `log dP_θⁿ/dP_0ⁿ = Σ_i Σ_j θ_j ΔX_ij − n‖θ‖²/2`, exact for the grid increments.
pub fn girsanov_logdensity(paths: &PathGrid, theta: &SignalParam) -> Result<f64> {
    if paths.steps() != theta.steps() {
        return Err(invalid("signal and paths live on different grids"));
    }
    let mut s = 0.0;
    for p in paths.paths() {
        for (j, v) in theta.theta.iter().enumerate() {
            s += v * (p[j + 1] - p[j]);
        }
    }
    Ok(s - 0.5 * paths.count() as f64 * theta.norm_sq())
}

/// Pointwise average path `S = (1/n) Σ X_i`.
pub fn mean_estimator(paths: &PathGrid) -> Vec<f64> {
    let mut s = vec![0.0; paths.steps() + 1];
    for p in paths.paths() {
        for (a, x) in s.iter_mut().zip(p) {
            *a += x;
        }
    }
    let n = paths.count() as f64;
    s.iter_mut().for_each(|a| *a /= n);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngSpec;

    #[test]
    fn zero_signal_gives_zero_density() {
        let mut r = RngSpec::new(1, 1).unwrap().stream(0);
        let z = SignalParam::zero(16).unwrap();
        let p = simulate_paths(3, &z, &mut r).unwrap();
        assert_eq!(girsanov_logdensity(&p, &z).unwrap(), 0.0);
        assert_eq!(mean_estimator(&simulate_paths(1, &z, &mut r).unwrap()).len(), 17);
    }

    #[test]
    fn primitive_of_linear_signal() {
        let s = SignalParam::from_fn(8, |u| 2.0 * u).unwrap();
        let h = s.primitive();
        assert!((h[8] - 1.0).abs() < 1e-15);
        assert!((h[4] - 0.25).abs() < 1e-15);
        assert!((s.norm_sq() - 4.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn single_path_mean_is_the_path() {
        let mut r = RngSpec::new(2, 1).unwrap().stream(0);
        let p = simulate_paths(1, &SignalParam::from_fn(4, |_| 1.0).unwrap(), &mut r).unwrap();
        assert_eq!(mean_estimator(&p), p.path(0));
    }

    #[test]
    fn time_indices() {
        assert_eq!(time_index(0.25, 64).unwrap(), 16);
        assert!(time_index(0.3, 64).is_err());
        assert!(time_index(0.0, 64).is_err());
    }
}
