//! Endpoint estimation for shifted uniform samples and the discretely observed Gamma shift model.

mod levy;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conv::{decompose_paired, regularity_threshold, ConvolutionReport, DecomposeOptions};
use crate::dist::{to_charfn, FreqGrid, GridMeasure, Law};
use crate::error::{invalid, Result};
use crate::stats::{independence_check, ks_two_sample, RngSpec, SampleSet, StreamRng};

pub use levy::{
    levy_convolution_check, levy_equivariance_check, levy_increment_inverse, levy_increment_transform,
    levy_shift_increments, levy_simulate, LevyEstimator, LevyShiftModel,
};

/// Local parameter `(θ1, θ2)`: observations are uniform on `[θ1/n, 1 + θ2/n]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointShift {
    pub lower: f64,
    pub upper: f64,
}

impl EndpointShift {
    pub const ZERO: Self = Self { lower: 0.0, upper: 0.0 };

    fn validate(&self, n: usize) -> Result<()> {
        if n == 0 || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(invalid("need n >= 1 and a finite shift"));
        }
        if self.upper - self.lower <= -(n as f64) {
            return Err(invalid("shifted endpoints are no longer ordered"));
        }
        Ok(())
    }
}

/// `(n·Y_{1:n}, n·(Y_{n:n} − 1))` for `n` iid `U[0,1]` draws, sampled from the exact joint law:
/// the maximum is `V^{1/n}` and, given it, the minimum of the rest is uniform-order on `[0, max]`.
fn unit_extremes(n: usize, rng: &mut StreamRng) -> (f64, f64) {
    let max = rng.gen::<f64>().powf(1.0 / n as f64);
    if n == 1 {
        return (max, max);
    }
    let min = max * (1.0 - rng.gen::<f64>().powf(1.0 / (n - 1) as f64));
    (min, max)
}

/// Affine image `Z = (1 + (θ2 − θ1)/n)·Y + θ1/n` of the unit extremes, as the pair
/// `(n·Z_{1:n}, n·(Z_{n:n} − 1))`.
fn extreme_pair(n: usize, theta: EndpointShift, rng: &mut StreamRng) -> (f64, f64) {
    let nf = n as f64;
    let (ymin, ymax) = unit_extremes(n, rng);
    let a = 1.0 + (theta.upper - theta.lower) / nf;
    let zmin = a * ymin + theta.lower / nf;
    let zmax = a * ymax + theta.lower / nf;
    (nf * zmin, nf * (zmax - 1.0))
}

/// Rows `(n·(Z_{1:n} − 0), n·(Z_{n:n} − 1))`.
pub fn simulate_endpoint(n: usize, theta: EndpointShift, reps: usize, rng: &RngSpec) -> Result<SampleSet> {
    theta.validate(n)?;
    let rows = rng.replicate(reps, |r| {
        let (a, b) = extreme_pair(n, theta, r);
        [a, b]
    });
    Ok(SampleSet::new(2, rows.into_iter().flatten().collect())?.with_seed(*rng))
}

/// Composite Simpson rule with `panels` (even) subintervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Total variation between the law of `n·Y_{1:n}` (density `(1 − x/n)^{n−1}` on `[0, n]`) and
/// `Exp(1)`, by quadrature split at the single density crossing.
pub fn exact_lower_extreme_tv(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let nf = n as f64;
    let f = |x: f64| (1.0 - x / nf).powi(n as i32 - 1);
    let gap = |x: f64| (f(x) - (-x).exp()).abs();
    // (n−1)·ln(1 − x/n) + x is positive just right of 0 and tends to −∞ at n.
    let h = |x: f64| (nf - 1.0) * (-x / nf).ln_1p() + x;
    let mut pieces = vec![0.0];
    if n > 1 {
        let (mut lo, mut hi) = (1e-9 * nf, nf * (1.0 - 1e-12));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        pieces.push(0.5 * (lo + hi));
    }
    // Both densities decay like e^{−x}; refine near the crossing where the gap is largest.
    let start = *pieces.last().expect("non-empty");
    for off in [2.0, 8.0, 40.0] {
        if start + off < nf {
            pieces.push(start + off);
        }
    }
    pieces.push(nf);
    let inside: f64 = pieces.windows(2).map(|w| simpson(gap, w[0], w[1], 20_000)).sum();
    Ok(0.5 * (inside + (-nf).exp()))
}

/// Independence statistic of the extreme pair at each sample size.
pub fn asymptotic_independence_check(n_list: &[usize], reps: usize, rng: &RngSpec) -> Result<Vec<(usize, f64)>> {
    n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let s = simulate_endpoint(n, EndpointShift::ZERO, reps, &rng.derive(k as u64))?;
            Ok((n, independence_check(&s.column(0), &s.column(1))?))
        })
        .collect()
}

/// Endpoint estimators on the rate-`n` scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EndpointEstimator {
    /// The sample extremes.
    Extremes,
    /// Extremes plus independent `U_1/n` and `U_2/n`.
    NoisyExtremes { lower_noise: Law, upper_noise: Law },
}

impl EndpointEstimator {
    fn validate(&self) -> Result<()> {
        if let EndpointEstimator::NoisyExtremes { lower_noise, upper_noise } = self {
            lower_noise.validate()?;
            upper_noise.validate()?;
        }
        Ok(())
    }

    /// Efficient pair and estimator pair, both on the scale `n·(· − endpoint) − θ`.
    fn draw(&self, n: usize, theta: EndpointShift, rng: &mut StreamRng) -> ([f64; 2], [f64; 2]) {
        let (a, b) = extreme_pair(n, theta, rng);
        let eff = [a - theta.lower, b - theta.upper];
        let est = match self {
            EndpointEstimator::Extremes => eff,
            EndpointEstimator::NoisyExtremes { lower_noise, upper_noise } => {
                [eff[0] + lower_noise.sample(rng), eff[1] + upper_noise.sample(rng)]
            }
        };
        (eff, est)
    }
}

/// Per-coordinate decompositions `Q = ν ∗ P` with `P = Exp(1)` for the lower and the law of
/// `−Exp(1)` for the upper endpoint.
pub fn endpoint_convolution_check(
    est: &EndpointEstimator,
    n: usize,
    reps: usize,
    opts: DecomposeOptions,
    rng: &RngSpec,
) -> Result<[ConvolutionReport; 2]> {
    est.validate()?;
    EndpointShift::ZERO.validate(n)?;
    let rows = rng.replicate(reps, |r| est.draw(n, EndpointShift::ZERO, r));
    let refs = [Law::Exponential { rate: 1.0 }, Law::NegExponential { rate: 1.0 }];
    let report = |k: usize| {
        let eff: Vec<f64> = rows.iter().map(|r| r.0[k]).collect();
        let target: Vec<f64> = rows.iter().map(|r| r.1[k]).collect();
        decompose_paired(&eff, &target, &refs[k], opts)
    };
    Ok([report(0)?, report(1)?])
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointRegularity {
    pub thetas: Vec<EndpointShift>,
    /// Largest pairwise KS distance per coordinate.
    pub max_ks: [f64; 2],
    pub threshold: f64,
    pub pass: bool,
}

/// Laws of `n·(T − endpoint) − θ` across local parameters.
pub fn endpoint_regularity_check(
    est: &EndpointEstimator,
    n: usize,
    thetas: &[EndpointShift],
    reps: usize,
    rng: &RngSpec,
) -> Result<EndpointRegularity> {
    est.validate()?;
    let laws: Vec<[Vec<f64>; 2]> = thetas
        .iter()
        .enumerate()
        .map(|(k, &th)| {
            th.validate(n)?;
            let rows = rng.derive(k as u64).replicate(reps, |r| est.draw(n, th, r).1);
            Ok([rows.iter().map(|v| v[0]).collect(), rows.iter().map(|v| v[1]).collect()])
        })
        .collect::<Result<_>>()?;
    let mut max_ks = [0.0f64; 2];
    for i in 0..laws.len() {
        for j in i + 1..laws.len() {
            for c in 0..2 {
                max_ks[c] = max_ks[c].max(ks_two_sample(&laws[i][c], &laws[j][c])?);
            }
        }
    }
    let threshold = regularity_threshold(reps);
    Ok(EndpointRegularity { thetas: thetas.to_vec(), max_ks, threshold, pass: max_ks.iter().all(|k| *k <= threshold) })
}

/// Source of a characteristic function to scan for zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum CfSource {
    Law { law: Law },
    Grid { measure: GridMeasure },
    /// `(1 − |t|)⁺`.
    Triangular,
}

impl CfSource {
    fn charfn(&self, freqs: &FreqGrid) -> Result<Vec<Complex64>> {
        Ok(match self {
            CfSource::Law { law } => {
                law.validate()?;
                freqs.freqs().iter().map(|&t| law.charfn(t)).collect()
            }
            CfSource::Grid { measure } => to_charfn(&measure.clone().into(), freqs)?.values().to_vec(),
            CfSource::Triangular => {
                freqs.freqs().iter().map(|t| Complex64::new((1.0 - t.abs()).max(0.0), 0.0)).collect()
            }
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CfScan {
    pub min_modulus: f64,
    pub argmin: f64,
    /// Smallest and largest `|t|` at which `|φ(t)| <= zero_tol`, if any.
    pub zero_region: Option<(f64, f64)>,
    pub nonvanishing: bool,
}

/// `min |φ|` over `[−band, band]` at spacing `dt`.
pub fn cf_nonvanishing_check(source: &CfSource, band: f64, dt: f64, zero_tol: f64) -> Result<CfScan> {
    if !(zero_tol >= 0.0) {
        return Err(invalid("zero tolerance must be non-negative"));
    }
    let freqs = FreqGrid::band(band, dt)?;
    let values = source.charfn(&freqs)?;
    let mut min_modulus = f64::INFINITY;
    let mut argmin = 0.0;
    let mut zero: Option<(f64, f64)> = None;
    for (&t, v) in freqs.freqs().iter().zip(&values) {
        let m = v.norm();
        if m < min_modulus {
            min_modulus = m;
            argmin = t;
        }
        if m <= zero_tol {
            let a = t.abs();
            zero = Some(zero.map_or((a, a), |(lo, hi)| (lo.min(a), hi.max(a))));
        }
    }
    Ok(CfScan { min_modulus, argmin, zero_region: zero, nonvanishing: zero.is_none() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_matches_frozen_values() {
        // Crossing point x* solves (n−1)ln(1 − x/n) + x = 0; TV = e^{−x*} − (1 − x*/n)^n.
        let golden = [
            (10, 0.028_000_080_455_330_762),
            (50, 0.005_449_742_505_326_208),
            (100, 0.002_715_758_164_810_029),
            (500, 0.000_541_702_267_748_715),
            (1000, 0.000_270_760_820_077_240),
        ];
        for (n, want) in golden {
            let got = exact_lower_extreme_tv(n).unwrap();
            assert!((got - want).abs() < 1e-12, "n={n}: {got}");
        }
        assert!((exact_lower_extreme_tv(1).unwrap() - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn single_draw_pair_is_affine() {
        let mut r = RngSpec::new(1, 1).unwrap().stream(0);
        let (a, b) = extreme_pair(1, EndpointShift::ZERO, &mut r);
        assert!((a - (b + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_crossed_endpoints() {
        assert!(simulate_endpoint(2, EndpointShift { lower: 1.0, upper: -1.5 }, 10, &RngSpec::new(1, 1).unwrap()).is_err());
    }

    #[test]
    fn exponential_modulus_minimum() {
        let s = cf_nonvanishing_check(&CfSource::Law { law: Law::Exponential { rate: 1.0 } }, 8.0, 0.01, 1e-12).unwrap();
        assert!((s.min_modulus - 65f64.powf(-0.5)).abs() < 1e-12);
        assert!(s.nonvanishing);
        let tri = cf_nonvanishing_check(&CfSource::Triangular, 8.0, 0.01, 0.0).unwrap();
        let (lo, hi) = tri.zero_region.unwrap();
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 8.0).abs() < 1e-9);
    }
}
