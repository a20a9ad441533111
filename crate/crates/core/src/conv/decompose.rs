use num_complex::Complex64;
use serde::Serialize;

use crate::dist::{convolve_grids, distance_tv, CharFn, FreqGrid, GridMeasure, GridSpec, Law, SpreadVerdict};
use crate::error::{invalid, Result};
use crate::stats::{empirical_charfn, independence_check, mean_and_se};

/// Settings for splitting a Monte Carlo limit law `Q` into `ν ∗ P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecomposeOptions {
    /// Lattice step of the histograms.
    pub step: f64,
    /// Half-width of the frequency band on which transforms are compared.
    pub band: f64,
    /// Frequency spacing on the band.
    pub dt: f64,
    /// Lower bound on `|P̂|` for the ratio `Q̂/P̂` to be formed.
    pub floor: f64,
    /// z-score of `|Q̂| - |P̂|` beyond which `ν̂ = Q̂/P̂` is judged to exceed modulus 1.
    pub z_limit: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { step: 0.05, band: 3.0, dt: 0.05, floor: 1e-3, z_limit: 4.0 }
    }
}

impl DecomposeOptions {
    pub fn with_band(band: f64, floor: f64) -> Self {
        Self { band, floor, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.band > 0.0 && self.dt > 0.0 && self.floor > 0.0 && self.z_limit > 0.0) {
            return Err(invalid("decomposition options must be positive"));
        }
        Ok(())
    }
}

/// `Q = ν ∗ P` estimated from paired draws of an efficient statistic and a competitor.
#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionReport {
    pub reps: usize,
    /// Histogram of the competitor.
    pub q: GridMeasure,
    /// Reference law on the same lattice.
    pub p: GridMeasure,
    /// Histogram of the residual competitor − efficient statistic.
    pub nu: GridMeasure,
    /// Empirical transform of the residual on the band.
    pub nu_hat: CharFn,
    pub nu_mean: f64,
    pub nu_mean_se: f64,
    pub nu_var: f64,
    pub nu_var_se: f64,
    /// Independence statistic of (efficient statistic, residual).
    pub independence: f64,
    /// TV between `ν ∗ P` and `Q`.
    pub round_trip_tv: f64,
    /// Largest z-score of `|Q̂| - |P̂|` over reliable frequencies.
    pub ratio_max_z: f64,
    /// Largest frequency up to which `Q̂/P̂` is reliable.
    pub ratio_reliable_band: f64,
    pub verdict: SpreadVerdict,
}

impl ConvolutionReport {
    /// `sup |ν̂(t) - f(t)|` over `|t| <= band`.
    pub fn nu_sup_error(&self, band: f64, f: impl Fn(f64) -> Complex64) -> f64 {
        self.nu_hat.sup_error(band, f)
    }
}

fn histogram(values: &[f64], step: f64) -> Result<GridMeasure> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("histogram of non-finite draws"));
    }
    if (hi - lo) / step > 5e6 {
        return Err(invalid("draws spread over too many lattice cells"));
    }
    Ok(GridMeasure::from_samples(GridSpec::covering(lo, hi, step)?, values)?.0)
}

/// The residual `target - efficient` is the factor `ν`: its histogram and transform are the
/// estimates, and `ν ∗ P = Q` is checked by convolving back. The ratio `Q̂/P̂` is formed only
/// where `|P̂|` exceeds both `floor` and ten standard errors of `Q̂`; a modulus above 1 there
/// beyond `z_limit` standard errors means `Q` is not a spread of `P`.
pub fn decompose_paired(
    efficient: &[f64],
    target: &[f64],
    reference: &Law,
    opts: DecomposeOptions,
) -> Result<ConvolutionReport> {
    opts.validate()?;
    reference.validate()?;
    if efficient.len() != target.len() || target.len() < 2 {
        return Err(invalid("paired decomposition needs matching samples of at least two draws"));
    }
    let reps = target.len();
    let residual: Vec<f64> = target.iter().zip(efficient).map(|(t, s)| t - s).collect();
    let q = histogram(target, opts.step)?;
    let nu = histogram(&residual, opts.step)?;
    let p = reference.discretize(opts.step)?;
    let round_trip_tv = distance_tv(&convolve_grids(&nu, &p)?.into(), &q.clone().into())?;

    let freqs = FreqGrid::band(opts.band, opts.dt)?;
    let nu_hat = empirical_charfn(&residual, &freqs)?;
    let q_hat = empirical_charfn(target, &freqs)?;
    let mut reliable = 0usize;
    let mut total = 0usize;
    let mut ratio_max_z = f64::NEG_INFINITY;
    let mut ratio_reliable_band: f64 = 0.0;
    for (t, qv) in q_hat.iter().filter(|(t, _)| *t > 0.0) {
        total += 1;
        let pv = reference.charfn(t).norm();
        let se = ((1.0 - qv.norm_sqr()).max(0.0) / reps as f64).sqrt().max(1e-12);
        if pv >= opts.floor && pv >= 10.0 * se {
            reliable += 1;
            ratio_reliable_band = ratio_reliable_band.max(t);
            ratio_max_z = ratio_max_z.max((qv.norm() - pv) / se);
        }
    }
    let verdict = if 2 * reliable < total {
        SpreadVerdict::InsufficientBand
    } else if ratio_max_z > opts.z_limit {
        SpreadVerdict::NotProbability
    } else {
        SpreadVerdict::Probability
    };

    let (nu_mean, nu_mean_se) = mean_and_se(&residual)?;
    let sq: Vec<f64> = residual.iter().map(|r| (r - nu_mean).powi(2)).collect();
    let (nu_var, nu_var_se) = mean_and_se(&sq)?;
    let independence = independence_check(efficient, &residual)?;
    Ok(ConvolutionReport {
        reps,
        q,
        p,
        nu,
        nu_hat,
        nu_mean,
        nu_mean_se,
        nu_var: nu_var * reps as f64 / (reps - 1) as f64,
        nu_var_se,
        independence,
        round_trip_tv,
        ratio_max_z,
        ratio_reliable_band,
        verdict,
    })
}
