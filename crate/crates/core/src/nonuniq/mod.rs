//! Distinct laws `μ ≠ ν` with `μ ∗ η = ν ∗ η` for every `η` whose transform vanishes off `[−1, 1]`.
//!
//! `ν` has density `2 sin²(x/2)/(πx²)` and transform `(1 − |t|)⁺`. `μ` is the image under
//! `x ↦ (π/2)x` of `μ0 = ½ε_0 + Σ_{k≥0} 2/(π²(2k+1)²) (ε_{4k+2} + ε_{−(4k+2)})`, whose transform
//! is the 2-periodic extension of `1 − |t|` from `[−1, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::{
    convolve, convolve_grids, distance_tv, to_charfn, AtomicMeasure, FreqGrid, GridMeasure, GridSpec, Law, Measure,
};
use crate::error::{invalid, Result};

/// Largest tail mass of `ν` cut off by the grid before it is rejected.
pub const MAX_NU_TAIL: f64 = 1e-3;

/// Lattice parameters: step `π/(2m)` places every atom of `μ` on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonuniqGrid {
    pub half_width: f64,
    pub m: usize,
}

impl Default for NonuniqGrid {
    fn default() -> Self {
        Self { half_width: 1000.0, m: 64 }
    }
}

impl NonuniqGrid {
    pub fn step(&self) -> f64 {
        PI / (2 * self.m) as f64
    }

    fn spec(&self, scale: f64) -> Result<GridSpec> {
        if self.m == 0 || !(self.half_width > 0.0) || !(scale > 0.0) {
            return Err(invalid("grid needs m >= 1, a positive half width and a positive scale"));
        }
        let h = self.step();
        let k = (scale * self.half_width / h).ceil() as usize;
        GridSpec::new(-(k as f64) * h, h, 2 * k + 1)
    }
}

/// `2 sin²(x/2)/(πx²)`, with value `1/(2π)` at 0.
pub fn fejer_density(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return 1.0 / (2.0 * PI);
    }
    let s = (0.5 * x).sin();
    2.0 * s * s / (PI * x * x)
}

#[derive(Clone, Debug, Serialize)]
pub struct NuBuild {
    pub measure: GridMeasure,
    /// Mass of the density outside the grid.
    pub tail_mass: f64,
}

/// `ν` scaled by `c`: density `f(x/c)/c`, transform `(1 − c|t|)⁺`, on a grid of half width `c·L`.
pub fn build_nu_scaled(grid: NonuniqGrid, c: f64) -> Result<NuBuild> {
    let spec = grid.spec(c)?;
    let d = GridMeasure::from_density(spec, |x| fejer_density(x / c) / c)?;
    // The density is band-limited to [−1/c, 1/c] and 2π/step exceeds that band, so the
    // lattice sum of the full density is exactly 1 and the shortfall is the tail mass.
    let tail_mass = (1.0 - d.raw_total).max(0.0);
    if tail_mass > MAX_NU_TAIL {
        return Err(invalid(format!("grid cuts {tail_mass:.2e} of mass from nu; widen it")));
    }
    Ok(NuBuild { measure: d.measure, tail_mass })
}

pub fn build_nu(grid: NonuniqGrid) -> Result<NuBuild> {
    build_nu_scaled(grid, 1.0)
}

/// `Σ_{k>K} (2k+1)^{−2} = ψ'(K + 3/2)/4`, via the asymptotic series of the trigamma function.
pub fn odd_square_tail(k: usize) -> f64 {
    let mut x = k as f64 + 1.5;
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = x * x;
    let series = 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x)
        + 1.0 / (42.0 * x2 * x2 * x2 * x)
        - 1.0 / (30.0 * x2 * x2 * x2 * x2 * x);
    (acc + series) / 4.0
}

#[derive(Clone, Debug, Serialize)]
pub struct MuBuild {
    pub measure: AtomicMeasure,
    /// Mass of the truncated atoms before renormalization.
    pub raw_mass: f64,
    /// Mass of the omitted atoms, `(4/π²) Σ_{k>K} (2k+1)^{−2}`.
    pub omitted_mass: f64,
}

/// Atoms `±(π/2)(4k+2)` for `k = 0..=K` plus `½ε_0`, renormalized.
pub fn build_mu(k_max: usize) -> Result<MuBuild> {
    if k_max < 10 {
        return Err(invalid("K must be at least 10"));
    }
    let mut side = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let odd = (2 * k + 1) as f64;
        side.push((PI * odd, 2.0 / (PI * PI * odd * odd)));
    }
    // Sum from the smallest masses up.
    let raw_mass = 0.5 + 2.0 * side.iter().rev().map(|a| a.1).sum::<f64>();
    let mut atoms: Vec<(f64, f64)> = side.iter().rev().map(|&(x, m)| (-x, m)).collect();
    atoms.push((0.0, 0.5));
    atoms.extend(side.iter().copied());
    let (measure, _) = AtomicMeasure::normalized(atoms)?;
    Ok(MuBuild { measure, raw_mass, omitted_mass: 4.0 / (PI * PI) * odd_square_tail(k_max) })
}

/// `(1 − |t|)⁺`.
pub fn nu_charfn(t: f64) -> Complex64 {
    Complex64::new((1.0 - t.abs()).max(0.0), 0.0)
}

/// The band-limited and non-band-limited test laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "eta", rename_all = "snake_case")]
pub enum Eta {
    Nu,
    /// `ν` scaled by `c`.
    Scaled { c: f64 },
    /// `N(0, 1)` on the same lattice.
    Gauss,
}

impl Eta {
    pub fn build(&self, grid: NonuniqGrid) -> Result<GridMeasure> {
        Ok(match *self {
            Eta::Nu => build_nu(grid)?.measure,
            Eta::Scaled { c } => build_nu_scaled(grid, c)?.measure,
            Eta::Gauss => Law::Normal { mean: 0.0, var: 1.0 }.discretize(grid.step())?,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EqualConvolutions {
    /// `max |η̂(t)|` over `1 < |t| <= 4`.
    pub eta_out_of_band: f64,
    /// `|η̂| <= 1e-3` off `[−1, 1]`.
    pub band_limited: bool,
    /// `sup |(φ_μ − φ_ν) φ_η|` over `|t| <= 4`.
    pub cf_gap: f64,
    pub tv: f64,
    pub snap_displacement: f64,
    /// Band-limited, `cf_gap <= 1e-4` and `tv <= 1e-3`.
    pub pass: bool,
    /// `μ ∗ η`.
    #[serde(skip)]
    pub mu_eta: GridMeasure,
    /// `ν ∗ η`.
    #[serde(skip)]
    pub nu_eta: GridMeasure,
}

fn scan_freqs() -> Result<FreqGrid> {
    FreqGrid::band(4.0, 0.005)
}

/// `μ ∗ η` against `ν ∗ η` on the common lattice.
pub fn verify_equal_convolutions(eta: &GridMeasure, mu: &AtomicMeasure, nu: &GridMeasure) -> Result<EqualConvolutions> {
    let freqs = scan_freqs()?;
    let phi_eta = to_charfn(&eta.clone().into(), &freqs)?;
    let phi_mu = to_charfn(&mu.clone().into(), &freqs)?;
    let mut eta_out_of_band: f64 = 0.0;
    let mut cf_gap: f64 = 0.0;
    for ((t, e), m) in phi_eta.iter().zip(phi_mu.values()) {
        if t.abs() > 1.0 + 1e-12 {
            eta_out_of_band = eta_out_of_band.max(e.norm());
        }
        cf_gap = cf_gap.max(((m - nu_charfn(t)) * e).norm());
    }
    let left = convolve(&Measure::Atomic(mu.clone()), &Measure::Grid(eta.clone()))?;
    let right = convolve_grids(nu, eta)?;
    let tv = distance_tv(&left.measure.clone().into(), &right.clone().into())?;
    let band_limited = eta_out_of_band <= 1e-3;
    Ok(EqualConvolutions {
        eta_out_of_band,
        band_limited,
        cf_gap,
        tv,
        snap_displacement: left.snap_displacement,
        pass: band_limited && cf_gap <= 1e-4 && tv <= 1e-3,
        mu_eta: left.measure,
        nu_eta: right,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MuNeqNu {
    pub tv: f64,
    /// `sup |φ_μ − (1 − |t|)⁺|` over `|t| <= 1`.
    pub cf_agreement: f64,
    pub phi_mu_at_1_5: f64,
    pub phi_nu_at_1_5: f64,
    pub pass: bool,
}

pub fn verify_mu_neq_nu(mu: &AtomicMeasure, nu: &GridMeasure) -> Result<MuNeqNu> {
    let tv = distance_tv(&mu.clone().into(), &nu.clone().into())?;
    let freqs = FreqGrid::band(1.0, 0.005)?;
    let phi = to_charfn(&mu.clone().into(), &freqs)?;
    let cf_agreement = phi.sup_error(1.0, nu_charfn);
    let at = to_charfn(&mu.clone().into(), &FreqGrid::new(vec![-1.5, 0.0, 1.5])?)?;
    let phi_mu_at_1_5 = at.values()[2].re;
    let phi_nu_at_1_5 = nu_charfn(1.5).re;
    Ok(MuNeqNu {
        tv,
        cf_agreement,
        phi_mu_at_1_5,
        phi_nu_at_1_5,
        pass: tv >= 0.99 && cf_agreement <= 1e-4 && (phi_mu_at_1_5 - phi_nu_at_1_5).abs() >= 0.4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_square_tail_matches_direct_sum() {
        let direct: f64 = (11..2_000_000usize).rev().map(|k| 1.0 / ((2 * k + 1) as f64).powi(2)).sum();
        let rest = 1.0 / (4.0 * 2_000_000.0);
        assert!((odd_square_tail(10) - direct - rest).abs() < 1e-12);
        // Σ_{k≥0} (2k+1)^{−2} = π²/8.
        assert!((odd_square_tail(0) + 1.0 - PI * PI / 8.0).abs() < 1e-14);
    }

    #[test]
    fn mass_identity_needs_the_k_zero_atoms() {
        let mu = build_mu(10_000).unwrap();
        assert!((mu.raw_mass + mu.omitted_mass - 1.0).abs() < 1e-12);
        assert!((1.0 - mu.raw_mass - 1.013e-5).abs() < 1e-7);
        // Starting at k = 1 drops 2·2/π² from the atoms at ±π.
        let from_one = mu.raw_mass + mu.omitted_mass - 4.0 / (PI * PI);
        assert!((from_one - 0.594_715_265_430_65).abs() < 1e-12);
    }

    #[test]
    fn atoms_sit_on_the_lattice() {
        let g = NonuniqGrid::default();
        let mu = build_mu(100).unwrap();
        for (x, _) in mu.measure.atoms() {
            let k = x / g.step();
            assert!((k - k.round()).abs() < 1e-6);
        }
    }
}
