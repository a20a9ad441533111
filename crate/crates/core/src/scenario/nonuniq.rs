use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Artifact, Run, Scenario, Tolerances, Validate};
use crate::dist::{to_charfn, CharFn, FreqGrid};
use crate::error::{Error, Result};
use crate::nonuniq::{build_mu, build_nu, nu_charfn, verify_equal_convolutions, verify_mu_neq_nu, Eta, NonuniqGrid};
use crate::report::Check;
use crate::stats::RngSpec;

/// Half width and spacing of the exported transform curves.
const CURVE_BAND: f64 = 4.0;
const CURVE_DT: f64 = 0.01;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonuniqScenario {
    /// Largest atom index of the truncated `μ`.
    #[serde(rename = "K", default = "NonuniqScenario::default_k")]
    k: usize,
    #[serde(default = "NonuniqScenario::default_half_width")]
    grid_halfwidth: f64,
    /// Lattice step is `π/(2m)`.
    #[serde(default = "NonuniqScenario::default_m")]
    m: usize,
    /// `nu`, `scaled:<c>` or `gauss`.
    #[serde(default = "NonuniqScenario::default_eta")]
    eta: String,
}

impl NonuniqScenario {
    fn default_k() -> usize {
        10_000
    }
    fn default_half_width() -> f64 {
        1000.0
    }
    fn default_m() -> usize {
        64
    }
    fn default_eta() -> String {
        "nu".into()
    }

    fn grid(&self) -> NonuniqGrid {
        NonuniqGrid { half_width: self.grid_halfwidth, m: self.m }
    }

    fn eta(&self) -> Result<Eta> {
        match self.eta.as_str() {
            "nu" => Ok(Eta::Nu),
            "gauss" => Ok(Eta::Gauss),
            s => {
                let c = s
                    .strip_prefix("scaled:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .filter(|c| *c > 0.0 && c.is_finite())
                    .ok_or_else(|| Error::Config(format!("eta must be nu, gauss or scaled:<c> with c > 0, got `{s}`")))?;
                Ok(Eta::Scaled { c })
            }
        }
    }
}

impl Validate for NonuniqScenario {
    fn validate(&self) -> Result<()> {
        self.eta()?;
        if self.k < 10 || self.m == 0 || !(self.grid_halfwidth > 0.0) {
            return Err(Error::Config("nonuniq needs K >= 10, m >= 1 and a positive grid half width".into()));
        }
        Ok(())
    }
}

impl Scenario for NonuniqScenario {
    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        vec![("mass_identity", 1e-6), ("cf_gap", 1e-4), ("convolution_tv", 1e-3), ("mu_nu_tv", 0.99), ("separation_tv", 0.01)]
    }

    fn run(&self, _rng: &RngSpec, tol: &Tolerances) -> Result<Run> {
        let grid = self.grid();
        let nu = build_nu(grid)?;
        let mu = build_mu(self.k)?;
        let mut checks = vec![
            Check::le("mass_identity", (mu.raw_mass + mu.omitted_mass - 1.0).abs(), tol.get("mass_identity")),
            Check::le("nu_tail_mass", nu.tail_mass, crate::nonuniq::MAX_NU_TAIL),
        ];
        let neq = verify_mu_neq_nu(&mu.measure, &nu.measure)?;
        checks.push(Check::le("mu_nu_cf_gap", neq.cf_agreement, tol.get("cf_gap")));
        checks.push(Check::ge("mu_nu_tv", neq.tv, tol.get("mu_nu_tv")));

        let eta = self.eta()?.build(grid)?;
        let r = verify_equal_convolutions(&eta, &mu.measure, &nu.measure)?;
        if r.band_limited {
            checks.push(Check::le("convolution_cf_gap", r.cf_gap, tol.get("cf_gap")));
            checks.push(Check::le("convolution_tv", r.tv, tol.get("convolution_tv")));
        } else {
            checks.push(Check::ge("separation_tv", r.tv, tol.get("separation_tv")));
        }

        let freqs = FreqGrid::band(CURVE_BAND, CURVE_DT)?;
        let phi_mu = to_charfn(&mu.measure.clone().into(), &freqs)?;
        let phi_nu = CharFn::from_fn(freqs.clone(), nu_charfn)?;
        let phi_eta = to_charfn(&eta.clone().into(), &freqs)?;
        let product = |a: &CharFn| -> Result<CharFn> {
            let v: Vec<Complex64> = a.values().iter().zip(phi_eta.values()).map(|(x, y)| x * y).collect();
            CharFn::new(freqs.clone(), v)
        };
        let artifacts = vec![
            Artifact::charfn("phi_mu_eta", product(&phi_mu)?),
            Artifact::charfn("phi_nu_eta", product(&phi_nu)?),
            Artifact::charfn("phi_mu", phi_mu),
            Artifact::charfn("phi_nu", phi_nu),
            Artifact::charfn("phi_eta", phi_eta),
            Artifact::measure("mu", mu.measure),
            Artifact::measure("mu_eta", r.mu_eta),
            Artifact::measure("nu_eta", r.nu_eta),
        ];
        Ok(Run { checks, artifacts })
    }
}
