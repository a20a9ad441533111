use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SignalParam;
use crate::error::{invalid, Result};

/// Polynomial `Σ c_k u^k` with exact non-negative rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| c.is_negative()) {
            return Err(invalid("polynomial needs non-negative coefficients"));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn is_non_negative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, k: usize| p.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero);
        Poly { coeffs: (0..len).map(|k| get(self, k) + get(other, k)).collect() }
    }

    pub fn to_signal(&self, steps: usize) -> Result<SignalParam> {
        SignalParam::from_fn(steps, |u| self.eval(u))
    }
}

/// Random polynomials of degree at most `max_degree` with coefficients `a/b`, `b <= max_den`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyParamGen {
    pub max_degree: usize,
    pub max_den: u32,
}

impl Default for PolyParamGen {
    fn default() -> Self {
        Self { max_degree: 4, max_den: 16 }
    }
}

impl PolyParamGen {
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Poly> {
        if self.max_den == 0 {
            return Err(invalid("denominator bound must be positive"));
        }
        let degree = rng.gen_range(0..=self.max_degree);
        let coeffs = (0..=degree)
            .map(|_| {
                let den = rng.gen_range(1..=self.max_den);
                let num = rng.gen_range(0..=2 * den);
                BigRational::new(BigInt::from(num), BigInt::from(den))
            })
            .collect();
        Poly::new(coeffs)
    }
}
