use serde::{Deserialize, Serialize};

use crate::dist::{convolve_grids, GridMeasure, ProductGridMeasure};
use crate::error::{invalid, Error, Result};

/// Markov kernel `K(x, ·) = ν ∗ ε_{f(x)}` with linear `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionKernel {
    /// Noise `ν`, one factor per output coordinate.
    pub noise: ProductGridMeasure,
    /// Matrix of `f`, rows indexed by output coordinate.
    pub map: Vec<Vec<f64>>,
}

impl ConvolutionKernel {
    pub fn identity(noise: GridMeasure) -> Result<Self> {
        Ok(Self { noise: ProductGridMeasure::from_factors(vec![noise])?, map: vec![vec![1.0]] })
    }

    /// Diagonal of `f`; other maps are not supported.
    fn diagonal(&self, d: usize) -> Result<Vec<f64>> {
        if self.map.len() != d || self.map.iter().any(|r| r.len() != d) {
            return Err(invalid(format!("map must be a {d}x{d} matrix")));
        }
        for (i, row) in self.map.iter().enumerate() {
            if row.iter().enumerate().any(|(j, v)| i != j && *v != 0.0) {
                return Err(Error::Unsupported("only diagonal maps can be applied on product lattices".into()));
            }
        }
        Ok((0..d).map(|i| self.map[i][i]).collect())
    }
}

fn apply_coordinate(p: &GridMeasure, h: f64, a: f64, noise: &GridMeasure) -> Result<GridMeasure> {
    if a == 0.0 {
        return Err(Error::Unsupported("a zero diagonal entry collapses the coordinate".into()));
    }
    let image = p.shift(h)?.scale(a)?;
    let image = if image.aligned_with(noise) {
        image
    } else {
        image.regrid(noise.origin(), noise.step())?.measure
    };
    convolve_grids(noise, &image)
}

/// `∫ K(x, ·) d(P ∗ ε_h)(x) = ν ∗ f(P ∗ ε_h)`, computed coordinate-wise on product lattices.
pub fn apply_convolution_kernel(k: &ConvolutionKernel, p: &ProductGridMeasure, h: &[f64]) -> Result<ProductGridMeasure> {
    let d = p.dim();
    if h.len() != d || k.noise.dim() != d {
        return Err(invalid("shift, kernel and measure dimensions differ"));
    }
    let diag = k.diagonal(d)?;
    let ProductGridMeasure::Factors { factors } = p else {
        if d == 1 {
            let q = ProductGridMeasure::from_factors(vec![p.marginal(0)?])?;
            return apply_convolution_kernel(k, &q, h);
        }
        return Err(Error::Unsupported("kernels act on independent factors only".into()));
    };
    let out = factors
        .iter()
        .enumerate()
        .map(|(i, f)| apply_coordinate(f, h[i], diag[i], &k.noise.marginal(i)?))
        .collect::<Result<Vec<_>>>()?;
    ProductGridMeasure::from_factors(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{distance_tv, Law};

    fn one(m: GridMeasure) -> ProductGridMeasure {
        ProductGridMeasure::from_factors(vec![m]).unwrap()
    }

    fn tv(a: &ProductGridMeasure, b: &GridMeasure) -> f64 {
        distance_tv(&a.marginal(0).unwrap().into(), &b.clone().into()).unwrap()
    }

    #[test]
    fn point_noise_with_identity_is_a_shift() {
        let p = Law::Normal { mean: 0.0, var: 1.0 }.discretize(0.01).unwrap();
        let k = ConvolutionKernel::identity(GridMeasure::point_mass(0.0, 0.01).unwrap()).unwrap();
        let out = apply_convolution_kernel(&k, &one(p.clone()), &[0.3]).unwrap();
        assert!(tv(&out, &p.shift(0.3).unwrap()) < 1e-12);
    }

    #[test]
    fn normal_kernel_on_normal() {
        let n1 = Law::Normal { mean: 0.0, var: 1.0 }.discretize(0.01).unwrap();
        let n2 = Law::Normal { mean: 0.0, var: 2.0 }.discretize(0.01).unwrap();
        let k = ConvolutionKernel::identity(n1.clone()).unwrap();
        let out = apply_convolution_kernel(&k, &one(n1), &[0.0]).unwrap();
        assert!(tv(&out, &n2) < 1e-4);
    }

    #[test]
    fn commutes_with_parameter_shift() {
        let p = Law::Exponential { rate: 1.0 }.discretize(0.01).unwrap();
        let noise = Law::Uniform { lo: 0.0, hi: 0.5 }.discretize(0.02).unwrap();
        let k = ConvolutionKernel { noise: one(noise), map: vec![vec![2.0]] };
        let at0 = apply_convolution_kernel(&k, &one(p.clone()), &[0.0]).unwrap().marginal(0).unwrap();
        let at_h = apply_convolution_kernel(&k, &one(p), &[0.7]).unwrap();
        assert!(tv(&at_h, &at0.shift(1.4).unwrap()) < 1e-6);
    }

    #[test]
    fn off_diagonal_maps_are_unsupported() {
        let m = GridMeasure::point_mass(0.0, 1.0).unwrap();
        let k = ConvolutionKernel {
            noise: ProductGridMeasure::from_factors(vec![m.clone(), m.clone()]).unwrap(),
            map: vec![vec![1.0, 1.0], vec![0.0, 1.0]],
        };
        let p = ProductGridMeasure::from_factors(vec![m.clone(), m]).unwrap();
        assert!(matches!(apply_convolution_kernel(&k, &p, &[0.0, 0.0]), Err(Error::Unsupported(_))));
    }
}
