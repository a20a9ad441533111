use num_complex::Complex64;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dist::{CharFn, FreqGrid};
use crate::error::{invalid, Result};

/// Frequencies on each axis of the lattice used by the two-dimensional CF statistics.
pub const LATTICE_AXIS: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

const CHUNK: usize = 4096;

/// Right-continuous step function `x -> #{draws <= x} / n`.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("empirical CDF of an empty sample"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }
}

pub fn empirical_cdf(values: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let f = EmpiricalCdf::new(values)?;
    Ok(grid.iter().map(|&x| f.eval(x)).collect())
}

/// `(1/n) Σ e^{i t x_j}` on `freqs`.
pub fn empirical_charfn(values: &[f64], freqs: &FreqGrid) -> Result<CharFn> {
    if values.is_empty() {
        return Err(invalid("empirical CF of an empty sample"));
    }
    let n = values.len() as f64;
    CharFn::from_fn(freqs.clone(), |t| values.iter().map(|&x| Complex64::from_polar(1.0, t * x)).sum::<Complex64>() / n)
}

/// `sup_x |F̂_a(x) - F̂_b(x)|` over the pooled sample.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("two-sample KS needs non-empty samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut sup) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// `sup_x |F̂(x) - F(x)|` for a continuous reference CDF.
pub fn ks_to_cdf(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("KS distance of an empty sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut sup = 0.0f64;
    for (k, &x) in v.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs());
    }
    Ok(sup)
}

/// KS distance of the sample to `N(mean, var)`.
pub fn gaussian_check(values: &[f64], mean: f64, var: f64) -> Result<f64> {
    if !(var > 0.0) {
        return Err(invalid("variance must be positive"));
    }
    let law = Normal::new(mean, var.sqrt()).map_err(|e| invalid(e.to_string()))?;
    ks_to_cdf(values, |x| law.cdf(x))
}

/// Sample standard deviation over `sqrt(count)`.
pub fn mc_standard_error(values: &[f64]) -> Result<f64> {
    Ok(mean_and_se(values)?.1)
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(invalid("standard error needs at least two values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Sample covariance of paired values with a delta-method standard error.
pub fn covariance_and_se(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(invalid("covariance needs paired samples"));
    }
    let ma = mean_and_se(a)?.0;
    let mb = mean_and_se(b)?.0;
    let products: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    mean_and_se(&products)
}

/// Joint empirical CF of weighted pairs on the 9×9 lattice, row index for `s`, column for `t`.
fn joint_ecf(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> [[Complex64; 9]; 9] {
    let partial: Vec<([[Complex64; 9]; 9], f64)> = (0..x.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut acc = [[Complex64::new(0.0, 0.0); 9]; 9];
            let mut wsum = 0.0;
            for &i in idx {
                let w = weights.map_or(1.0, |w| w[i]);
                wsum += w;
                let ex: Vec<Complex64> = LATTICE_AXIS.iter().map(|s| Complex64::from_polar(w, s * x[i])).collect();
                let ey: Vec<Complex64> = LATTICE_AXIS.iter().map(|t| Complex64::from_polar(1.0, t * y[i])).collect();
                for (a, row) in ex.iter().zip(acc.iter_mut()) {
                    for (b, cell) in ey.iter().zip(row.iter_mut()) {
                        *cell += a * b;
                    }
                }
            }
            (acc, wsum)
        })
        .collect();
    let mut total = [[Complex64::new(0.0, 0.0); 9]; 9];
    let mut wsum = 0.0;
    for (acc, w) in partial {
        wsum += w;
        for (r, ar) in total.iter_mut().zip(acc.iter()) {
            for (c, ac) in r.iter_mut().zip(ar.iter()) {
                *c += ac;
            }
        }
    }
    for r in total.iter_mut() {
        for c in r.iter_mut() {
            *c /= wsum;
        }
    }
    total
}

/// `sup |ψ(s,t) - ψ(s,0)ψ(0,t)|` over the 9×9 lattice in `[-2,2]²`.
pub fn independence_check(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || x.len() != y.len() {
        return Err(invalid("independence check needs non-empty paired samples"));
    }
    let psi = joint_ecf(x, y, None);
    let mid = 4;
    let mut sup = 0.0f64;
    for (i, row) in psi.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            sup = sup.max((v - psi[i][mid] * psi[mid][j]).norm());
        }
    }
    Ok(sup)
}

/// Paired sample with optional (unnormalized) weights.
#[derive(Clone, Copy, Debug)]
pub struct Pairs<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub weights: Option<&'a [f64]>,
}

/// `sup |ψ_a - ψ_b|` of the (weighted) joint empirical CFs over the 9×9 lattice.
pub fn joint_cf_gap(a: Pairs<'_>, b: Pairs<'_>) -> Result<f64> {
    for p in [a, b] {
        if p.x.is_empty() || p.x.len() != p.y.len() || p.weights.is_some_and(|w| w.len() != p.x.len()) {
            return Err(invalid("joint CF needs non-empty paired samples"));
        }
    }
    let pa = joint_ecf(a.x, a.y, a.weights);
    let pb = joint_ecf(b.x, b.y, b.weights);
    Ok(pa.iter().flatten().zip(pb.iter().flatten()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_draw() {
        assert_eq!(empirical_cdf(&[0.0], &[-1.0, 0.0, 1.0]).unwrap(), vec![0.0, 1.0, 1.0]);
        let phi = empirical_charfn(&[0.0], &FreqGrid::band(3.0, 0.5).unwrap()).unwrap();
        assert!(phi.values().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() == 0.0));
    }

    #[test]
    fn ks_basics() {
        let a = [0.1, 0.5, 0.9];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0], &[1.0]).unwrap(), 1.0);
        let b = [0.2, 0.3];
        assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&b, &a).unwrap());
    }

    #[test]
    fn standard_error_by_hand() {
        assert_eq!(mc_standard_error(&[0.0, 2.0]).unwrap(), 1.0);
        assert_eq!(mc_standard_error(&[3.0; 5]).unwrap(), 0.0);
        assert!(mc_standard_error(&[1.0]).is_err());
    }

    #[test]
    fn constant_partner_is_independent() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let y = vec![0.7; 100];
        assert!(independence_check(&x, &y).unwrap() < 1e-12);
    }
}
