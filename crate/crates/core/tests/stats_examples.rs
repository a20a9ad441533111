use lecam::dist::FreqGrid;
use lecam::stats::*;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

fn normals(seed: u64, n: usize) -> Vec<f64> {
    RngSpec::new(seed, 8).unwrap().replicate(n, |r| r.sample(StandardNormal))
}

#[test]
fn normal_ecf_close_to_gaussian_transform() {
    let x = normals(1, 100_000);
    let phi = empirical_charfn(&x, &FreqGrid::band(3.0, 0.05).unwrap()).unwrap();
    assert!(phi.sup_error(3.0, |t| Complex64::new((-t * t / 2.0).exp(), 0.0)) <= 0.02);
}

#[test]
fn exponential_ks_to_cdf() {
    let x: Vec<f64> = RngSpec::new(2, 8).unwrap().replicate(100_000, |r| r.sample(Exp1));
    assert!(ks_to_cdf(&x, |v| 1.0 - (-v).exp()).unwrap() <= 0.006);
}

#[test]
fn two_sample_ks() {
    let a = normals(3, 100_000);
    let b = normals(4, 100_000);
    assert!(ks_two_sample(&a, &b).unwrap() <= 0.01);
    let c = normals(5, 10_000);
    let d: Vec<f64> = normals(6, 10_000).into_iter().map(|v| v + 1.0).collect();
    assert!(ks_two_sample(&c, &d).unwrap() >= 0.3);
}

#[test]
fn independence_statistics() {
    let x = normals(7, 10_000);
    assert!(independence_check(&x, &x).unwrap() >= 0.1);
    let c = vec![2.5; x.len()];
    assert!(independence_check(&x, &c).unwrap() <= 2.0 / (x.len() as f64).sqrt());
    let a = normals(8, 100_000);
    let b = normals(9, 100_000);
    assert!(independence_check(&a, &b).unwrap() <= 0.02);
}

#[test]
fn gaussian_check_examples() {
    let x = normals(10, 100_000);
    assert!(gaussian_check(&x, 0.0, 1.0).unwrap() <= 0.006);
    assert!(gaussian_check(&x, 1.0, 1.0).unwrap() >= 0.3);
    assert!(gaussian_check(&x, 0.0, 0.0).is_err());
}

#[test]
fn standard_error_of_normal_mean() {
    let se = mc_standard_error(&normals(11, 10_000)).unwrap();
    assert!((se - 0.01).abs() <= 0.002);
}

#[test]
fn ecf_invariants_hold_exactly() {
    let x = normals(12, 1000);
    let phi = empirical_charfn(&x, &FreqGrid::band(4.0, 0.1).unwrap()).unwrap();
    let v = phi.values();
    let mid = v.len() / 2;
    assert_eq!(v[mid], Complex64::new(1.0, 0.0));
    for i in 0..mid {
        assert_eq!(v[i], v[v.len() - 1 - i].conj());
    }
}

#[test]
fn sampling_is_reproducible_under_thread_scheduling() {
    let spec = RngSpec::new(99, 16).unwrap();
    let a: Vec<f64> = spec.replicate(50_000, |r| r.sample(StandardNormal));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b: Vec<f64> = pool.install(|| spec.replicate(50_000, |r| r.sample(StandardNormal)));
    assert_eq!(a, b);
    let s = SampleSet::from_column(a).unwrap().with_seed(spec);
    assert_eq!(s.seed_info(), Some(spec));
}
