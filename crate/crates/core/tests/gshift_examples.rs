use lecam::gshift::*;
use lecam::stats::RngSpec;

fn rng(seed: u64) -> RngSpec {
    RngSpec::new(seed, 8).unwrap()
}

#[test]
fn path_marginals() {
    let m = 64;
    for (theta, want) in [(SignalParam::zero(m).unwrap(), 0.0), (SignalParam::from_fn(m, |_| 1.0).unwrap(), 1.0)] {
        let ends = rng(1).replicate(10_000, |r| simulate_paths(1, &theta, r).unwrap().path(0)[m]);
        let (mean, se) = lecam::stats::mean_and_se(&ends).unwrap();
        assert!((mean - want).abs() < 3.0 * se);
        assert!((se * se * 10_000.0 - 1.0).abs() < 0.05);
    }
    let h = SignalParam::from_fn(m, |u| 2.0 * u).unwrap().primitive();
    assert!((h[m] - 1.0).abs() < 1e-12);
}

#[test]
fn mean_estimator_covariance_is_brownian() {
    let theta = SignalParam::from_fn(64, |u| u).unwrap();
    let mom = mean_estimator_moments(&theta, 10, 10_000, &[0.25, 1.0], &rng(2)).unwrap();
    assert!((mom.cov[0][0] / 0.25 - 1.0).abs() < 0.1);
    assert!((mom.cov[1][1] - 1.0).abs() < 0.1);
    assert!((mom.cov[0][1] / 0.25 - 1.0).abs() < 0.1);
    let var_s = mean_estimator_moments(&SignalParam::zero(64).unwrap(), 100, 10_000, &[1.0], &rng(3)).unwrap();
    // Var(S(1)) = 1/100, scaled by n.
    assert!((var_s.cov[0][0] - 1.0).abs() < 0.2);
}

#[test]
fn girsanov_density_has_unit_mean() {
    let m = 512;
    for (k, theta) in [
        SignalParam::from_fn(m, |u| u).unwrap(),
        SignalParam::from_fn(m, |_| 1.0).unwrap(),
        SignalParam::from_fn(m, |u| 2.0 * u).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let g = girsanov_unit_mean(theta, 5, 10_000, &rng(10 + k as u64)).unwrap();
        assert!(g.pass, "{k}: {g:?}");
    }
}

#[test]
fn girsanov_is_stable_under_grid_refinement() {
    let coarse = girsanov_unit_mean(&SignalParam::from_fn(128, |u| u).unwrap(), 5, 10_000, &rng(20)).unwrap();
    let fine = girsanov_unit_mean(&SignalParam::from_fn(512, |u| u).unwrap(), 5, 10_000, &rng(21)).unwrap();
    assert!((coarse.mean - fine.mean).abs() <= 3.0 * coarse.se.hypot(fine.se));
}

#[test]
fn girsanov_change_of_measure_matches_closed_form() {
    let theta = SignalParam::from_fn(128, |_| 1.0).unwrap();
    let c = girsanov_change_of_measure(&theta, 3, 0.5, 20_000, &rng(22)).unwrap();
    assert!(c.pass, "{c:?}");
    // Φ(0.5 − 1)
    assert!((c.exact - 0.308_537_538_725_986_9).abs() < 1e-12);
    assert!((c.direct_mean - c.exact).abs() < 3.0 * c.direct_se);
}

#[test]
fn equivariance_of_path_estimators() {
    let m = 64;
    let theta0 = SignalParam::zero(m).unwrap();
    let etas = [SignalParam::from_fn(m, |_| 1.0).unwrap(), SignalParam::from_fn(m, |u| 3.0 * u).unwrap()];
    let times = [0.25, 0.5, 1.0];
    for est in [PathEstimator::Mean, PathEstimator::NoisyMean { noise_c: 0.5 }] {
        let rep = equivariance_check(&est, &theta0, &etas, 5, 10_000, &times, &rng(30)).unwrap();
        assert!(rep.pass, "{est:?}: {rep:?}");
    }
    let big = [SignalParam::from_fn(m, |_| 3.0).unwrap()];
    let clipped = equivariance_check(&PathEstimator::Clipped, &theta0, &big, 5, 10_000, &times, &rng(31)).unwrap();
    assert!(!clipped.pass);
}

#[test]
fn sufficiency_identity() {
    let m = 64;
    let times = [0.25, 0.5, 1.0];
    for (k, eta) in [
        SignalParam::zero(m).unwrap(),
        SignalParam::from_fn(m, |_| 1.0).unwrap(),
        SignalParam::from_fn(m, |u| 6.0 * u * (1.0 - u) * 2f64.sqrt()).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let ks = sufficiency_identity_check(eta, 4, 10_000, &times, &rng(40 + k as u64)).unwrap();
        assert!(ks.iter().all(|r| r.ks <= 0.02), "{k}: {ks:?}");
    }
}

#[test]
fn marginal_convolution_factors() {
    let m = 64;
    let theta0 = SignalParam::zero(m).unwrap();
    let times = [0.25, 0.5, 1.0];
    let opts = lecam::conv::DecomposeOptions::default();
    let noisy =
        marginal_convolution_check(&PathEstimator::NoisyMean { noise_c: 0.5 }, &theta0, 4, 100_000, &times, opts, &rng(50))
            .unwrap();
    for r in &noisy {
        assert!(r.nu_sup_error.unwrap() <= 0.03, "t={} err={:?}", r.t, r.nu_sup_error);
        assert_eq!(r.report.verdict, lecam::dist::SpreadVerdict::Probability);
    }
    let mean = marginal_convolution_check(&PathEstimator::Mean, &theta0, 4, 10_000, &times, opts, &rng(51)).unwrap();
    assert!(mean.iter().all(|r| r.nu_sup_error.unwrap() < 1e-12));
    let biased =
        marginal_convolution_check(&PathEstimator::BiasedMean { bias: 0.4 }, &theta0, 4, 10_000, &times, opts, &rng(52))
            .unwrap();
    for r in &biased {
        assert!(r.nu_sup_error.unwrap() < 1e-9, "{:?}", r.nu_sup_error);
        assert!((r.report.nu_mean - 0.4 * r.t).abs() < 1e-9);
    }
}
