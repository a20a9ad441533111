use lecam::lan::*;
use lecam::stats::RngSpec;
use statrs::distribution::{ContinuousCDF, Normal};

fn rng(seed: u64) -> RngSpec {
    RngSpec::new(seed, 8).unwrap()
}

const GAUSS: GaussianLocationModel = GaussianLocationModel { theta0: 0.5 };

fn gamma() -> GammaScaleModel {
    GammaScaleModel::new(2.0, 0.0).unwrap()
}

#[test]
fn gaussian_remainder_is_exactly_zero() {
    for n in [10, 100] {
        for theta in [0.0, 1.0, -2.0] {
            let r = lan_remainder(&GAUSS, n, theta, 10_000, &rng(1)).unwrap();
            assert!(r.max_abs <= 1e-12, "n={n} θ={theta}: {}", r.max_abs);
            assert_eq!(r.nonfinite, 0);
        }
    }
}

#[test]
fn gamma_remainder_shrinks_with_n() {
    let small = lan_remainder(&gamma(), 10, 1.0, 10_000, &rng(2)).unwrap();
    let large = lan_remainder(&gamma(), 1000, 1.0, 10_000, &rng(2)).unwrap();
    assert!(large.exceed_fraction < small.exceed_fraction);
    let zero = lan_remainder(&gamma(), 50, 0.0, 1000, &rng(2)).unwrap();
    assert_eq!(zero.max_abs, 0.0);
}

#[test]
fn central_sequence_clt() {
    assert!(central_clt_check(&GAUSS, 7, 0.7, 100_000, &rng(3)).unwrap() <= 0.006);
    assert!(central_clt_check(&gamma(), 1000, 0.0, 100_000, &rng(4)).unwrap() <= 0.02);
    assert!(central_clt_check(&gamma(), 1000, 1.0, 100_000, &rng(5)).unwrap() <= 0.03);
}

#[test]
fn change_of_measure_examples() {
    let s = Statistic::CentralSeqBelow { c: 1.0 };
    let zero = change_of_measure_check(&GAUSS, s, 100, 0.0, 10_000, DEFAULT_CLIP, &rng(6)).unwrap();
    assert_eq!(zero.difference, 0.0);
    assert!(zero.pass);

    let c = change_of_measure_check(&GAUSS, s, 100, 1.0, 10_000, DEFAULT_CLIP, &rng(7)).unwrap();
    let exact = Normal::new(0.0, 1.0).unwrap().cdf(0.0);
    assert!(c.pass);
    assert!((c.direct_mean - exact).abs() <= 3.0 * c.direct_se);
    assert!((c.reweighted_mean - exact).abs() <= 3.0 * c.reweighted_se);

    let g = change_of_measure_check(&gamma(), Statistic::CentralSeq, 200, 0.5, 10_000, DEFAULT_CLIP, &rng(8)).unwrap();
    assert!(g.pass, "{g:?}");
}

#[test]
fn likelihood_ratio_has_unit_mean() {
    for theta in [0.5, 1.0, -1.5] {
        assert!(unit_mean_check(&GAUSS, 50, theta, 10_000, &rng(9)).unwrap().pass);
        assert!(unit_mean_check(&gamma(), 50, theta, 10_000, &rng(10)).unwrap().pass);
    }
}

#[test]
fn third_lemma_reweighting() {
    let zero = third_lemma_limit_check(&GAUSS, PairSecond::RootNMean, &[100], 0.0, 10_000, &rng(11)).unwrap();
    assert!(zero.gaps[0] < 1e-12);
    let g = third_lemma_limit_check(&GAUSS, PairSecond::RootNMean, &[100], 1.0, 100_000, &rng(12)).unwrap();
    assert!(g.gaps[0] <= 0.03, "{:?}", g.gaps);
    let t = third_lemma_limit_check(&gamma(), PairSecond::CentralSeq, &[20, 2000], 1.0, 100_000, &rng(13)).unwrap();
    assert!(t.gaps[1] < t.gaps[0], "{:?}", t.gaps);
    assert!(!t.weight_collapse);
}

#[test]
fn weight_collapse_is_flagged() {
    let c = change_of_measure_check(&GAUSS, Statistic::CosCentralSeq, 100, 8.0, 2000, DEFAULT_CLIP, &rng(14)).unwrap();
    assert!(c.weight_collapse);
    assert!(!c.pass);
}
