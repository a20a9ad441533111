use lecam::nonuniq::*;
use std::time::Instant;

#[test]
fn nu_transform_values() {
    let nu = build_nu(NonuniqGrid::default()).unwrap();
    assert!(nu.tail_mass < 1e-3);
    let freqs = lecam::dist::FreqGrid::new(vec![-2.0, -0.5, 0.0, 0.5, 2.0]).unwrap();
    let phi = lecam::dist::to_charfn(&nu.measure.into(), &freqs).unwrap();
    let v = phi.values();
    assert!((v[2].re - 1.0).abs() < 1e-12);
    assert!((v[3].re - 0.5).abs() < 1e-3);
    assert!(v[4].norm() < 1e-3);
}

#[test]
fn narrow_grid_is_rejected() {
    assert!(build_nu(NonuniqGrid { half_width: 200.0, m: 64 }).is_err());
}

#[test]
fn truncation_converges() {
    let mut prev = (f64::INFINITY, f64::INFINITY);
    let freqs = lecam::dist::FreqGrid::band(1.0, 0.01).unwrap();
    for k in [100, 200, 400, 800, 1600, 3200, 6400, 10_000] {
        let mu = build_mu(k).unwrap();
        let defect = 1.0 - mu.raw_mass;
        let cf = lecam::dist::to_charfn(&mu.measure.into(), &freqs).unwrap().sup_error(1.0, nu_charfn);
        assert!(defect < prev.0 && cf < prev.1, "K={k}: {defect} {cf}");
        prev = (defect, cf);
    }
}

#[test]
fn counterexample() {
    let grid = NonuniqGrid::default();
    let start = Instant::now();
    let nu = build_nu(grid).unwrap().measure;
    let mu = build_mu(10_000).unwrap();
    assert!((mu.raw_mass + mu.omitted_mass - 1.0).abs() <= 1e-6);

    let neq = verify_mu_neq_nu(&mu.measure, &nu).unwrap();
    assert!(neq.pass, "{neq:?}");
    assert!((neq.phi_mu_at_1_5 - 0.5).abs() < 1e-4);

    for eta in [Eta::Nu, Eta::Scaled { c: 2.0 }, Eta::Scaled { c: 4.0 }] {
        let e = eta.build(grid).unwrap();
        let r = verify_equal_convolutions(&e, &mu.measure, &nu).unwrap();
        assert!(r.pass, "{eta:?}: {r:?}");
    }
    let g = verify_equal_convolutions(&Eta::Gauss.build(grid).unwrap(), &mu.measure, &nu).unwrap();
    assert!(!g.band_limited && g.tv > 0.01 && !g.pass, "{g:?}");
    eprintln!("counterexample checks took {:?}", start.elapsed());
}
