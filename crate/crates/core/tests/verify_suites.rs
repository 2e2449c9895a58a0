use lepage_core::cone::ConeElement;
use lepage_core::lepage::IntegralBudget;
use lepage_core::spectral::SymmetricSign;
use lepage_core::verify::{
    eps_condition_test, lepage_vs_cms_test, phi_homogeneity_test, stability_test, TestBudget, VerificationReport,
};
use lepage_core::{make_cone, ConeSpec, Error, RadialLaw};

fn sign() -> SymmetricSign {
    SymmetricSign(ConeElement::Euclidean(vec![1.0]))
}

#[test]
fn phi_mutation_is_detected() {
    let cone = make_cone(&ConeSpec::euclidean(1)).unwrap();
    let law = RadialLaw::new(0.5).unwrap();
    let budget = TestBudget::new(20_000, 1e3, 3);
    let rep = phi_homogeneity_test(&cone.descriptor, &law, &sign(), 2.0, &cone.probes, &budget, true).unwrap();
    assert!(!rep.passed, "statistic {} threshold {}", rep.statistic, rep.threshold);
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let cone = make_cone(&ConeSpec::max_grid(vec![0.5, 1.0, 2.0])).unwrap();
    let law = RadialLaw::new(1.0).unwrap();
    let spectral = cone.default_spectral(false);
    let budget = TestBudget { resamples: 50, ..TestBudget::new(2_000, 100.0, 9) };
    let run = || stability_test(&cone.descriptor, &law, &*spectral, 1.0, 2.0, &cone.probes, &budget, false).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(VerificationReport::from_text(&a.to_text()).unwrap(), a);
    assert_eq!(a.csv_row().len(), VerificationReport::CSV_HEADER.len());
}

#[test]
fn stability_on_other_cones() {
    let grid: Vec<f64> = (0..=8).map(f64::from).collect();
    let cases = [
        (ConeSpec::max_grid(grid.clone()), 1.0, 200.0),
        (ConeSpec::time_stable(grid.clone()), 1.0, 20.0),
        (ConeSpec::time_stable(grid).with_nonnegative(true), 1.0, 20.0),
        (ConeSpec::atomic_measure(1), 0.5, 200.0),
    ];
    for (spec, alpha, r) in cases {
        let cone = make_cone(&spec).unwrap();
        let law = RadialLaw::new(alpha).unwrap();
        let spectral = cone.default_spectral(true);
        let budget = TestBudget { resamples: 100, ..TestBudget::new(10_000, r, 13) };
        let rep = stability_test(&cone.descriptor, &law, &*spectral, 1.0, 1.0, &cone.probes, &budget, false).unwrap();
        assert!(rep.passed, "{}: statistic {} threshold {}", spec.kind, rep.statistic, rep.threshold);
        let bad = stability_test(&cone.descriptor, &law, &*spectral, 1.0, 1.0, &cone.probes, &budget, true).unwrap();
        if alpha != 1.0 {
            assert!(!bad.passed, "{}: mutation not detected", spec.kind);
        }
    }
}

#[test]
fn cms_gate_and_eps_suite() {
    let budget = TestBudget::new(10, 10.0, 0);
    assert!(matches!(lepage_vs_cms_test(2.0, &budget, false), Err(Error::Domain(_))));
    let cone = make_cone(&ConeSpec::euclidean(1)).unwrap();
    let ib = IntegralBudget { draws: 1, ..IntegralBudget::default() };
    let finite = eps_condition_test(&cone.descriptor, &RadialLaw::new(0.7).unwrap(), &sign(), &cone.probes, &ib).unwrap();
    assert!(finite.passed);
    let divergent = eps_condition_test(&cone.descriptor, &RadialLaw::new(2.5).unwrap(), &sign(), &cone.probes, &ib).unwrap();
    assert!(!divergent.passed);
    assert_eq!(divergent.statistic, cone.probes.len() as f64);
}
