use acml_core::classify::*;
use acml_core::fixtures;
use acml_core::sampling::SampleSpec;
use proptest::prelude::*;

fn spec(n: usize) -> SampleSpec {
    SampleSpec::cube(n, -1.0, 1.0, 40, 17).unwrap()
}

#[test]
fn classification_of_fixtures() {
    let b = classify(&fixtures::fixture_b(), &spec(3)).unwrap();
    assert!(b.sasakian.holds && b.ack_full.holds);
    assert!(b.predicates().iter().all(|(_, p)| p.residual.max <= 1e-10));

    let c = classify(&fixtures::fixture_c(), &spec(3)).unwrap();
    assert!(c.almost_hermitian.holds && c.ack_full.holds && !c.contact_metric.holds);
    assert!((c.contact_metric.residual.max - 0.5).abs() <= 1e-9);

    let f = classify(&fixtures::fixture_f(), &spec(5)).unwrap();
    assert!(f.almost_hermitian.holds && !f.ack_horizontal.holds);
    // |dΩ(e₃, e₁, e₂)| = e₃u/3 with d normalized by 1/(k+1)
    let w = f.residuals["d_omega_horizontal"].max;
    assert!((w - 0.1 / 3.0).abs() <= 0.2 * 0.1 / 3.0, "{w}");
}

#[test]
fn implication_lattice_holds() {
    let mut all = fixtures::named();
    all.push(("curved", fixtures::curved()));
    for (name, s) in all {
        let r = classify(&s, &spec(s.n())).unwrap();
        assert!(!r.sasakian.holds || (r.normal.holds && r.contact_metric.holds), "{name}");
        assert!(!r.ack_full.holds || r.ack_horizontal.holds, "{name}");
        let nh = r.residuals["nijenhuis_horizontal"].within(r.tolerance);
        let nm = r.residuals["nijenhuis_mixed"].within(r.tolerance);
        assert_eq!(r.almost_hermitian.holds, nh && nm, "{name}");
        let n1 = check_theorem_n1(&s, &spec(s.n())).unwrap();
        assert_eq!(n1.verdict, Verdict::Pass, "{name}: {:?}", n1.notes);
    }
}

#[test]
fn q4_identity_on_fixtures() {
    for (name, s) in fixtures::named() {
        let r = check_q4(&s, &spec(s.n())).unwrap();
        assert!(r.max_residual <= 1e-6, "{name}: {}", r.max_residual);
        assert!(r.residuals["reduced_agreement"].max <= 1e-10);
    }
    let a = check_q4(&fixtures::fixture_a(), &spec(3)).unwrap();
    assert_eq!(a.max_residual, 0.0);
}

#[test]
fn theorem7_evidence() {
    let c = check_theorem7(&fixtures::fixture_c(), &spec(3)).unwrap();
    assert_eq!(c.verdict, Verdict::Pass);
    assert!(c.residuals["nabla1_phi"].max <= 1e-9);
    let f = check_theorem7(&fixtures::fixture_f(), &spec(5)).unwrap();
    assert_eq!(f.verdict, Verdict::Pass);
    assert!(f.residuals["nabla1_phi"].max >= 0.04);
    let d = check_theorem7(&fixtures::fixture_d(), &spec(3)).unwrap();
    assert_eq!(d.verdict, Verdict::Info);
    assert!(d.notes.iter().any(|n| n.contains("convention discrepancy")));
    assert!(d.residuals["nabla1_phi"].max <= 1e-9);
    assert!(d.residuals["d_omega_horizontal"].max <= 1e-9);
    assert!(d.residuals["d_omega_full"].max > 1e-3);
}

#[test]
fn theorem8_evidence() {
    let b = check_theorem8(&fixtures::fixture_b(), &spec(3)).unwrap();
    assert!(b.max_residual <= 1e-8 && b.verdict == Verdict::Pass);
    assert_eq!(check_theorem8(&fixtures::fixture_a(), &spec(3)).unwrap().max_residual, 0.0);
    let f = check_theorem8(&fixtures::fixture_f(), &spec(5)).unwrap();
    assert!(f.max_residual > f.tolerance);
    assert!(f.residuals["nabla_phi"].max > f.tolerance);
    assert_eq!(f.verdict, Verdict::Pass);
}

#[test]
fn theorem5_torsion() {
    for s in [fixtures::fixture_b(), fixtures::fixture_c(), fixtures::random_structure(5, 3)] {
        let r = check_theorem5_torsion(&s, &spec(s.n())).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.notes);
        assert!(r.residuals["torsion_vs_target"].max <= 1e-10);
    }
    let c = check_theorem5_torsion(&fixtures::fixture_c(), &spec(3)).unwrap();
    assert_eq!(c.residuals["target_quarter_pn"].max, 0.0);
}

#[test]
fn reports_are_deterministic() {
    let s = fixtures::fixture_d();
    assert_eq!(classify(&s, &spec(3)).unwrap(), classify(&s, &spec(3)).unwrap());
    assert_eq!(check_q4(&s, &spec(3)).unwrap(), check_q4(&s, &spec(3)).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn q4_holds_on_random_structures(seed in 0u64..100_000) {
        let s = fixtures::random_structure(3, seed);
        let r = check_q4(&s, &SampleSpec::cube(3, -1.0, 1.0, 4, seed).unwrap()).unwrap();
        prop_assert!(r.max_residual <= 1e-9, "{}", r.max_residual);
    }

    #[test]
    fn lattice_on_random_structures(seed in 0u64..100_000) {
        let s = fixtures::random_structure(3, seed);
        let r = classify(&s, &SampleSpec::cube(3, -1.0, 1.0, 4, seed).unwrap()).unwrap();
        prop_assert!(!r.sasakian.holds || (r.normal.holds && r.contact_metric.holds));
        prop_assert!(!r.ack_full.holds || r.ack_horizontal.holds);
    }
}
