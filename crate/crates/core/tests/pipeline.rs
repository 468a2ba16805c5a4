use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use sqtwist::certify::{
    build_certificate, compute_twist_set, points_first_twist_set, verify_certificate,
    CertMetadata, Certificate, CertifyError, TwistSetOptions, Verdict, Violation,
};
use sqtwist::curve::{
    OracleConfig, ParityModel, RankOracle, RankTable, TableEntry, WeierstrassCurve,
    WitnessStatus,
};
use sqtwist::parasearch::{brute_force_search, guided_search, BruteLimits, GuidedConfig, Parallelepiped};

fn mordell_17() -> WeierstrassCurve {
    WeierstrassCurve::from_integers([0, 0, 0, 0, 17]).unwrap()
}

fn assert_round_trip(cert: &Certificate) {
    assert_eq!(verify_certificate(cert), Verdict::Valid);
    let back = Certificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(&back, cert);
    assert_eq!(back.to_json(), cert.to_json());
    assert_eq!(verify_certificate(&back), Verdict::Valid);
}

#[test]
fn synthetic_three_dimensional_certificate() {
    let tw = points_first_twist_set(&mordell_17(), 2000, 200).unwrap();
    let kernels = sqtwist::arith::squarefree_kernels(2000);
    assert!(tw.set.iter().all(|d| tw.kernel_point(kernels[d as usize]).is_some()));
    let found = brute_force_search(&tw.set, 3, BruteLimits::default()).found;
    let p = found.first().expect("a strict 3-parallelepiped");
    let cert = build_certificate(&tw, p, CertMetadata::new("brute")).unwrap();
    assert_eq!(cert.entries.len(), 8);
    assert_round_trip(&cert);
}

#[test]
fn guided_result_on_synthetic_set_certifies() {
    let tw = points_first_twist_set(&mordell_17(), 20_000, 200).unwrap();
    let outcome = guided_search(&tw.set, 2, &BTreeSet::new(), &GuidedConfig::default());
    let p = outcome.found().expect("guided search finds a square");
    let cert = build_certificate(&tw, p, CertMetadata::new("guided")).unwrap();
    assert_round_trip(&cert);
}

#[test]
fn x0_19_one_and_two_dimensional_certificates() {
    let config = OracleConfig {
        search_bound: 20_000,
        ..OracleConfig::default()
    };
    let tw = compute_twist_set(&WeierstrassCurve::x0_19(), 1000, &config, &TwistSetOptions::default()).unwrap();
    assert!(!tw.set.is_empty());
    for n in [1, 2] {
        let found = brute_force_search(&tw.set, n, BruteLimits::default()).found;
        let p = found.first().unwrap_or_else(|| panic!("no {n}-parallelepiped"));
        let cert = build_certificate(&tw, p, CertMetadata::new("brute")).unwrap();
        assert_round_trip(&cert);
    }
}

#[test]
fn witnessed_twists_with_known_root_number_are_odd() {
    let parity = ParityModel::x0_19();
    let oracle = RankOracle::new(WeierstrassCurve::x0_19(), OracleConfig::default());
    let mut checked = 0;
    for d in 1..=60u64 {
        let st = oracle.status(d).unwrap();
        if st.is_certified() && parity.twist_root_number(d).is_some() {
            checked += 1;
            assert_eq!(parity.predicts_odd(d), Some(true), "d={d}");
        }
    }
    assert!(checked > 0);
}

#[test]
fn imported_table_points_are_certified_and_advisory_ones_are_not() {
    // a point found by the search, reported through a table instead
    let base = WeierstrassCurve::x0_19();
    let oracle = RankOracle::new(base.clone(), OracleConfig::default());
    let (k, point) = (2..400u64)
        .find_map(|d| match oracle.kernel_status(d).unwrap() {
            WitnessStatus::Witnessed(p) => Some((d, p)),
            _ => None,
        })
        .unwrap();
    let mut entries = BTreeMap::new();
    entries.insert(k, TableEntry::Point(point));
    entries.insert(1, TableEntry::Advisory);
    let table = RankTable {
        source: "fixture".into(),
        entries,
    };
    let config = OracleConfig {
        search_bound: 10,
        table: Some(Arc::new(table)),
        ..OracleConfig::default()
    };
    let tw = compute_twist_set(&base, 400, &config, &TwistSetOptions::default()).unwrap();
    assert!(matches!(tw.statuses[&k], WitnessStatus::Imported { .. }));
    assert!(tw.set.contains(k) && !tw.set.contains(1));

    // (1, k): c = 1 carries only advisory evidence
    let p = Parallelepiped::from_integers(1, &[(k, 1)]).unwrap();
    assert!(matches!(
        build_certificate(&tw, &p, CertMetadata::default()),
        Err(CertifyError::MissingWitness(1))
    ));
}

#[test]
fn tampered_fields_are_named() {
    let tw = points_first_twist_set(&mordell_17(), 400, 80).unwrap();
    let p = brute_force_search(&tw.set, 2, BruteLimits::default()).found.remove(0);
    let cert = build_certificate(&tw, &p, CertMetadata::new("brute")).unwrap();

    let mut bad = cert.clone();
    bad.entries.get_mut(&2).unwrap().witness.y = "1/1".into();
    bad.seal();
    assert_eq!(verify_certificate(&bad), Verdict::Invalid(vec![Violation::PointNotOnCurve(2)]));

    let mut bad = cert.clone();
    let g = &p.generators()[0];
    bad.generators[0] = (g * g).to_string();
    bad.seal();
    let v = verify_certificate(&bad);
    assert!(v.violations().iter().any(|x| matches!(x, Violation::DependentGenerators(_))), "{v:?}");

    let mut bad = cert;
    bad.entries.get_mut(&0).unwrap().witness = sqtwist::certify::Witness {
        x: "inf".into(),
        y: "inf".into(),
    };
    bad.seal();
    assert!(!verify_certificate(&bad).is_valid());
}
