mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use sqtwist::curve::{
    search_witness, CurvePoint, OracleConfig, RankOracle, Rational, ShortForm, WeierstrassCurve,
    WitnessStatus,
};

fn mordell_combo(j: i64, k: i64, a: usize, b: usize) -> (WeierstrassCurve, CurvePoint) {
    let (e, pts) = common::mordell_17();
    let p = e.scalar_mul(j, &pts[a % pts.len()]).unwrap();
    let q = e.scalar_mul(k, &pts[b % pts.len()]).unwrap();
    let r = e.add(&p, &q).unwrap();
    (e, r)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn multiples_add(seed in any::<u64>(), j in -5i64..=5, k in -5i64..=5) {
        let (e, p) = common::random_curve_with_point(&mut common::rng(seed));
        let lhs = e.scalar_mul(j + k, &p).unwrap();
        let rhs = e.add(&e.scalar_mul(j, &p).unwrap(), &e.scalar_mul(k, &p).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_and_identity(seed in any::<u64>(), j in -4i64..=4) {
        let (e, p) = common::random_curve_with_point(&mut common::rng(seed));
        let q = e.scalar_mul(j, &p).unwrap();
        prop_assert_eq!(e.add(&q, &e.negate(&q)).unwrap(), CurvePoint::Infinity);
        prop_assert_eq!(e.add(&q, &CurvePoint::Infinity).unwrap(), q.clone());
        prop_assert!(e.contains(&e.negate(&q)));
    }

    #[test]
    fn associativity_with_independent_points(
        j in -2i64..=2, k in -2i64..=2, l in -2i64..=2,
        a in 0usize..7, b in 0usize..7, c in 0usize..7,
    ) {
        let (e, pts) = common::mordell_17();
        let p = e.scalar_mul(j, &pts[a]).unwrap();
        let q = e.scalar_mul(k, &pts[b]).unwrap();
        let r = e.scalar_mul(l, &pts[c]).unwrap();
        let left = e.add(&e.add(&p, &q).unwrap(), &r).unwrap();
        let right = e.add(&p, &e.add(&q, &r).unwrap()).unwrap();
        prop_assert!(e.contains(&left));
        prop_assert_eq!(left, right);
        prop_assert_eq!(e.add(&p, &q).unwrap(), e.add(&q, &p).unwrap());
    }

    #[test]
    fn short_form_map_is_a_homomorphism(seed in any::<u64>(), j in 1i64..=3, k in 1i64..=3) {
        let (e, p) = common::random_curve_with_point(&mut common::rng(seed));
        let (short, map) = e.to_short_form();
        let sw = short.to_weierstrass();
        let (jp, kp) = (e.scalar_mul(j, &p).unwrap(), e.scalar_mul(k, &p).unwrap());
        let image = map.to_short(&e.add(&jp, &kp).unwrap());
        prop_assert!(short.contains(&image));
        prop_assert_eq!(image.clone(), sw.add(&map.to_short(&jp), &map.to_short(&kp)).unwrap());
        prop_assert_eq!(map.to_long(&image), e.add(&jp, &kp).unwrap());
    }

    #[test]
    fn twisting_by_a_square_rescales_points(j in -2i64..=2, k in -2i64..=2, m in 2i64..=7) {
        let (e, p) = mordell_combo(j, k, 0, 2);
        prop_assume!(!p.is_infinity());
        // the twist by m^2 is y^2 = x^3 + 17 m^6
        let twisted = ShortForm::from_integers(0, 17 * m.pow(6)).unwrap();
        let (x, y) = p.coords().unwrap();
        let m = Rational::from_integer(BigInt::from(m));
        let moved = CurvePoint::affine(&m * &m * x, &m * &m * &m * y);
        prop_assert!(twisted.contains(&moved));
        prop_assert!(e.contains(&p));
    }
}

#[test]
fn x0_19_anchors() {
    let e = WeierstrassCurve::x0_19();
    let p = CurvePoint::from_integers(5, 9);
    assert!(e.contains(&p));
    assert_eq!(e.scalar_mul(3, &p).unwrap(), CurvePoint::Infinity);
    assert!(!e.is_nontorsion(&p).unwrap());
    let (short, _) = e.to_short_form();
    assert_eq!(search_witness(&short, 10_000), WitnessStatus::NoneFound { bound: 10_000 });
}

#[test]
fn oracle_transfers_points_across_square_multiples() {
    let oracle = RankOracle::new(WeierstrassCurve::x0_19(), OracleConfig::default());
    let base = (51..200u64)
        .find(|&d| oracle.status(d).unwrap().is_certified())
        .expect("a witnessed twist below 200");
    let at_base = oracle.status(base).unwrap();
    for m in [2u64, 3, 5] {
        let scaled = oracle.status(base * m * m).unwrap();
        let twist = oracle.twist(base * m * m);
        let point = scaled.point().unwrap();
        assert!(twist.contains(point), "m={m}");
        let (x0, y0) = at_base.point().unwrap().coords().unwrap();
        let r = Rational::from_integer(BigInt::from(m));
        assert_eq!(point, &CurvePoint::affine(&r * &r * x0, &r * &r * &r * y0));
    }
}
