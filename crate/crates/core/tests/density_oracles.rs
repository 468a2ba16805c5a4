mod common;

use proptest::prelude::*;
use rand::Rng;
use sqtwist::density::{
    bonferroni_check, f_value, integrated_f, lower_density_estimate, sieve_bound_check,
    smoothed_density, upper_bound_check, FiniteIntegerSet,
};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// `(1/log T) int_{1/T}^1 sum_{k>=1} e^{-kqt} dt`, the smoothed density of
/// all multiples of `q`.
fn progression_density(q: f64, big_t: f64) -> f64 {
    ((1.0 - (-q).exp()) / -(-q / big_t).exp_m1()).ln() / (q * big_t.ln())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn closed_form_matches_quadrature(seed in any::<u64>(), p in 0.05f64..0.95, big in prop::bool::ANY) {
        let mut rng = common::rng(seed);
        let s = common::random_subset(&mut rng, 2000, p);
        let big_t = if big { 1e4 } else { 1e2 };
        let exact = integrated_f(&s, big_t).unwrap();
        let quad = common::quadrature_integral(&s, big_t, 1e-12);
        prop_assert!(rel_close(exact, quad, 1e-9), "{exact} vs {quad}");
    }

    #[test]
    fn family_inequalities(seed in any::<u64>(), k in 1usize..=5) {
        let mut rng = common::rng(seed);
        let sets: Vec<FiniteIntegerSet> = (0..k)
            .map(|_| {
                let p = rng.gen_range(0.02..0.9);
                common::random_subset(&mut rng, 2000, p)
            })
            .collect();
        for t in [1e-3, 1e-2, 1e-1, 1.0] {
            let b = bonferroni_check(&sets, t).unwrap();
            prop_assert!(b.upper_holds && b.lower_holds, "t={t} {b:?}");
            for s in &sets {
                let f = f_value(s, t).unwrap();
                prop_assert!(f <= upper_bound_check(t).unwrap());
                prop_assert!((f - common::f_direct(s, t)).abs() <= 1e-9 * f.max(1.0));
                let sieve = sieve_bound_check(s, 2, rng.gen_range(2..30), t).unwrap();
                prop_assert!(sieve.periodic_holds, "{sieve:?}");
            }
        }
    }

    #[test]
    fn lower_density_is_the_window_minimum(seed in any::<u64>(), p in 0.1f64..0.9, n0 in 1u64..300) {
        let s = common::random_subset(&mut common::rng(seed), 300, p);
        let direct = (n0..=300)
            .map(|n| s.count_up_to(n) as f64 / n as f64)
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(lower_density_estimate(&s, n0).unwrap(), direct);
    }
}

#[test]
fn full_interval_against_log_closed_form() {
    for (n, big_t) in [(5_000u64, 100.0f64), (200_000, 10_000.0)] {
        let s = FiniteIntegerSet::full(n);
        let report = smoothed_density(&s, big_t).unwrap();
        // int_{1/T}^1 dt / (e^t - 1)
        let infinite = ((1.0 - (-1.0f64).exp()) / -(-1.0 / big_t).exp_m1()).ln() / big_t.ln();
        assert!((report.value - infinite).abs() <= report.truncation_error_bound + 1e-12);
        assert!(rel_close(report.value, infinite, 1e-9), "{} vs {infinite}", report.value);
    }
}

#[test]
fn progressions_match_their_closed_form() {
    for q in [2u64, 3, 5, 10] {
        let s = FiniteIntegerSet::multiples(q, 1_000_000);
        let value = smoothed_density(&s, 1e4).unwrap().value;
        let exact = progression_density(q as f64, 1e4);
        assert!(rel_close(value, exact, 1e-9), "q={q}: {value} vs {exact}");
    }
}

#[test]
fn tail_bound_dominates_the_missing_terms() {
    // S = [1, N] against the same set cut at N/2
    let big_t = 500.0;
    let full = FiniteIntegerSet::full(4000);
    let half = FiniteIntegerSet::new((1..=2000).collect(), 2000).unwrap();
    let gap = smoothed_density(&full, big_t).unwrap().value - smoothed_density(&half, big_t).unwrap().value;
    assert!(gap >= 0.0);
    assert!(gap <= smoothed_density(&half, big_t).unwrap().truncation_error_bound);
}
