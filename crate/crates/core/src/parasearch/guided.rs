use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{is_strict, ratio, verify_in_set, ParaError, Parallelepiped};
use crate::arith::{is_prime, next_prime_after, primes_between};
use crate::density::{divide_set, smoothed_density, FiniteIntegerSet};

/// How the smoothing parameter `T` is chosen when scoring candidate sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Fixed `T`; when absent, `T` is the smallest candidate universe divided
    /// by `universe_ratio` (and at least 2).
    pub big_t: Option<f64>,
    pub universe_ratio: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            big_t: None,
            universe_ratio: 10.0,
        }
    }
}

impl EstimatorConfig {
    pub fn t_for(&self, universe: u64) -> f64 {
        self.big_t
            .unwrap_or_else(|| (universe as f64 / self.universe_ratio).max(2.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimePair {
    pub p: u64,
    pub q: u64,
    pub score: f64,
}

/// The pair `p < q` of primes in `[a, b]` whose `S_p ∩ S_q` has the largest
/// smoothed density; ties go to the lexicographically smallest pair.
pub fn select_prime_pair(
    s: &FiniteIntegerSet,
    window: (u64, u64),
    estimator: &EstimatorConfig,
) -> Result<PrimePair, ParaError> {
    select_from(s, &primes_between(window.0, window.1), estimator)
        .ok_or(ParaError::WindowTooNarrow {
            a: window.0,
            b: window.1,
        })?
}

fn select_from(
    s: &FiniteIntegerSet,
    primes: &[u64],
    estimator: &EstimatorConfig,
) -> Option<Result<PrimePair, ParaError>> {
    if primes.len() < 2 {
        return None;
    }
    let q_max = *primes.last().expect("nonempty");
    let big_t = estimator.t_for(s.universe() / q_max);
    let divided: Vec<FiniteIntegerSet> = primes.iter().map(|&p| divide_set(s, p)).collect();
    let mut best: Option<PrimePair> = None;
    for i in 0..primes.len() {
        for j in i + 1..primes.len() {
            let score = match smoothed_density(&divided[i].intersection(&divided[j]), big_t) {
                Ok(r) => r.value,
                Err(e) => return Some(Err(e.into())),
            };
            if best.map_or(true, |b| score > b.score) {
                best = Some(PrimePair {
                    p: primes[i],
                    q: primes[j],
                    score,
                });
            }
        }
    }
    best.map(Ok)
}

/// Default ceiling on the window end searched by [`compute_window`].
pub const WINDOW_CAP: u64 = 100_000_000;

/// `a` is the least prime above `max(sigma_max, 12 / density)`; `b` is the
/// least integer with `prod_{a <= p <= b} (1 - 1/p) <= density / 4`.
pub fn compute_window(density: f64, sigma_max: u64) -> Result<(u64, u64), ParaError> {
    compute_window_capped(density, sigma_max, WINDOW_CAP)
}

pub fn compute_window_capped(density: f64, sigma_max: u64, cap: u64) -> Result<(u64, u64), ParaError> {
    if !(density > 0.0) {
        return Err(ParaError::NonpositiveDensity(density));
    }
    let threshold = (sigma_max as f64).max(12.0 / density);
    let a = if threshold >= u64::MAX as f64 {
        return Err(ParaError::WindowUnreachable { a: u64::MAX, cap });
    } else {
        next_prime_after(threshold.floor() as u64)
    };
    let target = density / 4.0;
    let mut product = 1.0f64;
    let mut lo = a;
    // The product only drops at primes, so b is always prime.
    const SEGMENT: u64 = 1 << 20;
    while lo <= cap {
        let hi = (lo + SEGMENT - 1).min(cap);
        for p in primes_between(lo, hi) {
            product *= 1.0 - 1.0 / p as f64;
            if product <= target {
                return Ok((a, p));
            }
        }
        lo = hi + 1;
    }
    Err(ParaError::WindowUnreachable { a, cap })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowPolicy {
    /// The window from [`compute_window`] at every level.
    Rigorous,
    /// A fixed window; primes at or below the exclusion threshold are skipped.
    Heuristic { a: u64, b: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuidedConfig {
    pub policy: WindowPolicy,
    /// Recursion stops once a universe bound drops below this.
    pub universe_floor: u64,
    pub estimator: EstimatorConfig,
    pub window_cap: u64,
    /// Largest number of prime pairs scored at one level.
    pub max_pairs: usize,
}

impl Default for GuidedConfig {
    fn default() -> Self {
        GuidedConfig {
            policy: WindowPolicy::Heuristic { a: 2, b: 97 },
            universe_floor: 1000,
            estimator: EstimatorConfig::default(),
            window_cap: WINDOW_CAP,
            max_pairs: 100_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    /// Outermost level first.
    pub pairs: Vec<(u64, u64)>,
    pub densities: Vec<f64>,
    pub universes: Vec<u64>,
    pub windows: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExhaustReason {
    UniverseUnderflow { universe: u64, floor: u64 },
    NonpositiveDensity,
    WindowUnreachable { a: u64, cap: u64 },
    WindowTooNarrow { a: u64, b: u64 },
    TooManyPairs { pairs: usize, cap: usize },
    EmptyIntersection { p: u64, q: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GuidedOutcome {
    Found(Parallelepiped, SearchTrace),
    Exhausted {
        /// Zero-based recursion depth at which the search stopped.
        level: usize,
        reason: ExhaustReason,
        trace: SearchTrace,
    },
}

impl GuidedOutcome {
    pub fn found(&self) -> Option<&Parallelepiped> {
        match self {
            GuidedOutcome::Found(p, _) => Some(p),
            GuidedOutcome::Exhausted { .. } => None,
        }
    }
}

/// Inductive construction: pick primes `p < q` above every prime used so
/// far, recurse into `S_p ∩ S_q` one dimension lower, and on the way back
/// multiply the base by `p` and append the generator `q/p`.
pub fn guided_search(
    s: &FiniteIntegerSet,
    n: usize,
    sigma: &BTreeSet<u64>,
    config: &GuidedConfig,
) -> GuidedOutcome {
    assert!(n >= 1, "dimension must be at least 1");
    let mut trace = SearchTrace::default();
    let mut current = s.clone();
    let mut excluded = sigma.clone();
    let mut level = 0;
    let exhausted = |level, reason, trace| GuidedOutcome::Exhausted {
        level,
        reason,
        trace,
    };
    while level < n {
        let universe = current.universe();
        if universe < config.universe_floor {
            let reason = ExhaustReason::UniverseUnderflow {
                universe,
                floor: config.universe_floor,
            };
            return exhausted(level, reason, trace);
        }
        let sigma_max = excluded.iter().next_back().copied().unwrap_or(0);
        let window = match config.policy {
            WindowPolicy::Heuristic { a, b } => (a.max(sigma_max + 1), b),
            WindowPolicy::Rigorous => {
                let big_t = config.estimator.t_for(universe);
                let density = match smoothed_density(&current, big_t) {
                    Ok(r) if r.value > 0.0 => r.value,
                    _ => return exhausted(level, ExhaustReason::NonpositiveDensity, trace),
                };
                match compute_window_capped(density, sigma_max, config.window_cap) {
                    Ok(w) => w,
                    Err(ParaError::WindowUnreachable { a, cap }) => {
                        return exhausted(level, ExhaustReason::WindowUnreachable { a, cap }, trace)
                    }
                    Err(_) => return exhausted(level, ExhaustReason::NonpositiveDensity, trace),
                }
            }
        };
        let primes: Vec<u64> = primes_between(window.0, window.1)
            .into_iter()
            .filter(|p| !excluded.contains(p))
            .collect();
        let pairs = primes.len() * primes.len().saturating_sub(1) / 2;
        if pairs > config.max_pairs {
            let reason = ExhaustReason::TooManyPairs {
                pairs,
                cap: config.max_pairs,
            };
            return exhausted(level, reason, trace);
        }
        let pair = match select_from(&current, &primes, &config.estimator) {
            None => {
                let reason = ExhaustReason::WindowTooNarrow {
                    a: window.0,
                    b: window.1,
                };
                return exhausted(level, reason, trace);
            }
            Some(Err(_)) => return exhausted(level, ExhaustReason::NonpositiveDensity, trace),
            Some(Ok(pair)) => pair,
        };
        let next = divide_set(&current, pair.p).intersection(&divide_set(&current, pair.q));
        trace.pairs.push((pair.p, pair.q));
        trace.densities.push(pair.score);
        trace.universes.push(next.universe());
        trace.windows.push(window);
        if next.is_empty() {
            let reason = ExhaustReason::EmptyIntersection {
                p: pair.p,
                q: pair.q,
            };
            return exhausted(level, reason, trace);
        }
        excluded.insert(pair.p);
        excluded.insert(pair.q);
        current = next;
        level += 1;
    }

    // Deepest set is nonempty; its least element is the base of the innermost level.
    let c0 = current.elements()[0];
    let mut c = ratio(c0, 1);
    let mut gens = Vec::with_capacity(n);
    for &(p, q) in trace.pairs.iter().rev() {
        c *= ratio(p, 1);
        gens.push(ratio(q, p));
    }
    let result = Parallelepiped::new(c, gens).expect("positive by construction");
    assert!(
        is_strict(&result) && verify_in_set(&result, s),
        "guided search produced an invalid object: {result}"
    );
    debug_assert!(trace.pairs.iter().all(|&(p, q)| is_prime(p) && is_prime(q)));
    GuidedOutcome::Found(result, trace)
}
