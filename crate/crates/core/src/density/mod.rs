//! Exponential sums `f_S(t)`, the log-smoothed density and the finite
//! inequality checks built on them.

mod set;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::primes_between;

pub use set::{coprime_filter, coprime_to_primes, divide_set, FiniteIntegerSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("t must be positive, got {0}")]
    NonpositiveT(f64),
    #[error("T must exceed 1, got {0}")]
    InvalidT(f64),
    #[error("window start {n0} is outside [1, {universe}]")]
    InvalidWindow { n0: u64, universe: u64 },
    #[error("invalid prime range [{a}, {b}]")]
    InvalidRange { a: i64, b: i64 },
    #[error("set elements must be positive")]
    NonpositiveElement,
    #[error("element {element} exceeds universe bound {universe}")]
    OutsideUniverse { element: u64, universe: u64 },
    #[error("set file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Relative tolerance for the inequality checks.
pub const CHECK_EPSILON: f64 = 1e-9;

/// `lhs <= rhs` up to [`CHECK_EPSILON`] scaled by the larger magnitude.
pub fn le_eps(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + CHECK_EPSILON * 1f64.max(lhs.abs()).max(rhs.abs())
}

/// Neumaier's compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

fn check_t(t: f64) -> Result<(), DensityError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(DensityError::NonpositiveT(t))
    }
}

/// `f_S(t) = sum over n in S of exp(-n t)`, in increasing `n`.
pub fn f_value(s: &FiniteIntegerSet, t: f64) -> Result<f64, DensityError> {
    check_t(t)?;
    Ok(s.iter()
        .map(|n| (-(n as f64) * t).exp())
        .collect::<CompensatedSum>()
        .value())
}

/// `2 max(1/t, 1)`, which dominates `f_S(t)` for every `S`.
pub fn upper_bound_check(t: f64) -> Result<f64, DensityError> {
    check_t(t)?;
    Ok(2.0 * (1.0 / t).max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub t: f64,
    pub value: f64,
    pub truncation_error_bound: f64,
}

/// `int_{1/T}^1 exp(-n t) dt = (exp(-n/T) - exp(-n)) / n`, written to avoid
/// cancellation for small `n` and `T` near 1.
pub fn integrated_term(n: u64, big_t: f64) -> f64 {
    let n = n as f64;
    let lo = n / big_t;
    (-lo).exp() * -(-(n - lo)).exp_m1() / n
}

/// `int_{1/T}^1 f_S(t) dt` in closed form.
pub fn integrated_f(s: &FiniteIntegerSet, big_t: f64) -> Result<f64, DensityError> {
    check_big_t(big_t)?;
    Ok(s.iter()
        .map(|n| integrated_term(n, big_t))
        .collect::<CompensatedSum>()
        .value())
}

fn check_big_t(big_t: f64) -> Result<(), DensityError> {
    if big_t > 1.0 && big_t.is_finite() {
        Ok(())
    } else {
        Err(DensityError::InvalidT(big_t))
    }
}

/// Bound on what elements above `n` could add to the unnormalized integral:
/// `sum_{k > n} exp(-k/T)/k <= exp(-(n+1)/T) / ((n+1)(1 - exp(-1/T)))`.
pub fn tail_bound(n: u64, big_t: f64) -> f64 {
    let m = n as f64 + 1.0;
    (-m / big_t).exp() / (m * -(-1.0 / big_t).exp_m1())
}

/// `(1/log T) int_{1/T}^1 f_S(t) dt`, with a bound on the contribution an
/// unknown extension of `S` above its universe could make.
pub fn smoothed_density(s: &FiniteIntegerSet, big_t: f64) -> Result<DensityReport, DensityError> {
    let log_t = big_t.ln();
    let value = integrated_f(s, big_t)? / log_t;
    Ok(DensityReport {
        t: big_t,
        value,
        truncation_error_bound: tail_bound(s.universe(), big_t) / log_t,
    })
}

/// `min over n in [n0, N] of |S ∩ [1, n]| / n`.
pub fn lower_density_estimate(s: &FiniteIntegerSet, n0: u64) -> Result<f64, DensityError> {
    let universe = s.universe();
    if n0 == 0 || n0 > universe {
        return Err(DensityError::InvalidWindow { n0, universe });
    }
    let elems = s.elements();
    let mut count = s.count_up_to(n0 - 1);
    let mut best = f64::INFINITY;
    for n in n0..=universe {
        if count < elems.len() && elems[count] == n {
            count += 1;
        }
        // Between elements the ratio only decreases, so it is enough to look
        // just before each element and at N.
        let next_is_member = count < elems.len() && elems[count] == n + 1;
        if next_is_member || n == universe || n == n0 {
            best = best.min(count as f64 / n as f64);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `prod (p - 1) / (1 - exp(-P t))`, the exact supremum of the
    /// coprime-residue sum over one period, which bounds `lhs` unconditionally.
    pub periodic_bound: f64,
    pub periodic_holds: bool,
}

/// `prod_{a <= p <= b} (1 - 1/p)`.
pub fn mertens_product(a: i64, b: i64) -> Result<f64, DensityError> {
    if a > b {
        return Err(DensityError::InvalidRange { a, b });
    }
    Ok(primes_between(a.max(0) as u64, b.max(0) as u64)
        .iter()
        .map(|&p| 1.0 - 1.0 / p as f64)
        .product())
}

/// Compares `f_{S ∩ R(P_{a,b})}(t)` against `t^{-1} prod_{a<=p<=b} (1 - 1/p)`.
pub fn sieve_bound_check(s: &FiniteIntegerSet, a: i64, b: i64, t: f64) -> Result<SieveCheck, DensityError> {
    if a < 2 || b < a {
        return Err(DensityError::InvalidRange { a, b });
    }
    check_t(t)?;
    let primes = primes_between(a as u64, b as u64);
    let lhs = f_value(&coprime_to_primes(s, &primes), t)?;
    let rhs = mertens_product(a, b)? / t;
    let (phi, period) = primes
        .iter()
        .fold((1.0f64, 1.0f64), |(phi, pr), &p| (phi * (p as f64 - 1.0), pr * p as f64));
    let periodic_bound = phi / -(-period * t).exp_m1();
    Ok(SieveCheck {
        lhs,
        rhs,
        holds: le_eps(lhs, rhs),
        periodic_bound,
        periodic_holds: le_eps(lhs, periodic_bound),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BonferroniCheck {
    pub union_f: f64,
    pub sum_f: f64,
    pub pairwise_f: f64,
    pub upper_holds: bool,
    pub lower_holds: bool,
}

/// First two Bonferroni inequalities for the exponential sums of a union:
/// `f_∪ <= Σ f_i` and `Σ f_i - Σ_{i<j} f_{i∩j} <= f_∪`.
pub fn bonferroni_check(sets: &[FiniteIntegerSet], t: f64) -> Result<BonferroniCheck, DensityError> {
    check_t(t)?;
    let union = sets
        .iter()
        .fold(FiniteIntegerSet::empty(1), |acc, s| acc.union(s));
    let union_f = f_value(&union, t)?;
    let mut sum = CompensatedSum::default();
    let mut pairwise = CompensatedSum::default();
    for (i, s) in sets.iter().enumerate() {
        sum.add(f_value(s, t)?);
        for r in &sets[i + 1..] {
            pairwise.add(f_value(&s.intersection(r), t)?);
        }
    }
    let (sum_f, pairwise_f) = (sum.value(), pairwise.value());
    Ok(BonferroniCheck {
        union_f,
        sum_f,
        pairwise_f,
        upper_holds: le_eps(union_f, sum_f),
        lower_holds: le_eps(sum_f - pairwise_f, union_f),
    })
}
