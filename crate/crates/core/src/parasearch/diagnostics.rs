use serde::{Deserialize, Serialize};

use super::ParaError;
use crate::arith::primes_between;
use crate::density::{
    coprime_to_primes, divide_set, f_value, integrated_f, le_eps, mertens_product,
    CompensatedSum, DensityError, FiniteIntegerSet,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub t: f64,
    /// `sum_p f_{S_p}(p t)`
    pub prime_sum: f64,
    /// `sum_p f_{p S_p}(t)`, equal to `prime_sum` term by term.
    pub scaled_sum: f64,
    pub f_s: f64,
    /// `f_{S ∩ R(P_{a,b})}(t)`
    pub f_coprime: f64,
    /// `t^{-1} prod_{a<=p<=b} (1 - 1/p)`
    pub sieve_rhs: f64,
    pub identity_holds: bool,
    /// `prime_sum >= f_s - f_coprime`
    pub union_holds: bool,
    /// `prime_sum >= f_s - sieve_rhs`
    pub stated_holds: bool,
    /// `f_coprime <= sieve_rhs`, the sieve step between the two.
    pub sieve_step_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDensity {
    pub p: u64,
    pub q: u64,
    pub density: f64,
    pub meets_threshold: bool,
    pub meets_double_threshold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndStepReport {
    pub a: u64,
    pub b: u64,
    pub big_t: f64,
    pub primes: Vec<u64>,
    /// `(1/log T) int_{1/T}^1 f_S`, the finite-T stand-in for `D(S)`.
    pub density: f64,
    pub mertens: f64,
    pub samples: Vec<PointSample>,

    /// `(1/log T) int_{1/T}^1 sum_p f_{S_p}(p t) dt`
    pub int_lhs: f64,
    /// `(1/log T) int_{1/T}^1 (f_S - f_{S ∩ R}) dt`
    pub int_union_rhs: f64,
    /// `density - mertens`
    pub int_stated_rhs: f64,
    pub int_union_holds: bool,
    pub int_stated_holds: bool,
    /// `int_lhs >= density / 2`; needs the window hypotheses.
    pub int_half_density: bool,

    /// `(1/log T) sum_p int_{1/T}^1 f_{S_p}`
    pub big_sum: f64,
    pub big_sum_a_third: bool,
    pub big_sum_a_half: bool,
    pub big_sum_at_least_four: bool,

    /// `(1/log T) int_{1/T}^1 f_{S'}`, `S'` the union of the `S_p`.
    pub union_density: f64,
    /// `sum_{p<q} (1/log T) int f_{S_p ∩ S_q}`
    pub pair_sum: f64,
    pub big_intersection_holds: bool,
    pub union_at_most_two: bool,
    pub pair_sum_at_least_two: bool,

    /// `1 / ((b-a)(1+b-a))`
    pub threshold: f64,
    pub pairs: Vec<PairDensity>,
    pub any_pair_meets_threshold: bool,
}

impl IndStepReport {
    /// Every inequality that does not depend on the density hypotheses,
    /// including both links of the pointwise chain.
    pub fn unconditional_hold(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.identity_holds && s.union_holds && s.sieve_step_holds && s.stated_holds)
            && self.int_union_holds
            && self.int_stated_holds
            && self.big_intersection_holds
            && self.union_at_most_two
    }

    /// Names of the unconditional checks that failed.
    pub fn unconditional_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.samples {
            if !s.identity_holds {
                out.push(format!("identity at t={}", s.t));
            }
            if !s.union_holds {
                out.push(format!("union step at t={}", s.t));
            }
            if !s.sieve_step_holds {
                out.push(format!("sieve step at t={}", s.t));
            }
            if !s.stated_holds {
                out.push(format!("point bound at t={}", s.t));
            }
        }
        for (ok, name) in [
            (self.int_union_holds, "integrated union step"),
            (self.int_stated_holds, "integrated point bound"),
            (self.big_intersection_holds, "big intersection"),
            (self.union_at_most_two, "union density at most 2"),
        ] {
            if !ok {
                out.push(name.to_string());
            }
        }
        out
    }
}

const SAMPLES: usize = 13;

/// `(1/log T) int_{1/T}^1 f_{S_p}(p t) dt = (1/(p log T)) sum_n (e^{-n p/T} - e^{-n p}) / n`.
fn scaled_integral(sp: &FiniteIntegerSet, p: u64, big_t: f64) -> f64 {
    let pf = p as f64;
    sp.iter()
        .map(|n| {
            let x = n as f64 * pf;
            (-x / big_t).exp() * -(-(x - x / big_t)).exp_m1() / n as f64
        })
        .collect::<CompensatedSum>()
        .value()
        / pf
}

/// Evaluates the inequalities of the inductive step for one window and `T`.
pub fn indstep_diagnostics(
    s: &FiniteIntegerSet,
    a: u64,
    b: u64,
    big_t: f64,
) -> Result<IndStepReport, ParaError> {
    if a < 2 || b < a {
        return Err(DensityError::InvalidRange {
            a: a as i64,
            b: b as i64,
        }
        .into());
    }
    if !(big_t > 1.0 && big_t.is_finite()) {
        return Err(DensityError::InvalidT(big_t).into());
    }
    let log_t = big_t.ln();
    let primes = primes_between(a, b);
    let mertens = mertens_product(a as i64, b as i64)?;
    let divided: Vec<FiniteIntegerSet> = primes.iter().map(|&p| divide_set(s, p)).collect();
    let scaled: Vec<FiniteIntegerSet> = primes
        .iter()
        .zip(&divided)
        .map(|(&p, sp)| {
            FiniteIntegerSet::new(sp.iter().map(|n| n * p).collect(), s.universe())
                .expect("multiples stay inside the universe")
        })
        .collect();
    let coprime = coprime_to_primes(s, &primes);

    let mut samples = Vec::with_capacity(SAMPLES);
    for k in 0..SAMPLES {
        // log-spaced from 1/T to 1
        let t = (-log_t * (1.0 - k as f64 / (SAMPLES - 1) as f64)).exp();
        let mut prime_sum = CompensatedSum::default();
        let mut scaled_sum = CompensatedSum::default();
        for ((&p, sp), psp) in primes.iter().zip(&divided).zip(&scaled) {
            prime_sum.add(f_value(sp, p as f64 * t)?);
            scaled_sum.add(f_value(psp, t)?);
        }
        let (prime_sum, scaled_sum) = (prime_sum.value(), scaled_sum.value());
        let f_s = f_value(s, t)?;
        let f_coprime = f_value(&coprime, t)?;
        let sieve_rhs = mertens / t;
        samples.push(PointSample {
            t,
            prime_sum,
            scaled_sum,
            f_s,
            f_coprime,
            sieve_rhs,
            identity_holds: le_eps(prime_sum, scaled_sum) && le_eps(scaled_sum, prime_sum),
            union_holds: le_eps(f_s - f_coprime, prime_sum),
            stated_holds: le_eps(f_s - sieve_rhs, prime_sum),
            sieve_step_holds: le_eps(f_coprime, sieve_rhs),
        });
    }

    let density = integrated_f(s, big_t)? / log_t;
    let int_lhs = primes
        .iter()
        .zip(&divided)
        .map(|(&p, sp)| scaled_integral(sp, p, big_t))
        .collect::<CompensatedSum>()
        .value()
        / log_t;
    let int_union_rhs = density - integrated_f(&coprime, big_t)? / log_t;
    let int_stated_rhs = density - mertens;

    let per_prime: Vec<f64> = divided
        .iter()
        .map(|sp| integrated_f(sp, big_t).map(|v| v / log_t))
        .collect::<Result<_, _>>()?;
    let big_sum = per_prime.iter().copied().collect::<CompensatedSum>().value();

    let union = divided
        .iter()
        .fold(FiniteIntegerSet::empty(1), |acc, sp| acc.union(sp));
    let union_density = integrated_f(&union, big_t)? / log_t;

    let width = (b - a) as f64;
    let threshold = 1.0 / (width * (1.0 + width));
    let mut pairs = Vec::new();
    let mut pair_sum = CompensatedSum::default();
    for i in 0..primes.len() {
        for j in i + 1..primes.len() {
            let inter = divided[i].intersection(&divided[j]);
            let d = integrated_f(&inter, big_t)? / log_t;
            pair_sum.add(d);
            pairs.push(PairDensity {
                p: primes[i],
                q: primes[j],
                density: d,
                meets_threshold: d >= threshold,
                meets_double_threshold: d >= 2.0 * threshold,
            });
        }
    }
    let pair_sum = pair_sum.value();
    let af = a as f64;

    Ok(IndStepReport {
        a,
        b,
        big_t,
        primes,
        density,
        mertens,
        samples,
        int_lhs,
        int_union_rhs,
        int_stated_rhs,
        int_union_holds: le_eps(int_union_rhs, int_lhs),
        int_stated_holds: le_eps(int_stated_rhs, int_lhs),
        int_half_density: int_lhs >= density / 2.0,
        big_sum,
        big_sum_a_third: big_sum >= af * density / 3.0,
        big_sum_a_half: big_sum >= af * density / 2.0,
        big_sum_at_least_four: big_sum >= 4.0,
        union_density,
        pair_sum,
        big_intersection_holds: le_eps(big_sum - union_density, pair_sum),
        union_at_most_two: le_eps(union_density, 2.0),
        pair_sum_at_least_two: pair_sum >= 2.0,
        threshold,
        any_pair_meets_threshold: pairs.iter().any(|p| p.meets_threshold),
        pairs,
    })
}
