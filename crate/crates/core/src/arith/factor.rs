//! Integer factorization: trial division followed by a fixed-seed Pollard-Brent stage.

use num_integer::Integer;

use super::primes::{is_prime, mul_mod};
use super::ArithError;

/// Effort limits for [`factorize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorBudget {
    /// Trial division runs over candidates up to this bound.
    pub trial_bound: u64,
    /// Iteration cap for each rho attempt.
    pub rho_iterations: u64,
    /// Number of rho polynomials tried per cofactor.
    pub rho_attempts: u32,
    /// Seed for the rho starting point and polynomial constants.
    pub seed: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 1_000_000,
            rho_iterations: 1 << 22,
            rho_attempts: 8,
            seed: 0x5eed,
        }
    }
}

/// Prime factorization with strictly increasing primes. Empty for `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of the prime powers; `None` on `u64` overflow.
    pub fn value(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, &(p, e)| {
            (0..e).try_fold(acc, |a, _| a.checked_mul(p))
        })
    }

    /// Primes whose exponent is odd.
    pub fn odd_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors
            .iter()
            .filter(|(_, e)| e % 2 == 1)
            .map(|&(p, _)| p)
    }

    fn from_primes(mut primes: Vec<u64>) -> Self {
        primes.sort_unstable();
        let mut factors: Vec<(u64, u32)> = Vec::new();
        for p in primes {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        Factorization { factors }
    }
}

/// Factor `n >= 1` under the given effort budget.
pub fn factorize(n: u64, budget: &FactorBudget) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut primes = Vec::new();
    let mut m = n;
    while m % 2 == 0 {
        primes.push(2);
        m /= 2;
    }
    let mut d = 3u64;
    let mut checked_prime = false;
    while m > 1 && d <= budget.trial_bound && d.saturating_mul(d) <= m {
        if m % d == 0 {
            while m % d == 0 {
                primes.push(d);
                m /= d;
            }
            checked_prime = false;
        } else if !checked_prime && d > 1000 {
            // one Miller-Rabin call keeps a large prime cofactor from running the full bound
            if is_prime(m) {
                break;
            }
            checked_prime = true;
        }
        d += 2;
    }
    if m > 1 {
        if d.saturating_mul(d) > m || is_prime(m) {
            primes.push(m);
        } else {
            split_composite(m, budget, &mut primes)?;
        }
    }
    Ok(Factorization::from_primes(primes))
}

fn split_composite(m: u64, budget: &FactorBudget, out: &mut Vec<u64>) -> Result<(), ArithError> {
    if m == 1 {
        return Ok(());
    }
    if is_prime(m) {
        out.push(m);
        return Ok(());
    }
    let r = super::primes::isqrt_u64(m);
    if r * r == m {
        split_composite(r, budget, out)?;
        return split_composite(r, budget, out);
    }
    for attempt in 0..budget.rho_attempts {
        let c = budget.seed.wrapping_add(attempt as u64 * 0x9e37_79b9) % (m - 1) + 1;
        let start = budget.seed.rotate_left(17 + attempt) % m;
        if let Some(f) = brent(m, c, start, budget.rho_iterations) {
            split_composite(f, budget, out)?;
            return split_composite(m / f, budget, out);
        }
    }
    Err(ArithError::BudgetExceeded { cofactor: m })
}

/// Pollard-Brent with `x -> x^2 + c`. Returns a nontrivial factor or `None`.
fn brent(n: u64, c: u64, start: u64, max_iter: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let mut y = start;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    let mut iters = 0u64;
    const BATCH: u64 = 128;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += BATCH;
            iters += BATCH;
            if iters > max_iter {
                return None;
            }
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n && g != 1).then_some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fz(n: u64) -> Vec<(u64, u32)> {
        factorize(n, &FactorBudget::default()).unwrap().factors().to_vec()
    }

    #[test]
    fn spec_examples() {
        assert!(fz(1).is_empty());
        assert_eq!(fz(12), vec![(2, 2), (3, 1)]);
        assert_eq!(fz(2_147_483_647), vec![(2_147_483_647, 1)]);
    }

    #[test]
    fn mersenne_prime_by_trial_division() {
        // independent check: no prime up to isqrt(2^31 - 1) = 46340 divides it
        let n = 2_147_483_647u64;
        assert!(super::super::primes::primes_up_to(46_341)
            .iter()
            .all(|p| n % p != 0));
    }

    #[test]
    fn semiprimes_need_rho() {
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        assert_eq!(fz(p * q), vec![(p, 1), (q, 1)]);
        let big = 4_294_967_291u64; // largest 32-bit prime
        assert_eq!(fz(big * 65_521), vec![(65_521, 1), (big, 1)]);
        assert_eq!(fz(p * p), vec![(p, 2)]);
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let tight = FactorBudget {
            trial_bound: 10,
            rho_iterations: 1,
            rho_attempts: 1,
            seed: 1,
        };
        let n = 1_000_003u64 * 1_000_033;
        assert!(matches!(
            factorize(n, &tight),
            Err(ArithError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn zero_rejected() {
        assert!(matches!(factorize(0, &FactorBudget::default()), Err(ArithError::Zero)));
    }

    #[test]
    fn products_round_trip() {
        let budget = FactorBudget::default();
        for n in (1..5000u64).chain([u64::MAX, u64::MAX - 58, 600_851_475_143]) {
            let f = factorize(n, &budget).unwrap();
            assert_eq!(f.value(), Some(n));
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.factors().iter().all(|&(p, _)| is_prime(p)));
        }
    }
}
