//! Exact integer support: factorization, square classes, F2 independence, primes.

mod factor;
mod primes;
mod square;

use thiserror::Error;

pub use factor::{factorize, FactorBudget, Factorization};
pub use primes::{
    euler_factor, is_prime, isqrt_u64, kronecker, next_prime_after, primes_between,
    primes_up_to, primorial_range,
};
pub use square::{class_product, f2_independent, square_class, ClassMatrix, Independence, SquareClass};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("factorization budget exceeded on cofactor {cofactor}")]
    BudgetExceeded { cofactor: u64 },
    #[error("invalid range: {a} > {b}")]
    InvalidRange { a: i64, b: i64 },
    #[error("zero has no factorization or square class")]
    Zero,
    #[error("integer {0} exceeds the supported 64-bit range")]
    TooLarge(String),
}

/// Squarefree kernel of `n >= 1` and the cofactor `m` with `n = kernel * m^2`.
pub fn squarefree_decomposition(n: u64, budget: &FactorBudget) -> Result<(u64, u64), ArithError> {
    let f = factorize(n, budget)?;
    let mut kernel = 1u64;
    let mut root = 1u64;
    for &(p, e) in f.factors() {
        if e % 2 == 1 {
            kernel *= p;
        }
        for _ in 0..e / 2 {
            root *= p;
        }
    }
    Ok((kernel, root))
}

/// Whether `n` has no repeated prime factor. `0` is not squarefree.
pub fn is_squarefree(n: u64, budget: &FactorBudget) -> Result<bool, ArithError> {
    if n == 0 {
        return Ok(false);
    }
    Ok(factorize(n, budget)?.factors().iter().all(|&(_, e)| e == 1))
}

/// Squarefree kernels of every `n <= limit`, by sieving (index 0 unused).
pub fn squarefree_kernels(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut kernel: Vec<u64> = (0..=limit).collect();
    for p in primes_up_to(isqrt_u64(limit)) {
        let sq = (p * p) as usize;
        let mut m = sq;
        while m <= n {
            while kernel[m] % (p * p) == 0 {
                kernel[m] /= p * p;
            }
            m += sq;
        }
    }
    kernel
}
