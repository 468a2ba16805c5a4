//! Square classes `Q^x / (Q^x)^2` and linear algebra over F2.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::factor::{factorize, FactorBudget};
use super::ArithError;

/// An element of `Q^x/(Q^x)^2`: a sign and the primes of odd valuation.
///
/// The representation is canonical, so structural equality is class equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SquareClass {
    negative: bool,
    odd_primes: Vec<u64>,
}

impl SquareClass {
    /// The trivial class `(+1, {})`.
    pub fn one() -> Self {
        SquareClass::default()
    }

    /// Builds a class from a sign and a set of primes. Primes are sorted and
    /// deduplicated; callers are responsible for passing primes.
    pub fn from_parts(negative: bool, primes: impl IntoIterator<Item = u64>) -> Self {
        let odd_primes: BTreeSet<u64> = primes.into_iter().collect();
        SquareClass {
            negative,
            odd_primes: odd_primes.into_iter().collect(),
        }
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn odd_primes(&self) -> &[u64] {
        &self.odd_primes
    }

    pub fn is_trivial(&self) -> bool {
        !self.negative && self.odd_primes.is_empty()
    }

    /// Class of a nonzero signed integer.
    pub fn of_integer(n: i64, budget: &FactorBudget) -> Result<Self, ArithError> {
        if n == 0 {
            return Err(ArithError::Zero);
        }
        let f = factorize(n.unsigned_abs(), budget)?;
        Ok(SquareClass {
            negative: n < 0,
            odd_primes: f.odd_primes().collect(),
        })
    }

    /// Class of a positive integer.
    pub fn of_u64(n: u64, budget: &FactorBudget) -> Result<Self, ArithError> {
        if n == 0 {
            return Err(ArithError::Zero);
        }
        let f = factorize(n, budget)?;
        Ok(SquareClass {
            negative: false,
            odd_primes: f.odd_primes().collect(),
        })
    }

    /// Group law: signs multiply, prime sets take the symmetric difference.
    pub fn product(&self, other: &SquareClass) -> SquareClass {
        let (a, b) = (&self.odd_primes, &other.odd_primes);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SquareClass {
            negative: self.negative ^ other.negative,
            odd_primes: out,
        }
    }

    /// The squarefree positive kernel `prod odd_primes`, if it fits in `u64`.
    pub fn kernel(&self) -> Option<u64> {
        self.odd_primes
            .iter()
            .try_fold(1u64, |acc, &p| acc.checked_mul(p))
    }

    /// The canonical representative `sign * prod odd_primes`.
    pub fn representative(&self) -> BigInt {
        let mag = self
            .odd_primes
            .iter()
            .fold(BigInt::one(), |acc, &p| acc * p);
        if self.negative {
            -mag
        } else {
            mag
        }
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { '-' } else { '+' };
        write!(f, "({sign}, {{")?;
        for (i, p) in self.odd_primes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}})")
    }
}

/// Class of a nonzero rational. Numerator and denominator contribute symmetrically.
pub fn square_class(q: &BigRational, budget: &FactorBudget) -> Result<SquareClass, ArithError> {
    if q.is_zero() {
        return Err(ArithError::Zero);
    }
    let num = q.numer();
    let den = q.denom();
    let to_u64 = |v: &BigInt| {
        v.magnitude()
            .to_u64()
            .ok_or_else(|| ArithError::TooLarge(v.to_string()))
    };
    let n = SquareClass::of_u64(to_u64(num)?, budget)?;
    let d = SquareClass::of_u64(to_u64(den)?, budget)?;
    let mut c = n.product(&d);
    c.negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    Ok(c)
}

/// Free-function form of [`SquareClass::product`].
pub fn class_product(u: &SquareClass, v: &SquareClass) -> SquareClass {
    u.product(v)
}

/// Outcome of an F2 independence test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// Zero-based indices of a nonempty subset whose product is a square.
    Dependent(Vec<usize>),
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }
}

/// Rows of square classes as F2 vectors over one sign column plus the union
/// of all primes that occur.
#[derive(Clone, Debug)]
pub struct ClassMatrix {
    columns: Vec<u64>,
    rows: Vec<Vec<u64>>,
}

impl ClassMatrix {
    pub fn new(classes: &[SquareClass]) -> Self {
        let primes: BTreeSet<u64> = classes
            .iter()
            .flat_map(|c| c.odd_primes.iter().copied())
            .collect();
        let columns: Vec<u64> = primes.into_iter().collect();
        let width = 1 + columns.len();
        let words = width.div_ceil(64);
        let rows = classes
            .iter()
            .map(|c| {
                let mut row = vec![0u64; words];
                if c.negative {
                    row[0] |= 1;
                }
                for p in &c.odd_primes {
                    let col = 1 + columns.binary_search(p).expect("column present");
                    row[col / 64] |= 1 << (col % 64);
                }
                row
            })
            .collect();
        ClassMatrix { columns, rows }
    }

    /// Number of columns (sign column included).
    pub fn width(&self) -> usize {
        1 + self.columns.len()
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    /// Row reduction with a history of row combinations. Returns the rank and
    /// the first kernel vector met in elimination order.
    fn eliminate(&self) -> (usize, Option<Vec<usize>>) {
        let k = self.rows.len();
        let hwords = k.div_ceil(64).max(1);
        // (pivot column, reduced row, history)
        let mut basis: Vec<(usize, Vec<u64>, Vec<u64>)> = Vec::new();
        let mut first_kernel = None;
        for (i, row) in self.rows.iter().enumerate() {
            let mut r = row.clone();
            let mut h = vec![0u64; hwords];
            h[i / 64] |= 1 << (i % 64);
            for (piv, brow, bhist) in &basis {
                if r[piv / 64] >> (piv % 64) & 1 == 1 {
                    xor_into(&mut r, brow);
                    xor_into(&mut h, bhist);
                }
            }
            match leading_bit(&r) {
                Some(piv) => basis.push((piv, r, h)),
                None => {
                    if first_kernel.is_none() {
                        first_kernel = Some(
                            (0..k).filter(|j| h[j / 64] >> (j % 64) & 1 == 1).collect(),
                        );
                    }
                }
            }
        }
        (basis.len(), first_kernel)
    }

    pub fn rank(&self) -> usize {
        self.eliminate().0
    }
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn leading_bit(row: &[u64]) -> Option<usize> {
    row.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Decide F2-independence of the classes by Gaussian elimination.
pub fn f2_independent(classes: &[SquareClass]) -> Independence {
    match ClassMatrix::new(classes).eliminate().1 {
        None => Independence::Independent,
        Some(w) => Independence::Dependent(w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn cls(n: i64, d: i64) -> SquareClass {
        square_class(&rat(n, d), &FactorBudget::default()).unwrap()
    }

    #[test]
    fn square_class_examples() {
        assert_eq!(cls(4, 9), SquareClass::one());
        assert_eq!(cls(12, 1), SquareClass::from_parts(false, [3]));
        assert_eq!(cls(-50, 27), SquareClass::from_parts(true, [2, 3]));
        assert!(square_class(&rat(0, 1), &FactorBudget::default()).is_err());
    }

    #[test]
    fn products() {
        let p = |neg, ps: &[u64]| SquareClass::from_parts(neg, ps.iter().copied());
        assert_eq!(class_product(&p(false, &[2]), &p(false, &[3])), p(false, &[2, 3]));
        assert_eq!(class_product(&p(false, &[2, 3]), &p(false, &[3, 5])), p(false, &[2, 5]));
        assert_eq!(class_product(&p(true, &[2]), &p(true, &[2])), SquareClass::one());
    }

    #[test]
    fn independence_examples() {
        let of = |v: &[i64]| v.iter().map(|&n| cls(n, 1)).collect::<Vec<_>>();
        assert_eq!(f2_independent(&of(&[2, 3, 5])), Independence::Independent);
        assert_eq!(f2_independent(&of(&[2, 3, 6])), Independence::Dependent(vec![0, 1, 2]));
        assert_eq!(f2_independent(&of(&[4])), Independence::Dependent(vec![0]));
        assert_eq!(f2_independent(&[]), Independence::Independent);
        assert_eq!(f2_independent(&of(&[-1, -2, 2])), Independence::Dependent(vec![0, 1, 2]));
    }

    #[test]
    fn first_kernel_vector_in_elimination_order() {
        // rows: 2, 3, 2 (dependent with row 0), 6 (dependent with rows 0,1)
        let classes: Vec<_> = [2, 3, 2, 6].iter().map(|&n| cls(n, 1)).collect();
        assert_eq!(f2_independent(&classes), Independence::Dependent(vec![0, 2]));
        assert_eq!(ClassMatrix::new(&classes).rank(), 2);
    }

    #[test]
    fn wide_matrices_cross_word_boundaries() {
        let primes = super::super::primes::primes_up_to(600);
        let classes: Vec<_> = primes
            .iter()
            .map(|&p| SquareClass::from_parts(false, [p]))
            .collect();
        assert!(classes.len() > 64);
        assert!(f2_independent(&classes).is_independent());
        let mut with_dep = classes.clone();
        with_dep.push(SquareClass::from_parts(false, [2, primes[100]]));
        assert_eq!(
            f2_independent(&with_dep),
            Independence::Dependent(vec![0, 100, classes.len()])
        );
    }

    #[test]
    fn display() {
        assert_eq!(cls(-50, 27).to_string(), "(-, {2,3})");
        assert_eq!(SquareClass::one().to_string(), "(+, {})");
    }
}
