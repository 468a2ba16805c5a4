//! Strict multiplicative parallelepipeds `{c prod_{i in I} a_i}` inside
//! finite integer sets: exhaustive and prime-guided finders plus diagnostics
//! for the density inequalities behind the guided construction.

mod brute;
mod diagnostics;
mod guided;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{f2_independent, square_class, ArithError, FactorBudget, SquareClass};
use crate::curve::{parse_rational, Rational};
use crate::density::{DensityError, FiniteIntegerSet};

pub use brute::{brute_force_search, BruteLimits, BruteOutcome};
pub use diagnostics::{indstep_diagnostics, IndStepReport, PairDensity, PointSample};
pub use guided::{
    compute_window, compute_window_capped, guided_search, select_prime_pair, EstimatorConfig,
    ExhaustReason, GuidedConfig, GuidedOutcome, PrimePair, SearchTrace, WindowPolicy,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParaError {
    #[error("a parallelepiped needs at least one generator")]
    NoGenerators,
    #[error("base and generators must be positive rationals")]
    Nonpositive,
    #[error("window [{a}, {b}] contains fewer than two usable primes")]
    WindowTooNarrow { a: u64, b: u64 },
    #[error("density estimate must be positive, got {0}")]
    NonpositiveDensity(f64),
    #[error("no window end below {cap} brings the prime product under the target")]
    WindowUnreachable { a: u64, cap: u64 },
    #[error("record syntax: {0}")]
    Record(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A base `c` and generators `a_1..a_n`, all positive rationals.
///
/// Square classes are not checked here; [`is_strict`] decides strictness and
/// both finders only return strict objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Parallelepiped {
    c: Rational,
    generators: Vec<Rational>,
}

impl Parallelepiped {
    pub fn new(c: Rational, generators: Vec<Rational>) -> Result<Self, ParaError> {
        if generators.is_empty() {
            return Err(ParaError::NoGenerators);
        }
        if !c.is_positive() || generators.iter().any(|g| !g.is_positive()) {
            return Err(ParaError::Nonpositive);
        }
        Ok(Parallelepiped { c, generators })
    }

    pub fn from_integers(c: u64, generators: &[(u64, u64)]) -> Result<Self, ParaError> {
        Parallelepiped::new(
            Rational::from_integer(BigInt::from(c)),
            generators
                .iter()
                .map(|&(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
                .collect(),
        )
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn generators(&self) -> &[Rational] {
        &self.generators
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    /// All `2^n` subset products; bit `i` of the index selects generator `i`.
    pub fn elements(&self) -> Vec<Rational> {
        let n = self.generators.len();
        let mut out = Vec::with_capacity(1 << n);
        out.push(self.c.clone());
        for (i, g) in self.generators.iter().enumerate() {
            for j in 0..(1usize << i) {
                let v = &out[j] * g;
                out.push(v);
            }
        }
        out
    }

    /// Element values as `u64` when every element is a positive integer that fits.
    pub fn integer_elements(&self) -> Option<Vec<u64>> {
        self.elements()
            .iter()
            .map(|e| if e.is_integer() { e.to_integer().to_u64() } else { None })
            .collect()
    }

    pub fn generator_classes(&self, budget: &FactorBudget) -> Result<Vec<SquareClass>, ArithError> {
        self.generators.iter().map(|g| square_class(g, budget)).collect()
    }

    /// Restriction to the generators whose indices are listed.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self, ParaError> {
        Parallelepiped::new(
            self.c.clone(),
            keep.iter().map(|&i| self.generators[i].clone()).collect(),
        )
    }

    /// `c=<rational>; gens=<rational,...>; elements=<int or rational,...>`
    pub fn to_record(&self) -> String {
        let join = |v: &[Rational]| {
            v.iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "c={}; gens={}; elements={}",
            self.c.to_string(),
            join(&self.generators),
            join(&self.elements())
        )
    }

    /// Parses a record written by [`Parallelepiped::to_record`]. A present
    /// `elements` field must agree with the recomputed elements.
    pub fn parse_record(line: &str) -> Result<Self, ParaError> {
        let bad = |m: &str| ParaError::Record(m.to_string());
        let mut c = None;
        let mut gens = None;
        let mut elements = None;
        for field in line.split(';') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let (key, value) = field.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let list = |v: &str| -> Result<Vec<Rational>, ParaError> {
                v.split(',')
                    .map(|s| parse_rational(s.trim()).map_err(|_| bad("bad rational")))
                    .collect()
            };
            match key.trim() {
                "c" => c = Some(parse_rational(value.trim()).map_err(|_| bad("bad c"))?),
                "gens" => gens = Some(list(value)?),
                "elements" => elements = Some(list(value)?),
                other => return Err(bad(&format!("unknown field `{other}`"))),
            }
        }
        let p = Parallelepiped::new(
            c.ok_or_else(|| bad("missing c"))?,
            gens.ok_or_else(|| bad("missing gens"))?,
        )?;
        if let Some(e) = elements {
            if e != p.elements() {
                return Err(bad("elements do not match c and gens"));
            }
        }
        Ok(p)
    }
}

impl fmt::Display for Parallelepiped {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

/// Whether the generators are independent modulo squares.
pub fn is_strict(p: &Parallelepiped) -> bool {
    is_strict_with(p, &FactorBudget::default()).unwrap_or(false)
}

pub fn is_strict_with(p: &Parallelepiped, budget: &FactorBudget) -> Result<bool, ArithError> {
    Ok(f2_independent(&p.generator_classes(budget)?).is_independent())
}

/// Whether every element is a positive integer belonging to `s`.
pub fn verify_in_set(p: &Parallelepiped, s: &FiniteIntegerSet) -> bool {
    p.elements().iter().all(|e| {
        e.is_integer()
            && !e.is_zero()
            && e.to_integer().to_u64().is_some_and(|n| s.contains(n))
    })
}

/// Sorted, deduplicated output with `c` ascending, then generators lexicographically.
pub(crate) fn canonical_sort(v: &mut Vec<Parallelepiped>) {
    v.sort();
    v.dedup();
}

pub(crate) fn ratio(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
