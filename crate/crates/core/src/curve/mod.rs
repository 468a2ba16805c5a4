//! Elliptic curves over Q in exact rational arithmetic.
//!
//! Long Weierstrass models `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`,
//! the chord-tangent group law, reduction to integral short form, quadratic
//! twists, torsion filtering and rank-positivity witness search.

mod oracle;
mod search;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{factorize, ArithError, FactorBudget};

pub use oracle::{
    positive_rank_oracle, OracleConfig, ParityModel, RankOracle, RankTable, TableEntry,
    WitnessCache,
};
pub use search::{search_twist_witness, search_witness, SearchBox};

pub type Rational = BigRational;

/// Mazur: a rational torsion point has order at most 12.
pub const MAX_TORSION_ORDER: i64 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular model (zero discriminant)")]
    Singular,
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("twist parameter {0} is not squarefree")]
    NotSquarefree(i64),
    #[error("twist parameter must be nonzero")]
    ZeroTwist,
    #[error("imported point for d = {d} does not verify: {reason}")]
    BadImport { d: u64, reason: String },
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("rank table line {line}: {reason}")]
    TableSyntax { line: usize, reason: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"num/den"` or `"num"`.
pub fn parse_rational(s: &str) -> Result<Rational, CurveError> {
    let bad = || CurveError::BadRational(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Always `"num/den"`, denominators positive and reduced.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Point on a curve model: the identity or an affine pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl CurvePoint {
    pub fn affine(x: Rational, y: Rational) -> Self {
        CurvePoint::Affine { x, y }
    }

    pub fn from_integers(x: i64, y: i64) -> Self {
        CurvePoint::Affine { x: rat(x), y: rat(y) }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn coords(&self) -> Option<(&Rational, &Rational)> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { x, y } => Some((x, y)),
        }
    }

    /// `(x, y) -> (u^2 x, u^3 y)`.
    pub fn scale(&self, u: &Rational) -> CurvePoint {
        match self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let u2 = u * u;
                let u3 = &u2 * u;
                CurvePoint::Affine { x: x * u2, y: y * u3 }
            }
        }
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => write!(f, "O"),
            CurvePoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// Discriminant of a long Weierstrass model; zero means singular.
pub fn long_discriminant(a: &[Rational; 5]) -> Rational {
    let (b2, b4, b6, b8) = b_invariants(a);
    let nine = rat(9);
    -(&b2 * &b2 * &b8) - rat(8) * &b4 * &b4 * &b4 - rat(27) * &b6 * &b6 + nine * &b2 * &b4 * &b6
}

fn b_invariants(a: &[Rational; 5]) -> (Rational, Rational, Rational, Rational) {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = a1 * a1 + rat(4) * a2;
    let b4 = rat(2) * a4 + a1 * a3;
    let b6 = a3 * a3 + rat(4) * a6;
    let b8 = a1 * a1 * a6 + rat(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    (b2, b4, b6, b8)
}

/// Nonsingular long Weierstrass model over Q.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeierstrassCurve {
    a: [Rational; 5],
}

impl WeierstrassCurve {
    pub fn new(a: [Rational; 5]) -> Result<Self, CurveError> {
        if long_discriminant(&a).is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(WeierstrassCurve { a })
    }

    pub fn from_integers(a: [i64; 5]) -> Result<Self, CurveError> {
        Self::new(a.map(rat))
    }

    /// `y^2 + y = x^3 + x^2 - 9x - 15`, the minimal model of conductor 19
    /// used as the default base curve.
    pub fn x0_19() -> Self {
        Self::from_integers([0, 1, 1, -9, -15]).expect("nonsingular")
    }

    /// Parses `"a1,a2,a3,a4,a6"` (entries may be rationals).
    pub fn parse(s: &str) -> Result<Self, CurveError> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 5 {
            return Err(CurveError::BadRational(s.to_string()));
        }
        let mut a: [Rational; 5] = std::array::from_fn(|_| Rational::zero());
        for (slot, p) in a.iter_mut().zip(parts) {
            *slot = parse_rational(p)?;
        }
        Self::new(a)
    }

    pub fn coefficients(&self) -> &[Rational; 5] {
        &self.a
    }

    pub fn discriminant(&self) -> Rational {
        long_discriminant(&self.a)
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => {
                let [a1, a2, a3, a4, a6] = &self.a;
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                lhs == rhs
            }
        }
    }

    fn check(&self, p: &CurvePoint) -> Result<(), CurveError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(CurveError::PointNotOnCurve)
        }
    }

    pub fn negate(&self, p: &CurvePoint) -> CurvePoint {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let [a1, _, a3, _, _] = &self.a;
                CurvePoint::Affine {
                    x: x.clone(),
                    y: -y - a1 * x - a3,
                }
            }
        }
    }

    /// Group law on points already known to lie on the curve.
    pub(crate) fn add_unchecked(&self, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (CurvePoint::Infinity, _) => return q.clone(),
            (_, CurvePoint::Infinity) => return p.clone(),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let [a1, a2, a3, a4, _] = &self.a;
        let lambda = if x1 != x2 {
            (y2 - y1) / (x2 - x1)
        } else {
            let denom = rat(2) * y1 + a1 * x1 + a3;
            if y1 + y2 + a1 * x2 + a3 == Rational::zero() || denom.is_zero() {
                return CurvePoint::Infinity;
            }
            (rat(3) * x1 * x1 + rat(2) * a2 * x1 + a4 - a1 * y1) / denom
        };
        let nu = y1 - &lambda * x1;
        let x3 = &lambda * &lambda + a1 * &lambda - a2 - x1 - x2;
        let y3 = -(&lambda + a1) * &x3 - nu - a3;
        CurvePoint::Affine { x: x3, y: y3 }
    }

    pub fn add(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint, CurveError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    pub(crate) fn mul_unchecked(&self, k: i64, p: &CurvePoint) -> CurvePoint {
        let mut base = if k < 0 { self.negate(p) } else { p.clone() };
        let mut n = k.unsigned_abs();
        let mut acc = CurvePoint::Infinity;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.add_unchecked(&base, &base);
            }
        }
        acc
    }

    /// `k * P` by double-and-add.
    pub fn scalar_mul(&self, k: i64, p: &CurvePoint) -> Result<CurvePoint, CurveError> {
        self.check(p)?;
        Ok(self.mul_unchecked(k, p))
    }

    pub(crate) fn is_nontorsion_unchecked(&self, p: &CurvePoint) -> bool {
        let mut acc = CurvePoint::Infinity;
        for _ in 1..=MAX_TORSION_ORDER {
            acc = self.add_unchecked(&acc, p);
            if acc.is_infinity() {
                return false;
            }
        }
        true
    }

    /// `true` iff `k P != O` for `1 <= k <= 12`, which by Mazur's bound means
    /// `P` has infinite order.
    pub fn is_nontorsion(&self, p: &CurvePoint) -> Result<bool, CurveError> {
        self.check(p)?;
        Ok(self.is_nontorsion_unchecked(p))
    }

    /// Integral short model `Y^2 = X^3 + A X + B` and the substitution relating the two.
    pub fn to_short_form(&self) -> (ShortForm, CoordinateMap) {
        let [a1, _, a3, _, _] = &self.a;
        let (b2, b4, b6, _) = b_invariants(&self.a);
        let c4 = &b2 * &b2 - rat(24) * &b4;
        let c6 = -(&b2 * &b2 * &b2) + rat(36) * &b2 * &b4 - rat(216) * &b6;
        let a = -c4 / rat(48);
        let b = -c6 / rat(864);
        let u = integral_scale(&a, &b);
        let u2 = &u * &u;
        let u4 = &u2 * &u2;
        let u6 = &u4 * &u2;
        let short = ShortForm {
            a: a * u4,
            b: b * u6,
        };
        // old = (u'^2 X + r, u'^3 Y + s u'^2 X + t) with u' = 1/u
        let map = CoordinateMap {
            u: u.recip(),
            r: -&b2 / rat(12),
            s: -a1 / rat(2),
            t: a1 * &b2 / rat(24) - a3 / rat(2),
        };
        (short, map)
    }
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = &self.a;
        write!(f, "[{a1}, {a2}, {a3}, {a4}, {a6}]")
    }
}

/// Smallest positive integer `u` with `u^4 A` and `u^6 B` integral.
pub(crate) fn integral_scale(a: &Rational, b: &Rational) -> Rational {
    let budget = FactorBudget::default();
    let mut u = BigInt::one();
    let dens = a.denom().lcm(b.denom());
    if dens.is_one() {
        return Rational::one();
    }
    let dens_u64: u64 = dens.to_string().parse().expect("denominator fits in u64");
    let f = factorize(dens_u64, &budget).expect("small denominator");
    for &(p, _) in f.factors() {
        let va = valuation(a.denom(), p);
        let vb = valuation(b.denom(), p);
        let k = va.div_ceil(4).max(vb.div_ceil(6));
        for _ in 0..k {
            u *= p;
        }
    }
    Rational::from_integer(u)
}

fn valuation(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// `x = u^2 X + r`, `y = u^3 Y + s u^2 X + t`: maps short-model points
/// `(X, Y)` back to the long model and inversely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateMap {
    pub u: Rational,
    pub r: Rational,
    pub s: Rational,
    pub t: Rational,
}

impl CoordinateMap {
    pub fn is_identity(&self) -> bool {
        self.u.is_one() && self.r.is_zero() && self.s.is_zero() && self.t.is_zero()
    }

    /// Long-model point to short-model point.
    pub fn to_short(&self, p: &CurvePoint) -> CurvePoint {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let u2 = &self.u * &self.u;
                let u3 = &u2 * &self.u;
                let big_x = (x - &self.r) / &u2;
                let big_y = (y - &self.s * &u2 * &big_x - &self.t) / u3;
                CurvePoint::Affine { x: big_x, y: big_y }
            }
        }
    }

    /// Short-model point to long-model point.
    pub fn to_long(&self, p: &CurvePoint) -> CurvePoint {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let u2 = &self.u * &self.u;
                let u3 = &u2 * &self.u;
                CurvePoint::Affine {
                    x: &u2 * x + &self.r,
                    y: u3 * y + &self.s * &u2 * x + &self.t,
                }
            }
        }
    }
}

/// `y^2 = x^3 + A x + B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShortForm {
    a: Rational,
    b: Rational,
}

impl ShortForm {
    pub fn new(a: Rational, b: Rational) -> Result<Self, CurveError> {
        let disc = rat(4) * &a * &a * &a + rat(27) * &b * &b;
        if disc.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(ShortForm { a, b })
    }

    pub fn from_integers(a: i64, b: i64) -> Result<Self, CurveError> {
        Self::new(rat(a), rat(b))
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    pub fn to_weierstrass(&self) -> WeierstrassCurve {
        let z = Rational::zero();
        WeierstrassCurve {
            a: [z.clone(), z.clone(), z, self.a.clone(), self.b.clone()],
        }
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => y * y == x * x * x + &self.a * x + &self.b,
        }
    }

    /// `y^2 = x^3 + A d^2 x + B d^3` for squarefree `d != 0`.
    pub fn quadratic_twist(&self, d: i64) -> Result<ShortForm, CurveError> {
        if d == 0 {
            return Err(CurveError::ZeroTwist);
        }
        let f = factorize(d.unsigned_abs(), &FactorBudget::default())?;
        if f.factors().iter().any(|&(_, e)| e > 1) {
            return Err(CurveError::NotSquarefree(d));
        }
        Ok(self.twist_unchecked(&BigInt::from(d)))
    }

    pub(crate) fn twist_unchecked(&self, d: &BigInt) -> ShortForm {
        let d = Rational::from_integer(d.clone());
        let d2 = &d * &d;
        let d3 = &d2 * &d;
        ShortForm {
            a: &self.a * d2,
            b: &self.b * d3,
        }
    }

    /// Image under `(x, y) -> (u^2 x, u^3 y)`: coefficients `(u^4 A, u^6 B)`.
    pub fn scaled(&self, u: &Rational) -> ShortForm {
        let u2 = u * u;
        let u4 = &u2 * &u2;
        let u6 = &u4 * &u2;
        ShortForm {
            a: &self.a * u4,
            b: &self.b * u6,
        }
    }
}

impl fmt::Display for ShortForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + ({})x + ({})", self.a, self.b)
    }
}

/// Evidence about whether a twist has positive rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessStatus {
    /// A non-torsion point on the twist.
    Witnessed(CurvePoint),
    /// Search up to `bound` found nothing; `bound == 0` means the search was skipped.
    NoneFound { bound: u64 },
    /// Point supplied by a rank table and re-verified on the twist.
    Imported { source: String, point: CurvePoint },
    /// Advisory only (root-number parity or a table entry without a point).
    ParityOdd { source: String },
}

impl WitnessStatus {
    /// The verified point, for statuses that may enter certificates.
    pub fn point(&self) -> Option<&CurvePoint> {
        match self {
            WitnessStatus::Witnessed(p) | WitnessStatus::Imported { point: p, .. } => Some(p),
            _ => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.point().is_some()
    }

    pub(crate) fn map_point(&self, f: impl Fn(&CurvePoint) -> CurvePoint) -> WitnessStatus {
        match self {
            WitnessStatus::Witnessed(p) => WitnessStatus::Witnessed(f(p)),
            WitnessStatus::Imported { source, point } => WitnessStatus::Imported {
                source: source.clone(),
                point: f(point),
            },
            other => other.clone(),
        }
    }
}

pub(crate) fn is_perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}
