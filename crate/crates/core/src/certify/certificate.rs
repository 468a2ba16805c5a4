use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AnnotatedTwistSet, CertifyError};
use crate::arith::{f2_independent, factorize, square_class, FactorBudget, Independence, SquareClass};
use crate::curve::{format_rational, parse_rational, CurvePoint, Rational, WeierstrassCurve};
use crate::parasearch::{is_strict, Parallelepiped};

pub const SCHEMA: &str = "sqtwist-certificate/v1";

/// Largest dimension the verifier accepts.
pub const MAX_DIMENSION: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseModel {
    pub a1: String,
    pub a2: String,
    pub a3: String,
    pub a4: String,
    pub a6: String,
}

impl BaseModel {
    pub fn of(curve: &WeierstrassCurve) -> Self {
        let [a1, a2, a3, a4, a6] = curve.coefficients().clone().map(|q| format_rational(&q));
        BaseModel { a1, a2, a3, a4, a6 }
    }

    pub fn curve(&self) -> Result<WeierstrassCurve, CertifyError> {
        let a = [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6];
        let mut coeffs: [Rational; 5] = std::array::from_fn(|_| Rational::zero());
        for (slot, s) in coeffs.iter_mut().zip(a) {
            *slot = parse_rational(s)?;
        }
        Ok(WeierstrassCurve::new(coeffs)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub x: String,
    pub y: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    /// `c prod_{i in I} a_i` as a decimal integer.
    pub d: String,
    /// Point on the twist of the integral short model of the base curve by
    /// the squarefree kernel of `d`.
    pub witness: Witness,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertMetadata {
    pub tool: String,
    pub version: String,
    pub twist_bound: u64,
    pub search_bound: u64,
    pub parity_filter: bool,
    pub table_source: Option<String>,
    pub finder: String,
    #[serde(default)]
    pub run_config: serde_json::Value,
}

impl CertMetadata {
    pub fn new(finder: &str) -> Self {
        CertMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            finder: finder.to_string(),
            ..CertMetadata::default()
        }
    }
}

/// A coset `c V` of positive integers with one non-torsion witness per
/// element. Entry keys are subset bitmasks: bit `i` selects generator `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub base: BaseModel,
    pub c: String,
    pub generators: Vec<String>,
    pub entries: BTreeMap<u32, Entry>,
    pub metadata: CertMetadata,
    /// `sha256:<hex>` over the serialized certificate with this field empty.
    pub digest: String,
}

impl Certificate {
    pub fn compute_digest(&self) -> String {
        let mut unsealed = self.clone();
        unsealed.digest = String::new();
        let bytes = serde_json::to_vec(&unsealed).expect("serializable");
        let hash = Sha256::digest(&bytes);
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }

    pub fn seal(&mut self) {
        self.digest = self.compute_digest();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CertifyError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }
}

/// Assembles a certificate for `p` from the stored witnesses of `tw`.
pub fn build_certificate(
    tw: &AnnotatedTwistSet,
    p: &Parallelepiped,
    metadata: CertMetadata,
) -> Result<Certificate, CertifyError> {
    if !is_strict(p) {
        return Err(CertifyError::NotStrict);
    }
    let budget = FactorBudget::default();
    let mut entries = BTreeMap::new();
    for (mask, value) in p.elements().iter().enumerate() {
        let d = Some(value)
            .filter(|v| v.is_integer())
            .and_then(|v| v.to_integer().to_u64())
            .filter(|&d| d >= 1 && d <= tw.bound)
            .ok_or(CertifyError::NotInSet)?;
        let kernel: u64 = factorize(d, &budget)?.odd_primes().product();
        let point = tw
            .kernel_point(kernel)
            .ok_or(CertifyError::MissingWitness(d))?;
        let (x, y) = point.coords().ok_or(CertifyError::MissingWitness(d))?;
        entries.insert(
            mask as u32,
            Entry {
                d: d.to_string(),
                witness: Witness {
                    x: format_rational(x),
                    y: format_rational(y),
                },
            },
        );
    }
    let mut cert = Certificate {
        schema: SCHEMA.to_string(),
        base: BaseModel::of(&tw.base),
        c: p.c().to_integer().to_string(),
        generators: p.generators().iter().map(format_rational).collect(),
        entries,
        metadata,
        digest: String::new(),
    };
    cert.seal();
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Schema(String),
    Digest,
    Malformed { field: String, reason: String },
    BadBase(String),
    NoGenerators,
    TooManyGenerators(usize),
    NonpositiveBase,
    NonpositiveGenerator(usize),
    DependentGenerators(Vec<usize>),
    EntryCount { expected: usize, found: usize },
    MissingEntry(u32),
    UnexpectedEntry(u32),
    NotAnInteger(u32),
    ValueMismatch { subset: u32, expected: String, found: String },
    PointNotOnCurve(u32),
    TorsionPoint(u32),
    ClassMismatch(u32),
    RepeatedClass(u32),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Schema(s) => write!(f, "unknown schema `{s}`"),
            Violation::Digest => write!(f, "digest does not match content"),
            Violation::Malformed { field, reason } => write!(f, "malformed {field}: {reason}"),
            Violation::BadBase(r) => write!(f, "bad base curve: {r}"),
            Violation::NoGenerators => write!(f, "no generators"),
            Violation::TooManyGenerators(n) => write!(f, "{n} generators exceeds the supported maximum"),
            Violation::NonpositiveBase => write!(f, "c is not a positive integer"),
            Violation::NonpositiveGenerator(i) => write!(f, "generator {i} is not positive"),
            Violation::DependentGenerators(w) => write!(f, "dependent generators {w:?}"),
            Violation::EntryCount { expected, found } => {
                write!(f, "expected {expected} entries, found {found}")
            }
            Violation::MissingEntry(i) => write!(f, "missing entry at I={i}"),
            Violation::UnexpectedEntry(i) => write!(f, "unexpected entry at I={i}"),
            Violation::NotAnInteger(i) => write!(f, "c*prod a_i is not a positive integer at I={i}"),
            Violation::ValueMismatch {
                subset,
                expected,
                found,
            } => write!(f, "d mismatch at I={subset}: expected {expected}, found {found}"),
            Violation::PointNotOnCurve(i) => write!(f, "point-not-on-curve at I={i}"),
            Violation::TorsionPoint(i) => write!(f, "torsion witness at I={i}"),
            Violation::ClassMismatch(i) => write!(f, "square class of d outside the coset at I={i}"),
            Violation::RepeatedClass(i) => write!(f, "repeated square class at I={i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Vec<Violation>),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Verdict::Valid => &[],
            Verdict::Invalid(v) => v,
        }
    }
}

fn parse_positive_integer(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    s.parse::<BigInt>().ok().filter(|v| v.is_positive())
}

/// Rechecks a certificate from its own fields with exact arithmetic.
pub fn verify_certificate(cert: &Certificate) -> Verdict {
    let mut bad = Vec::new();
    let malformed = |field: &str, reason: String| Violation::Malformed {
        field: field.to_string(),
        reason,
    };
    if cert.schema != SCHEMA {
        bad.push(Violation::Schema(cert.schema.clone()));
    }
    if cert.digest != cert.compute_digest() {
        bad.push(Violation::Digest);
    }
    let curve = match cert.base.curve() {
        Ok(c) => Some(c),
        Err(e) => {
            bad.push(Violation::BadBase(e.to_string()));
            None
        }
    };
    let c = parse_positive_integer(&cert.c);
    if c.is_none() {
        bad.push(Violation::NonpositiveBase);
    }
    let n = cert.generators.len();
    if n == 0 {
        bad.push(Violation::NoGenerators);
    }
    if n > MAX_DIMENSION {
        bad.push(Violation::TooManyGenerators(n));
        return Verdict::Invalid(bad);
    }
    let budget = FactorBudget::default();
    let mut gens = Vec::with_capacity(n);
    for (i, g) in cert.generators.iter().enumerate() {
        match parse_rational(g) {
            Ok(q) if q.is_positive() => gens.push(q),
            Ok(_) => bad.push(Violation::NonpositiveGenerator(i)),
            Err(e) => bad.push(malformed(&format!("generator {i}"), e.to_string())),
        }
    }
    let gens_ok = gens.len() == n && n > 0;
    let mut gen_classes = Vec::new();
    if gens_ok {
        match gens.iter().map(|g| square_class(g, &budget)).collect::<Result<Vec<_>, _>>() {
            Ok(classes) => {
                if let Independence::Dependent(w) = f2_independent(&classes) {
                    bad.push(Violation::DependentGenerators(w));
                }
                gen_classes = classes;
            }
            Err(e) => bad.push(malformed("generators", e.to_string())),
        }
    }

    let expected_count = 1usize << n;
    if cert.entries.len() != expected_count {
        bad.push(Violation::EntryCount {
            expected: expected_count,
            found: cert.entries.len(),
        });
    }
    for &k in cert.entries.keys() {
        if k as usize >= expected_count {
            bad.push(Violation::UnexpectedEntry(k));
        }
    }

    let short = curve.as_ref().map(|c| c.to_short_form().0);
    let c_class = c.as_ref().and_then(|c| c.to_u64()).and_then(|c| SquareClass::of_u64(c, &budget).ok());
    let mut seen_classes = BTreeSet::new();
    for mask in 0..expected_count as u32 {
        let Some(entry) = cert.entries.get(&mask) else {
            bad.push(Violation::MissingEntry(mask));
            continue;
        };
        let found = parse_positive_integer(&entry.d);
        if let (Some(c), true) = (&c, gens_ok) {
            let value = subset_value(&Rational::from_integer(c.clone()), &gens, mask);
            if !value.is_integer() || !value.is_positive() {
                bad.push(Violation::NotAnInteger(mask));
            } else if found.as_ref() != Some(&value.to_integer()) {
                bad.push(Violation::ValueMismatch {
                    subset: mask,
                    expected: value.to_integer().to_string(),
                    found: entry.d.clone(),
                });
            }
        }
        let Some(d) = found else {
            bad.push(malformed(&format!("d at I={mask}"), "not a positive integer".into()));
            continue;
        };
        let Some(d) = d.to_u64() else {
            bad.push(malformed(&format!("d at I={mask}"), "exceeds 64 bits".into()));
            continue;
        };
        let d_class = match SquareClass::of_u64(d, &budget) {
            Ok(cl) => cl,
            Err(e) => {
                bad.push(malformed(&format!("d at I={mask}"), e.to_string()));
                continue;
            }
        };
        if let (Some(cc), true) = (&c_class, gen_classes.len() == n) {
            let expected = gen_classes
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(cc.clone(), |acc, (_, g)| acc.product(g));
            if expected != d_class {
                bad.push(Violation::ClassMismatch(mask));
            }
        }
        if !seen_classes.insert(d_class.clone()) {
            bad.push(Violation::RepeatedClass(mask));
        }

        let point = match (parse_rational(&entry.witness.x), parse_rational(&entry.witness.y)) {
            (Ok(x), Ok(y)) => CurvePoint::affine(x, y),
            _ => {
                bad.push(malformed(&format!("witness at I={mask}"), "bad rational".into()));
                continue;
            }
        };
        let Some(short) = &short else { continue };
        let kernel = d_class.kernel().expect("kernel divides d");
        let twist = short
            .quadratic_twist(kernel as i64)
            .expect("kernel is squarefree and nonzero");
        if !twist.contains(&point) {
            bad.push(Violation::PointNotOnCurve(mask));
            continue;
        }
        match twist.to_weierstrass().is_nontorsion(&point) {
            Ok(true) => {}
            _ => bad.push(Violation::TorsionPoint(mask)),
        }
    }

    if bad.is_empty() {
        Verdict::Valid
    } else {
        Verdict::Invalid(bad)
    }
}

/// `prod` of the generators over the subset `mask`, times `c`.
pub fn subset_value(c: &Rational, gens: &[Rational], mask: u32) -> Rational {
    gens.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .fold(c.clone(), |acc, (_, g)| acc * g)
}
