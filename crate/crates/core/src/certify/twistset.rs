use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::arith::{primes_up_to, squarefree_kernels};
use crate::curve::{
    format_rational, parse_rational, CurvePoint, OracleConfig, RankOracle,
    Rational, WeierstrassCurve, WitnessStatus,
};
use crate::density::FiniteIntegerSet;

/// Serializable form of a [`WitnessStatus`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StoredStatus {
    Witnessed { x: String, y: String },
    NoneFound { bound: u64 },
    Imported { source: String, x: String, y: String },
    ParityOdd { source: String },
}

impl StoredStatus {
    pub fn from_status(s: &WitnessStatus) -> Self {
        let xy = |p: &CurvePoint| match p.coords() {
            Some((x, y)) => (format_rational(x), format_rational(y)),
            None => ("inf".into(), "inf".into()),
        };
        match s {
            WitnessStatus::Witnessed(p) => {
                let (x, y) = xy(p);
                StoredStatus::Witnessed { x, y }
            }
            WitnessStatus::NoneFound { bound } => StoredStatus::NoneFound { bound: *bound },
            WitnessStatus::Imported { source, point } => {
                let (x, y) = xy(point);
                StoredStatus::Imported {
                    source: source.clone(),
                    x,
                    y,
                }
            }
            WitnessStatus::ParityOdd { source } => StoredStatus::ParityOdd {
                source: source.clone(),
            },
        }
    }

    pub fn to_status(&self) -> Result<WitnessStatus, CertifyError> {
        let pt = |x: &str, y: &str| -> Result<CurvePoint, CertifyError> {
            Ok(CurvePoint::affine(parse_rational(x)?, parse_rational(y)?))
        };
        Ok(match self {
            StoredStatus::Witnessed { x, y } => WitnessStatus::Witnessed(pt(x, y)?),
            StoredStatus::NoneFound { bound } => WitnessStatus::NoneFound { bound: *bound },
            StoredStatus::Imported { source, x, y } => WitnessStatus::Imported {
                source: source.clone(),
                point: pt(x, y)?,
            },
            StoredStatus::ParityOdd { source } => WitnessStatus::ParityOdd {
                source: source.clone(),
            },
        })
    }
}

/// Rank evidence for every squarefree `d <= N` and the derived set of all
/// `d <= N` whose squarefree kernel carries a verified point.
#[derive(Clone, Debug)]
pub struct AnnotatedTwistSet {
    pub base: WeierstrassCurve,
    pub bound: u64,
    /// Keyed by squarefree kernel; points lie on the twist of the integral
    /// short model of `base` by the key.
    pub statuses: BTreeMap<u64, WitnessStatus>,
    pub set: FiniteIntegerSet,
}

impl AnnotatedTwistSet {
    /// Builds the derived set from per-kernel statuses, dropping kernels above `bound`.
    pub fn from_statuses(
        base: WeierstrassCurve,
        bound: u64,
        mut statuses: BTreeMap<u64, WitnessStatus>,
    ) -> Self {
        statuses.retain(|&k, _| k <= bound);
        let kernels = squarefree_kernels(bound);
        let set = FiniteIntegerSet::new(
            (1..=bound)
                .filter(|&d| {
                    statuses
                        .get(&kernels[d as usize])
                        .is_some_and(WitnessStatus::is_certified)
                })
                .collect(),
            bound.max(1),
        )
        .expect("elements lie in [1, bound]");
        AnnotatedTwistSet {
            base,
            bound,
            statuses,
            set,
        }
    }

    /// Stored point for the squarefree kernel of `d`, on the twist by that kernel.
    pub fn kernel_point(&self, kernel: u64) -> Option<&CurvePoint> {
        self.statuses.get(&kernel).and_then(WitnessStatus::point)
    }

    pub fn squarefree_count(&self) -> usize {
        self.statuses.len()
    }

    pub fn witnessed_kernels(&self) -> usize {
        self.statuses.values().filter(|s| s.is_certified()).count()
    }

    /// `|set| / N`.
    pub fn density(&self) -> f64 {
        self.set.len() as f64 / self.bound.max(1) as f64
    }
}

/// Options for [`compute_twist_set`].
#[derive(Clone, Debug, Default)]
pub struct TwistSetOptions {
    /// Worker threads; `None` uses the global pool. Ignored without the
    /// `parallel` feature.
    pub threads: Option<usize>,
    /// Append-only progress file (one JSON record per kernel). Existing
    /// records are reused, so an interrupted run resumes where it stopped.
    pub checkpoint: Option<PathBuf>,
    /// Kernels evaluated between checkpoint writes.
    pub chunk: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointRecord {
    d: u64,
    #[serde(flatten)]
    status: StoredStatus,
}

fn load_checkpoint(path: &Path) -> Result<BTreeMap<u64, WitnessStatus>, CertifyError> {
    let mut out = BTreeMap::new();
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    for line in BufReader::new(file).lines() {
        let line = line?;
        // A torn final line from an interrupted write is skipped.
        let Ok(rec) = serde_json::from_str::<CheckpointRecord>(&line) else {
            continue;
        };
        out.insert(rec.d, rec.status.to_status()?);
    }
    Ok(out)
}

fn append_checkpoint(path: &Path, batch: &[(u64, WitnessStatus)]) -> Result<(), CertifyError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut buf = String::new();
    for (d, s) in batch {
        let rec = CheckpointRecord {
            d: *d,
            status: StoredStatus::from_status(s),
        };
        buf += &serde_json::to_string(&rec)?;
        buf.push('\n');
    }
    file.write_all(buf.as_bytes())?;
    file.flush()?;
    Ok(())
}

fn evaluate(oracle: &RankOracle, kernels: &[u64]) -> Result<Vec<(u64, WitnessStatus)>, CertifyError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        kernels
            .par_iter()
            .map(|&d| Ok((d, oracle.kernel_status(d)?)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        kernels
            .iter()
            .map(|&d| Ok((d, oracle.kernel_status(d)?)))
            .collect()
    }
}

/// Runs the oracle on every squarefree `d <= n` and extends to all `d <= n`
/// by square classes.
pub fn compute_twist_set(
    base: &WeierstrassCurve,
    n: u64,
    config: &OracleConfig,
    options: &TwistSetOptions,
) -> Result<AnnotatedTwistSet, CertifyError> {
    if n == 0 {
        return Err(CertifyError::ZeroBound);
    }
    let oracle = RankOracle::new(base.clone(), config.clone());
    let kernels = squarefree_kernels(n);
    let mut statuses = match &options.checkpoint {
        Some(path) => load_checkpoint(path)?,
        None => BTreeMap::new(),
    };
    statuses.retain(|&d, _| d <= n && kernels[d as usize] == d);
    let todo: Vec<u64> = (1..=n)
        .filter(|&d| kernels[d as usize] == d && !statuses.contains_key(&d))
        .collect();
    let chunk = options.chunk.unwrap_or(512).max(1);

    let mut run = || -> Result<(), CertifyError> {
        for block in todo.chunks(chunk) {
            let batch = evaluate(&oracle, block)?;
            if let Some(path) = &options.checkpoint {
                append_checkpoint(path, &batch)?;
            }
            statuses.extend(batch);
        }
        Ok(())
    };
    #[cfg(feature = "parallel")]
    match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| CertifyError::Threads(e.to_string()))?
            .install(run)?,
        None => run()?,
    }
    #[cfg(not(feature = "parallel"))]
    run()?;

    Ok(AnnotatedTwistSet::from_statuses(base.clone(), n, statuses))
}

/// Twist set built from the points side: every `x = p/q` in lowest terms
/// with `|p|, q <= height` and `f(x) > 0` lies on the twist by the squarefree
/// kernel `k` of `q^4 f(x)`, as `(k x, k^2 y)` with `k y^2 = f(x)`. Kernels up
/// to `n` whose point is non-torsion are kept (the first point met for each
/// kernel), so every element is witnessed by construction.
pub fn points_first_twist_set(
    base: &WeierstrassCurve,
    n: u64,
    height: u64,
) -> Result<AnnotatedTwistSet, CertifyError> {
    if n == 0 {
        return Err(CertifyError::ZeroBound);
    }
    let oracle = RankOracle::new(base.clone(), OracleConfig::default());
    let short = oracle.short_form();
    let (a, b) = match (short.a().to_integer().to_i128(), short.b().to_integer().to_i128()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(AnnotatedTwistSet::from_statuses(base.clone(), n, BTreeMap::new())),
    };
    let primes = primes_up_to(n);
    let h = height as i128;
    let mut statuses: BTreeMap<u64, WitnessStatus> = BTreeMap::new();
    for q in 1..=h {
        for p in -h..=h {
            if p.gcd(&q) != 1 {
                continue;
            }
            // q^4 f(p/q) = q (p^3 + A p q^2 + B q^3)
            let value = p
                .checked_pow(3)
                .zip(a.checked_mul(p).and_then(|t| t.checked_mul(q * q)))
                .zip(b.checked_mul(q * q * q))
                .and_then(|((x, y), z)| x.checked_add(y)?.checked_add(z)?.checked_mul(q));
            let Some(value) = value.filter(|&v| v > 0) else { continue };
            let Some((kernel, root)) = small_kernel(value as u128, &primes, n) else { continue };
            if statuses.contains_key(&kernel) {
                continue;
            }
            let k = Rational::from_integer(BigInt::from(kernel));
            let x = Rational::new(BigInt::from(p), BigInt::from(q));
            let y = Rational::new(BigInt::from(root), BigInt::from(q * q));
            let point = CurvePoint::affine(&k * x, &k * &k * y);
            let twist = oracle.twist(kernel);
            debug_assert!(twist.contains(&point));
            if twist.to_weierstrass().is_nontorsion(&point)? {
                statuses.insert(kernel, WitnessStatus::Witnessed(point));
            }
        }
    }
    Ok(AnnotatedTwistSet::from_statuses(base.clone(), n, statuses))
}

/// `(k, r)` with `v = k r^2` and `k` squarefree, when `k <= n`. Every prime
/// of such a kernel is at most `n`, so the cofactor left after dividing out
/// those primes must be a perfect square.
fn small_kernel(v: u128, primes: &[u64], n: u64) -> Option<(u64, u128)> {
    let mut rest = v;
    let mut kernel = 1u64;
    let mut root = 1u128;
    for &p in primes {
        let pw = p as u128;
        let mut odd = false;
        while rest % pw == 0 {
            rest /= pw;
            if odd {
                root *= pw;
            }
            odd = !odd;
        }
        if odd {
            kernel = kernel.checked_mul(p).filter(|&k| k <= n)?;
        }
        if rest == 1 {
            return Some((kernel, root));
        }
    }
    let s = rest.sqrt();
    (s * s == rest).then_some((kernel, root * s))
}
