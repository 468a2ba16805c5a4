//! Rank-positivity oracle for twists: imported tables, a shared cache, an
//! optional root-number parity pre-filter and witness search.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;

use super::search::{search_twist_witness, SearchBox};
use super::{
    format_rational, parse_rational, CurveError, CurvePoint, Rational, ShortForm,
    WeierstrassCurve, WitnessStatus,
};
use crate::arith::{kronecker, squarefree_decomposition, FactorBudget};

/// Root number of the base curve and its conductor, used to predict the
/// parity of twists. Advisory only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityModel {
    pub conductor: u64,
    pub root_number: i8,
}

impl ParityModel {
    /// Conductor 19, root number `+1`.
    pub fn x0_19() -> Self {
        ParityModel {
            conductor: 19,
            root_number: 1,
        }
    }

    /// `w(E_D) = w(E) * chi_D(-N)` for the fundamental discriminant `D` of
    /// `Q(sqrt d)`, when `gcd(D, N) = 1`; `None` otherwise.
    pub fn twist_root_number(&self, d: u64) -> Option<i8> {
        let disc = if d % 4 == 1 { d } else { 4 * d };
        if disc.gcd(&self.conductor) != 1 {
            return None;
        }
        let chi = kronecker(disc as i64, -(self.conductor as i64));
        Some(self.root_number * chi)
    }

    pub fn predicts_odd(&self, d: u64) -> Option<bool> {
        self.twist_root_number(d).map(|w| w == -1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableEntry {
    /// Point on the twist by the (squarefree) key, in short-model coordinates.
    Point(CurvePoint),
    /// Positive rank claimed without a point.
    Advisory,
}

/// Imported twist-rank data keyed by squarefree `d`.
///
/// Text format, one record per line: `d<TAB>x<TAB>y` or `d<TAB>?`; `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankTable {
    pub source: String,
    pub entries: BTreeMap<u64, TableEntry>,
}

impl RankTable {
    pub fn parse(text: &str, source: &str) -> Result<Self, CurveError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| CurveError::TableSyntax {
                line: i + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let d: u64 = fields[0].parse().map_err(|_| err("bad twist parameter"))?;
            if d == 0 {
                return Err(err("twist parameter must be positive"));
            }
            let entry = match fields.as_slice() {
                [_, "?"] => TableEntry::Advisory,
                [_, x, y] => TableEntry::Point(CurvePoint::affine(
                    parse_rational(x).map_err(|_| err("bad x"))?,
                    parse_rational(y).map_err(|_| err("bad y"))?,
                )),
                _ => return Err(err("expected `d<TAB>x<TAB>y` or `d<TAB>?`")),
            };
            entries.insert(d, entry);
        }
        Ok(RankTable {
            source: source.to_string(),
            entries,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d, e) in &self.entries {
            match e {
                TableEntry::Point(CurvePoint::Affine { x, y }) => {
                    out += &format!("{d}\t{}\t{}\n", format_rational(x), format_rational(y));
                }
                TableEntry::Point(CurvePoint::Infinity) | TableEntry::Advisory => {
                    out += &format!("{d}\t?\n");
                }
            }
        }
        out
    }
}

/// Shared per-kernel results. Entries are deterministic, so concurrent
/// writers may race on the same key.
#[derive(Debug, Default)]
pub struct WitnessCache {
    inner: RwLock<HashMap<u64, WitnessStatus>>,
}

impl WitnessCache {
    pub fn get(&self, kernel: u64) -> Option<WitnessStatus> {
        self.inner.read().expect("cache lock").get(&kernel).cloned()
    }

    pub fn insert(&self, kernel: u64, status: WitnessStatus) {
        self.inner.write().expect("cache lock").insert(kernel, status);
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub search_bound: u64,
    /// When set, twists predicted to have even parity are not searched and
    /// unsuccessful searches on predicted-odd twists report `ParityOdd`.
    pub parity: Option<ParityModel>,
    pub table: Option<Arc<RankTable>>,
    pub budget: FactorBudget,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            search_bound: 100_000,
            parity: None,
            table: None,
            budget: FactorBudget::default(),
        }
    }
}

/// Rank-positivity oracle for the twists of one base curve.
#[derive(Debug)]
pub struct RankOracle {
    base: WeierstrassCurve,
    short: ShortForm,
    config: OracleConfig,
    cache: WitnessCache,
}

impl RankOracle {
    pub fn new(base: WeierstrassCurve, config: OracleConfig) -> Self {
        let (short, _) = base.to_short_form();
        RankOracle {
            base,
            short,
            config,
            cache: WitnessCache::default(),
        }
    }

    pub fn base(&self) -> &WeierstrassCurve {
        &self.base
    }

    pub fn short_form(&self) -> &ShortForm {
        &self.short
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn cache(&self) -> &WitnessCache {
        &self.cache
    }

    /// The twist of the base short model by `d` (any positive integer).
    pub fn twist(&self, d: u64) -> ShortForm {
        self.short.twist_unchecked(&BigInt::from(d))
    }

    fn verify_on_twist(&self, kernel: u64, p: &CurvePoint) -> Result<(), CurveError> {
        let tw = self.twist(kernel);
        let bad = |reason: &str| CurveError::BadImport {
            d: kernel,
            reason: reason.to_string(),
        };
        if !tw.contains(p) {
            return Err(bad("point not on twist"));
        }
        if !tw.to_weierstrass().is_nontorsion_unchecked(p) {
            return Err(bad("point is torsion"));
        }
        Ok(())
    }

    /// Status of the twist by a squarefree `kernel`; points live on `twist(kernel)`.
    pub fn kernel_status(&self, kernel: u64) -> Result<WitnessStatus, CurveError> {
        let mut advisory_source = None;
        if let Some(table) = &self.config.table {
            match table.entries.get(&kernel) {
                Some(TableEntry::Point(p)) => {
                    self.verify_on_twist(kernel, p)?;
                    return Ok(WitnessStatus::Imported {
                        source: table.source.clone(),
                        point: p.clone(),
                    });
                }
                Some(TableEntry::Advisory) => advisory_source = Some(table.source.clone()),
                None => {}
            }
        }
        if let Some(hit) = self.cache.get(kernel) {
            return Ok(hit);
        }
        let predicted_odd = self.config.parity.and_then(|m| m.predicts_odd(kernel));
        let status = if predicted_odd == Some(false) && advisory_source.is_none() {
            WitnessStatus::NoneFound { bound: 0 }
        } else {
            let bound = self.config.search_bound.max(1);
            match search_twist_witness(&self.short, kernel, SearchBox::from_bound(bound)) {
                Some(p) => WitnessStatus::Witnessed(p),
                None => match (advisory_source, predicted_odd) {
                    (Some(source), _) => WitnessStatus::ParityOdd { source },
                    (None, Some(true)) => WitnessStatus::ParityOdd {
                        source: "root-number".to_string(),
                    },
                    _ => WitnessStatus::NoneFound { bound },
                },
            }
        };
        self.cache.insert(kernel, status.clone());
        Ok(status)
    }

    /// Status of the twist by `d = kernel * m^2`, with points carried to
    /// `twist(d)` by `(x, y) -> (m^2 x, m^3 y)`.
    pub fn status(&self, d: u64) -> Result<WitnessStatus, CurveError> {
        if d == 0 {
            return Err(CurveError::ZeroTwist);
        }
        let (kernel, m) = squarefree_decomposition(d, &self.config.budget)?;
        let status = self.kernel_status(kernel)?;
        let m = Rational::from_integer(BigInt::from(m));
        Ok(status.map_point(|p| p.scale(&m)))
    }
}

/// One-shot form of [`RankOracle::status`].
pub fn positive_rank_oracle(
    base: &WeierstrassCurve,
    d: u64,
    config: &OracleConfig,
) -> Result<WitnessStatus, CurveError> {
    RankOracle::new(base.clone(), config.clone()).status(d)
}
