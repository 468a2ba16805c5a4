use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sqtwist::curve::{OracleConfig, ParityModel, RankTable, WeierstrassCurve};
use sqtwist::parasearch::{EstimatorConfig, GuidedConfig, WindowPolicy};

pub const DEFAULT_CURVE: &str = "x0_19";

/// Everything that determines a run's outputs. Serialized into every file
/// the tool writes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic_height: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finder: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guided: Option<GuidedConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl RunConfig {
    pub fn new(subcommand: &str) -> Self {
        RunConfig {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            ..RunConfig::default()
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// One-line `# config: {...}` header for line-oriented outputs.
    pub fn comment(&self) -> String {
        format!("# config: {}\n", serde_json::to_string(self).expect("serializable"))
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

pub fn parse_curve(spec: &str) -> Result<WeierstrassCurve> {
    match spec {
        "x0_19" | "X0(19)" => Ok(WeierstrassCurve::x0_19()),
        other => WeierstrassCurve::parse(other)
            .with_context(|| format!("--curve expects `x0_19` or `a1,a2,a3,a4,a6`, got `{other}`")),
    }
}

/// Parses `a,b` into an inclusive pair.
pub fn parse_window(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let a: u64 = a.trim().parse().map_err(|_| "bad window start")?;
    let b: u64 = b.trim().parse().map_err(|_| "bad window end")?;
    if a < 2 || b < a {
        return Err("window needs 2 <= a <= b".into());
    }
    Ok((a, b))
}

#[derive(Args, Clone, Debug)]
pub struct CurveArgs {
    /// Base curve: `x0_19` or Weierstrass coefficients `a1,a2,a3,a4,a6`.
    #[arg(long, default_value = DEFAULT_CURVE)]
    pub curve: String,
    /// Largest twist parameter d.
    #[arg(short = 'N', long = "twist-bound", default_value_t = 20_000)]
    pub twist_bound: u64,
}

#[derive(Args, Clone, Debug)]
pub struct OracleArgs {
    /// Naive height bound of the witness search.
    #[arg(long, default_value_t = 100_000)]
    pub search_bound: u64,
    /// Imported rank table (`d<TAB>x<TAB>y` or `d<TAB>?` per line).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Skip twists whose root number predicts even rank.
    #[arg(long)]
    pub parity: bool,
    /// Conductor for --parity on a non-default curve.
    #[arg(long, requires = "parity")]
    pub conductor: Option<u64>,
    /// Root number (1 or -1) for --parity on a non-default curve.
    #[arg(long, requires = "parity", allow_hyphen_values = true)]
    pub root_number: Option<i8>,
    /// Build the set from points instead: enumerate x = p/q with |p|, q up to
    /// this height and keep the twists they land on.
    #[arg(long, conflicts_with_all = ["table", "parity"])]
    pub synthetic_height: Option<u64>,
}

impl OracleArgs {
    pub fn oracle_config(&self, curve: &str) -> Result<OracleConfig> {
        let mut config = OracleConfig {
            search_bound: self.search_bound,
            ..OracleConfig::default()
        };
        if self.parity {
            config.parity = Some(match (self.conductor, self.root_number, curve) {
                (Some(conductor), Some(root_number), _) => {
                    if root_number != 1 && root_number != -1 {
                        bail!("--root-number must be 1 or -1");
                    }
                    ParityModel {
                        conductor,
                        root_number,
                    }
                }
                (None, None, DEFAULT_CURVE) => ParityModel::x0_19(),
                _ => bail!("--parity on a custom curve needs --conductor and --root-number"),
            });
        }
        if let Some(path) = &self.table {
            let table = RankTable::parse(&read_text(path)?, &path_string(path))
                .with_context(|| format!("parsing table {}", path.display()))?;
            config.table = Some(Arc::new(table));
        }
        Ok(config)
    }

    pub fn record(&self, rc: &mut RunConfig) {
        rc.search_bound = Some(self.search_bound);
        rc.table = self.table.as_deref().map(path_string);
        rc.parity = Some(self.parity);
        rc.synthetic_height = self.synthetic_height;
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Rigorous,
    Heuristic,
}

#[derive(Args, Clone, Debug)]
pub struct FinderArgs {
    /// Dimension of the parallelepiped.
    #[arg(short, long, default_value_t = 2)]
    pub n: usize,
    /// Exhaustive search instead of the prime-guided construction.
    #[arg(long)]
    pub brute: bool,
    /// Window policy of the guided search.
    #[arg(long, value_enum, default_value_t = Policy::Heuristic)]
    pub policy: Policy,
    /// Prime window `a,b` of the heuristic policy.
    #[arg(long, default_value = "2,97", value_parser = parse_window)]
    pub window: (u64, u64),
    /// Primes the guided search must avoid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<u64>,
    /// Guided recursion stops below this universe bound.
    #[arg(long, default_value_t = 1000)]
    pub universe_floor: u64,
    /// Smoothing parameter T for pair scoring (default: universe / 10).
    #[arg(long)]
    pub big_t: Option<f64>,
    /// Cap on brute-force results.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_results: usize,
}

impl FinderArgs {
    pub fn guided_config(&self) -> GuidedConfig {
        GuidedConfig {
            policy: match self.policy {
                Policy::Rigorous => WindowPolicy::Rigorous,
                Policy::Heuristic => WindowPolicy::Heuristic {
                    a: self.window.0,
                    b: self.window.1,
                },
            },
            universe_floor: self.universe_floor,
            estimator: EstimatorConfig {
                big_t: self.big_t,
                ..EstimatorConfig::default()
            },
            ..GuidedConfig::default()
        }
    }

    pub fn record(&self, rc: &mut RunConfig) {
        rc.n = Some(self.n);
        if self.brute {
            rc.finder = Some("brute".into());
            rc.extra = Some(serde_json::json!({ "max_results": self.max_results }));
        } else {
            rc.finder = Some("guided".into());
            rc.guided = Some(self.guided_config());
            rc.sigma = Some(self.sigma.clone());
        }
    }
}
