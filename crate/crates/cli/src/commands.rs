use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use sqtwist::certify::{
    build_certificate, compute_twist_set, points_first_twist_set, verify_certificate,
    AnnotatedTwistSet, BaseModel, CertMetadata, Certificate, StoredStatus, TwistSetOptions, Verdict,
};
use sqtwist::density::{
    bonferroni_check, f_value, lower_density_estimate, sieve_bound_check, smoothed_density,
    upper_bound_check, BonferroniCheck, DensityReport, FiniteIntegerSet, SieveCheck,
};
use sqtwist::parasearch::{
    brute_force_search, guided_search, indstep_diagnostics, BruteLimits, GuidedOutcome,
    IndStepReport, Parallelepiped, SearchTrace,
};

use crate::config::{
    parse_curve, parse_window, path_string, read_text, write_atomic, CurveArgs, FinderArgs,
    OracleArgs, RunConfig,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;

/// Per-kernel witness statuses of a sieve run.
#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessStore {
    pub config: RunConfig,
    pub base: BaseModel,
    pub bound: u64,
    pub statuses: BTreeMap<u64, StoredStatus>,
}

impl WitnessStore {
    fn of(tw: &AnnotatedTwistSet, config: &RunConfig) -> Self {
        WitnessStore {
            config: config.clone(),
            base: BaseModel::of(&tw.base),
            bound: tw.bound,
            statuses: tw
                .statuses
                .iter()
                .map(|(&k, s)| (k, StoredStatus::from_status(s)))
                .collect(),
        }
    }

    fn into_twist_set(self) -> Result<AnnotatedTwistSet> {
        let base = self.base.curve()?;
        let statuses = self
            .statuses
            .into_iter()
            .map(|(k, s)| Ok((k, s.to_status()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(AnnotatedTwistSet::from_statuses(base, self.bound, statuses))
    }
}

fn twist_set(
    curve: &CurveArgs,
    oracle: &OracleArgs,
    threads: Option<usize>,
    checkpoint: Option<PathBuf>,
) -> Result<AnnotatedTwistSet> {
    let base = parse_curve(&curve.curve)?;
    if let Some(h) = oracle.synthetic_height {
        return Ok(points_first_twist_set(&base, curve.twist_bound, h)?);
    }
    let config = oracle.oracle_config(&curve.curve)?;
    let options = TwistSetOptions {
        threads,
        checkpoint,
        chunk: None,
    };
    Ok(compute_twist_set(&base, curve.twist_bound, &config, &options)?)
}

fn summarize(tw: &AnnotatedTwistSet) -> String {
    format!(
        "N={} squarefree={} witnessed_kernels={} |S|={} density={:.6}",
        tw.bound,
        tw.squarefree_count(),
        tw.witnessed_kernels(),
        tw.set.len(),
        tw.density()
    )
}

#[derive(Args, Debug)]
pub struct SieveArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Set file for the witnessed twist parameters.
    #[arg(long)]
    pub out: PathBuf,
    /// Witness store (JSON) with the status of every squarefree d.
    #[arg(long)]
    pub witnesses: Option<PathBuf>,
    /// Append-only progress file; an interrupted run resumes from it.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

pub fn sieve(args: SieveArgs, threads: Option<usize>) -> Result<u8> {
    let mut rc = RunConfig::new("sieve");
    rc.curve = Some(args.curve.curve.clone());
    rc.twist_bound = Some(args.curve.twist_bound);
    args.oracle.record(&mut rc);
    rc.outputs = std::iter::once(&args.out)
        .chain(&args.witnesses)
        .map(|p| path_string(p))
        .collect();
    let tw = twist_set(&args.curve, &args.oracle, threads, args.checkpoint.clone())?;
    write_atomic(&args.out, &(rc.comment() + &tw.set.to_text()))?;
    if let Some(path) = &args.witnesses {
        let store = WitnessStore::of(&tw, &rc);
        write_atomic(path, &(serde_json::to_string_pretty(&store)? + "\n"))?;
    }
    println!("{}", summarize(&tw));
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// Set files; two or more also get the union inequalities.
    #[arg(required = true)]
    pub sets: Vec<PathBuf>,
    /// Points t at which f_S(t) is evaluated.
    #[arg(long = "t", default_value = "1", value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Smoothing parameters T for the smoothed density.
    #[arg(long = "big-t", default_value = "1000", value_delimiter = ',')]
    pub big_t: Vec<f64>,
    /// Start of the lower-density window (default: N / 10).
    #[arg(long)]
    pub n0: Option<u64>,
    /// Prime window `a,b` of the sieve comparison.
    #[arg(long, default_value = "2,10", value_parser = parse_window)]
    pub sieve_window: (u64, u64),
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct PointReport {
    t: f64,
    f: f64,
    upper_bound: f64,
    upper_holds: bool,
    sieve: SieveCheck,
}

#[derive(Debug, Serialize)]
struct SetReport {
    path: String,
    universe: u64,
    size: usize,
    points: Vec<PointReport>,
    smoothed: Vec<DensityReport>,
    n0: u64,
    lower_density: f64,
}

#[derive(Debug, Serialize)]
struct DensityOutput {
    config: RunConfig,
    sets: Vec<SetReport>,
    union: Vec<(f64, BonferroniCheck)>,
}

pub fn density(args: DensityArgs) -> Result<u8> {
    let mut rc = RunConfig::new("density");
    rc.inputs = args.sets.iter().map(|p| path_string(p)).collect();
    rc.outputs = args.out.iter().map(|p| path_string(p)).collect();
    rc.extra = Some(serde_json::json!({
        "t": args.t, "big_t": args.big_t, "n0": args.n0, "sieve_window": args.sieve_window,
    }));
    let (a, b) = args.sieve_window;
    let mut sets = Vec::new();
    let mut reports = Vec::new();
    for path in &args.sets {
        let s = FiniteIntegerSet::parse(&read_text(path)?)
            .with_context(|| format!("parsing set file {}", path.display()))?;
        println!("{}: N={} |S|={}", path.display(), s.universe(), s.len());
        let mut points = Vec::new();
        for &t in &args.t {
            let f = f_value(&s, t)?;
            let upper_bound = upper_bound_check(t)?;
            let sieve = sieve_bound_check(&s, a as i64, b as i64, t)?;
            println!(
                "  t={t}: f = {f:.7} (bound {upper_bound}); sieve [{a},{b}]: {:.7} vs {:.7} {} (periodic {:.7} {})",
                sieve.lhs,
                sieve.rhs,
                holds(sieve.holds),
                sieve.periodic_bound,
                holds(sieve.periodic_holds)
            );
            points.push(PointReport {
                t,
                f,
                upper_bound,
                upper_holds: f <= upper_bound,
                sieve,
            });
        }
        let mut smoothed = Vec::new();
        for &big_t in &args.big_t {
            let r = smoothed_density(&s, big_t)?;
            println!("  T={big_t}: D = {:.7} (tail <= {:.1e})", r.value, r.truncation_error_bound);
            smoothed.push(r);
        }
        let n0 = args.n0.unwrap_or((s.universe() / 10).max(1));
        let lower_density = lower_density_estimate(&s, n0)?;
        println!("  lower density over [{n0}, {}] = {lower_density:.7}", s.universe());
        reports.push(SetReport {
            path: path_string(path),
            universe: s.universe(),
            size: s.len(),
            points,
            smoothed,
            n0,
            lower_density,
        });
        sets.push(s);
    }
    let mut union = Vec::new();
    if sets.len() >= 2 {
        for &t in &args.t {
            let c = bonferroni_check(&sets, t)?;
            println!(
                "union t={t}: f = {:.7}, sum = {:.7}, pairs = {:.7}; upper {}, lower {}",
                c.union_f,
                c.sum_f,
                c.pairwise_f,
                holds(c.upper_holds),
                holds(c.lower_holds)
            );
            union.push((t, c));
        }
    }
    if let Some(out) = &args.out {
        let report = DensityOutput {
            config: rc,
            sets: reports,
            union,
        };
        write_atomic(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(EXIT_OK)
}

fn holds(ok: bool) -> &'static str {
    if ok {
        "holds"
    } else {
        "FAILS"
    }
}

#[derive(Debug, Serialize)]
struct FindReport {
    config: RunConfig,
    found: usize,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<SearchTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhausted: Option<serde_json::Value>,
}

/// Runs the chosen finder. Brute force returns every hit, guided at most one.
fn run_finder(s: &FiniteIntegerSet, f: &FinderArgs) -> Result<(Vec<Parallelepiped>, FindReport)> {
    if f.n == 0 {
        bail!("--n must be at least 1");
    }
    let mut report = FindReport {
        config: RunConfig::default(),
        found: 0,
        truncated: false,
        trace: None,
        exhausted: None,
    };
    let found = if f.brute {
        let limits = BruteLimits {
            max_results: f.max_results,
            ..BruteLimits::default()
        };
        let out = brute_force_search(s, f.n, limits);
        report.truncated = out.truncated;
        out.found
    } else {
        let sigma: BTreeSet<u64> = f.sigma.iter().copied().collect();
        match guided_search(s, f.n, &sigma, &f.guided_config()) {
            GuidedOutcome::Found(p, trace) => {
                report.trace = Some(trace);
                vec![p]
            }
            GuidedOutcome::Exhausted {
                level,
                reason,
                trace,
            } => {
                report.exhausted = Some(serde_json::json!({ "level": level, "reason": reason }));
                report.trace = Some(trace);
                Vec::new()
            }
        }
    };
    report.found = found.len();
    Ok((found, report))
}

#[derive(Args, Debug)]
pub struct FindArgs {
    /// Set file to search.
    pub set: PathBuf,
    #[command(flatten)]
    pub finder: FinderArgs,
    /// Record file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report with the search trace.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn find(args: FindArgs) -> Result<u8> {
    let mut rc = RunConfig::new("find");
    args.finder.record(&mut rc);
    rc.inputs = vec![path_string(&args.set)];
    rc.outputs = args.out.iter().chain(&args.report).map(|p| path_string(p)).collect();
    let s = FiniteIntegerSet::parse(&read_text(&args.set)?)
        .with_context(|| format!("parsing set file {}", args.set.display()))?;
    let (found, mut report) = run_finder(&s, &args.finder)?;
    let records: String = found.iter().map(|p| p.to_record() + "\n").collect();
    match &args.out {
        Some(path) => {
            write_atomic(path, &(rc.comment() + &records))?;
            println!("{} parallelepiped(s) written to {}", found.len(), path.display());
        }
        None => print!("{records}"),
    }
    if let Some(e) = &report.exhausted {
        eprintln!("guided search exhausted: {e}");
    }
    if let Some(path) = &args.report {
        report.config = rc;
        write_atomic(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(if found.is_empty() { EXIT_NEGATIVE } else { EXIT_OK })
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[command(flatten)]
    pub finder: FinderArgs,
    /// Fail instead of searching exhaustively when the guided search is exhausted.
    #[arg(long)]
    pub no_fallback: bool,
    /// Reuse a witness store from `sieve` instead of searching again.
    #[arg(long, conflicts_with = "synthetic_height")]
    pub witnesses: Option<PathBuf>,
    /// Certificate file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn certify(args: CertifyArgs, threads: Option<usize>) -> Result<u8> {
    let mut rc = RunConfig::new("certify");
    rc.fallback = Some(!args.no_fallback);
    rc.curve = Some(args.curve.curve.clone());
    rc.twist_bound = Some(args.curve.twist_bound);
    args.oracle.record(&mut rc);
    args.finder.record(&mut rc);
    rc.inputs = args.witnesses.iter().map(|p| path_string(p)).collect();
    rc.outputs = vec![path_string(&args.out)];
    let tw = match &args.witnesses {
        Some(path) => {
            let store: WitnessStore = serde_json::from_str(&read_text(path)?)
                .with_context(|| format!("parsing witness store {}", path.display()))?;
            store.into_twist_set()?
        }
        None => twist_set(&args.curve, &args.oracle, threads, None)?,
    };
    println!("{}", summarize(&tw));
    let (mut found, report) = run_finder(&tw.set, &args.finder)?;
    if let (Some(e), false) = (&report.exhausted, args.no_fallback) {
        println!("guided search exhausted: {e}; falling back to brute force");
        let limits = BruteLimits {
            max_results: 1,
            ..BruteLimits::default()
        };
        found = brute_force_search(&tw.set, args.finder.n, limits).found;
        rc.finder = Some("guided+brute".into());
        rc.extra = Some(serde_json::json!({ "guided_exhausted": e }));
    }
    let Some(p) = found.first() else {
        match (&report.exhausted, args.no_fallback) {
            (Some(e), true) => println!("no parallelepiped: guided search exhausted: {e}"),
            _ => println!("no {}-parallelepiped in the twist set", args.finder.n),
        }
        return Ok(EXIT_NEGATIVE);
    };
    println!("{}", p.to_record());
    let metadata = CertMetadata {
        twist_bound: tw.bound,
        search_bound: args.oracle.search_bound,
        parity_filter: args.oracle.parity,
        table_source: args.oracle.table.as_deref().map(path_string),
        run_config: rc.to_json(),
        ..CertMetadata::new(rc.finder.as_deref().unwrap_or("guided"))
    };
    let cert = build_certificate(&tw, p, metadata)?;
    let verdict = verify_certificate(&cert);
    write_atomic(&args.out, &cert.to_json())?;
    print_verdict(&verdict);
    Ok(if verdict.is_valid() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn print_verdict(v: &Verdict) {
    match v {
        Verdict::Valid => println!("Valid"),
        Verdict::Invalid(violations) => {
            println!("Invalid");
            for x in violations {
                println!("  {x}");
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Certificate file.
    pub certificate: PathBuf,
}

pub fn verify(args: VerifyArgs) -> Result<u8> {
    let text = read_text(&args.certificate)?;
    let verdict = match Certificate::from_json(&text) {
        Ok(cert) => verify_certificate(&cert),
        Err(e) => {
            println!("Invalid");
            println!("  unreadable certificate: {e}");
            return Ok(EXIT_NEGATIVE);
        }
    };
    print_verdict(&verdict);
    Ok(if verdict.is_valid() { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// Set file; omit to use the full interval [1, --full].
    #[arg(required_unless_present = "full")]
    pub set: Option<PathBuf>,
    /// Use S = [1, N].
    #[arg(long, conflicts_with = "set")]
    pub full: Option<u64>,
    /// Prime window `a,b`.
    #[arg(long, default_value = "2,10", value_parser = parse_window)]
    pub window: (u64, u64),
    /// Smoothing parameter T.
    #[arg(long = "big-t", default_value_t = 1000.0)]
    pub big_t: f64,
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct DiagnoseOutput<'a> {
    config: RunConfig,
    report: &'a IndStepReport,
}

pub fn diagnose(args: DiagnoseArgs) -> Result<u8> {
    let mut rc = RunConfig::new("diagnose");
    rc.inputs = args.set.iter().map(|p| path_string(p)).collect();
    rc.outputs = args.out.iter().map(|p| path_string(p)).collect();
    rc.extra = Some(serde_json::json!({
        "full": args.full, "window": args.window, "big_t": args.big_t,
    }));
    let s = match (&args.set, args.full) {
        (Some(path), _) => FiniteIntegerSet::parse(&read_text(path)?)
            .with_context(|| format!("parsing set file {}", path.display()))?,
        (None, Some(n)) if n >= 1 => FiniteIntegerSet::full(n),
        _ => bail!("--full needs a positive bound"),
    };
    let (a, b) = args.window;
    let r = indstep_diagnostics(&s, a, b, args.big_t)?;
    println!(
        "window [{a},{b}] primes {:?}, T = {}, D = {:.7}, prod(1-1/p) = {:.7}",
        r.primes, r.big_t, r.density, r.mertens
    );
    println!(
        "integrated: lhs {:.7} >= union rhs {:.7} {}, >= stated rhs {:.7} {}; lhs >= D/2 {}",
        r.int_lhs,
        r.int_union_rhs,
        holds(r.int_union_holds),
        r.int_stated_rhs,
        holds(r.int_stated_holds),
        yes(r.int_half_density)
    );
    println!(
        "sum of D(S_p) = {:.7}: >= aD/3 {}, >= aD/2 {}, >= 4 {}",
        r.big_sum,
        yes(r.big_sum_a_third),
        yes(r.big_sum_a_half),
        yes(r.big_sum_at_least_four)
    );
    println!(
        "union D = {:.7} (<= 2 {}), pair sum = {:.7} (>= 2 {}), big intersection {}",
        r.union_density,
        holds(r.union_at_most_two),
        r.pair_sum,
        yes(r.pair_sum_at_least_two),
        holds(r.big_intersection_holds)
    );
    let sieve_fails = r.samples.iter().filter(|s| !s.sieve_step_holds).count();
    println!(
        "pointwise samples: {} ({} where f(S ∩ R) exceeds the sieve bound)",
        r.samples.len(),
        sieve_fails
    );
    println!("pair densities (threshold {:.7}):", r.threshold);
    println!("  {:>5} {:>5} {:>12} {:>6} {:>6}", "p", "q", "D(S_pq)", ">=thr", ">=2thr");
    for pd in &r.pairs {
        println!(
            "  {:>5} {:>5} {:>12.7} {:>6} {:>6}",
            pd.p,
            pd.q,
            pd.density,
            yes(pd.meets_threshold),
            yes(pd.meets_double_threshold)
        );
    }
    let ok = r.unconditional_hold();
    if ok {
        println!("unconditional inequalities: all hold");
    } else {
        println!("unconditional inequalities: FAIL {:?}", r.unconditional_failures());
    }
    if let Some(out) = &args.out {
        let doc = DiagnoseOutput {
            config: rc,
            report: &r,
        };
        write_atomic(out, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
