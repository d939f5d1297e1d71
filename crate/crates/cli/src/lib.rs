//! Command-line front end for `peakpoly`.
//!
//! Exit codes: 0 success, 1 usage error, 2 inadmissible input, 3 a failed
//! check or a disagreement between independent counting methods.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use peakpoly::perm::{self, ENUM_CAP_ENV};
use peakpoly::verify::{Check, VerifyOptions, Witness};
use peakpoly::{EnumLimit, Error, PeakEngine, PeakSet, Verifier};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "peakpoly", version, about = "Peak polynomials of permutation peak sets")]
pub struct Cli {
    /// Largest n for exhaustive enumeration of S_n.
    #[arg(long, global = true, env = ENUM_CAP_ENV, default_value_t = EnumLimit::DEFAULT)]
    enum_cap: usize,

    /// Maximum number of memoized entries per cache (unbounded when omitted).
    #[arg(long, global = true)]
    cache_cap: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print p_S in the binomial basis.
    Poly(PolyArgs),
    /// Print the forward-difference table (Δ^j p_S)(k).
    Table(TableArgs),
    /// Count permutations of length n with peak set S.
    Count(CountArgs),
    /// Run checks on a single peak set.
    Verify(VerifyArgs),
    /// Run checks on every admissible peak set up to a maximum position.
    Sweep(SweepArgs),
    /// Enumerate S_n, optionally grouped by peak set.
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

fn parse_set(s: &str) -> Result<PeakSet, String> {
    s.parse::<PeakSet>().map_err(|e| e.to_string())
}

#[derive(Clone, Debug)]
struct CheckList(Vec<Check>);

fn parse_checks(s: &str) -> Result<CheckList, String> {
    Check::parse_list(s).map(CheckList).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct SetArg {
    /// Comma-separated 1-based peak positions, e.g. `3,5,8`; empty for ∅.
    #[arg(long, value_parser = parse_set, allow_hyphen_values = true)]
    set: PeakSet,
}

#[derive(Args, Debug)]
struct PolyArgs {
    #[command(flatten)]
    set: SetArg,
    /// Basis center k (defaults to max(S)).
    #[arg(long, allow_hyphen_values = true)]
    center: Option<i64>,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    set: SetArg,
    /// Largest difference order (defaults to max(S)).
    #[arg(long)]
    jmax: Option<usize>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    kmin: i64,
    /// Defaults to max(S).
    #[arg(long, allow_hyphen_values = true)]
    kmax: Option<i64>,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Formula,
    Recursion,
    Brute,
    All,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    set: SetArg,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Method::Formula)]
    method: Method,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    set: SetArg,
    /// Comma-separated: positivity, logconcavity, degree, zero, counts, or all.
    #[arg(long, value_parser = parse_checks, default_value = "positivity,logconcavity,degree,zero")]
    checks: CheckList,
    /// Positivity is checked for max(S) <= k <= kmax (default max(S) + 5).
    #[arg(long)]
    kmax: Option<usize>,
    /// Counts are cross-checked for max(S) < n <= nmax (default max(S) + 3).
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    max_m: usize,
    #[arg(long, value_parser = parse_checks, default_value = "positivity,logconcavity")]
    checks: CheckList,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write the JSON summary to this path.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    group_by_peaks: bool,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inadmissible { .. } | Error::EmptySet => EXIT_INADMISSIBLE,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name), runs the command, and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let limit = EnumLimit::new(cli.enum_cap)?;
    let engine = match cli.cache_cap {
        Some(cap) => PeakEngine::with_entry_limit(cap),
        None => PeakEngine::new(),
    };
    match cli.command {
        Command::Poly(a) => cmd_poly(&engine, a, out),
        Command::Table(a) => cmd_table(&engine, a, out),
        Command::Count(a) => cmd_count(engine, limit, a, out),
        Command::Verify(a) => cmd_verify(engine, limit, a, out),
        Command::Sweep(a) => cmd_sweep(engine, limit, a, out),
        Command::Enumerate(a) => cmd_enumerate(limit, a, out),
    }
}

fn cmd_poly(engine: &PeakEngine, a: PolyArgs, out: &mut dyn Write) -> CmdResult {
    let set = a.set.set;
    let mut poly = engine.peak_polynomial(&set)?;
    if let Some(center) = a.center {
        poly = poly.recenter(center);
    }
    match a.format {
        OutputFormat::Text => {
            writeln!(out, "p_{set}(x) = {poly}")?;
            writeln!(out, "center: {}", poly.center())?;
            match poly.degree() {
                Some(d) => writeln!(out, "degree: {d}")?,
                None => writeln!(out, "degree: -1")?,
            }
            let coeffs: Vec<String> = poly.coefficients().iter().map(ToString::to_string).collect();
            writeln!(out, "coefficients: {}", coeffs.join(" "))?;
        }
        OutputFormat::Json => writeln!(out, "{}", to_json(&poly))?,
        OutputFormat::Csv => {
            writeln!(out, "j,coefficient")?;
            for (j, c) in poly.coefficients().iter().enumerate() {
                writeln!(out, "{j},{c}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_table(engine: &PeakEngine, a: TableArgs, out: &mut dyn Write) -> CmdResult {
    let set = a.set.set;
    let poly = engine.peak_polynomial(&set)?;
    let m = set.max_or_zero();
    let jmax = a.jmax.unwrap_or(m);
    let kmax = a.kmax.unwrap_or(m as i64);
    if a.kmin > kmax {
        return Err(usage(format!("--kmin {} exceeds --kmax {kmax}", a.kmin)));
    }
    let table = poly.difference_table(jmax, a.kmin, kmax);
    match a.format {
        OutputFormat::Text => write!(out, "{table}")?,
        OutputFormat::Json => writeln!(out, "{}", to_json(&table))?,
        OutputFormat::Csv => write!(out, "{}", table.to_csv())?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CountOutput {
    set: PeakSet,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recursion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
}

fn cmd_count(engine: PeakEngine, limit: EnumLimit, a: CountArgs, out: &mut dyn Write) -> CmdResult {
    let set = a.set.set;
    let n = a.n;
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let verifier = Verifier::new(engine, VerifyOptions { limit, ..Default::default() });
    let engine = verifier.engine();
    let want = |m: Method| a.method == m || a.method == Method::All;

    let formula = want(Method::Formula).then(|| engine.count_via_formula(&set, n));
    let recursion = want(Method::Recursion).then(|| engine.count_via_recursion(&set, n));
    let brute = match a.method {
        Method::Brute => Some(BigUint::from(verifier.count_bruteforce(&set, n)?)),
        Method::All if n <= limit.cap() => Some(BigUint::from(verifier.count_bruteforce(&set, n)?)),
        _ => None,
    };
    let values: Vec<&BigUint> = [&formula, &recursion, &brute].into_iter().flatten().collect();
    let agree = values.windows(2).all(|w| w[0] == w[1]);

    let result = CountOutput {
        set: set.clone(),
        n,
        formula: formula.as_ref().map(ToString::to_string),
        recursion: recursion.as_ref().map(ToString::to_string),
        brute: brute.as_ref().map(ToString::to_string),
        agree: (a.method == Method::All).then_some(agree),
    };
    match a.format {
        OutputFormat::Json => writeln!(out, "{}", to_json(&result))?,
        OutputFormat::Csv => {
            writeln!(out, "method,count")?;
            for (name, v) in [("formula", &result.formula), ("recursion", &result.recursion), ("brute", &result.brute)] {
                if let Some(v) = v {
                    writeln!(out, "{name},{v}")?;
                }
            }
        }
        OutputFormat::Text if a.method != Method::All => {
            writeln!(out, "{}", values[0])?;
        }
        OutputFormat::Text => {
            writeln!(out, "formula    {}", result.formula.as_deref().unwrap_or("-"))?;
            writeln!(out, "recursion  {}", result.recursion.as_deref().unwrap_or("-"))?;
            match &result.brute {
                Some(b) => writeln!(out, "brute      {b}")?,
                None => writeln!(out, "brute      skipped (n = {n} is above the enumeration cap {})", limit.cap())?,
            }
            writeln!(out, "{}", if agree { "agree" } else { "DISAGREE" })?;
        }
    }
    Ok(if agree { EXIT_OK } else { EXIT_MISMATCH })
}

fn describe_witness(w: &Witness) -> String {
    match w {
        Witness::Cell { j, k } => format!("j={j}, k={k}"),
        Witness::Index { j } => format!("coefficient j={j}"),
        Witness::Degree { found: Some(d) } => format!("degree {d}"),
        Witness::Degree { found: None } => "zero polynomial".to_string(),
        Witness::Length { n } => format!("n={n}"),
    }
}

fn cmd_verify(engine: PeakEngine, limit: EnumLimit, a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let set = a.set.set;
    let checks = a.checks.0;
    if checks.is_empty() {
        return Err(usage("--checks must name at least one check"));
    }
    let m = set.max_or_zero();
    let k_span = match a.kmax {
        Some(k) if k < m => return Err(usage(format!("--kmax {k} is below max(S) = {m}"))),
        Some(k) => k - m,
        None => VerifyOptions::default().k_span,
    };
    let count_span = match a.nmax {
        Some(n) if n < m => return Err(usage(format!("--nmax {n} is below max(S) = {m}"))),
        Some(n) => n - m,
        None => VerifyOptions::default().count_span,
    };
    let verifier = Verifier::new(engine, VerifyOptions { k_span, count_span, limit });
    let report = verifier.verify(&set, &checks)?;
    match a.format {
        OutputFormat::Json => writeln!(out, "{}", to_json(&report))?,
        OutputFormat::Csv => {
            writeln!(out, "check,pass,witness")?;
            for c in &report.checks {
                let w = c.witness.as_ref().map(describe_witness).unwrap_or_default();
                writeln!(out, "{},{},{}", c.check, c.pass, csv_field(&w))?;
            }
        }
        OutputFormat::Text => {
            writeln!(out, "set {} (m = {})", report.set, report.m)?;
            let coeffs: Vec<String> = report.coefficients.iter().map(ToString::to_string).collect();
            writeln!(out, "coefficients at m: {}", coeffs.join(" "))?;
            for c in &report.checks {
                match &c.witness {
                    None => writeln!(out, "{:<13} pass", c.check.name())?,
                    Some(w) => writeln!(out, "{:<13} FAIL at {}", c.check.name(), describe_witness(w))?,
                }
            }
            if let Some(shape) = &report.shape {
                writeln!(out, "unimodal: {}", if shape.unimodal { "yes" } else { "no" })?;
                if !shape.equalities.is_empty() {
                    let eq: Vec<String> = shape.equalities.iter().map(ToString::to_string).collect();
                    writeln!(out, "log-concavity equality at j = {}", eq.join(", "))?;
                }
            }
            for row in &report.counts {
                let brute = row.brute.map_or("-".to_string(), |b| b.to_string());
                writeln!(out, "n={:<3} formula={} recursion={} brute={}", row.n, row.formula, row.recursion, brute)?;
            }
        }
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_MISMATCH })
}

fn cmd_sweep(engine: PeakEngine, limit: EnumLimit, a: SweepArgs, out: &mut dyn Write) -> CmdResult {
    if a.max_m < 2 {
        return Err(usage("--max-m must be at least 2"));
    }
    let checks = a.checks.0;
    if checks.is_empty() {
        return Err(usage("--checks must name at least one check"));
    }
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let verifier = Verifier::new(engine, VerifyOptions { limit, ..Default::default() });
    let summary = verifier.sweep(a.max_m, &checks, jobs);
    let json = to_json(&summary);
    if let Some(path) = &a.report {
        write_atomically(path, format!("{json}\n").as_bytes())?;
    }
    match a.format {
        OutputFormat::Json => writeln!(out, "{json}")?,
        OutputFormat::Csv => {
            writeln!(out, "set,m,check,witness")?;
            for r in &summary.failures {
                for c in r.checks.iter().filter(|c| !c.pass) {
                    let w = c.witness.as_ref().map(describe_witness).unwrap_or_default();
                    writeln!(out, "{},{},{},{}", csv_field(&r.set.to_string()), r.m, c.check, csv_field(&w))?;
                }
            }
        }
        OutputFormat::Text => {
            let names: Vec<&str> = summary.checks.iter().map(|c| c.name()).collect();
            writeln!(
                out,
                "max(S) <= {}: {} sets checked [{}], {} failures ({:.2} s, {jobs} workers)",
                summary.m_max,
                summary.sets_checked,
                names.join(","),
                summary.failures.len(),
                summary.elapsed_seconds
            )?;
            for r in &summary.failures {
                for c in r.checks.iter().filter(|c| !c.pass) {
                    let w = c.witness.as_ref().map(describe_witness).unwrap_or_default();
                    writeln!(out, "  {} {} failed at {w}", r.set, c.check)?;
                }
            }
        }
    }
    Ok(if summary.passed() { EXIT_OK } else { EXIT_MISMATCH })
}

fn cmd_enumerate(limit: EnumLimit, a: EnumerateArgs, out: &mut dyn Write) -> CmdResult {
    let n = a.n;
    if a.group_by_peaks {
        let census = perm::enumerate_by_peak_set(n, limit)?;
        match a.format {
            OutputFormat::Text => {
                for (set, count) in &census {
                    writeln!(out, "{set}: {count}")?;
                }
            }
            OutputFormat::Json => {
                #[derive(Serialize)]
                struct Row<'a> {
                    set: &'a PeakSet,
                    count: u64,
                }
                let rows: Vec<Row> = census.iter().map(|(set, &count)| Row { set, count }).collect();
                writeln!(out, "{}", to_json(&rows))?;
            }
            OutputFormat::Csv => {
                writeln!(out, "set,count")?;
                for (set, count) in &census {
                    writeln!(out, "{},{count}", csv_field(&set.to_string()))?;
                }
            }
        }
    } else {
        limit.check(n)?;
        let mut rows = Vec::new();
        perm::for_each_permutation(n, |p| {
            let p = peakpoly::Permutation::new(p.to_vec()).expect("enumeration yields permutations");
            let peaks = p.peak_set();
            rows.push((p, peaks));
        });
        match a.format {
            OutputFormat::Text => {
                for (p, s) in &rows {
                    writeln!(out, "{p} {s}")?;
                }
            }
            OutputFormat::Json => {
                #[derive(Serialize)]
                struct Row<'a> {
                    permutation: &'a peakpoly::Permutation,
                    peaks: &'a PeakSet,
                }
                let rows: Vec<Row> = rows.iter().map(|(permutation, peaks)| Row { permutation, peaks }).collect();
                writeln!(out, "{}", to_json(&rows))?;
            }
            OutputFormat::Csv => {
                writeln!(out, "permutation,peaks")?;
                for (p, s) in &rows {
                    writeln!(out, "{},{}", csv_field(&p.to_string()), csv_field(&s.to_string()))?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output types serialize infallibly")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `contents` to a temp file beside `path`, then renames it into place.
fn write_atomically(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
