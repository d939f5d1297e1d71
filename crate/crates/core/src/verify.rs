//! Checks on peak polynomials and bulk sweeps over admissible peak sets.
//!
//! For `m = max(S)` the checks are:
//!
//! - `positivity`: `(Δ^j p_S)(k) > 0` for `1 <= j <= m-1`, `m <= k <= kmax`,
//!   and `(Δ^m p_S)(k) = 0`;
//! - `logconcavity`: `c_j^2 >= c_{j-1} c_{j+1}` for `2 <= j <= m-2`, where
//!   `c_j = (Δ^j p_S)(m)`; unimodality of `c_1, …, c_{m-1}` is reported alongside
//!   but never fails the check;
//! - `degree`: `deg p_S = m - 1`;
//! - `zero`: `p_S(m) = 0`;
//! - `counts`: formula, recursion and (within the enumeration cap) brute force
//!   agree on `|P_S(n)|` for `m < n <= nmax`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use parking_lot::Mutex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::engine::PeakEngine;
use crate::error::{Error, Result};
use crate::intpoly::{decimal_strings, BinomialPolynomial};
use crate::perm::{enumerate_by_peak_set, EnumLimit, PeakSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Positivity,
    #[serde(rename = "logconcavity")]
    LogConcavity,
    Degree,
    Zero,
    Counts,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Positivity, Check::LogConcavity, Check::Degree, Check::Zero, Check::Counts];

    pub fn name(self) -> &'static str {
        match self {
            Check::Positivity => "positivity",
            Check::LogConcavity => "logconcavity",
            Check::Degree => "degree",
            Check::Zero => "zero",
            Check::Counts => "counts",
        }
    }

    /// Parses a comma-separated list; `all` expands to every check. The result
    /// is sorted and deduplicated.
    pub fn parse_list(s: &str) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Check::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::UnknownCheck(s.trim().to_string()))
    }
}

/// Where a check first failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// `(Δ^j p)(k)` has the wrong sign.
    Cell { j: usize, k: i64 },
    /// Coefficient index `j` of `c_0, …, c_m`.
    Index { j: usize },
    /// The degree found instead of `m - 1`; `None` for the zero polynomial.
    Degree { found: Option<usize> },
    /// The first length at which count methods disagree.
    Length { n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub check: Check,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckRecord {
    fn from_witness(check: Check, witness: Option<Witness>) -> Self {
        CheckRecord { check, pass: witness.is_none(), witness }
    }
}

/// Side information from the log-concavity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShapeInfo {
    /// Whether `c_1, …, c_{m-1}` is weakly unimodal.
    pub unimodal: bool,
    /// Indices `j` where `c_j^2 = c_{j-1} c_{j+1}`.
    pub equalities: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub n: usize,
    #[serde(serialize_with = "ser_decimal")]
    pub formula: BigUint,
    #[serde(serialize_with = "ser_decimal")]
    pub recursion: BigUint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute: Option<u64>,
}

impl CountRow {
    pub fn agrees(&self) -> bool {
        self.formula == self.recursion && self.brute.map_or(true, |b| BigUint::from(b) == self.formula)
    }
}

fn ser_decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_decimals<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    decimal_strings(v).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub set: PeakSet,
    pub m: usize,
    pub checks: Vec<CheckRecord>,
    /// `(Δ^j p_S)(m)` for `j = 0..=m`.
    #[serde(serialize_with = "ser_decimals")]
    pub coefficients: Vec<BigInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<CountRow>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn record(&self, check: Check) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == check)
    }
}

/// First `(j, k)`, scanning `j` then `k`, where `(Δ^j p)(k)` is not positive
/// for `1 <= j < m` or not zero for `j = m`, over `m <= k <= k_max`.
pub fn positivity_witness(poly: &BinomialPolynomial, m: usize, k_max: i64) -> Option<Witness> {
    let k_min = m as i64;
    if k_max < k_min {
        return None;
    }
    let table = poly.difference_table(m, k_min, k_max);
    for (j, row) in table.rows().iter().enumerate().skip(1) {
        for (offset, value) in row.iter().enumerate() {
            let ok = if j < m { value.is_positive() } else { value.is_zero() };
            if !ok {
                return Some(Witness::Cell { j, k: k_min + offset as i64 });
            }
        }
    }
    if !poly.forward_difference(m).is_zero() {
        return Some(Witness::Cell { j: m, k: k_min });
    }
    None
}

/// First `j` in `2..=len-2` (over the full sequence `c_0, …, c_m`) with
/// `c_j^2 < c_{j-1} c_{j+1}`.
pub fn log_concavity_witness(coefficients: &[BigInt]) -> Option<Witness> {
    let m = coefficients.len().checked_sub(1)?;
    (2..m.saturating_sub(1))
        .find(|&j| {
            let c = &coefficients;
            &c[j] * &c[j] < &c[j - 1] * &c[j + 1]
        })
        .map(|j| Witness::Index { j })
}

fn shape_info(coefficients: &[BigInt]) -> ShapeInfo {
    let m = coefficients.len().saturating_sub(1);
    let equalities = (2..m.saturating_sub(1))
        .filter(|&j| {
            let c = &coefficients;
            &c[j] * &c[j] == &c[j - 1] * &c[j + 1]
        })
        .collect();
    let interior = if m >= 2 { &coefficients[1..m] } else { &[][..] };
    ShapeInfo { unimodal: is_unimodal(interior), equalities }
}

/// Weakly increasing, then weakly decreasing.
pub fn is_unimodal(values: &[BigInt]) -> bool {
    let mut descending = false;
    for w in values.windows(2) {
        if w[1] < w[0] {
            descending = true;
        } else if w[1] > w[0] && descending {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Positivity is checked for `m <= k <= m + k_span`.
    pub k_span: usize,
    /// Count checks run for `m < n <= m + count_span`.
    pub count_span: usize,
    pub limit: EnumLimit,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { k_span: 5, count_span: 3, limit: EnumLimit::default() }
    }
}

/// Runs checks against a shared [`PeakEngine`].
///
/// Brute-force counts come from one exhaustive census of `S_n` per `n`,
/// computed on first use and kept for the lifetime of the verifier.
#[derive(Debug, Default)]
pub struct Verifier {
    engine: PeakEngine,
    options: VerifyOptions,
    censuses: Mutex<HashMap<usize, Arc<BTreeMap<PeakSet, u64>>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub m_max: usize,
    pub checks: Vec<Check>,
    pub sets_checked: usize,
    pub failures: Vec<VerificationReport>,
    pub elapsed_seconds: f64,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl Verifier {
    pub fn new(engine: PeakEngine, options: VerifyOptions) -> Self {
        Verifier { engine, options, censuses: Mutex::default() }
    }

    pub fn engine(&self) -> &PeakEngine {
        &self.engine
    }

    pub fn options(&self) -> VerifyOptions {
        self.options
    }

    /// `|P_S(n)|` by exhaustive enumeration of `S_n`.
    pub fn count_bruteforce(&self, set: &PeakSet, n: usize) -> Result<u64> {
        self.options.limit.check(n)?;
        // Not held during the scan: the scan runs on the rayon pool and a
        // stolen task may need the lock. Racing callers may both enumerate.
        let cached = self.censuses.lock().get(&n).cloned();
        let census = match cached {
            Some(c) => c,
            None => {
                let c = Arc::new(enumerate_by_peak_set(n, self.options.limit)?);
                Arc::clone(self.censuses.lock().entry(n).or_insert(c))
            }
        };
        Ok(census.get(set).copied().unwrap_or(0))
    }

    fn base_report(&self, set: &PeakSet) -> (BinomialPolynomial, VerificationReport) {
        let poly = self.engine.polynomial(set).as_ref().clone();
        let m = set.max_or_zero();
        let coefficients = (0..=m).map(|j| poly.coefficient(j)).collect();
        let report = VerificationReport {
            set: set.clone(),
            m,
            checks: Vec::new(),
            coefficients,
            shape: None,
            counts: Vec::new(),
        };
        (poly, report)
    }

    fn require_nonempty_admissible(set: &PeakSet) -> Result<()> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        match set.structural_violation() {
            Some(reason) => Err(Error::Inadmissible { set: set.clone(), reason }),
            None => Ok(()),
        }
    }

    pub fn verify_positivity(&self, set: &PeakSet, k_max: i64) -> Result<VerificationReport> {
        Self::require_nonempty_admissible(set)?;
        let (poly, mut report) = self.base_report(set);
        let witness = positivity_witness(&poly, report.m, k_max);
        report.checks.push(CheckRecord::from_witness(Check::Positivity, witness));
        Ok(report)
    }

    pub fn verify_log_concavity(&self, set: &PeakSet) -> Result<VerificationReport> {
        Self::require_nonempty_admissible(set)?;
        let (_, mut report) = self.base_report(set);
        let witness = log_concavity_witness(&report.coefficients);
        report.checks.push(CheckRecord::from_witness(Check::LogConcavity, witness));
        report.shape = Some(shape_info(&report.coefficients));
        Ok(report)
    }

    /// Cross-checks the three count methods for `m < n <= n_max`. With
    /// `brute_force`, every `n` is also enumerated, so `n_max` must be within
    /// the enumeration cap.
    pub fn verify_counts(&self, set: &PeakSet, n_max: usize, brute_force: bool) -> Result<VerificationReport> {
        if let Some(reason) = set.structural_violation() {
            return Err(Error::Inadmissible { set: set.clone(), reason });
        }
        let (_, mut report) = self.base_report(set);
        self.push_counts(&mut report, n_max, brute_force)?;
        Ok(report)
    }

    fn push_counts(&self, report: &mut VerificationReport, n_max: usize, brute_force: bool) -> Result<()> {
        if brute_force && n_max > report.m {
            self.options.limit.check(n_max)?;
        }
        let set = &report.set;
        for n in (report.m + 1).max(1)..=n_max {
            let brute = if brute_force {
                Some(self.count_bruteforce(set, n)?)
            } else {
                None
            };
            report.counts.push(CountRow {
                n,
                formula: self.engine.count_via_formula(set, n),
                recursion: self.engine.count_via_recursion(set, n),
                brute,
            });
        }
        let witness = report.counts.iter().find(|r| !r.agrees()).map(|r| Witness::Length { n: r.n });
        report.checks.push(CheckRecord::from_witness(Check::Counts, witness));
        Ok(())
    }

    /// Runs `checks` (in their canonical order) using the configured spans.
    /// Count checks include brute force when the range fits the cap.
    pub fn verify(&self, set: &PeakSet, checks: &[Check]) -> Result<VerificationReport> {
        let needs_nonempty = checks.iter().any(|c| *c != Check::Counts);
        if needs_nonempty {
            Self::require_nonempty_admissible(set)?;
        } else if let Some(reason) = set.structural_violation() {
            return Err(Error::Inadmissible { set: set.clone(), reason });
        }
        let (poly, mut report) = self.base_report(set);
        let m = report.m;
        let mut checks = checks.to_vec();
        checks.sort();
        checks.dedup();
        for check in checks {
            match check {
                Check::Positivity => {
                    let witness = positivity_witness(&poly, m, (m + self.options.k_span) as i64);
                    report.checks.push(CheckRecord::from_witness(check, witness));
                }
                Check::LogConcavity => {
                    let witness = log_concavity_witness(&report.coefficients);
                    report.checks.push(CheckRecord::from_witness(check, witness));
                    report.shape = Some(shape_info(&report.coefficients));
                }
                Check::Degree => {
                    let found = poly.degree();
                    let witness = (found != Some(m - 1)).then_some(Witness::Degree { found });
                    report.checks.push(CheckRecord::from_witness(check, witness));
                }
                Check::Zero => {
                    let witness =
                        (!poly.evaluate(m as i64).is_zero()).then_some(Witness::Cell { j: 0, k: m as i64 });
                    report.checks.push(CheckRecord::from_witness(check, witness));
                }
                Check::Counts => {
                    let n_max = m + self.options.count_span;
                    let brute = n_max <= self.options.limit.cap();
                    self.push_counts(&mut report, n_max, brute)?;
                }
            }
        }
        Ok(report)
    }

    /// One report per structurally admissible nonempty `S` with
    /// `max(S) <= m_max`, ordered by `(max(S), S)` regardless of `workers`.
    pub fn sweep_reports(&self, m_max: usize, checks: &[Check], workers: usize) -> Vec<VerificationReport> {
        let sets = PeakSet::admissible_up_to(m_max);
        let run = || {
            sets.par_iter()
                .map(|s| self.verify(s, checks).expect("sweep only visits admissible nonempty sets"))
                .collect::<Vec<_>>()
        };
        match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }

    pub fn sweep(&self, m_max: usize, checks: &[Check], workers: usize) -> SweepSummary {
        let started = Instant::now();
        let reports = self.sweep_reports(m_max, checks, workers);
        let mut checks = checks.to_vec();
        checks.sort();
        checks.dedup();
        SweepSummary {
            m_max,
            checks,
            sets_checked: reports.len(),
            failures: reports.into_iter().filter(|r| !r.passed()).collect(),
            elapsed_seconds: started.elapsed().as_secs_f64(),
        }
    }
}
