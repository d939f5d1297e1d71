//! The derived-set recursion behind peak polynomials and peak-set counts.
//!
//! For `S = {i_1 < … < i_s}` and each `1 <= l <= s`:
//!
//! - the *lowered* set `S_{i_l}` keeps `i_1, …, i_{l-1}` and decrements `i_l, …, i_s`;
//! - the *omitted* set `Ŝ_{i_l}` keeps `i_1, …, i_{l-1}`, drops `i_l`, and
//!   decrements `i_{l+1}, …, i_s`.
//!
//! Inserting `q + 1` into permutations of length `q` gives, for `q >= max(S)`,
//!
//! ```text
//! |P_S(q+1)| = 2|P_S(q)| + 2 Σ_l |P_{S_{i_l}}(q)| + Σ_l |P_{Ŝ_{i_l}}(q)|
//! ```
//!
//! and dividing through by the power of two gives the polynomial identity
//! `Δp_S = Σ_l p_{S_{i_l}} + Σ_l p_{Ŝ_{i_l}}`. Together with `p_S(max S) = 0`
//! this determines `p_S` without any enumeration.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use parking_lot::RwLock;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intpoly::BinomialPolynomial;
use crate::perm::{permutations_by_peak_set, EnumLimit, PeakSet, Permutation};

/// The lowered and omitted sets for one element `i_l` of `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedPair {
    /// 1-based index `l` into `S`.
    pub index: usize,
    /// The element `i_l`.
    pub position: usize,
    pub lowered: PeakSet,
    /// Whether `lowered` can occur as a peak set at all.
    pub lowered_admissible: bool,
    pub omitted: PeakSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedSets {
    pub set: PeakSet,
    pub pairs: Vec<DerivedPair>,
}

fn reject_inadmissible(set: &PeakSet) -> Result<()> {
    match set.structural_violation() {
        Some(reason) => Err(Error::Inadmissible { set: set.clone(), reason }),
        None => Ok(()),
    }
}

/// All `s` pairs `(S_{i_l}, Ŝ_{i_l})` for a nonempty, structurally admissible `S`.
pub fn derived_sets(set: &PeakSet) -> Result<DerivedSets> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    reject_inadmissible(set)?;
    let positions = set.positions();
    let pairs = (0..positions.len())
        .map(|l| {
            let (head, tail) = positions.split_at(l);
            let lowered: Vec<usize> = head.iter().copied().chain(tail.iter().map(|&p| p - 1)).collect();
            let omitted: Vec<usize> = head.iter().copied().chain(tail[1..].iter().map(|&p| p - 1)).collect();
            let lowered = PeakSet::from_sorted(lowered);
            DerivedPair {
                index: l + 1,
                position: positions[l],
                lowered_admissible: lowered.is_structurally_admissible(),
                lowered,
                omitted: PeakSet::from_sorted(omitted),
            }
        })
        .collect();
    Ok(DerivedSets { set: set.clone(), pairs })
}

/// Memoizing evaluator for peak polynomials and peak-set counts.
///
/// The caches behave as pure function tables: they can be shared across
/// threads, and two threads racing on the same key both compute the same
/// value. With an entry limit, new entries stop being stored once the limit
/// is reached.
#[derive(Debug)]
pub struct PeakEngine {
    cache: Option<EngineCache>,
}

#[derive(Debug, Default)]
struct EngineCache {
    polys: RwLock<HashMap<PeakSet, Arc<BinomialPolynomial>>>,
    counts: RwLock<HashMap<(PeakSet, usize), BigUint>>,
    entry_limit: Option<usize>,
}

impl Default for PeakEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl PeakEngine {
    /// Unbounded caching.
    pub fn new() -> Self {
        PeakEngine { cache: Some(EngineCache::default()) }
    }

    /// No memoization at all; exponential in `max(S)`, so only for small sets.
    pub fn uncached() -> Self {
        PeakEngine { cache: None }
    }

    /// Caches at most `limit` polynomials and `limit` counts.
    pub fn with_entry_limit(limit: usize) -> Self {
        PeakEngine {
            cache: Some(EngineCache { entry_limit: Some(limit), ..Default::default() }),
        }
    }

    pub fn cached_polynomials(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.polys.read().len())
    }

    /// `p_S` in the binomial basis centered at `max(S)` (center 0 for `S = ∅`).
    pub fn peak_polynomial(&self, set: &PeakSet) -> Result<BinomialPolynomial> {
        reject_inadmissible(set)?;
        Ok(self.polynomial(set).as_ref().clone())
    }

    /// Shared handle to `p_S`; the zero polynomial for inadmissible `S`.
    pub fn polynomial(&self, set: &PeakSet) -> Arc<BinomialPolynomial> {
        let m = set.max_or_zero() as i64;
        if set.is_empty() {
            return Arc::new(BinomialPolynomial::constant(0, 1));
        }
        if !set.is_structurally_admissible() {
            return Arc::new(BinomialPolynomial::zero(m));
        }
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.polys.read().get(set).cloned()) {
            return hit;
        }

        let derived = derived_sets(set).expect("nonempty admissible set");
        let summands: Vec<Arc<BinomialPolynomial>> = derived
            .pairs
            .iter()
            .flat_map(|pair| [self.polynomial(&pair.lowered), self.polynomial(&pair.omitted)])
            .collect();
        let difference = BinomialPolynomial::sum(summands.iter().map(Arc::as_ref)).recenter(m);
        let poly = difference
            .antidifference(m, BigInt::zero())
            .expect("anchor equals center after recentering");
        debug_assert_eq!(poly.degree(), Some(m as usize - 1), "deg p_{set} != max(S) - 1");

        let poly = Arc::new(poly);
        if let Some(cache) = &self.cache {
            let mut polys = cache.polys.write();
            if cache.entry_limit.map_or(true, |limit| polys.len() < limit) {
                polys.insert(set.clone(), Arc::clone(&poly));
            }
        }
        poly
    }

    /// `|P_S(n)| = p_S(n) · 2^(n-|S|-1)` when `S` is `n`-admissible, else 0.
    pub fn count_via_formula(&self, set: &PeakSet, n: usize) -> BigUint {
        if !set.is_admissible(n) {
            return BigUint::zero();
        }
        let value = self.polynomial(set).evaluate(n as i64);
        let value = value
            .to_biguint()
            .unwrap_or_else(|| panic!("p_{set}({n}) = {value} is negative for an admissible set"));
        value << (n - set.len() - 1)
    }

    /// `|P_S(n)|` from the insertion recursion on length, bottoming out at
    /// `|P_∅(q)| = 2^(q-1)` and at zero for sets that are not `q`-admissible.
    ///
    /// The recursion step is only applied from `q + 1` to `q` with
    /// `q >= max(S)`; below that the admissibility base case answers.
    pub fn count_via_recursion(&self, set: &PeakSet, n: usize) -> BigUint {
        if !set.is_admissible(n) {
            return BigUint::zero();
        }
        if set.is_empty() {
            return BigUint::one() << (n - 1);
        }
        let key = (set.clone(), n);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.counts.read().get(&key).cloned()) {
            return hit;
        }

        let q = n - 1;
        let derived = derived_sets(set).expect("nonempty admissible set");
        let mut doubled = self.count_via_recursion(set, q);
        let mut total = BigUint::zero();
        for pair in &derived.pairs {
            doubled += self.count_via_recursion(&pair.lowered, q);
            total += self.count_via_recursion(&pair.omitted, q);
        }
        total += doubled << 1;

        if let Some(cache) = &self.cache {
            let mut counts = cache.counts.write();
            if cache.entry_limit.map_or(true, |limit| counts.len() < limit) {
                counts.insert(key, total.clone());
            }
        }
        total
    }
}

/// The six ways the construction places `q + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum InsertionCase {
    /// From `P_S(q)`: append `q + 1` at the end.
    Append,
    /// From `P_S(q)`: insert at position `i_s`.
    LastPeak,
    /// From `P_{S_{i_l}}(q)`: insert at position `i_l`.
    LoweredPeak,
    /// From `P_{S_{i_l}}(q)`, `l > 1`: insert at position `i_{l-1}`.
    PreviousPeak,
    /// From `P_{S_{i_1}}(q)`: insert at the front.
    Front,
    /// From `P_{Ŝ_{i_l}}(q)`: insert at position `i_l`.
    OmittedPeak,
}

impl InsertionCase {
    pub const ALL: [InsertionCase; 6] = [
        InsertionCase::Append,
        InsertionCase::LastPeak,
        InsertionCase::LoweredPeak,
        InsertionCase::PreviousPeak,
        InsertionCase::Front,
        InsertionCase::OmittedPeak,
    ];

    pub fn label(self) -> &'static str {
        match self {
            InsertionCase::Append => "1",
            InsertionCase::LastPeak => "2",
            InsertionCase::LoweredPeak => "3",
            InsertionCase::PreviousPeak => "4.1",
            InsertionCase::Front => "4.2",
            InsertionCase::OmittedPeak => "5",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Insertion {
    pub result: Permutation,
    pub source: Permutation,
}

/// The output of [`insertion_cases`]: one list per case, each sorted by result.
#[derive(Clone, Debug, Serialize)]
pub struct InsertionCases {
    pub set: PeakSet,
    pub q: usize,
    pub cases: Vec<(InsertionCase, Vec<Insertion>)>,
    /// `|P_S(q)|`.
    pub base_count: usize,
    /// `Σ_l |P_{S_{i_l}}(q)|`.
    pub lowered_count: usize,
    /// `Σ_l |P_{Ŝ_{i_l}}(q)|`.
    pub omitted_count: usize,
}

impl InsertionCases {
    pub fn case(&self, which: InsertionCase) -> &[Insertion] {
        self.cases
            .iter()
            .find(|(c, _)| *c == which)
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.cases.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every produced permutation, sorted; duplicates are kept.
    pub fn results(&self) -> Vec<Permutation> {
        let mut all: Vec<Permutation> = self
            .cases
            .iter()
            .flat_map(|(_, v)| v.iter().map(|i| i.result.clone()))
            .collect();
        all.sort();
        all
    }
}

/// Builds every member of `P_S(q+1)` from permutations of length `q` by the
/// six insertion rules, drawing the sources by brute force from `S_q`.
pub fn insertion_cases(set: &PeakSet, q: usize, limit: EnumLimit) -> Result<InsertionCases> {
    let derived = derived_sets(set)?;
    let m = set.max_or_zero();
    if q < m {
        return Err(Error::LengthBelowMax { q, max: m });
    }
    limit.check(q)?;

    let mut wanted = vec![set.clone()];
    for pair in &derived.pairs {
        wanted.push(pair.lowered.clone());
        wanted.push(pair.omitted.clone());
    }
    let sources = permutations_by_peak_set(q, &wanted, limit)?;
    let base = &sources[set];

    let mut cases: HashMap<InsertionCase, Vec<Insertion>> =
        InsertionCase::ALL.iter().map(|&c| (c, Vec::new())).collect();
    let mut push = |case: InsertionCase, source: &Permutation, position: usize| {
        cases.get_mut(&case).expect("all cases present").push(Insertion {
            result: source.insert_max_at(position),
            source: source.clone(),
        });
    };

    for pi in base {
        push(InsertionCase::Append, pi, q + 1);
        push(InsertionCase::LastPeak, pi, m);
    }
    let mut lowered_count = 0;
    let mut omitted_count = 0;
    let positions = set.positions();
    for (l, pair) in derived.pairs.iter().enumerate() {
        let lowered = &sources[&pair.lowered];
        lowered_count += lowered.len();
        for pi in lowered {
            push(InsertionCase::LoweredPeak, pi, pair.position);
            if l == 0 {
                push(InsertionCase::Front, pi, 1);
            } else {
                push(InsertionCase::PreviousPeak, pi, positions[l - 1]);
            }
        }
        let omitted = &sources[&pair.omitted];
        omitted_count += omitted.len();
        for pi in omitted {
            push(InsertionCase::OmittedPeak, pi, pair.position);
        }
    }

    let cases = InsertionCase::ALL
        .iter()
        .map(|c| {
            let mut list = cases.remove(c).unwrap_or_default();
            list.sort();
            (*c, list)
        })
        .collect();
    Ok(InsertionCases {
        set: set.clone(),
        q,
        cases,
        base_count: base.len(),
        lowered_count,
        omitted_count,
    })
}
