//! Permutations, peak sets, admissibility and the brute-force oracle over `S_n`.
//!
//! All indices are 1-based: position `i` of a permutation is `π(i)`, and peak
//! sets hold the 1-based positions of peaks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that overrides the default enumeration cap.
pub const ENUM_CAP_ENV: &str = "PEAKPOLY_ENUM_CAP";

/// A permutation in one-line notation `π(1) π(2) … π(n)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    entries: Vec<u32>,
}

impl Permutation {
    /// Builds a permutation from one-line notation, checking that `entries` is
    /// a bijection on `1..=n` with `n >= 1`.
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidPermutation("length must be at least 1".into()));
        }
        let n = entries.len();
        let mut seen = vec![false; n];
        for &e in &entries {
            if e == 0 || e as usize > n {
                return Err(Error::InvalidPermutation(format!("entry {e} is outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[e as usize - 1], true) {
                return Err(Error::InvalidPermutation(format!("entry {e} appears twice")));
            }
        }
        Ok(Permutation { entries })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { entries: (1..=n as u32).collect() }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The set of indices `i` with `π(i-1) < π(i) > π(i+1)`.
    pub fn peak_set(&self) -> PeakSet {
        PeakSet {
            positions: self
                .entries
                .windows(3)
                .enumerate()
                .filter(|(_, w)| w[0] < w[1] && w[1] > w[2])
                .map(|(i, _)| i + 2)
                .collect(),
        }
    }

    /// Inserts the value `n + 1` so that it lands at 1-based `position`
    /// (`1..=n+1`), shifting the tail right.
    pub fn insert_max_at(&self, position: usize) -> Permutation {
        assert!(
            (1..=self.len() + 1).contains(&position),
            "insert position {position} outside 1..={}",
            self.len() + 1
        );
        let mut entries = Vec::with_capacity(self.len() + 1);
        entries.extend_from_slice(&self.entries[..position - 1]);
        entries.push(self.len() as u32 + 1);
        entries.extend_from_slice(&self.entries[position - 1..]);
        Permutation { entries }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() < 10 {
            for e in &self.entries {
                write!(f, "{e}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.entries.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

/// Serializes as the array of entries.
impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

/// Accepts either comma-separated values (`4,5,2,1,3`) or, for `n < 10`,
/// bare digits (`45213`).
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed: Option<Vec<u32>> = if s.contains(',') {
            s.split(',').map(|p| p.trim().parse::<u32>().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10)).collect()
        };
        match parsed {
            Some(entries) => Permutation::new(entries),
            None => Err(Error::InvalidPermutation(format!("cannot parse {s:?}"))),
        }
    }
}

/// A finite set of 1-based peak positions, stored strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PeakSet {
    positions: Vec<usize>,
}

impl PeakSet {
    /// Rejects zero, duplicate and out-of-order positions.
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        if let Some(&0) = positions.first() {
            return Err(Error::InvalidPeakSet("positions are 1-based; 0 is not allowed".into()));
        }
        for w in positions.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidPeakSet(format!("position {} is repeated", w[0])));
            }
            if w[0] > w[1] {
                return Err(Error::InvalidPeakSet(format!(
                    "positions must be increasing, found {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(PeakSet { positions })
    }

    pub fn empty() -> Self {
        PeakSet::default()
    }

    /// Caller guarantees `positions` is strictly increasing and nonzero.
    pub(crate) fn from_sorted(positions: Vec<usize>) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(positions.first().map_or(true, |&p| p > 0));
        PeakSet { positions }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn max(&self) -> Option<usize> {
        self.positions.last().copied()
    }

    /// `max(S)`, or 0 for the empty set.
    pub fn max_or_zero(&self) -> usize {
        self.max().unwrap_or(0)
    }

    /// The first reason `S` can never be a peak set, if any.
    pub fn structural_violation(&self) -> Option<&'static str> {
        if self.positions.first() == Some(&1) {
            return Some("position 1 has no left neighbour and can never be a peak");
        }
        if self.positions.windows(2).any(|w| w[1] == w[0] + 1) {
            return Some("two adjacent positions can never both be peaks");
        }
        None
    }

    /// `1 ∉ S` and no two elements differ by one. Length is unconstrained.
    pub fn is_structurally_admissible(&self) -> bool {
        self.structural_violation().is_none()
    }

    /// Whether some permutation of length `n` has peak set exactly `S`.
    ///
    /// The empty set is admissible for every `n >= 1`; a nonempty set needs the
    /// structural conditions plus `max(S) <= n - 1`.
    pub fn is_admissible(&self, n: usize) -> bool {
        if n == 0 {
            return false;
        }
        match self.max() {
            None => true,
            Some(m) => m < n && self.is_structurally_admissible(),
        }
    }

    /// Every structurally admissible nonempty set with maximum exactly `m`,
    /// in lexicographic order.
    pub fn admissible_with_max(m: usize) -> Vec<PeakSet> {
        if m < 2 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut current = Vec::new();
        // Choose the elements below m - 1 from {2, ..., m - 2}.
        fn extend(start: usize, limit: usize, m: usize, current: &mut Vec<usize>, out: &mut Vec<PeakSet>) {
            let mut with_max = current.clone();
            with_max.push(m);
            out.push(PeakSet::from_sorted(with_max));
            for next in start..=limit {
                current.push(next);
                extend(next + 2, limit, m, current, out);
                current.pop();
            }
        }
        extend(2, m.saturating_sub(2), m, &mut current, &mut out);
        out.sort();
        out
    }

    /// Every structurally admissible nonempty set with `max(S) <= m_max`,
    /// ordered by `(max(S), lexicographic S)`.
    pub fn admissible_up_to(m_max: usize) -> Vec<PeakSet> {
        (2..=m_max).flat_map(PeakSet::admissible_with_max).collect()
    }

    fn to_mask(&self) -> u64 {
        self.positions.iter().fold(0u64, |acc, &p| {
            if p < 64 {
                acc | (1 << p)
            } else {
                acc
            }
        })
    }

    fn from_mask(mut mask: u64) -> Self {
        let mut positions = Vec::with_capacity(mask.count_ones() as usize);
        while mask != 0 {
            let p = mask.trailing_zeros() as usize;
            positions.push(p);
            mask &= mask - 1;
        }
        PeakSet { positions }
    }
}

impl TryFrom<Vec<usize>> for PeakSet {
    type Error = Error;

    fn try_from(positions: Vec<usize>) -> Result<Self> {
        PeakSet::new(positions)
    }
}

impl From<PeakSet> for Vec<usize> {
    fn from(set: PeakSet) -> Self {
        set.positions
    }
}

impl fmt::Display for PeakSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.positions.iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Parses `3,5,8`, `{3,5,8}` or ` 3, 5 ,8 `. An empty string or `{}` is the
/// empty set. Duplicates and descending order are errors, never re-sorted.
impl FromStr for PeakSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let inner = s
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .unwrap_or(s)
            .trim();
        if inner.is_empty() {
            return Ok(PeakSet::empty());
        }
        let positions = inner
            .split(',')
            .map(|p| {
                let p = p.trim();
                p.parse::<usize>()
                    .map_err(|_| Error::InvalidPeakSet(format!("{p:?} is not a positive integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        PeakSet::new(positions)
    }
}

/// Upper bound on `n` for exhaustive scans of `S_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumLimit(usize);

impl EnumLimit {
    pub const DEFAULT: usize = 10;
    /// `20!` is the largest factorial that fits in a `u64`.
    pub const HARD_MAX: usize = 20;

    pub fn new(cap: usize) -> Result<Self> {
        if cap > Self::HARD_MAX {
            return Err(Error::EnumerationCap { n: cap, cap: Self::HARD_MAX });
        }
        Ok(EnumLimit(cap))
    }

    /// Reads [`ENUM_CAP_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENUM_CAP_ENV) {
            Ok(v) => {
                let cap = v.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidConfig(format!("{ENUM_CAP_ENV}={v:?} is not a nonnegative integer"))
                })?;
                EnumLimit::new(cap)
            }
            Err(_) => Ok(EnumLimit::default()),
        }
    }

    pub fn cap(self) -> usize {
        self.0
    }

    pub fn check(self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidPermutation("length must be at least 1".into()));
        }
        if n > self.0 {
            return Err(Error::EnumerationCap { n, cap: self.0 });
        }
        Ok(())
    }
}

impl Default for EnumLimit {
    fn default() -> Self {
        EnumLimit(Self::DEFAULT)
    }
}

/// Rearranges `xs` into its lexicographic successor. Returns `false` (leaving
/// `xs` sorted ascending) when `xs` was already the last arrangement.
pub fn next_permutation<T: Ord>(xs: &mut [T]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        xs.reverse();
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

fn peak_mask(entries: &[u32]) -> u64 {
    let mut mask = 0u64;
    for i in 1..entries.len().saturating_sub(1) {
        if entries[i - 1] < entries[i] && entries[i] > entries[i + 1] {
            mask |= 1 << (i + 1);
        }
    }
    mask
}

/// Visits the permutations of `S_n` that start with `first`, in lexicographic order.
fn for_each_with_first(n: usize, first: u32, mut visit: impl FnMut(&[u32])) {
    let mut entries: Vec<u32> = std::iter::once(first)
        .chain((1..=n as u32).filter(|&v| v != first))
        .collect();
    loop {
        visit(&entries);
        if !next_permutation(&mut entries[1..]) {
            break;
        }
    }
}

/// Visits all of `S_n` in lexicographic order.
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[u32])) {
    for first in 1..=n as u32 {
        for_each_with_first(n, first, &mut visit);
    }
}

/// Exhaustive census of `S_n` grouped by peak set. Sets with no permutations
/// are absent, and the counts sum to `n!`.
///
/// The scan is split across workers by the value of `π(1)`; the merged map is
/// identical to the sequential result.
pub fn enumerate_by_peak_set(n: usize, limit: EnumLimit) -> Result<BTreeMap<PeakSet, u64>> {
    limit.check(n)?;
    let merged = (1..=n as u32)
        .into_par_iter()
        .map(|first| {
            let mut local: HashMap<u64, u64> = HashMap::new();
            for_each_with_first(n, first, |p| *local.entry(peak_mask(p)).or_default() += 1);
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    Ok(merged
        .into_iter()
        .map(|(mask, count)| (PeakSet::from_mask(mask), count))
        .collect())
}

/// `|P_S(n)|` by scanning all of `S_n`.
pub fn count_bruteforce(set: &PeakSet, n: usize, limit: EnumLimit) -> Result<u64> {
    limit.check(n)?;
    // A position ≥ 64 can never be a peak within the cap.
    if set.max_or_zero() >= 64 {
        return Ok(0);
    }
    let target = set.to_mask();
    Ok((1..=n as u32)
        .into_par_iter()
        .map(|first| {
            let mut count = 0u64;
            for_each_with_first(n, first, |p| {
                if peak_mask(p) == target {
                    count += 1;
                }
            });
            count
        })
        .sum())
}

/// The members of `P_S(n)` for each requested `S`, each list in lexicographic order.
pub fn permutations_by_peak_set(
    n: usize,
    wanted: &[PeakSet],
    limit: EnumLimit,
) -> Result<HashMap<PeakSet, Vec<Permutation>>> {
    limit.check(n)?;
    let masks: HashMap<u64, &PeakSet> = wanted
        .iter()
        .filter(|s| s.max_or_zero() < 64)
        .map(|s| (s.to_mask(), s))
        .collect();
    let mut out: HashMap<PeakSet, Vec<Permutation>> =
        wanted.iter().map(|s| (s.clone(), Vec::new())).collect();
    for_each_permutation(n, |p| {
        if let Some(set) = masks.get(&peak_mask(p)) {
            out.get_mut(*set)
                .expect("every wanted set has a bucket")
                .push(Permutation { entries: p.to_vec() });
        }
    });
    Ok(out)
}

/// The members of `P_S(n)` in lexicographic order.
pub fn permutations_with_peak_set(set: &PeakSet, n: usize, limit: EnumLimit) -> Result<Vec<Permutation>> {
    let mut map = permutations_by_peak_set(n, std::slice::from_ref(set), limit)?;
    Ok(map.remove(set).unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> PeakSet {
        PeakSet::new(xs.to_vec()).unwrap()
    }

    fn perm(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn peak_set_examples() {
        assert_eq!(perm("132").peak_set(), set(&[2]));
        assert_eq!(perm("12345").peak_set(), PeakSet::empty());
        assert_eq!(perm("25143").peak_set(), set(&[2, 4]));
        assert_eq!(perm("1").peak_set(), PeakSet::empty());
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 3]).is_err());
        assert!("12a".parse::<Permutation>().is_err());
        assert_eq!("4,5,2,1,3".parse::<Permutation>().unwrap(), perm("45213"));
        let long = Permutation::identity(11);
        assert_eq!(long.to_string().parse::<Permutation>().unwrap(), long);
    }

    #[test]
    fn insert_max() {
        let p = perm("132");
        assert_eq!(p.insert_max_at(4), perm("1324"));
        assert_eq!(p.insert_max_at(2), perm("1432"));
        assert_eq!(p.insert_max_at(1), perm("4132"));
    }

    #[test]
    fn peak_set_parsing() {
        assert_eq!("3,5,8".parse::<PeakSet>().unwrap(), set(&[3, 5, 8]));
        assert_eq!(" { 3, 5 ,8 } ".parse::<PeakSet>().unwrap(), set(&[3, 5, 8]));
        assert_eq!("".parse::<PeakSet>().unwrap(), PeakSet::empty());
        assert_eq!("{}".parse::<PeakSet>().unwrap(), PeakSet::empty());
        assert!("3,3".parse::<PeakSet>().is_err());
        assert!("5,3".parse::<PeakSet>().is_err());
        assert!("0,3".parse::<PeakSet>().is_err());
        assert!("3,x".parse::<PeakSet>().is_err());
        assert_eq!(set(&[3, 5, 8]).to_string(), "{3,5,8}");
    }

    #[test]
    fn admissibility_examples() {
        assert!(set(&[3, 5, 8]).is_admissible(9));
        assert!(!set(&[3, 4, 7]).is_admissible(8));
        for n in 1..30 {
            assert!(!set(&[1]).is_admissible(n));
            assert!(PeakSet::empty().is_admissible(n));
        }
        assert!(!set(&[2, 3]).is_admissible(6));
        assert!(!set(&[6]).is_admissible(6));
        assert!(set(&[6]).is_admissible(7));
    }

    #[test]
    fn admissible_sets_with_max() {
        assert_eq!(PeakSet::admissible_with_max(2), vec![set(&[2])]);
        assert_eq!(PeakSet::admissible_with_max(4), vec![set(&[2, 4]), set(&[4])]);
        assert_eq!(PeakSet::admissible_up_to(6).len(), 12);
        // Brute-force filter over all subsets of {1..=m} containing m.
        for m in 2..=12usize {
            let mut expected = Vec::new();
            for bits in 0u32..(1 << (m - 1)) {
                let mut positions: Vec<usize> = (1..m).filter(|i| bits & (1 << (i - 1)) != 0).collect();
                positions.push(m);
                let s = set(&positions);
                if s.is_structurally_admissible() {
                    expected.push(s);
                }
            }
            expected.sort();
            assert_eq!(PeakSet::admissible_with_max(m), expected, "m = {m}");
        }
    }

    #[test]
    fn successor_walks_lexicographically() {
        let mut xs = [1, 2, 3];
        let mut seen = vec![xs];
        while next_permutation(&mut xs) {
            seen.push(xs);
        }
        assert_eq!(
            seen,
            vec![[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]]
        );
        assert_eq!(xs, [1, 2, 3]);
    }

    #[test]
    fn enumerate_small() {
        let limit = EnumLimit::default();
        let n3 = enumerate_by_peak_set(3, limit).unwrap();
        assert_eq!(n3.len(), 2);
        assert_eq!(n3[&PeakSet::empty()], 4);
        assert_eq!(n3[&set(&[2])], 2);
        let n1 = enumerate_by_peak_set(1, limit).unwrap();
        assert_eq!(n1.into_iter().collect::<Vec<_>>(), vec![(PeakSet::empty(), 1)]);
        assert_eq!(enumerate_by_peak_set(4, limit).unwrap().values().sum::<u64>(), 24);
    }

    #[test]
    fn enumeration_matches_sequential_scan() {
        let limit = EnumLimit::default();
        for n in 1..=7 {
            let mut sequential: BTreeMap<PeakSet, u64> = BTreeMap::new();
            for_each_permutation(n, |p| {
                *sequential.entry(Permutation::new(p.to_vec()).unwrap().peak_set()).or_default() += 1;
            });
            assert_eq!(enumerate_by_peak_set(n, limit).unwrap(), sequential);
        }
    }

    #[test]
    fn brute_counts() {
        let limit = EnumLimit::default();
        assert_eq!(count_bruteforce(&set(&[2]), 3, limit).unwrap(), 2);
        assert_eq!(count_bruteforce(&set(&[1]), 5, limit).unwrap(), 0);
        assert_eq!(count_bruteforce(&set(&[4, 6]), 7, limit).unwrap(), 400);
        let members = permutations_with_peak_set(&set(&[2]), 3, limit).unwrap();
        assert_eq!(members, vec![perm("132"), perm("231")]);
    }

    #[test]
    fn cap_is_enforced() {
        let limit = EnumLimit::new(5).unwrap();
        assert_eq!(
            enumerate_by_peak_set(6, limit),
            Err(Error::EnumerationCap { n: 6, cap: 5 })
        );
        assert!(count_bruteforce(&set(&[2]), 6, limit).is_err());
        assert!(enumerate_by_peak_set(0, limit).is_err());
        assert!(EnumLimit::new(21).is_err());
    }

    #[test]
    fn admissibility_agrees_with_oracle() {
        let limit = EnumLimit::default();
        for n in 1..=8usize {
            let census = enumerate_by_peak_set(n, limit).unwrap();
            for bits in 0u32..(1 << n) {
                let s = set(&(1..=n).filter(|i| bits & (1 << (i - 1)) != 0).collect::<Vec<_>>());
                let count = census.get(&s).copied().unwrap_or(0);
                assert_eq!(s.is_admissible(n), count > 0, "S = {s}, n = {n}");
            }
        }
    }
}
