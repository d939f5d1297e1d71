//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or exceeds its time budget.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use peakpoly::engine::{derived_sets, insertion_cases, InsertionCase};
use peakpoly::perm::{count_bruteforce, enumerate_by_peak_set, permutations_with_peak_set};
use peakpoly::verify::{Check, VerifyOptions};
use peakpoly::{BinomialPolynomial, EnumLimit, PeakEngine, PeakSet, Verifier};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set(xs: &[usize]) -> PeakSet {
    PeakSet::new(xs.to_vec()).unwrap()
}

/// The published 7×7 forward-difference grid for S = {4,6}, rows j, columns k.
const TABLE_4_6: [[i64; 7]; 7] = [
    [4, 2, 2, 2, 0, -3, 0],
    [-2, 0, 0, -2, -3, 3, 25],
    [2, 0, -2, -1, 6, 22, 50],
    [-2, -2, 1, 7, 16, 28, 43],
    [0, 3, 6, 9, 12, 15, 18],
    [3, 3, 3, 3, 3, 3, 3],
    [0, 0, 0, 0, 0, 0, 0],
];

fn table_golden() -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = peakpoly_cli::run(
        ["peakpoly", "table", "--set", "4,6", "--jmax", "6", "--kmin", "0", "--kmax", "6", "--format", "csv"],
        &mut out,
        &mut err,
    );
    ensure(code == 0, || format!("exit code {code}: {}", String::from_utf8_lossy(&err)))?;
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("j\\k,0,1,2,3,4,5,6"), || "bad header".into())?;
    let mut cells = 0;
    for (j, expected) in TABLE_4_6.iter().enumerate() {
        let line = lines.next().ok_or("missing row")?;
        let fields: Vec<i64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        ensure(fields[0] == j as i64, || format!("row label {}", fields[0]))?;
        for (k, &v) in expected.iter().enumerate() {
            ensure(fields[k + 1] == v, || format!("T[{j}][{k}] = {} expected {v}", fields[k + 1]))?;
            cells += 1;
        }
    }
    ensure(lines.next().is_none(), || "extra rows".into())?;
    Ok(format!("{cells} cells match"))
}

fn closed_form() -> Outcome {
    let p = PeakEngine::new().peak_polynomial(&set(&[2])).map_err(|e| e.to_string())?;
    ensure(p == BinomialPolynomial::from_i64s(2, &[0, 1]), || format!("p = {p:?}"))?;
    for x in -10..=30 {
        ensure(p.evaluate(x) == BigInt::from(x - 2), || format!("p({x}) != {x} - 2"))?;
    }
    ensure(p.forward_difference(1) == BinomialPolynomial::constant(2, 1), || "Δp != 1".into())?;
    ensure(p.forward_difference(2).is_zero(), || "Δ²p != 0".into())?;
    Ok("p_{2} = x - 2, Δp = 1, Δ²p = 0".into())
}

fn oracle_equivalence() -> Outcome {
    let engine = PeakEngine::new();
    let limit = EnumLimit::default();
    let mut compared = 0;
    for n in 3..=8usize {
        let census = enumerate_by_peak_set(n, limit).map_err(|e| e.to_string())?;
        let factorial: u64 = (1..=n as u64).product();
        ensure(census.values().sum::<u64>() == factorial, || format!("n = {n}: sum != {factorial}"))?;
        // Every structurally admissible S ⊆ {2, …, n-1}, including ∅.
        let inner: Vec<usize> = (2..n).collect();
        let mut admissible = BTreeSet::new();
        for bits in 0u32..(1 << inner.len()) {
            let s = set(&inner.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, &p)| p).collect::<Vec<_>>());
            if !s.is_structurally_admissible() {
                continue;
            }
            let brute = BigUint::from(census.get(&s).copied().unwrap_or(0));
            let formula = engine.count_via_formula(&s, n);
            let recursion = engine.count_via_recursion(&s, n);
            ensure(brute == formula && formula == recursion, || {
                format!("S = {s}, n = {n}: brute {brute}, formula {formula}, recursion {recursion}")
            })?;
            admissible.insert(s);
            compared += 1;
        }
        let keys: BTreeSet<PeakSet> = census.keys().cloned().collect();
        ensure(keys == admissible, || format!("n = {n}: census keys differ from admissible sets"))?;
    }
    Ok(format!("{compared} (S, n) pairs agree"))
}

fn spot_value() -> Outcome {
    let s = set(&[4, 6]);
    let engine = PeakEngine::new();
    let formula = engine.count_via_formula(&s, 7);
    let recursion = engine.count_via_recursion(&s, 7);
    let brute = count_bruteforce(&s, 7, EnumLimit::default()).map_err(|e| e.to_string())?;
    let expected = BigUint::from(400u32);
    ensure(formula == expected && recursion == expected && brute == 400, || {
        format!("formula {formula}, recursion {recursion}, brute {brute}")
    })?;
    Ok("|P_{4,6}(7)| = 400 three ways".into())
}

fn sweep_with(checks: &[Check]) -> Outcome {
    let verifier = Verifier::new(PeakEngine::new(), VerifyOptions { k_span: 5, ..Default::default() });
    let summary = verifier.sweep(15, checks, 4);
    let expected = PeakSet::admissible_up_to(15).len();
    ensure(summary.sets_checked == expected, || format!("checked {} of {expected}", summary.sets_checked))?;
    if let Some(first) = summary.failures.first() {
        return Err(format!("{} failures, first {}: {:?}", summary.failures.len(), first.set, first.checks));
    }
    Ok(format!("{} sets, 0 failures", summary.sets_checked))
}

fn positivity_sweep() -> Outcome {
    sweep_with(&[Check::Positivity, Check::Zero, Check::Degree])
}

fn log_concavity_sweep() -> Outcome {
    sweep_with(&[Check::LogConcavity])
}

fn difference_identity() -> Outcome {
    let engine = PeakEngine::new();
    let sets = PeakSet::admissible_up_to(10);
    for s in &sets {
        let m = s.max_or_zero() as i64;
        let p = engine.peak_polynomial(s).map_err(|e| e.to_string())?;
        let derived = derived_sets(s).map_err(|e| e.to_string())?;
        let parts: Vec<_> = derived
            .pairs
            .iter()
            .flat_map(|pair| [engine.polynomial(&pair.lowered), engine.polynomial(&pair.omitted)])
            .collect();
        let sum = BinomialPolynomial::sum(parts.iter().map(|p| p.as_ref())).recenter(m);
        let lhs = p.forward_difference(1);
        ensure(lhs.coefficients() == sum.coefficients() && lhs.center() == sum.center(), || {
            format!("S = {s}: Δp = {lhs}, sum = {sum}")
        })?;
        let interpolated = interpolate_from_counts(&engine, s);
        ensure(interpolated == p, || format!("S = {s}: recursion counts give {interpolated}, engine gives {p}"))?;
    }
    Ok(format!("{} sets, also matched against count-recursion interpolation", sets.len()))
}

/// Rebuilds p_S from the integer count recursion alone: p_S(n) for
/// n = m..2m-1 via |P_S(n)| / 2^(n-|S|-1), then Newton differences at m.
fn interpolate_from_counts(engine: &PeakEngine, s: &PeakSet) -> BinomialPolynomial {
    let m = s.max_or_zero();
    let mut row: Vec<BigInt> = (m..2 * m)
        .map(|n| {
            if n == m {
                return BigInt::from(0);
            }
            let count = engine.count_via_recursion(s, n);
            let shift = n - s.len() - 1;
            assert_eq!(&count % (BigUint::from(1u32) << shift), BigUint::from(0u32));
            BigInt::from(count >> shift)
        })
        .collect();
    let mut coeffs = Vec::new();
    while !row.is_empty() {
        coeffs.push(row[0].clone());
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    BinomialPolynomial::new(m as i64, coeffs)
}

fn insertion_bijection() -> Outcome {
    let limit = EnumLimit::default();
    let mut pairs = 0;
    for s in PeakSet::admissible_up_to(5) {
        let m = s.max_or_zero();
        let derived = derived_sets(&s).map_err(|e| e.to_string())?;
        for q in m..=7 {
            let cases = insertion_cases(&s, q, limit).map_err(|e| e.to_string())?;
            let results = cases.results();
            let distinct: BTreeSet<_> = results.iter().cloned().collect();
            ensure(distinct.len() == results.len(), || format!("S = {s}, q = {q}: cases overlap"))?;
            let target = permutations_with_peak_set(&s, q + 1, limit).map_err(|e| e.to_string())?;
            ensure(results == target, || {
                format!("S = {s}, q = {q}: union has {} members, P_S(q+1) has {}", results.len(), target.len())
            })?;

            let count = |t: &PeakSet| count_bruteforce(t, q, limit).unwrap() as usize;
            let base = count(&s);
            let lowered: usize = derived.pairs.iter().map(|p| count(&p.lowered)).sum();
            let omitted: usize = derived.pairs.iter().map(|p| count(&p.omitted)).sum();
            let size = |c| cases.case(c).len();
            ensure(size(InsertionCase::Append) == base && size(InsertionCase::LastPeak) == base, || {
                format!("S = {s}, q = {q}: cases 1/2 sizes vs |P_S(q)| = {base}")
            })?;
            ensure(size(InsertionCase::LoweredPeak) == lowered, || format!("S = {s}, q = {q}: case 3 size"))?;
            ensure(size(InsertionCase::PreviousPeak) + size(InsertionCase::Front) == lowered, || {
                format!("S = {s}, q = {q}: case 4 size")
            })?;
            ensure(size(InsertionCase::OmittedPeak) == omitted, || format!("S = {s}, q = {q}: case 5 size"))?;
            ensure(target.len() == 2 * base + 2 * lowered + omitted, || format!("S = {s}, q = {q}: total"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (S, q) pairs"))
}

fn falling(t: i64, j: usize) -> BigInt {
    (0..j as i64).fold(BigInt::from(1), |acc, i| acc * (t - i))
}

/// Evaluates over the common denominator d! and demands exact divisibility.
fn rational_oracle(p: &BinomialPolynomial, x: i64) -> Result<BigInt, String> {
    let d = p.coefficients().len();
    let fact = |n: usize| (1..=n as u64).fold(BigInt::from(1), |a, k| a * k);
    let denom = fact(d);
    let t = x - p.center();
    let numer: BigInt = p
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, c)| c * falling(t, j) * (&denom / fact(j)))
        .sum();
    if (&numer % &denom) != BigInt::from(0) {
        return Err(format!("rational residue at x = {x}"));
    }
    Ok(numer / denom)
}

fn polynomial_strategy() -> impl Strategy<Value = BinomialPolynomial> {
    let bound: i128 = 10i128.pow(20);
    (0i64..=20, prop::collection::vec(-bound..=bound, 0..=13))
        .prop_map(|(center, cs)| BinomialPolynomial::new(center, cs.into_iter().map(BigInt::from).collect()))
}

fn intpoly_properties() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 200, failure_persistence: None, ..Config::default() });
    let fail = |msg: String| TestCaseError::fail(msg);

    runner
        .run(&polynomial_strategy(), |p| {
            let dp = p.forward_difference(1);
            for x in -20..=40 {
                if dp.evaluate(x) != p.evaluate(x + 1) - p.evaluate(x) {
                    return Err(fail(format!("basis shift at x = {x}")));
                }
            }
            Ok(())
        })
        .map_err(|e| format!("basis-shift law: {e}"))?;

    runner
        .run(&polynomial_strategy(), |p| {
            let back = p.forward_difference(1).antidifference(p.center(), p.evaluate(p.center())).unwrap();
            if back != p {
                return Err(fail("antidifference round trip".into()));
            }
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;

    runner
        .run(&(polynomial_strategy(), 0i64..=30, prop::collection::vec(-10i64..=40, 50)), |(p, c, xs)| {
            let q = p.recenter(c);
            for x in xs {
                if q.evaluate(x) != p.evaluate(x) {
                    return Err(fail(format!("recenter to {c} differs at x = {x}")));
                }
            }
            Ok(())
        })
        .map_err(|e| format!("recentering: {e}"))?;

    runner
        .run(&polynomial_strategy(), |p| {
            for x in -20..=40 {
                let exact = rational_oracle(&p, x).map_err(fail)?;
                if exact != p.evaluate(x) {
                    return Err(fail(format!("integer value mismatch at x = {x}")));
                }
            }
            Ok(())
        })
        .map_err(|e| format!("integer-valuedness: {e}"))?;

    Ok("4 properties × 200 polynomials".into())
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "difference table golden", budget: Duration::from_secs(1), run: table_golden },
        Criterion { id: 2, name: "closed form p_{2}", budget: Duration::from_secs(1), run: closed_form },
        Criterion { id: 3, name: "oracle equivalence n = 3..8", budget: Duration::from_secs(10), run: oracle_equivalence },
        Criterion { id: 4, name: "|P_{4,6}(7)| = 400", budget: Duration::from_secs(5), run: spot_value },
        Criterion { id: 5, name: "positivity sweep m <= 15", budget: Duration::from_secs(120), run: positivity_sweep },
        Criterion { id: 6, name: "log-concavity sweep m <= 15", budget: Duration::from_secs(120), run: log_concavity_sweep },
        Criterion { id: 7, name: "difference identity m <= 10", budget: Duration::from_secs(30), run: difference_identity },
        Criterion { id: 8, name: "insertion bijection m <= 5", budget: Duration::from_secs(20), run: insertion_bijection },
        Criterion { id: 9, name: "intpoly properties", budget: Duration::from_secs(10), run: intpoly_properties },
    ];
    let mut failed = 0;
    for c in &criteria {
        let started = Instant::now();
        let outcome = (c.run)();
        let elapsed = started.elapsed();
        let (status, detail) = match outcome {
            Ok(_) if elapsed > c.budget => ("FAIL", format!("over budget of {:?}", c.budget)),
            Ok(detail) => ("PASS", detail),
            Err(detail) => ("FAIL", detail),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("[{status}] criterion {}: {} ({:.2} s) {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
