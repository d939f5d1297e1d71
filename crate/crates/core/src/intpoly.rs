//! Exact integer-valued polynomials in a binomial basis.
//!
//! A [`BinomialPolynomial`] with center `k` and coefficients `c_0, …, c_d`
//! stands for `Σ c_j · C(x - k, j)`. Because `Δ C(x - k, j) = C(x - k, j - 1)`,
//! the forward difference is a left shift of the coefficients and its inverse
//! is a right shift with a new constant term. The coefficients at center `k`
//! are exactly `(Δ^j p)(k)`.

use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `C(t, j) = t (t-1) … (t-j+1) / j!` for any integer `t`, including `t < j`
/// (zero for `0 <= t < j`) and negative `t` (signed values).
pub fn binomial(t: i64, j: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..j {
        acc *= BigInt::from(t) - i;
        let (q, r) = acc.div_rem(&BigInt::from(i + 1));
        assert!(r.is_zero(), "falling factorial not divisible by {}!", i + 1);
        acc = q;
    }
    acc
}

/// `Σ c_j C(x - k, j)` with arbitrary-precision coefficients.
///
/// Canonical form drops trailing zero coefficients, so the zero polynomial has
/// no coefficients at all.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinomialPolynomial {
    center: i64,
    coeffs: Vec<BigInt>,
}

impl BinomialPolynomial {
    pub fn new(center: i64, coeffs: Vec<BigInt>) -> Self {
        let mut p = BinomialPolynomial { center, coeffs };
        p.canonicalize();
        p
    }

    pub fn from_i64s(center: i64, coeffs: &[i64]) -> Self {
        Self::new(center, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(center: i64) -> Self {
        BinomialPolynomial { center, coeffs: Vec::new() }
    }

    pub fn constant(center: i64, value: impl Into<BigInt>) -> Self {
        Self::new(center, vec![value.into()])
    }

    fn canonicalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn center(&self) -> i64 {
        self.center
    }

    /// `c_0, …, c_d`; empty for the zero polynomial.
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `c_j`, zero past the degree.
    pub fn coefficient(&self, j: usize) -> BigInt {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn evaluate(&self, x: i64) -> BigInt {
        let t = BigInt::from(x) - self.center;
        let mut basis = BigInt::one();
        let mut total = BigInt::zero();
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                total += c * &basis;
            }
            basis *= &t - j;
            let (q, r) = basis.div_rem(&BigInt::from(j + 1));
            debug_assert!(r.is_zero());
            basis = q;
        }
        total
    }

    /// `Δ^order p`, same center.
    pub fn forward_difference(&self, order: usize) -> Self {
        BinomialPolynomial {
            center: self.center,
            coeffs: self.coeffs.iter().skip(order).cloned().collect(),
        }
    }

    /// The same function expanded around `new_center`.
    ///
    /// Evaluates at `new_center, …, new_center + d` and reads the leading
    /// column of the difference triangle.
    pub fn recenter(&self, new_center: i64) -> Self {
        if new_center == self.center || self.is_zero() {
            return BinomialPolynomial { center: new_center, coeffs: self.coeffs.clone() };
        }
        let mut row: Vec<BigInt> = (0..self.coeffs.len() as i64)
            .map(|i| self.evaluate(new_center + i))
            .collect();
        let mut coeffs = Vec::with_capacity(row.len());
        while !row.is_empty() {
            coeffs.push(row[0].clone());
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        Self::new(new_center, coeffs)
    }

    /// The `q` with `Δq = self` and `q(anchor) = value`. Only anchors at the
    /// center are supported; recenter first for any other anchor.
    pub fn antidifference(&self, anchor: i64, value: impl Into<BigInt>) -> Result<Self> {
        if anchor != self.center {
            return Err(Error::AnchorMismatch { anchor, center: self.center });
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(value.into());
        coeffs.extend(self.coeffs.iter().cloned());
        Ok(Self::new(self.center, coeffs))
    }

    /// `T[j][k] = (Δ^j p)(k)` for `0 <= j <= jmax` and `kmin <= k <= kmax`.
    pub fn difference_table(&self, jmax: usize, kmin: i64, kmax: i64) -> DifferenceTable {
        assert!(kmin <= kmax, "empty k range {kmin}..={kmax}");
        let width = (kmax - kmin + 1) as usize;
        let mut row: Vec<BigInt> = (0..(width + jmax) as i64).map(|i| self.evaluate(kmin + i)).collect();
        let mut rows = Vec::with_capacity(jmax + 1);
        for _ in 0..=jmax {
            rows.push(row[..width].to_vec());
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        DifferenceTable { kmin, kmax, rows }
    }

    /// Sum of `polys`, expressed at the largest center among them. The empty
    /// sum is the zero polynomial at center 0.
    pub fn sum<'a>(polys: impl IntoIterator<Item = &'a BinomialPolynomial>) -> Self {
        let polys: Vec<&BinomialPolynomial> = polys.into_iter().collect();
        let center = polys.iter().map(|p| p.center).max().unwrap_or(0);
        let mut coeffs: Vec<BigInt> = Vec::new();
        for p in polys {
            let moved;
            let p = if p.center == center {
                p
            } else {
                moved = p.recenter(center);
                &moved
            };
            if coeffs.len() < p.coeffs.len() {
                coeffs.resize(p.coeffs.len(), BigInt::zero());
            }
            for (acc, c) in coeffs.iter_mut().zip(&p.coeffs) {
                *acc += c;
            }
        }
        Self::new(center, coeffs)
    }
}

impl Add for &BinomialPolynomial {
    type Output = BinomialPolynomial;

    fn add(self, rhs: &BinomialPolynomial) -> BinomialPolynomial {
        BinomialPolynomial::sum([self, rhs])
    }
}

/// Renders like `4*C(x,0) - 2*C(x,1) + 3*C(x,5)`; unit coefficients are
/// omitted and zero terms skipped.
impl fmt::Display for BinomialPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = match self.center {
            0 => "x".to_string(),
            c if c > 0 => format!("x-{c}"),
            c => format!("x+{}", -c),
        };
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            if magnitude.is_one() {
                write!(f, "C({var},{j})")?;
            } else {
                write!(f, "{magnitude}*C({var},{j})")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    center: i64,
    coefficients: Vec<String>,
    degree: i64,
}

/// `{"center": k, "coefficients": ["c0", …], "degree": d}`, with `degree = -1`
/// for the zero polynomial.
impl Serialize for BinomialPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialRepr {
            center: self.center,
            coefficients: decimal_strings(&self.coeffs),
            degree: self.degree().map_or(-1, |d| d as i64),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BinomialPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolynomialRepr::deserialize(deserializer)?;
        let coeffs = repr
            .coefficients
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|_| D::Error::custom(format!("bad coefficient {s:?}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let p = BinomialPolynomial::new(repr.center, coeffs);
        let degree = p.degree().map_or(-1, |d| d as i64);
        if degree != repr.degree {
            return Err(D::Error::custom(format!(
                "degree field {} does not match coefficients (degree {degree})",
                repr.degree
            )));
        }
        Ok(p)
    }
}

pub(crate) fn decimal_strings(values: &[BigInt]) -> Vec<String> {
    values.iter().map(BigInt::to_string).collect()
}

/// A grid of `(Δ^j p)(k)`, rows `j = 0..=jmax`, columns `k = kmin..=kmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceTable {
    kmin: i64,
    kmax: i64,
    rows: Vec<Vec<BigInt>>,
}

impl DifferenceTable {
    pub fn jmax(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn kmin(&self) -> i64 {
        self.kmin
    }

    pub fn kmax(&self) -> i64 {
        self.kmax
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn get(&self, j: usize, k: i64) -> Option<&BigInt> {
        if k < self.kmin || k > self.kmax {
            return None;
        }
        self.rows.get(j).map(|row| &row[(k - self.kmin) as usize])
    }

    /// Header `j\k,kmin,…,kmax`, then one line per `j`. No digit grouping.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j\\k");
        for k in self.kmin..=self.kmax {
            out.push_str(&format!(",{k}"));
        }
        out.push('\n');
        for (j, row) in self.rows.iter().enumerate() {
            out.push_str(&j.to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Right-aligned grid with the same orientation as the CSV.
impl fmt::Display for DifferenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<String> = std::iter::once("j\\k".to_string())
            .chain((self.kmin..=self.kmax).map(|k| k.to_string()))
            .collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(j, row)| std::iter::once(j.to_string()).chain(row.iter().map(BigInt::to_string)).collect())
            .collect();
        let mut widths = vec![0; header.len()];
        for line in std::iter::once(&header).chain(&body) {
            for (w, cell) in widths.iter_mut().zip(line) {
                *w = (*w).max(cell.len());
            }
        }
        for line in std::iter::once(&header).chain(&body) {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:>w$}"))
                .collect();
            writeln!(f, "{}", cells.join("  "))?;
        }
        Ok(())
    }
}

impl Serialize for DifferenceTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            jmax: usize,
            kmin: i64,
            kmax: i64,
            rows: Vec<Vec<String>>,
        }
        Repr {
            jmax: self.jmax(),
            kmin: self.kmin,
            kmax: self.kmax,
            rows: self.rows.iter().map(|r| decimal_strings(r)).collect(),
        }
        .serialize(serializer)
    }
}
