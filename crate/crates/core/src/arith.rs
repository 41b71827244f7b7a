//! Exact rational scalars, vectors and matrices.
//!
//! Everything downstream (gauges, dual witnesses, bounds) is computed over
//! `BigRational`, so equalities such as `<x_j, y_i> = -1/3` are decided
//! exactly. Rank uses Bareiss fraction-free elimination on integer rows;
//! kernels and orthogonal complements use reduced row echelon form over Q.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `n/d` as a rational. Panics on `d == 0`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    Rational::from_str(t).map_err(|_| Error::ParseRational(s.to_string()))
}

/// Lowest-terms `"p/q"`, or `"p"` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Serde adapter for a single rational stored as a string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}

/// Serde adapter for big integers, written in the same string format as rationals.
pub mod serde_bigint {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(s.trim()).map_err(de::Error::custom)
    }
}

pub mod serde_opt_bigint {
    use super::*;

    pub fn serialize<S: Serializer>(
        n: &Option<BigInt>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match n {
            Some(n) => s.serialize_some(&n.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<BigInt>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| BigInt::from_str(s.trim()).map_err(de::Error::custom))
            .transpose()
    }
}

/// A vector of exact rationals with a fixed dimension.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct QVector(Vec<Rational>);

impl QVector {
    pub fn new(coords: Vec<Rational>) -> Self {
        QVector(coords)
    }

    pub fn zeros(d: usize) -> Self {
        QVector(vec![Rational::zero(); d])
    }

    /// The `i`-th standard basis vector of dimension `d`.
    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = Self::zeros(d);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        QVector(coords.iter().map(|&c| int(c)).collect())
    }

    /// Builds a vector from `(numerator, denominator)` pairs.
    pub fn from_fracs(coords: &[(i64, i64)]) -> Self {
        QVector(coords.iter().map(|&(n, d)| q(n, d)).collect())
    }

    pub fn parse(coords: &[&str]) -> Result<Self> {
        coords.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>().map(QVector)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &QVector) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scale(&self, t: &Rational) -> QVector {
        QVector(self.0.iter().map(|a| a * t).collect())
    }

    pub fn norm_l1(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, a| acc + a.abs())
    }

    pub fn norm_inf(&self) -> Rational {
        self.0.iter().map(|a| a.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Returns a vector with the same coordinates plus `extra` appended.
    pub fn extended(&self, extra: Rational) -> QVector {
        let mut c = self.0.clone();
        c.push(extra);
        QVector(c)
    }

    /// Smallest integer vector on the same ray (positive multiple), or zero.
    pub fn primitive(&self) -> QVector {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|a| (a * &lcm).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
        QVector(ints.into_iter().map(|a| Rational::from_integer(a / &g)).collect())
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl From<Vec<Rational>> for QVector {
    fn from(v: Vec<Rational>) -> Self {
        QVector(v)
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&QVector> for &Rational {
    type Output = QVector;
    fn mul(self, rhs: &QVector) -> QVector {
        rhs.scale(self)
    }
}

impl Serialize for QVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(format_rational))
    }
}

impl<'de> Deserialize<'de> for QVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(QVector)
    }
}

/// Checks that every vector has the same dimension and returns it.
pub fn common_dim(vectors: &[QVector]) -> Result<Option<usize>> {
    let Some(first) = vectors.first() else {
        return Ok(None);
    };
    let d = first.dim();
    for v in vectors {
        v.check_dim(d)?;
    }
    Ok(Some(d))
}

/// A rectangular matrix of rationals stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: Vec<QVector>,
    cols: usize,
}

impl QMatrix {
    pub fn from_rows(rows: Vec<QVector>) -> Result<Self> {
        let cols = common_dim(&rows)?.unwrap_or(0);
        Ok(QMatrix { rows, cols })
    }

    /// The matrix whose columns are `columns`.
    pub fn from_columns(columns: &[QVector]) -> Result<Self> {
        let d = common_dim(columns)?.unwrap_or(0);
        let rows = (0..d)
            .map(|r| QVector(columns.iter().map(|c| c[r].clone()).collect()))
            .collect();
        Ok(QMatrix {
            rows,
            cols: columns.len(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[QVector] {
        &self.rows
    }

    pub fn mul_vec(&self, v: &QVector) -> QVector {
        QVector(self.rows.iter().map(|r| r.dot(v)).collect())
    }

    /// Rank via Bareiss fraction-free elimination on denominator-cleared rows.
    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<BigInt>> = self
            .rows
            .iter()
            .map(|row| {
                let lcm = row.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
                row.iter().map(|a| (a * &lcm).to_integer()).collect()
            })
            .collect();
        let (nr, nc) = (self.nrows(), self.ncols());
        let mut prev = BigInt::one();
        let mut r = 0;
        for col in 0..nc {
            if r == nr {
                break;
            }
            let Some(p) = (r..nr).find(|&i| !m[i][col].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            for i in r + 1..nr {
                for j in col + 1..nc {
                    let num = &m[r][col] * &m[i][j] - &m[i][col] * &m[r][j];
                    let (quot, rem) = num.div_rem(&prev);
                    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                    m[i][j] = quot;
                }
                m[i][col] = BigInt::zero();
            }
            prev = m[r][col].clone();
            r += 1;
        }
        r
    }

    /// Basis of `{v : A v = 0}`, one vector per free column of the RREF.
    pub fn null_space(&self) -> Vec<QVector> {
        let n = self.ncols();
        let mut a: Vec<Vec<Rational>> = self.rows.iter().map(|r| r.0.clone()).collect();
        let m = a.len();
        let mut pivots: Vec<usize> = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row == m {
                break;
            }
            let Some(p) = (row..m).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(row, p);
            let pivot = a[row][col].clone();
            for v in a[row].iter_mut() {
                *v = &*v / &pivot;
            }
            for i in 0..m {
                if i == row || a[i][col].is_zero() {
                    continue;
                }
                let factor = a[i][col].clone();
                let pivot_row = a[row].clone();
                for (entry, p) in a[i][col..n].iter_mut().zip(&pivot_row[col..n]) {
                    *entry -= &factor * p;
                }
            }
            pivots.push(col);
            row += 1;
        }
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..n)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![Rational::zero(); n];
                v[free] = Rational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -a[r][free].clone();
                }
                QVector(v)
            })
            .collect()
    }
}

/// Dimension of the span of `vectors`.
pub fn rank(vectors: &[QVector]) -> Result<usize> {
    Ok(QMatrix::from_rows(vectors.to_vec())?.rank())
}

/// Basis of the dependence coefficients `{λ : Σ λ_i x_i = 0}`, scaled to
/// primitive integer vectors. Empty iff the input is linearly independent.
pub fn kernel_basis(vectors: &[QVector]) -> Result<Vec<QVector>> {
    let a = QMatrix::from_columns(vectors)?;
    if a.nrows() == 0 {
        // Zero-dimensional vectors: every coefficient vector is a dependence.
        return Ok((0..vectors.len())
            .map(|i| QVector::unit(vectors.len(), i))
            .collect());
    }
    Ok(a.null_space().iter().map(QVector::primitive).collect())
}

/// Mutually orthogonal basis of the orthogonal complement of `span(vectors)`
/// in dimension `d`, computed without normalization.
pub fn orthogonal_complement_basis(vectors: &[QVector], d: usize) -> Result<Vec<QVector>> {
    for v in vectors {
        v.check_dim(d)?;
    }
    let raw = if vectors.is_empty() {
        (0..d).map(|i| QVector::unit(d, i)).collect()
    } else {
        QMatrix::from_rows(vectors.to_vec())?.null_space()
    };
    Ok(gram_schmidt(&raw))
}

/// Unnormalized Gram-Schmidt; zero remainders are dropped.
pub fn gram_schmidt(vectors: &[QVector]) -> Vec<QVector> {
    let mut out: Vec<QVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let coef = w.dot(u) / u.dot(u);
            w = &w - &u.scale(&coef);
        }
        if !w.is_zero() {
            out.push(w.primitive());
        }
    }
    out
}

/// Orthogonal projection of `y` onto the orthogonal complement of the
/// mutually orthogonal family `basis`.
pub fn project_out(y: &QVector, basis: &[QVector]) -> QVector {
    basis.iter().fold(y.clone(), |acc, u| {
        let coef = acc.dot(u) / u.dot(u);
        &acc - &u.scale(&coef)
    })
}

/// `⌊r⌋` as a big integer.
pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}
