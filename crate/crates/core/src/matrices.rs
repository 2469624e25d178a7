//! Dense integer matrices, minors, the symplectic form matrix and the paired
//! row selections used by the rectangular invariant.
//!
//! Every index that crosses the public interface is 1-based.

use crate::error::{invalid, Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    #[serde(with = "crate::serde_big::seq")]
    entries: Vec<BigInt>,
}

impl TryFrom<RawMatrix> for IntMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        IntMatrix::new(raw.rows, raw.cols, raw.entries)
    }
}

impl From<IntMatrix> for RawMatrix {
    fn from(m: IntMatrix) -> Self {
        RawMatrix { rows: m.rows, cols: m.cols, entries: m.entries }
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != rows * cols {
            return invalid(format!(
                "matrix of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            ));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from machine-integer rows. Panics on ragged input.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.iter().flat_map(|row| row.iter().map(|&v| v.into())).collect();
        IntMatrix { rows: r, cols: c, entries }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.entries
    }

    /// Zero-based access.
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    /// Zero-based row slice.
    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return invalid(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| self.get(i, i).is_zero() && (i + 1..self.cols).all(|j| *self.get(i, j) == -self.get(j, i)))
    }

    /// Symmetric with an identically zero diagonal.
    pub fn is_hollow_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| self.get(i, i).is_zero() && (i + 1..self.cols).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// True when every entry is odd.
    pub fn is_odd(&self) -> bool {
        self.entries.iter().all(|v| v.is_odd())
    }

    /// Keeps the zero-based rows and columns listed, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Zero-based variant of [`minor`] without bounds reporting.
    pub(crate) fn delete(&self, rows: &[usize], cols: &[usize]) -> Self {
        let keep_r: Vec<usize> = (0..self.rows).filter(|i| !rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|j| !cols.contains(j)).collect();
        self.select(&keep_r, &keep_c)
    }

    /// Appends `other` below `self`.
    pub fn vstack(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return invalid("vstack needs equal column counts");
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        IntMatrix::new(self.rows + other.rows, self.cols, entries)
    }

    /// Antisymmetric matrix of order `order` whose strict upper triangle,
    /// read row by row, is `upper`.
    pub fn antisymmetric_from_upper(order: usize, upper: &[BigInt]) -> Result<Self> {
        Self::from_upper(order, upper, true)
    }

    /// Symmetric hollow matrix with the given strict upper triangle.
    pub fn symmetric_from_upper(order: usize, upper: &[BigInt]) -> Result<Self> {
        Self::from_upper(order, upper, false)
    }

    fn from_upper(order: usize, upper: &[BigInt], anti: bool) -> Result<Self> {
        let need = order * order.saturating_sub(1) / 2;
        if upper.len() != need {
            return invalid(format!("order {order} needs {need} upper-triangle entries, got {}", upper.len()));
        }
        let mut m = Self::zeros(order, order);
        let mut it = upper.iter();
        for i in 0..order {
            for j in i + 1..order {
                let v = it.next().expect("length checked").clone();
                let low = if anti { -&v } else { v.clone() };
                m.set(i, j, v);
                m.set(j, i, low);
            }
        }
        Ok(m)
    }

    /// Strict upper triangle read row by row.
    pub fn upper_triangle(&self) -> Vec<BigInt> {
        let mut out = Vec::with_capacity(self.rows * self.rows.saturating_sub(1) / 2);
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                out.push(self.get(i, j).clone());
            }
        }
        out
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
            if i + 1 < self.rows {
                write!(f, ", ")?;
            }
        }
        write!(f, "]")
    }
}

/// Strictly increasing sequence of 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return invalid("indices are 1-based; 0 is not allowed");
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("index set {indices:?} is not strictly increasing"));
        }
        Ok(IndexSet(indices))
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// {1, ..., n}
    pub fn full(n: usize) -> Self {
        IndexSet((1..=n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    fn check_within(&self, bound: usize, what: &str) -> Result<()> {
        match self.max() {
            Some(m) if m > bound => invalid(format!("{what} index {m} exceeds dimension {bound}")),
            _ => Ok(()),
        }
    }

    fn zero_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i - 1).collect()
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

/// The matrix with the listed rows and columns removed.
pub fn minor(x: &IntMatrix, delete_rows: &IndexSet, delete_cols: &IndexSet) -> Result<IntMatrix> {
    delete_rows.check_within(x.rows(), "row")?;
    delete_cols.check_within(x.cols(), "column")?;
    Ok(x.delete(&delete_rows.zero_based(), &delete_cols.zero_based()))
}

/// The 2ℓ×2ℓ block matrix [[0, I], [−I, 0]].
pub fn omega(ell: usize) -> Result<IntMatrix> {
    if ell == 0 {
        return invalid("omega needs ell >= 1");
    }
    Ok(omega_unchecked(ell))
}

pub(crate) fn omega_unchecked(ell: usize) -> IntMatrix {
    let n = 2 * ell;
    IntMatrix::from_fn(n, n, |i, j| {
        if j == i + ell {
            BigInt::one()
        } else if i == j + ell {
            -BigInt::one()
        } else {
            BigInt::zero()
        }
    })
}

/// Partner of row `i` among 2ℓ rows: (i + ℓ) mod 2ℓ with representative in 1..=2ℓ.
pub fn hat(i: usize, ell: usize) -> usize {
    debug_assert!(i >= 1 && i <= 2 * ell);
    match (i + ell) % (2 * ell) {
        0 => 2 * ell,
        r => r,
    }
}

/// Stacks rows t₁, t̂₁, …, t_k, t̂_k of a matrix with 2ℓ rows.
pub fn z_select(x: &IntMatrix, t: &IndexSet) -> Result<IntMatrix> {
    if !x.rows().is_multiple_of(2) {
        return invalid(format!("z_select needs an even row count, got {}", x.rows()));
    }
    let ell = x.rows() / 2;
    t.check_within(ell, "pair")?;
    Ok(x.select(&z_rows(t.as_slice(), ell), &(0..x.cols()).collect::<Vec<_>>()))
}

/// Zero-based row order for a paired selection.
pub(crate) fn z_rows(t: &[usize], ell: usize) -> Vec<usize> {
    t.iter().flat_map(|&ti| [ti - 1, hat(ti, ell) - 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    #[test]
    fn minor_of_identity() {
        let id3 = IntMatrix::identity(3);
        let r = minor(&id3, &IndexSet::new(vec![1]).unwrap(), &IndexSet::new(vec![1]).unwrap());
        assert_eq!(r.unwrap(), IntMatrix::identity(2));
    }

    #[test]
    fn minor_without_deletion_is_identity_map() {
        let x = m(&[vec![1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(minor(&x, &IndexSet::empty(), &IndexSet::empty()).unwrap(), x);
    }

    #[test]
    fn minor_of_antisymmetric_keeps_lower_block() {
        // upper entries (a..f) = (1..6); deleting {1,2} leaves [[0, f], [-f, 0]]
        let up: Vec<BigInt> = (1..=6).map(BigInt::from).collect();
        let x = IntMatrix::antisymmetric_from_upper(4, &up).unwrap();
        let s = IndexSet::new(vec![1, 2]).unwrap();
        assert_eq!(minor(&x, &s, &s).unwrap(), m(&[vec![0, 6], vec![-6, 0]]));
    }

    #[test]
    fn minor_out_of_range() {
        let x = IntMatrix::identity(2);
        let bad = IndexSet::new(vec![3]).unwrap();
        assert!(matches!(minor(&x, &bad, &IndexSet::empty()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn index_set_rejects_unsorted_and_zero() {
        assert!(IndexSet::new(vec![2, 1]).is_err());
        assert!(IndexSet::new(vec![1, 1]).is_err());
        assert!(IndexSet::new(vec![0, 1]).is_err());
    }

    #[test]
    fn omega_small_cases() {
        assert_eq!(omega(1).unwrap(), m(&[vec![0, 1], vec![-1, 0]]));
        let o2 = omega(2).unwrap();
        assert!(o2.is_antisymmetric());
        assert_eq!(o2.transpose().mul(&o2).unwrap(), IntMatrix::identity(4));
        assert!(omega(0).is_err());
    }

    #[test]
    fn hat_is_an_involution() {
        for ell in 1..6 {
            for i in 1..=2 * ell {
                let h = hat(i, ell);
                assert!((1..=2 * ell).contains(&h));
                assert_ne!(h, i);
                assert_eq!(hat(h, ell), i);
            }
        }
        assert_eq!(hat(2, 2), 4);
        assert_eq!(hat(4, 2), 2);
    }

    #[test]
    fn z_select_pairs_rows() {
        let x = m(&[vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]]);
        let t = IndexSet::new(vec![1]).unwrap();
        assert_eq!(z_select(&x, &t).unwrap(), m(&[vec![1, 2], vec![5, 6]]));
        let full = z_select(&x, &IndexSet::full(2)).unwrap();
        assert_eq!(full, m(&[vec![1, 2], vec![5, 6], vec![3, 4], vec![7, 8]]));
    }

    #[test]
    fn z_select_on_omega() {
        let o2 = omega(2).unwrap();
        let z = z_select(&o2, &IndexSet::new(vec![1]).unwrap()).unwrap();
        // rows 1 and 3 of omega(2); columns are preserved
        assert_eq!(z, m(&[vec![0, 0, 1, 0], vec![-1, 0, 0, 0]]));
    }

    #[test]
    fn z_select_errors() {
        let odd_rows = IntMatrix::zeros(3, 2);
        assert!(z_select(&odd_rows, &IndexSet::new(vec![1]).unwrap()).is_err());
        let x = IntMatrix::zeros(4, 2);
        assert!(z_select(&x, &IndexSet::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip_uses_strings() {
        let x = m(&[vec![1, -2], vec![3, 4]]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":["1","-2","3","4"]}"#);
        let back: IntMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<IntMatrix>(r#"{"rows":2,"cols":2,"entries":["1"]}"#).is_err());
    }
}
