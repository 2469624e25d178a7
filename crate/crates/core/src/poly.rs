//! Sparse multivariate polynomials with big-integer coefficients, plus
//! symbolic determinant, permanent, Pfaffian, hafnian and `pf(xᵀΩx)` over
//! small grids of variables. Variables are numbered from 1.

use crate::error::{invalid, Result};
use crate::matrices::IndexSet;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPoly", into = "RawPoly")]
pub struct SparsePoly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    exponents: Vec<u32>,
    #[serde(with = "crate::serde_big::single")]
    coeff: BigInt,
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    arity: usize,
    terms: Vec<RawTerm>,
}

impl TryFrom<RawPoly> for SparsePoly {
    type Error = String;

    fn try_from(raw: RawPoly) -> std::result::Result<Self, String> {
        let mut p = SparsePoly::zero(raw.arity);
        for t in raw.terms {
            if t.exponents.len() != raw.arity {
                return Err(format!("exponent vector of length {} for arity {}", t.exponents.len(), raw.arity));
            }
            p.add_term(t.exponents, t.coeff);
        }
        Ok(p)
    }
}

impl From<SparsePoly> for RawPoly {
    fn from(p: SparsePoly) -> Self {
        RawPoly {
            arity: p.arity,
            terms: p.terms.into_iter().map(|(exponents, coeff)| RawTerm { exponents, coeff }).collect(),
        }
    }
}

impl SparsePoly {
    pub fn zero(arity: usize) -> Self {
        SparsePoly { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(vec![0; arity], c.into());
        p
    }

    /// The variable `x_i`, `1 <= i <= arity`.
    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= arity, "variable {i} outside 1..={arity}");
        let mut e = vec![0; arity];
        e[i - 1] = 1;
        let mut p = Self::zero(arity);
        p.add_term(e, BigInt::one());
        p
    }

    /// Builds from `(exponents, coefficient)` pairs; like terms are merged.
    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>) -> Result<Self> {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            if e.len() != arity {
                return invalid(format!("exponent vector of length {} for arity {arity}", e.len()));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn constant_value(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&vec![0; self.arity]).cloned(),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i - 1]).max().unwrap_or(0)
    }

    /// Variables that occur.
    pub fn support(&self) -> IndexSet {
        let s: BTreeSet<usize> =
            self.terms.keys().flat_map(|e| e.iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, _)| i + 1)).collect();
        IndexSet::new(s.into_iter().collect()).expect("sorted and positive")
    }

    pub fn eval(&self, point: &[BigInt]) -> Result<BigInt> {
        if point.len() != self.arity {
            return invalid(format!("point has {} coordinates, polynomial arity is {}", point.len(), self.arity));
        }
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &d) in point.iter().zip(e) {
                if d > 0 {
                    t *= x.pow(d);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        SparsePoly { arity: self.arity, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    /// Splits `p = q·x_i + r` with `r` free of `x_i`; fails if `deg_{x_i} p > 1`.
    pub fn linear_split(&self, i: usize) -> Result<(SparsePoly, SparsePoly)> {
        if self.degree_in(i) > 1 {
            return invalid(format!("polynomial is not linear in x{i}"));
        }
        let mut q = Self::zero(self.arity);
        let mut r = Self::zero(self.arity);
        for (e, c) in &self.terms {
            if e[i - 1] == 1 {
                let mut e2 = e.clone();
                e2[i - 1] = 0;
                q.add_term(e2, c.clone());
            } else {
                r.add_term(e.clone(), c.clone());
            }
        }
        Ok((q, r))
    }

    /// Changes the arity, padding with unused variables or dropping
    /// trailing ones (which must not occur).
    pub fn with_arity(&self, arity: usize) -> Result<Self> {
        if arity < self.arity && self.support().max().is_some_and(|m| m > arity) {
            return invalid("cannot drop variables that occur");
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2.resize(arity, 0);
                (e2, c.clone())
            })
            .collect();
        Ok(SparsePoly { arity, terms })
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.arity, other.arity, "polynomial arity mismatch");
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        self.check_same(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        self + &(-rhs)
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        SparsePoly { arity: self.arity, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        self.check_same(rhs);
        let mut out = SparsePoly::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(i, &d)| if d == 1 { format!("x{}", i + 1) } else { format!("x{}^{d}", i + 1) })
                .collect();
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly[{}]({self})", self.arity)
    }
}

/// A matrix whose entries are variable numbers.
pub type VarGrid = Vec<Vec<usize>>;

pub(crate) fn grid_polys(grid: &[Vec<usize>], arity: usize) -> Vec<Vec<SparsePoly>> {
    grid.iter().map(|r| r.iter().map(|&v| SparsePoly::var(arity, v)).collect()).collect()
}

pub(crate) fn drop_line(m: &[Vec<SparsePoly>], row: Option<usize>, col: Option<usize>) -> Vec<Vec<SparsePoly>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| Some(j) != col).map(|(_, p)| p.clone()).collect())
        .collect()
}

fn laplace(m: &[Vec<SparsePoly>], arity: usize, signed: bool) -> SparsePoly {
    if m.is_empty() {
        return SparsePoly::constant(arity, 1);
    }
    let mut acc = SparsePoly::zero(arity);
    for j in 0..m.len() {
        let term = &m[0][j] * &laplace(&drop_line(m, Some(0), Some(j)), arity, signed);
        acc = if signed && j % 2 == 1 { &acc - &term } else { &acc + &term };
    }
    acc
}

/// Symbolic determinant by first-row expansion.
pub fn sym_det(m: &[Vec<SparsePoly>], arity: usize) -> SparsePoly {
    laplace(m, arity, true)
}

/// Symbolic permanent.
pub fn sym_perm(m: &[Vec<SparsePoly>], arity: usize) -> SparsePoly {
    laplace(m, arity, false)
}

/// Pfaffian (`signed`) or hafnian of a square matrix, reading entries
/// above the diagonal only.
pub fn sym_pairing(m: &[Vec<SparsePoly>], arity: usize, signed: bool) -> SparsePoly {
    let idx: Vec<usize> = (0..m.len()).collect();
    pairing_rec(m, &idx, arity, signed)
}

fn pairing_rec(m: &[Vec<SparsePoly>], idx: &[usize], arity: usize, signed: bool) -> SparsePoly {
    if idx.is_empty() {
        return SparsePoly::constant(arity, 1);
    }
    if idx.len() % 2 == 1 {
        return SparsePoly::zero(arity);
    }
    let mut acc = SparsePoly::zero(arity);
    for p in 1..idx.len() {
        let rest: Vec<usize> = idx.iter().enumerate().filter(|&(q, _)| q != 0 && q != p).map(|(_, &v)| v).collect();
        let term = &m[idx[0]][idx[p]] * &pairing_rec(m, &rest, arity, signed);
        // 1-based position p+1; sign (-1)^(p+1)
        acc = if signed && p % 2 == 0 { &acc - &term } else { &acc + &term };
    }
    acc
}

/// Symbolic `pf(xᵀ Ω x)` for `x` with an even number of rows; 1 when `x`
/// has no columns.
pub fn sym_bigp(x: &[Vec<SparsePoly>], cols: usize, arity: usize) -> SparsePoly {
    if cols == 0 {
        return SparsePoly::constant(arity, 1);
    }
    let l = x.len() / 2;
    if l == 0 {
        return SparsePoly::zero(arity);
    }
    // (xᵀΩx)_{ab} = Σ_{r<l} x_{r,a} x_{r+l,b} − x_{r+l,a} x_{r,b}
    let mut g = vec![vec![SparsePoly::zero(arity); cols]; cols];
    for a in 0..cols {
        for b in a + 1..cols {
            let mut s = SparsePoly::zero(arity);
            for r in 0..l {
                s = &s + &(&(&x[r][a] * &x[r + l][b]) - &(&x[r + l][a] * &x[r][b]));
            }
            g[a][b] = s;
        }
    }
    sym_pairing(&g, arity, true)
}
