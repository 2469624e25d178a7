//! Exact polynomial invariants (determinant, permanent, Pfaffian, hafnian,
//! the rectangular form `pf(xᵀΩx)`, the quadratic form) and their
//! row-coefficient decompositions `Δ = Σ Fᵢ(y)ξᵢ + G(z)`.

use crate::error::{invalid, Error, Result};
use crate::matrices::{hat, omega_unchecked, IntMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Largest permanent order accepted.
pub const MAX_PERM_ORDER: usize = 20;
/// Largest Pfaffian / hafnian order accepted.
pub const MAX_PF_ORDER: usize = 14;

// ---------------------------------------------------------------- det

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det(x: &IntMatrix) -> Result<BigInt> {
    if !x.is_square() {
        return invalid(format!("det needs a square matrix, got {}x{}", x.rows(), x.cols()));
    }
    Ok(det_unchecked(x))
}

pub(crate) fn det_unchecked(x: &IntMatrix) -> BigInt {
    let n = x.rows();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| x.row(i).to_vec()).collect();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = !sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

// ---------------------------------------------------------------- perm

/// Permanent by Ryser's formula over a Gray-code walk of column subsets.
pub fn perm(x: &IntMatrix) -> Result<BigInt> {
    if !x.is_square() {
        return invalid(format!("perm needs a square matrix, got {}x{}", x.rows(), x.cols()));
    }
    if x.rows() > MAX_PERM_ORDER {
        return Err(Error::ResourceLimit(format!("permanent order {} exceeds {MAX_PERM_ORDER}", x.rows())));
    }
    Ok(perm_unchecked(x))
}

pub(crate) fn perm_unchecked(x: &IntMatrix) -> BigInt {
    let n = x.rows();
    if n == 0 {
        return BigInt::one();
    }
    let small: Option<Vec<i64>> = x.entries().iter().map(|v| v.to_i64()).collect();
    if let Some(a) = small {
        if let Some(v) = ryser_i128(n, &a) {
            return BigInt::from(v);
        }
    }
    ryser_big(n, x.entries())
}

fn ryser_i128(n: usize, a: &[i64]) -> Option<i128> {
    let mut sums = vec![0i128; n];
    let mut total = 0i128;
    let mut prev_gray = 0u32;
    for k in 1u32..(1 << n) {
        let gray = k ^ (k >> 1);
        let j = (gray ^ prev_gray).trailing_zeros() as usize;
        let add = gray & (1 << j) != 0;
        for (i, s) in sums.iter_mut().enumerate() {
            let v = a[i * n + j] as i128;
            *s = if add { s.checked_add(v)? } else { s.checked_sub(v)? };
        }
        prev_gray = gray;
        let mut prod = 1i128;
        for s in &sums {
            prod = prod.checked_mul(*s)?;
        }
        let odd = (n as u32 - gray.count_ones()) % 2 == 1;
        total = if odd { total.checked_sub(prod)? } else { total.checked_add(prod)? };
    }
    Some(total)
}

fn ryser_big(n: usize, a: &[BigInt]) -> BigInt {
    let mut sums = vec![BigInt::zero(); n];
    let mut total = BigInt::zero();
    let mut prev_gray = 0u32;
    for k in 1u32..(1 << n) {
        let gray = k ^ (k >> 1);
        let j = (gray ^ prev_gray).trailing_zeros() as usize;
        let add = gray & (1 << j) != 0;
        for (i, s) in sums.iter_mut().enumerate() {
            if add {
                *s += &a[i * n + j];
            } else {
                *s -= &a[i * n + j];
            }
        }
        prev_gray = gray;
        let prod: BigInt = sums.iter().product();
        if (n as u32 - gray.count_ones()) % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    total
}

// ---------------------------------------------------------------- pf / hf

/// Pfaffian by first-row expansion with memoization over index subsets.
pub fn pf(x: &IntMatrix) -> Result<BigInt> {
    check_pairing_matrix(x, true)?;
    Ok(pairing_sum(x, true))
}

/// Hafnian: the unsigned first-row expansion.
pub fn hf(x: &IntMatrix) -> Result<BigInt> {
    check_pairing_matrix(x, false)?;
    Ok(pairing_sum(x, false))
}

fn check_pairing_matrix(x: &IntMatrix, anti: bool) -> Result<()> {
    let name = if anti { "pf" } else { "hf" };
    if !x.is_square() || !x.rows().is_multiple_of(2) {
        return invalid(format!("{name} needs a square matrix of even order"));
    }
    if anti && !x.is_antisymmetric() {
        return invalid("pf needs an antisymmetric matrix");
    }
    if !anti && !x.is_hollow_symmetric() {
        return invalid("hf needs a symmetric matrix with zero diagonal");
    }
    if x.rows() > MAX_PF_ORDER {
        return Err(Error::ResourceLimit(format!("{name} order {} exceeds {MAX_PF_ORDER}", x.rows())));
    }
    Ok(())
}

/// Signed (Pfaffian) or unsigned (hafnian) sum over perfect matchings, read
/// from the upper triangle only.
pub(crate) fn pairing_sum(x: &IntMatrix, signed: bool) -> BigInt {
    let n = x.rows();
    if n % 2 == 1 {
        return BigInt::zero();
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut memo: std::collections::HashMap<u32, BigInt> = std::collections::HashMap::new();
    pairing_rec(x, full, signed, &mut memo)
}

fn pairing_rec(x: &IntMatrix, mask: u32, signed: bool, memo: &mut std::collections::HashMap<u32, BigInt>) -> BigInt {
    if mask == 0 {
        return BigInt::one();
    }
    if let Some(v) = memo.get(&mask) {
        return v.clone();
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << i);
    let mut acc = BigInt::zero();
    let mut pos = 1usize;
    let mut bits = rest;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        pos += 1;
        let e = x.get(i, j);
        if e.is_zero() {
            continue;
        }
        let sub = pairing_rec(x, rest & !(1 << j), signed, memo);
        if signed && pos % 2 == 1 {
            acc -= e * sub;
        } else {
            acc += e * sub;
        }
    }
    memo.insert(mask, acc.clone());
    acc
}

// ---------------------------------------------------------------- big_p

/// `pf(xᵀ Ω_ℓ x)` for a 2ℓ×2n matrix with ℓ ≥ n ≥ 1.
pub fn big_p(x: &IntMatrix, ell: usize) -> Result<BigInt> {
    if ell == 0 || x.rows() != 2 * ell {
        return invalid(format!("big_p needs 2*ell = {} rows, got {}", 2 * ell, x.rows()));
    }
    if x.cols() == 0 || !x.cols().is_multiple_of(2) {
        return invalid(format!("big_p needs a positive even column count, got {}", x.cols()));
    }
    if ell < x.cols() / 2 {
        return invalid(format!("big_p needs ell >= n, got ell={ell}, n={}", x.cols() / 2));
    }
    if x.cols() > MAX_PF_ORDER {
        return Err(Error::ResourceLimit(format!("big_p column count {} exceeds {MAX_PF_ORDER}", x.cols())));
    }
    Ok(big_p_raw(x))
}

/// No shape checks beyond evenness; the 0-column case gives 1.
pub(crate) fn big_p_raw(x: &IntMatrix) -> BigInt {
    if x.cols() == 0 {
        return BigInt::one();
    }
    if x.rows() == 0 {
        return BigInt::zero();
    }
    let g = x.transpose().mul(&omega_unchecked(x.rows() / 2)).expect("shapes agree");
    pairing_sum(&g.mul(x).expect("shapes agree"), true)
}

/// Coefficient of ξᵢ (the last-column entry of row `i`, 1-based) in
/// `pf(xᵀΩx)`, by expansion into smaller forms. `y` is 2ℓ×(2n−1).
pub fn b_coefficient(y: &IntMatrix, i: usize) -> Result<BigInt> {
    let ell = check_y_shape(y, i)?;
    let ih = hat(i, ell);
    let rows = [i - 1, ih - 1];
    let mut acc = BigInt::zero();
    for k in 0..y.cols() {
        let e = y.get(ih - 1, k);
        if e.is_zero() {
            continue;
        }
        let term = e * big_p_raw(&y.delete(&rows, &[k]));
        // (-1)^k with 1-based k
        if k % 2 == 0 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    Ok(if i <= ell { acc } else { -acc })
}

/// Same coefficient written as a sum of (2n−1)×(2n−1) determinants of
/// odd-looking row stacks `[R_î; Z_t]` over (n−1)-subsets t.
pub fn b_coefficient_by_determinants(y: &IntMatrix, i: usize) -> Result<BigInt> {
    let ell = check_y_shape(y, i)?;
    let n = y.cols().div_ceil(2);
    let ih = hat(i, ell);
    let pair = if i <= ell { i } else { i - ell };
    let pool: Vec<usize> = (1..=ell).filter(|&t| t != pair).collect();
    let cols: Vec<usize> = (0..y.cols()).collect();
    let mut acc = BigInt::zero();
    for t in subsets(&pool, n - 1) {
        let mut rows = vec![ih - 1];
        rows.extend(crate::matrices::z_rows(&t, ell));
        acc += det_unchecked(&y.select(&rows, &cols));
    }
    Ok(if i <= ell { -acc } else { acc })
}

fn check_y_shape(y: &IntMatrix, i: usize) -> Result<usize> {
    if y.rows() == 0 || !y.rows().is_multiple_of(2) || y.cols() % 2 != 1 {
        return invalid(format!("y must be 2l x (2n-1), got {}x{}", y.rows(), y.cols()));
    }
    let ell = y.rows() / 2;
    if ell < y.cols().div_ceil(2) {
        return invalid("y needs l >= n");
    }
    if i == 0 || i > 2 * ell {
        return invalid(format!("row index {i} outside 1..={}", 2 * ell));
    }
    if y.cols() + 1 > MAX_PF_ORDER {
        return Err(Error::ResourceLimit("rectangular width too large".into()));
    }
    Ok(ell)
}

/// All `k`-element subsets of `pool`, lexicographic.
pub(crate) fn subsets(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in start..pool.len() {
            cur.push(pool[s]);
            go(pool, k, s + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, k, 0, &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------- families

/// The hypersurface families handled by the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum VarietyFamily {
    Det {
        n: usize,
    },
    Quad {
        n: usize,
        k: usize,
    },
    /// Pfaffians of 2n×2n antisymmetric matrices.
    Pf {
        n: usize,
    },
    /// `pf(xᵀΩx)` on 2ℓ×2n matrices.
    Rect {
        l: usize,
        n: usize,
    },
    Perm {
        n: usize,
    },
    /// Hafnians of 2n×2n symmetric hollow matrices.
    Haf {
        n: usize,
    },
}

impl VarietyFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            VarietyFamily::Det { n } | VarietyFamily::Perm { n } => n >= 1,
            VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => n >= 1,
            VarietyFamily::Quad { n, .. } => n >= 1,
            VarietyFamily::Rect { l, n } => n >= 1 && l >= n,
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("invalid family parameters {self:?}"))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VarietyFamily::Det { .. } => "det",
            VarietyFamily::Quad { .. } => "quad",
            VarietyFamily::Pf { .. } => "pf",
            VarietyFamily::Rect { .. } => "rect",
            VarietyFamily::Perm { .. } => "perm",
            VarietyFamily::Haf { .. } => "haf",
        }
    }

    /// Number of distinguished linear variables ξ.
    pub fn xi_count(&self) -> usize {
        match *self {
            VarietyFamily::Det { n } | VarietyFamily::Perm { n } | VarietyFamily::Quad { n, .. } => n,
            VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => 2 * n - 1,
            VarietyFamily::Rect { l, .. } => 2 * l,
        }
    }

    pub fn y_count(&self) -> usize {
        match *self {
            VarietyFamily::Det { n } | VarietyFamily::Perm { n } => n * (n - 1),
            VarietyFamily::Quad { n, .. } => n,
            VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => (2 * n - 1) * (2 * n - 2) / 2,
            VarietyFamily::Rect { l, n } => 2 * l * (2 * n - 1),
        }
    }

    pub fn z_count(&self) -> usize {
        match *self {
            VarietyFamily::Quad { k, .. } => k,
            _ => 0,
        }
    }

    pub fn coordinate_count(&self) -> usize {
        self.xi_count() + self.y_count() + self.z_count()
    }

    /// Shape of the underlying matrix; `None` for the quadratic form.
    pub fn matrix_shape(&self) -> Option<(usize, usize)> {
        match *self {
            VarietyFamily::Det { n } | VarietyFamily::Perm { n } => Some((n, n)),
            VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => Some((2 * n, 2 * n)),
            VarietyFamily::Rect { l, n } => Some((2 * l, 2 * n)),
            VarietyFamily::Quad { .. } => None,
        }
    }
}

/// A point of the ambient affine space in its family's canonical layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarietyPoint {
    pub family: VarietyFamily,
    #[serde(with = "crate::serde_big::seq")]
    pub coordinates: Vec<BigInt>,
}

impl VarietyPoint {
    pub fn new(family: VarietyFamily, coordinates: Vec<BigInt>) -> Result<Self> {
        family.validate()?;
        if coordinates.len() != family.coordinate_count() {
            return invalid(format!(
                "{} layout needs {} coordinates, got {}",
                family.name(),
                family.coordinate_count(),
                coordinates.len()
            ));
        }
        Ok(VarietyPoint { family, coordinates })
    }

    pub fn from_matrix(family: VarietyFamily, x: &IntMatrix) -> Result<Self> {
        family.validate()?;
        let shape = family
            .matrix_shape()
            .ok_or_else(|| Error::InvalidArgument("the quadratic family has no matrix form".into()))?;
        if (x.rows(), x.cols()) != shape {
            return invalid(format!("{} needs a {}x{} matrix", family.name(), shape.0, shape.1));
        }
        let coords = match family {
            VarietyFamily::Pf { .. } => {
                if !x.is_antisymmetric() {
                    return invalid("pf point must be antisymmetric");
                }
                x.upper_triangle()
            }
            VarietyFamily::Haf { .. } => {
                if !x.is_hollow_symmetric() {
                    return invalid("haf point must be symmetric with zero diagonal");
                }
                x.upper_triangle()
            }
            _ => x.entries().to_vec(),
        };
        VarietyPoint::new(family, coords)
    }

    /// Matrix form; `None` for the quadratic family.
    pub fn to_matrix(&self) -> Option<IntMatrix> {
        let (r, c) = self.family.matrix_shape()?;
        Some(match self.family {
            VarietyFamily::Pf { .. } => {
                IntMatrix::antisymmetric_from_upper(r, &self.coordinates).expect("layout checked")
            }
            VarietyFamily::Haf { .. } => IntMatrix::symmetric_from_upper(r, &self.coordinates).expect("layout checked"),
            _ => IntMatrix::new(r, c, self.coordinates.clone()).expect("layout checked"),
        })
    }
}

/// `Σ ξᵢyᵢ + Σ zⱼ²`.
pub fn quad_form(point: &VarietyPoint) -> Result<BigInt> {
    let VarietyFamily::Quad { n, .. } = point.family else {
        return invalid("quad_form needs a quad point");
    };
    let c = &point.coordinates;
    let lin: BigInt = (0..n).map(|i| &c[i] * &c[n + i]).sum();
    let sq: BigInt = c[2 * n..].iter().map(|z| z * z).sum();
    Ok(lin + sq)
}

/// The family invariant at a point.
pub fn delta_eval(point: &VarietyPoint) -> Result<BigInt> {
    VarietyPoint::new(point.family, point.coordinates.clone())?;
    match point.family {
        VarietyFamily::Quad { .. } => quad_form(point),
        VarietyFamily::Det { .. } => det(&point.to_matrix().expect("matrix family")),
        VarietyFamily::Perm { .. } => perm(&point.to_matrix().expect("matrix family")),
        VarietyFamily::Pf { .. } => pf(&point.to_matrix().expect("matrix family")),
        VarietyFamily::Haf { .. } => hf(&point.to_matrix().expect("matrix family")),
        VarietyFamily::Rect { l, .. } => big_p(&point.to_matrix().expect("matrix family"), l),
    }
}

/// `(ξ, (Fᵢ(y)), G(z))` with `Σ Fᵢξᵢ + G` equal to the invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    #[serde(with = "crate::serde_big::seq")]
    pub xi: Vec<BigInt>,
    #[serde(with = "crate::serde_big::seq")]
    pub f_values: Vec<BigInt>,
    #[serde(with = "crate::serde_big::single")]
    pub g_value: BigInt,
}

impl Decomposition {
    pub fn recombine(&self) -> BigInt {
        self.f_values.iter().zip(&self.xi).map(|(f, x)| f * x).sum::<BigInt>() + &self.g_value
    }
}

/// Splits a point into its (ξ, y, z) blocks.
pub fn split_point(point: &VarietyPoint) -> Result<(Vec<BigInt>, Vec<BigInt>, Vec<BigInt>)> {
    let p = VarietyPoint::new(point.family, point.coordinates.clone())?;
    let c = p.coordinates;
    Ok(match p.family {
        VarietyFamily::Quad { n, .. } => (c[..n].to_vec(), c[n..2 * n].to_vec(), c[2 * n..].to_vec()),
        VarietyFamily::Det { n } | VarietyFamily::Perm { n } => (c[..n].to_vec(), c[n..].to_vec(), vec![]),
        VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => {
            (c[..2 * n - 1].to_vec(), c[2 * n - 1..].to_vec(), vec![])
        }
        VarietyFamily::Rect { l, n } => {
            let w = 2 * n;
            let mut xi = Vec::with_capacity(2 * l);
            let mut y = Vec::with_capacity(2 * l * (w - 1));
            for r in 0..2 * l {
                y.extend_from_slice(&c[r * w..r * w + w - 1]);
                xi.push(c[r * w + w - 1].clone());
            }
            (xi, y, vec![])
        }
    })
}

/// Inverse of [`split_point`].
pub fn assemble_point(family: VarietyFamily, xi: &[BigInt], y: &[BigInt], z: &[BigInt]) -> Result<VarietyPoint> {
    family.validate()?;
    if xi.len() != family.xi_count() || y.len() != family.y_count() || z.len() != family.z_count() {
        return invalid(format!("block sizes do not match the {} layout", family.name()));
    }
    let coords = match family {
        VarietyFamily::Rect { l, n } => {
            let w = 2 * n - 1;
            let mut c = Vec::with_capacity(2 * l * (w + 1));
            for r in 0..2 * l {
                c.extend_from_slice(&y[r * w..(r + 1) * w]);
                c.push(xi[r].clone());
            }
            c
        }
        _ => xi.iter().chain(y).chain(z).cloned().collect(),
    };
    VarietyPoint::new(family, coords)
}

/// The y block as a matrix: rows 2..n (Det/Perm), the lower-right
/// (2n−1)-block (Pf/Haf), or the first 2n−1 columns (Rect).
pub fn y_matrix(family: VarietyFamily, y: &[BigInt]) -> Result<Option<IntMatrix>> {
    family.validate()?;
    if y.len() != family.y_count() {
        return invalid(format!("{} y block needs {} entries", family.name(), family.y_count()));
    }
    Ok(match family {
        VarietyFamily::Quad { .. } => None,
        VarietyFamily::Det { n } | VarietyFamily::Perm { n } => Some(IntMatrix::new(n - 1, n, y.to_vec())?),
        VarietyFamily::Pf { n } => Some(IntMatrix::antisymmetric_from_upper(2 * n - 1, y)?),
        VarietyFamily::Haf { n } => Some(IntMatrix::symmetric_from_upper(2 * n - 1, y)?),
        VarietyFamily::Rect { l, n } => Some(IntMatrix::new(2 * l, 2 * n - 1, y.to_vec())?),
    })
}

/// Row coefficients `F₁(y), …, F_d(y)`.
pub fn coefficients(family: VarietyFamily, y: &[BigInt]) -> Result<Vec<BigInt>> {
    let ym = y_matrix(family, y)?;
    let neg_if = |odd: bool, v: BigInt| if odd { -v } else { v };
    Ok(match family {
        VarietyFamily::Quad { .. } => y.to_vec(),
        VarietyFamily::Det { n } => {
            let ym = ym.expect("matrix family");
            (0..n).map(|j| neg_if(j % 2 == 1, det_unchecked(&ym.delete(&[], &[j])))).collect()
        }
        VarietyFamily::Perm { n } => {
            if n > MAX_PERM_ORDER {
                return Err(Error::ResourceLimit(format!("permanent order {n} exceeds {MAX_PERM_ORDER}")));
            }
            let ym = ym.expect("matrix family");
            (0..n).map(|j| perm_unchecked(&ym.delete(&[], &[j]))).collect()
        }
        VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => {
            if 2 * n > MAX_PF_ORDER {
                return Err(Error::ResourceLimit(format!("order {} exceeds {MAX_PF_ORDER}", 2 * n)));
            }
            let signed = matches!(family, VarietyFamily::Pf { .. });
            let ym = ym.expect("matrix family");
            // ξ_j sits at column j+2 of the full matrix; sign (-1)^(j+2)
            (0..2 * n - 1).map(|j| neg_if(signed && j % 2 == 1, pairing_sum(&ym.delete(&[j], &[j]), signed))).collect()
        }
        VarietyFamily::Rect { l, .. } => {
            let ym = ym.expect("matrix family");
            (1..=2 * l).map(|i| b_coefficient(&ym, i)).collect::<Result<_>>()?
        }
    })
}

/// `G(z)`: Σ zⱼ² for the quadratic family, zero otherwise.
pub fn g_value(family: VarietyFamily, z: &[BigInt]) -> BigInt {
    match family {
        VarietyFamily::Quad { .. } => z.iter().map(|v| v * v).sum(),
        _ => BigInt::zero(),
    }
}

/// Row-coefficient decomposition at a point.
pub fn decompose(point: &VarietyPoint) -> Result<Decomposition> {
    let (xi, y, z) = split_point(point)?;
    let f_values = coefficients(point.family, &y)?;
    Ok(Decomposition { xi, f_values, g_value: g_value(point.family, &z) })
}

// ---------------------------------------------------------------- rect witnesses

/// All-ones y block: for n ≥ 2 every B_i vanishes (repeated rows).
pub fn rect_y0(l: usize, n: usize) -> IntMatrix {
    IntMatrix::from_fn(2 * l, 2 * n - 1, |_, _| BigInt::one())
}

/// Odd y block with B_i ≡ 2^{2n−2} mod 2^{2n−1}: rows i and î are
/// (3,1,…,1), the rows of Z_t continue the pattern of J + 2I, all other
/// rows are ones.
pub fn rect_y1(l: usize, n: usize, i: usize) -> Result<IntMatrix> {
    if n == 0 || l < n || i == 0 || i > 2 * l {
        return invalid(format!("rect_y1 needs l >= n >= 1 and 1 <= i <= 2l (l={l}, n={n}, i={i})"));
    }
    let pair = if i <= l { i } else { i - l };
    let t: Vec<usize> = (1..=l).filter(|&s| s != pair).take(n - 1).collect();
    let mut y = rect_y0(l, n);
    let three = BigInt::from(3);
    y.set(i - 1, 0, three.clone());
    y.set(hat(i, l) - 1, 0, three.clone());
    for (r, row) in crate::matrices::z_rows(&t, l).into_iter().enumerate() {
        y.set(row, r + 1, three.clone());
    }
    Ok(y)
}

/// 2-adic valuation; `None` for zero.
pub fn two_adic_valuation(v: &BigInt) -> Option<u64> {
    if v.is_zero() {
        None
    } else {
        v.abs().trailing_zeros()
    }
}

/// `v mod 2^e` in `[0, 2^e)`.
pub fn mod_pow2(v: &BigInt, e: u32) -> BigInt {
    v.mod_floor(&(BigInt::one() << e))
}
