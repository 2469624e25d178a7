//! Intertwined pairs of polynomials: the recursive witness, its validator,
//! and constructors for determinant, permanent, Pfaffian, hafnian and
//! rectangular-coefficient pairs.
//!
//! A witness of depth `d` for `(F, F̃)` splits the variables into `u`, `ũ`,
//! `v`, `w` and asserts
//!
//! ```text
//! F  =       Σ αᵢ uᵢ + β
//! F̃  = s · ( Σ αᵢ ũᵢ + β )        s = tilde_sign = ±1
//! ```
//!
//! with the `αᵢ` integer constants of power-of-two gcd when `d = 1`, and
//! polynomials in `v` two of which are intertwined of depth `d − 1` (over
//! the variables `v`) otherwise. `β` lives on `w` at depth 1 and on `v ∪ w`
//! above. The sign `s` absorbs the alternating signs of cofactor
//! expansions; it does not change which primes divide `F̃`.
//!
//! `u` and `ũ` are ordered lists paired by position; `v` and `w` are sets.

use crate::error::{invalid, Error, Result};
use crate::invariants::VarietyFamily;
use crate::matrices::{hat, IndexSet};
use crate::poly::{drop_line, grid_polys, sym_bigp, sym_det, sym_pairing, sym_perm, SparsePoly, VarGrid};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Cap on the variable count of any symbolic expansion.
pub const MAX_SYMBOLIC_VARS: usize = 25;
/// Largest arity for which fully symbolic validation is offered.
pub const SYMBOLIC_VALIDATION_MAX_ARITY: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildWitness {
    /// 1-based positions in the parent's coefficient list.
    pub i1: usize,
    pub i2: usize,
    pub witness: IntertwinedWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntertwinedWitness {
    /// Number of ambient variables; every polynomial has this arity.
    pub arity: usize,
    pub depth: usize,
    pub u_vars: Vec<usize>,
    pub utilde_vars: Vec<usize>,
    pub v_vars: IndexSet,
    pub w_vars: IndexSet,
    pub coeffs: Vec<SparsePoly>,
    pub beta: SparsePoly,
    pub tilde_sign: i8,
    pub child: Option<Box<ChildWitness>>,
}

impl IntertwinedWitness {
    /// The node at `level` (0 = self).
    pub fn level(&self, level: usize) -> Option<&IntertwinedWitness> {
        if level == 0 {
            Some(self)
        } else {
            self.child.as_ref()?.witness.level(level - 1)
        }
    }

    fn level_mut(&mut self, level: usize) -> Option<&mut IntertwinedWitness> {
        if level == 0 {
            Some(self)
        } else {
            self.child.as_mut()?.witness.level_mut(level - 1)
        }
    }
}

/// A pair of polynomials with a witness that they are intertwined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub f: SparsePoly,
    pub f_tilde: SparsePoly,
    pub witness: IntertwinedWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub valid: bool,
    /// First violated clause.
    pub failure: Option<String>,
}

impl Validation {
    fn from(r: std::result::Result<(), String>) -> Self {
        match r {
            Ok(()) => Validation { valid: true, failure: None },
            Err(e) => Validation { valid: false, failure: Some(e) },
        }
    }
}

// ---------------------------------------------------------------- validation

type Check = std::result::Result<(), String>;

fn to_set(vars: &[usize]) -> BTreeSet<usize> {
    vars.iter().copied().collect()
}

fn is_power_of_two(g: &BigInt) -> bool {
    g.is_positive() && (g & (g - BigInt::one())).is_zero()
}

fn structure(w: &IntertwinedWitness, arity: usize, universe: &BTreeSet<usize>, at: &str) -> Check {
    if w.arity != arity {
        return Err(format!("{at}: arity {} differs from ambient {arity}", w.arity));
    }
    if w.tilde_sign != 1 && w.tilde_sign != -1 {
        return Err(format!("{at}: tilde_sign must be ±1"));
    }
    if w.u_vars.is_empty() {
        return Err(format!("{at}: u is empty"));
    }
    if w.u_vars.len() != w.utilde_vars.len() {
        return Err(format!("{at}: |u| = {} but |ũ| = {}", w.u_vars.len(), w.utilde_vars.len()));
    }
    if w.coeffs.len() != w.u_vars.len() {
        return Err(format!("{at}: {} coefficients for {} u-variables", w.coeffs.len(), w.u_vars.len()));
    }
    let parts: [(&str, Vec<usize>); 4] = [
        ("u", w.u_vars.clone()),
        ("ũ", w.utilde_vars.clone()),
        ("v", w.v_vars.as_slice().to_vec()),
        ("w", w.w_vars.as_slice().to_vec()),
    ];
    let mut seen = BTreeSet::new();
    for (name, vars) in &parts {
        for &x in vars {
            if !universe.contains(&x) {
                return Err(format!("{at}: variable {x} in {name} lies outside the variable set"));
            }
            if !seen.insert(x) {
                return Err(format!("{at}: variable {x} appears twice in the partition"));
            }
        }
    }
    if seen.len() != universe.len() {
        return Err(format!("{at}: u, ũ, v, w do not cover the variable set"));
    }
    if w.beta.arity() != arity || w.coeffs.iter().any(|c| c.arity() != arity) {
        return Err(format!("{at}: polynomial arity mismatch"));
    }
    let v = to_set(w.v_vars.as_slice());
    let vw: BTreeSet<usize> = v.union(&to_set(w.w_vars.as_slice())).copied().collect();
    if w.depth == 0 {
        return Err(format!("{at}: depth must be at least 1"));
    }
    if w.depth == 1 {
        if w.child.is_some() {
            return Err(format!("{at}: depth 1 must not have a child"));
        }
        if !w.v_vars.is_empty() {
            return Err(format!("{at}: depth 1 must have empty v"));
        }
        let mut g = BigInt::zero();
        for (k, c) in w.coeffs.iter().enumerate() {
            match c.constant_value() {
                Some(val) => g = g.gcd(&val),
                None => return Err(format!("{at}: coefficient {} is not an integer constant", k + 1)),
            }
        }
        if !is_power_of_two(&g) {
            return Err(format!("{at}: gcd of coefficients is {g}, not a power of 2"));
        }
        if !w.beta.support().as_slice().iter().all(|x| vw.contains(x)) {
            return Err(format!("{at}: beta uses variables outside w"));
        }
        return Ok(());
    }
    for (k, c) in w.coeffs.iter().enumerate() {
        if !c.support().as_slice().iter().all(|x| v.contains(x)) {
            return Err(format!("{at}: coefficient {} uses variables outside v", k + 1));
        }
    }
    if !w.beta.support().as_slice().iter().all(|x| vw.contains(x)) {
        return Err(format!("{at}: beta uses variables outside v ∪ w"));
    }
    let child = w.child.as_ref().ok_or_else(|| format!("{at}: depth {} needs a child witness", w.depth))?;
    if child.witness.depth + 1 != w.depth {
        return Err(format!("{at}: child depth {} does not match depth {}", child.witness.depth, w.depth));
    }
    let n = w.coeffs.len();
    if child.i1 == child.i2 || child.i1 == 0 || child.i2 == 0 || child.i1 > n || child.i2 > n {
        return Err(format!("{at}: invalid child pair ({}, {})", child.i1, child.i2));
    }
    structure(&child.witness, arity, &v, &format!("{at}/child"))
}

fn eval_node(w: &IntertwinedWitness, f: &BigInt, ft: &BigInt, x: &[BigInt], at: &str) -> Check {
    let ev = |p: &SparsePoly| p.eval(x).map_err(|e| e.to_string());
    let a: Vec<BigInt> = w.coeffs.iter().map(ev).collect::<std::result::Result<_, _>>()?;
    let beta = ev(&w.beta)?;
    let lin = |vars: &[usize]| -> BigInt { a.iter().zip(vars).map(|(c, &v)| c * &x[v - 1]).sum::<BigInt>() + &beta };
    if *f != lin(&w.u_vars) {
        return Err(format!("{at}: F ≠ Σ αᵢuᵢ + β"));
    }
    if *ft != lin(&w.utilde_vars) * BigInt::from(w.tilde_sign) {
        return Err(format!("{at}: F̃ ≠ s(Σ αᵢũᵢ + β)"));
    }
    if let Some(c) = &w.child {
        eval_node(&c.witness, &a[c.i1 - 1], &a[c.i2 - 1], x, &format!("{at}/child"))?;
    }
    Ok(())
}

fn symbolic_node(w: &IntertwinedWitness, f: &SparsePoly, ft: &SparsePoly, at: &str) -> Check {
    let lin = |vars: &[usize]| -> SparsePoly {
        w.coeffs.iter().zip(vars).fold(w.beta.clone(), |acc, (c, &v)| &acc + &(c * &SparsePoly::var(w.arity, v)))
    };
    if *f != lin(&w.u_vars) {
        return Err(format!("{at}: F ≠ Σ αᵢuᵢ + β"));
    }
    if *ft != lin(&w.utilde_vars).scale(&BigInt::from(w.tilde_sign)) {
        return Err(format!("{at}: F̃ ≠ s(Σ αᵢũᵢ + β)"));
    }
    if let Some(c) = &w.child {
        symbolic_node(&c.witness, &w.coeffs[c.i1 - 1], &w.coeffs[c.i2 - 1], &format!("{at}/child"))?;
    }
    Ok(())
}

fn check_arity(f: &SparsePoly, ft: &SparsePoly, w: &IntertwinedWitness) -> Result<()> {
    if f.arity() != ft.arity() || f.arity() != w.arity {
        return invalid(format!("arity mismatch: F has {}, F̃ has {}, witness has {}", f.arity(), ft.arity(), w.arity));
    }
    Ok(())
}

/// Structural checks, then the identities at `trials` seeded points with
/// coordinates uniform in `[−range, range]`.
pub fn validate_witness(
    f: &SparsePoly,
    ft: &SparsePoly,
    w: &IntertwinedWitness,
    trials: usize,
    range: u64,
    seed: u64,
) -> Result<Validation> {
    check_arity(f, ft, w)?;
    let universe: BTreeSet<usize> = (1..=w.arity).collect();
    if let Err(e) = structure(w, w.arity, &universe, "root") {
        return Ok(Validation::from(Err(e)));
    }
    let r = range as i64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let x: Vec<BigInt> = (0..w.arity).map(|_| BigInt::from(rng.gen_range(-r..=r))).collect();
        let fv = f.eval(&x)?;
        let ftv = ft.eval(&x)?;
        if let Err(e) = eval_node(w, &fv, &ftv, &x, "root") {
            return Ok(Validation::from(Err(format!("{e} (trial {trial})"))));
        }
    }
    Ok(Validation::from(Ok(())))
}

/// Structural checks plus exact polynomial identities.
pub fn validate_witness_symbolic(f: &SparsePoly, ft: &SparsePoly, w: &IntertwinedWitness) -> Result<Validation> {
    check_arity(f, ft, w)?;
    if w.arity > SYMBOLIC_VALIDATION_MAX_ARITY {
        return Err(Error::ResourceLimit(format!(
            "symbolic validation supports arity <= {SYMBOLIC_VALIDATION_MAX_ARITY}, got {}",
            w.arity
        )));
    }
    let universe: BTreeSet<usize> = (1..=w.arity).collect();
    let r = structure(w, w.arity, &universe, "root").and_then(|_| symbolic_node(w, f, ft, "root"));
    Ok(Validation::from(r))
}

// ---------------------------------------------------------------- builders

fn grid_vars(g: &[Vec<usize>]) -> BTreeSet<usize> {
    g.iter().flatten().copied().collect()
}

fn upper_vars(g: &[Vec<usize>], from: usize) -> BTreeSet<usize> {
    let n = g.len();
    (from..n).flat_map(|p| (p + 1..n).map(move |q| g[p][q])).collect()
}

fn index_set(s: &BTreeSet<usize>) -> IndexSet {
    IndexSet::new(s.iter().copied().collect()).expect("sorted and positive")
}

fn rest_of(universe: &BTreeSet<usize>, used: &[&BTreeSet<usize>]) -> IndexSet {
    let mut r = universe.clone();
    for s in used {
        r.retain(|x| !s.contains(x));
    }
    index_set(&r)
}

fn delete_grid(g: &[Vec<usize>], row: usize, col: usize) -> VarGrid {
    g.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &v)| v).collect())
        .collect()
}

fn sub_grid(g: &[Vec<usize>], idx: &[usize]) -> VarGrid {
    idx.iter().map(|&i| idx.iter().map(|&j| g[i][j]).collect()).collect()
}

fn upper_polys(g: &[Vec<usize>], arity: usize) -> Vec<Vec<SparsePoly>> {
    let n = g.len();
    (0..n)
        .map(|i| {
            (0..n).map(|j| if i < j { SparsePoly::var(arity, g[i][j]) } else { SparsePoly::zero(arity) }).collect()
        })
        .collect()
}

fn sign(odd: bool) -> i64 {
    if odd {
        -1
    } else {
        1
    }
}

struct Node {
    u: Vec<usize>,
    ut: Vec<usize>,
    v: BTreeSet<usize>,
    coeffs: Vec<SparsePoly>,
    tilde: i8,
    child: Option<(usize, usize, IntertwinedWitness)>,
}

fn finish(n: Node, universe: &BTreeSet<usize>, arity: usize) -> IntertwinedWitness {
    let w = rest_of(universe, &[&to_set(&n.u), &to_set(&n.ut), &n.v]);
    let depth = n.child.as_ref().map_or(1, |c| c.2.depth + 1);
    IntertwinedWitness {
        arity,
        depth,
        u_vars: n.u,
        utilde_vars: n.ut,
        v_vars: index_set(&n.v),
        w_vars: w,
        coeffs: n.coeffs,
        beta: SparsePoly::zero(arity),
        tilde_sign: n.tilde,
        child: n.child.map(|(i1, i2, witness)| Box::new(ChildWitness { i1, i2, witness })),
    }
}

/// `F = σ·det(a)`, `F̃ = tilde·σ·det(b)` (or permanents when unsigned),
/// `a` and `b` differing in line `j` along `axis`.
#[allow(clippy::too_many_arguments)]
fn det_like(
    a: &VarGrid,
    b: &VarGrid,
    axis: Axis,
    j: usize,
    sigma: i64,
    tilde: i8,
    signed: bool,
    universe: &BTreeSet<usize>,
    arity: usize,
) -> IntertwinedWitness {
    let k = a.len();
    let pa = grid_polys(a, arity);
    let mut coeffs = Vec::with_capacity(k);
    let (mut u, mut ut) = (Vec::with_capacity(k), Vec::with_capacity(k));
    for i in 0..k {
        let (minor, ui, uti) = match axis {
            Axis::Column => (drop_line(&pa, Some(i), Some(j)), a[i][j], b[i][j]),
            Axis::Row => (drop_line(&pa, Some(j), Some(i)), a[j][i], b[j][i]),
        };
        let core = if signed { sym_det(&minor, arity) } else { sym_perm(&minor, arity) };
        let s = if signed { sigma * sign((i + j) % 2 == 1) } else { 1 };
        coeffs.push(core.scale(&BigInt::from(s)));
        u.push(ui);
        ut.push(uti);
    }
    let line: BTreeSet<usize> = to_set(&u);
    let v: BTreeSet<usize> = grid_vars(a).difference(&line).copied().collect();
    let child = (k > 1).then(|| {
        let (a1, a2, ax) = match axis {
            Axis::Column => (delete_grid(a, 0, j), delete_grid(a, 1, j), Axis::Row),
            Axis::Row => (delete_grid(a, j, 0), delete_grid(a, j, 1), Axis::Column),
        };
        let s2 = sigma * sign(j % 2 == 1);
        let t2 = if signed { -1 } else { 1 };
        (1, 2, det_like(&a1, &a2, ax, 0, s2, t2, signed, &v, arity))
    });
    finish(Node { u, ut, v, coeffs, tilde, child }, universe, arity)
}

/// `F = σ·pf(a)`, `F̃ = tilde·σ·pf(b)` (hafnians when unsigned), `a` and
/// `b` differing in their first row and column.
fn pf_like(
    a: &VarGrid,
    b: &VarGrid,
    sigma: i64,
    tilde: i8,
    signed: bool,
    universe: &BTreeSet<usize>,
    arity: usize,
) -> IntertwinedWitness {
    let n = a.len();
    let pa = upper_polys(a, arity);
    let mut coeffs = Vec::with_capacity(n - 1);
    let (mut u, mut ut) = (Vec::new(), Vec::new());
    for j in 1..n {
        let idx: Vec<usize> = (1..n).filter(|&q| q != j).collect();
        let sub: Vec<Vec<SparsePoly>> = idx.iter().map(|&p| idx.iter().map(|&q| pa[p][q].clone()).collect()).collect();
        let s = if signed { sigma * sign(j % 2 == 0) } else { 1 };
        coeffs.push(sym_pairing(&sub, arity, signed).scale(&BigInt::from(s)));
        u.push(a[0][j]);
        ut.push(b[0][j]);
    }
    let v = upper_vars(a, 1);
    let child = (n > 2).then(|| {
        let i1: Vec<usize> = (2..n).collect();
        let i2: Vec<usize> = std::iter::once(1).chain(3..n).collect();
        let t2 = if signed { -1 } else { 1 };
        (1, 2, pf_like(&sub_grid(a, &i1), &sub_grid(a, &i2), sigma, t2, signed, &v, arity))
    });
    finish(Node { u, ut, v, coeffs, tilde, child }, universe, arity)
}

fn column(g: &[Vec<usize>], c: usize) -> Vec<usize> {
    g.iter().map(|r| r[c]).collect()
}

fn drop_rows(g: &[Vec<usize>], rows: &[usize]) -> VarGrid {
    g.iter().enumerate().filter(|(i, _)| !rows.contains(i)).map(|(_, r)| r.clone()).collect()
}

fn drop_col(g: &[Vec<usize>], c: usize) -> VarGrid {
    g.iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect()).collect()
}

fn sym_p(g: &[Vec<usize>], arity: usize) -> SparsePoly {
    let cols = g.first().map_or(0, |r| r.len());
    sym_bigp(&grid_polys(g, arity), cols, arity)
}

/// Coefficient of the r-th entry of an appended last column in `pf(xᵀΩx)`.
#[allow(clippy::needless_range_loop)]
fn sym_b(y: &[Vec<usize>], r: usize, arity: usize) -> SparsePoly {
    let l = y.len() / 2;
    let rh = hat(r, l);
    let rest = drop_rows(y, &[r - 1, rh - 1]);
    let mut acc = SparsePoly::zero(arity);
    for k in 0..y[0].len() {
        let term = &SparsePoly::var(arity, y[rh - 1][k]) * &sym_p(&drop_col(&rest, k), arity);
        acc = if k % 2 == 0 { &acc - &term } else { &acc + &term };
    }
    if r <= l {
        acc
    } else {
        -&acc
    }
}

/// `F = c·B_i(y)`, `F̃ = t·c·B_î(y)`, `i <= ℓ`.
fn b_pair_node(y: &VarGrid, i: usize, c: i64, t: i8, universe: &BTreeSet<usize>, arity: usize) -> IntertwinedWitness {
    let l = y.len() / 2;
    let width = y[0].len();
    let ih = i + l;
    let rest = drop_rows(y, &[i - 1, ih - 1]);
    let coeffs: Vec<SparsePoly> =
        (0..width).map(|k| sym_p(&drop_col(&rest, k), arity).scale(&BigInt::from(c * sign(k % 2 == 0)))).collect();
    let v = if width > 1 { grid_vars(&rest) } else { BTreeSet::new() };
    let child = (width > 1).then(|| {
        let xa = drop_col(&rest, width - 1);
        let xb = drop_col(&rest, width - 2);
        (width, width - 1, p_pair_node(&xa, &xb, -c, -1, &v, arity))
    });
    let node = Node { u: y[ih - 1].clone(), ut: y[i - 1].clone(), v, coeffs, tilde: -t, child };
    finish(node, universe, arity)
}

/// `F = c·P(xa)`, `F̃ = t·c·P(xb)`, grids differing in their last column.
fn p_pair_node(
    xa: &VarGrid,
    xb: &VarGrid,
    c: i64,
    t: i8,
    universe: &BTreeSet<usize>,
    arity: usize,
) -> IntertwinedWitness {
    let last = xa[0].len() - 1;
    let y = drop_col(xa, last);
    let l = y.len() / 2;
    let coeffs: Vec<SparsePoly> = (1..=2 * l).map(|r| sym_b(&y, r, arity).scale(&BigInt::from(c))).collect();
    let v = grid_vars(&y);
    let child = Some((1, 1 + l, b_pair_node(&y, 1, c, 1, &v, arity)));
    let node = Node { u: column(xa, last), ut: column(xb, last), v, coeffs, tilde: t, child };
    finish(node, universe, arity)
}

fn numbered(rows: usize, cols: usize, start: usize) -> VarGrid {
    (0..rows).map(|i| (0..cols).map(|j| start + i * cols + j).collect()).collect()
}

#[allow(clippy::needless_range_loop)]
fn line_pair_grids(k: usize, axis: Axis, j: usize) -> (VarGrid, VarGrid, usize) {
    let shared = k * (k - 1);
    let mut next = 0;
    let mut a = vec![vec![0; k]; k];
    for r in 0..k {
        for c in 0..k {
            let on_line = match axis {
                Axis::Column => c == j,
                Axis::Row => r == j,
            };
            if !on_line {
                next += 1;
                a[r][c] = next;
            }
        }
    }
    let mut b = a.clone();
    for t in 0..k {
        let (r, c) = match axis {
            Axis::Column => (t, j),
            Axis::Row => (j, t),
        };
        a[r][c] = shared + 1 + t;
        b[r][c] = shared + k + 1 + t;
    }
    (a, b, shared + 2 * k)
}

fn check_line_args(k: usize, index: usize) -> Result<()> {
    if k == 0 || k > 4 {
        return Err(Error::ResourceLimit(format!("matrix size must be in 1..=4, got {k}")));
    }
    if index == 0 || index > k {
        return invalid(format!("line index {index} outside 1..={k}"));
    }
    Ok(())
}

fn line_pair(k: usize, axis: Axis, index: usize, signed: bool) -> Result<WitnessPair> {
    check_line_args(k, index)?;
    let (a, b, arity) = line_pair_grids(k, axis, index - 1);
    let sym = |g: &VarGrid| {
        let p = grid_polys(g, arity);
        if signed {
            sym_det(&p, arity)
        } else {
            sym_perm(&p, arity)
        }
    };
    let universe: BTreeSet<usize> = (1..=arity).collect();
    let witness = det_like(&a, &b, axis, index - 1, 1, 1, signed, &universe, arity);
    Ok(WitnessPair { f: sym(&a), f_tilde: sym(&b), witness })
}

/// Determinants of two k×k matrices that agree except for one row or
/// column. Variables: the shared entries row-major, then the line of the
/// first matrix, then the line of the second.
pub fn det_pair_witness(k: usize, axis: Axis, index: usize) -> Result<WitnessPair> {
    line_pair(k, axis, index, true)
}

/// Permanent analogue of [`det_pair_witness`].
pub fn perm_pair_witness(k: usize, axis: Axis, index: usize) -> Result<WitnessPair> {
    line_pair(k, axis, index, false)
}

#[allow(clippy::needless_range_loop)]
fn first_line_pair(n: usize, signed: bool) -> Result<WitnessPair> {
    if n == 0 || n > 3 {
        return Err(Error::ResourceLimit(format!("order 2n must be in 2..=6, got n={n}")));
    }
    let order = 2 * n;
    let mut a = vec![vec![0; order]; order];
    let mut next = 0;
    for p in 1..order {
        for q in p + 1..order {
            next += 1;
            a[p][q] = next;
            a[q][p] = next;
        }
    }
    let mut b = a.clone();
    for q in 1..order {
        a[0][q] = next + q;
        a[q][0] = next + q;
        b[0][q] = next + order - 1 + q;
        b[q][0] = next + order - 1 + q;
    }
    let arity = next + 2 * (order - 1);
    let universe: BTreeSet<usize> = (1..=arity).collect();
    let witness = pf_like(&a, &b, 1, 1, signed, &universe, arity);
    let f = sym_pairing(&upper_polys(&a, arity), arity, signed);
    let f_tilde = sym_pairing(&upper_polys(&b, arity), arity, signed);
    Ok(WitnessPair { f, f_tilde, witness })
}

/// Pfaffians of two 2n×2n antisymmetric matrices sharing all but the
/// first row and column. Variables: the shared upper triangle row by row,
/// then the first row of each matrix.
pub fn pf_pair_witness(n: usize) -> Result<WitnessPair> {
    first_line_pair(n, true)
}

/// Hafnian analogue of [`pf_pair_witness`].
pub fn haf_pair_witness(n: usize) -> Result<WitnessPair> {
    first_line_pair(n, false)
}

/// The coefficients of ξ_i and ξ_î in `pf(xᵀΩx)`, `x = [y | ξ]`, for
/// `1 <= i <= ℓ`. Variables: the entries of the 2ℓ×(2n−1) block `y`,
/// row-major. `F` and `F̃` are extracted from the full expansion.
pub fn b_pair_witness(l: usize, n: usize, i: usize) -> Result<WitnessPair> {
    if n == 0 || l < n {
        return invalid(format!("need l >= n >= 1, got l={l}, n={n}"));
    }
    if i == 0 || i > l {
        return invalid(format!("row index {i} outside 1..={l}"));
    }
    if 4 * l * n > MAX_SYMBOLIC_VARS - 1 || n > 2 {
        return Err(Error::ResourceLimit(format!("sizes l={l}, n={n} exceed the symbolic cap")));
    }
    let width = 2 * n - 1;
    let arity = 2 * l * width;
    let y = numbered(2 * l, width, 1);
    let full_arity = arity + 2 * l;
    let x: VarGrid =
        y.iter().enumerate().map(|(r, row)| row.iter().copied().chain([arity + r + 1]).collect()).collect();
    let p = sym_p(&x, full_arity);
    let coeff = |r: usize| -> Result<SparsePoly> { p.linear_split(arity + r)?.0.with_arity(arity) };
    let f = coeff(i)?;
    let f_tilde = coeff(i + l)?;
    let universe: BTreeSet<usize> = (1..=arity).collect();
    let witness = b_pair_node(&y, i, 1, 1, &universe, arity);
    Ok(WitnessPair { f, f_tilde, witness })
}

/// The defining polynomial of a family, in its point layout.
#[allow(clippy::needless_range_loop)]
pub fn symbolic_invariant(family: VarietyFamily) -> Result<SparsePoly> {
    family.validate()?;
    let arity = family.coordinate_count();
    let capped = match family {
        VarietyFamily::Det { n } | VarietyFamily::Perm { n } => n > 4,
        VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => n > 3,
        VarietyFamily::Rect { l, n } => 4 * l * n > 24,
        VarietyFamily::Quad { .. } => arity > MAX_SYMBOLIC_VARS,
    };
    if capped {
        return Err(Error::ResourceLimit(format!("{} is too large for symbolic expansion", family.name())));
    }
    Ok(match family {
        VarietyFamily::Det { n } => sym_det(&grid_polys(&numbered(n, n, 1), arity), arity),
        VarietyFamily::Perm { n } => sym_perm(&grid_polys(&numbered(n, n, 1), arity), arity),
        VarietyFamily::Pf { n } | VarietyFamily::Haf { n } => {
            let order = 2 * n;
            let mut g = vec![vec![0; order]; order];
            let mut next = 0;
            for p in 0..order {
                for q in p + 1..order {
                    next += 1;
                    g[p][q] = next;
                }
            }
            let signed = matches!(family, VarietyFamily::Pf { .. });
            sym_pairing(&upper_polys(&g, arity), arity, signed)
        }
        VarietyFamily::Rect { l, n } => sym_p(&numbered(2 * l, 2 * n, 1), arity),
        VarietyFamily::Quad { n, k } => {
            let v = |i| SparsePoly::var(arity, i);
            let lin = (1..=n).fold(SparsePoly::zero(arity), |acc, i| &acc + &(&v(i) * &v(n + i)));
            (1..=k).fold(lin, |acc, j| &acc + &(&v(2 * n + j) * &v(2 * n + j)))
        }
    })
}

// ---------------------------------------------------------------- fuzzing

/// Single-field corruptions used to check that validation is strict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    MoveUIntoW,
    ChangeCoefficient,
    SwapUAndUtilde,
    ChangeDepth,
    ChangeBeta,
    FlipTildeSign,
    CollapseChildPair,
    DropChild,
}

impl MutationKind {
    pub const ALL: [MutationKind; 8] = [
        MutationKind::MoveUIntoW,
        MutationKind::ChangeCoefficient,
        MutationKind::SwapUAndUtilde,
        MutationKind::ChangeDepth,
        MutationKind::ChangeBeta,
        MutationKind::FlipTildeSign,
        MutationKind::CollapseChildPair,
        MutationKind::DropChild,
    ];
}

/// Applies one mutation at a random level; `None` when the kind does not
/// apply there (no child to drop, for instance).
pub fn mutate_witness<R: Rng>(w: &IntertwinedWitness, kind: MutationKind, rng: &mut R) -> Option<IntertwinedWitness> {
    let mut out = w.clone();
    let level = rng.gen_range(0..w.depth);
    let node = out.level_mut(level)?;
    let delta = BigInt::from(rng.gen_range(1..=5i64) * if rng.gen_bool(0.5) { 1 } else { -1 });
    match kind {
        MutationKind::MoveUIntoW => {
            let k = rng.gen_range(0..node.u_vars.len());
            let x = node.u_vars.remove(k);
            let mut ws = node.w_vars.as_slice().to_vec();
            ws.push(x);
            ws.sort_unstable();
            node.w_vars = IndexSet::new(ws).ok()?;
        }
        MutationKind::ChangeCoefficient => {
            let k = rng.gen_range(0..node.coeffs.len());
            node.coeffs[k] = &node.coeffs[k] + &SparsePoly::constant(node.arity, delta);
        }
        MutationKind::SwapUAndUtilde => std::mem::swap(&mut node.u_vars, &mut node.utilde_vars),
        MutationKind::ChangeDepth => {
            node.depth = if node.depth > 1 && rng.gen_bool(0.5) { node.depth - 1 } else { node.depth + 1 };
        }
        MutationKind::ChangeBeta => node.beta = &node.beta + &SparsePoly::constant(node.arity, delta),
        MutationKind::FlipTildeSign => node.tilde_sign = -node.tilde_sign,
        MutationKind::CollapseChildPair => {
            let c = node.child.as_mut()?;
            c.i2 = c.i1;
        }
        MutationKind::DropChild => {
            node.child.take()?;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{b_coefficient, delta_eval, VarietyPoint};
    use crate::matrices::IntMatrix;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn all_pairs() -> Vec<(String, WitnessPair)> {
        let mut v = Vec::new();
        for k in 1..=4 {
            for axis in [Axis::Row, Axis::Column] {
                for idx in 1..=k {
                    v.push((format!("det {k} {axis:?} {idx}"), det_pair_witness(k, axis, idx).unwrap()));
                    if k <= 3 {
                        v.push((format!("perm {k} {axis:?} {idx}"), perm_pair_witness(k, axis, idx).unwrap()));
                    }
                }
            }
        }
        for n in 1..=3 {
            v.push((format!("pf {n}"), pf_pair_witness(n).unwrap()));
            v.push((format!("haf {n}"), haf_pair_witness(n).unwrap()));
        }
        for (l, n) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)] {
            for i in 1..=l {
                v.push((format!("b {l} {n} {i}"), b_pair_witness(l, n, i).unwrap()));
            }
        }
        v
    }

    #[test]
    fn every_constructor_validates() {
        for (name, p) in all_pairs() {
            for seed in 1..=3 {
                let r = validate_witness(&p.f, &p.f_tilde, &p.witness, 50, 100, seed).unwrap();
                assert!(r.valid, "{name}: {:?}", r.failure);
            }
        }
    }

    #[test]
    fn symbolic_validation_agrees() {
        for (name, p) in all_pairs() {
            if p.witness.arity <= SYMBOLIC_VALIDATION_MAX_ARITY {
                let r = validate_witness_symbolic(&p.f, &p.f_tilde, &p.witness).unwrap();
                assert!(r.valid, "{name}: {:?}", r.failure);
            }
        }
        let big = det_pair_witness(4, Axis::Row, 1).unwrap();
        assert!(matches!(validate_witness_symbolic(&big.f, &big.f_tilde, &big.witness), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn depths_and_shapes() {
        let p = det_pair_witness(1, Axis::Column, 1).unwrap();
        assert_eq!(p.witness.depth, 1);
        assert_eq!(p.witness.coeffs, vec![SparsePoly::constant(2, 1)]);
        let p = det_pair_witness(2, Axis::Column, 1).unwrap();
        assert_eq!(p.witness.depth, 2);
        assert_eq!(p.witness.child.as_ref().unwrap().witness.depth, 1);
        // α_i = ±(1×1 minors)
        for c in &p.witness.coeffs {
            assert_eq!(c.total_degree(), 1);
            assert_eq!(c.term_count(), 1);
        }
        assert_eq!(det_pair_witness(3, Axis::Row, 2).unwrap().witness.depth, 3);
        assert_eq!(pf_pair_witness(1).unwrap().witness.depth, 1);
        assert_eq!(pf_pair_witness(3).unwrap().witness.depth, 3);
        assert_eq!(b_pair_witness(2, 1, 1).unwrap().witness.depth, 1);
        assert_eq!(b_pair_witness(2, 2, 1).unwrap().witness.depth, 3);
        assert!(det_pair_witness(5, Axis::Row, 1).is_err());
        assert!(det_pair_witness(3, Axis::Row, 4).is_err());
        assert!(b_pair_witness(2, 2, 3).is_err());
    }

    #[test]
    fn pf_coefficients_are_signed_sub_pfaffians() {
        let p = pf_pair_witness(2).unwrap();
        // shared block: variables 1..3 are the upper triangle of rows 2..4
        let v = |i| SparsePoly::var(p.witness.arity, i);
        assert_eq!(p.witness.coeffs[0], v(3));
        assert_eq!(p.witness.coeffs[1], -&v(2));
        assert_eq!(p.witness.coeffs[2], v(1));
    }

    #[test]
    fn b_pair_matches_numeric_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for (l, n) in [(2, 1), (2, 2), (3, 2)] {
            let p = b_pair_witness(l, n, 1).unwrap();
            for _ in 0..5 {
                let pt: Vec<BigInt> = (0..p.witness.arity).map(|_| b(rng.gen_range(-9..=9))).collect();
                let y = IntMatrix::new(2 * l, 2 * n - 1, pt.clone()).unwrap();
                assert_eq!(p.f.eval(&pt).unwrap(), b_coefficient(&y, 1).unwrap());
                assert_eq!(p.f_tilde.eval(&pt).unwrap(), b_coefficient(&y, 1 + l).unwrap());
            }
        }
    }

    #[test]
    fn structural_failures() {
        let p = det_pair_witness(2, Axis::Column, 1).unwrap();
        let mut w = p.witness.clone();
        w.utilde_vars[0] = w.u_vars[0];
        let r = validate_witness(&p.f, &p.f_tilde, &w, 5, 10, 1).unwrap();
        assert!(!r.valid);
        assert!(r.failure.unwrap().contains("twice"));

        let q = det_pair_witness(1, Axis::Row, 1).unwrap();
        let mut w = q.witness.clone();
        w.coeffs = vec![SparsePoly::constant(w.arity, 3)];
        let f3 = q.f.scale(&b(3));
        let r = validate_witness(&f3, &q.f_tilde.scale(&b(3)), &w, 5, 10, 1).unwrap();
        assert!(r.failure.unwrap().contains("power of 2"));

        let r = validate_witness(&p.f, &q.f_tilde, &p.witness, 5, 10, 1);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn linear_in_u_with_v_and_w_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for (_, p) in all_pairs() {
            let w = &p.witness;
            let base: Vec<BigInt> = (0..w.arity).map(|_| b(rng.gen_range(-20..=20))).collect();
            for (&u, &ut) in w.u_vars.iter().zip(&w.utilde_vars) {
                for (poly, var) in [(&p.f, u), (&p.f_tilde, ut)] {
                    let at = |d: i64| {
                        let mut x = base.clone();
                        x[var - 1] += d;
                        poly.eval(&x).unwrap()
                    };
                    assert_eq!(at(2) - at(1) * 2 + at(0), b(0));
                }
            }
        }
    }

    #[test]
    fn mutations_always_fail() {
        let pairs = all_pairs();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut tried = 0;
        while tried < 100 {
            let (name, p) = &pairs[rng.gen_range(0..pairs.len())];
            let kind = MutationKind::ALL[rng.gen_range(0..MutationKind::ALL.len())];
            let Some(m) = mutate_witness(&p.witness, kind, &mut rng) else { continue };
            tried += 1;
            let r = validate_witness(&p.f, &p.f_tilde, &m, 50, 100, 1).unwrap();
            assert!(!r.valid, "{name}: {kind:?} survived");
        }
    }

    #[test]
    fn symbolic_invariants_match_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for f in [
            VarietyFamily::Det { n: 3 },
            VarietyFamily::Perm { n: 3 },
            VarietyFamily::Pf { n: 2 },
            VarietyFamily::Haf { n: 3 },
            VarietyFamily::Rect { l: 2, n: 1 },
            VarietyFamily::Rect { l: 2, n: 2 },
            VarietyFamily::Quad { n: 3, k: 2 },
        ] {
            let s = symbolic_invariant(f).unwrap();
            for _ in 0..5 {
                let c: Vec<BigInt> = (0..f.coordinate_count()).map(|_| b(rng.gen_range(-9..=9))).collect();
                let pt = VarietyPoint::new(f, c.clone()).unwrap();
                assert_eq!(s.eval(&c).unwrap(), delta_eval(&pt).unwrap(), "{f:?}");
            }
        }
        let v = |i| SparsePoly::var(4, i);
        assert_eq!(symbolic_invariant(VarietyFamily::Det { n: 2 }).unwrap(), &(&v(1) * &v(4)) - &(&v(2) * &v(3)));
        assert_eq!(symbolic_invariant(VarietyFamily::Perm { n: 2 }).unwrap(), &(&v(1) * &v(4)) + &(&v(2) * &v(3)));
        assert!(symbolic_invariant(VarietyFamily::Det { n: 5 }).is_err());
    }

    #[test]
    fn witness_json_round_trip() {
        let p = pf_pair_witness(2).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<WitnessPair>(&s).unwrap(), p);
    }
}
