//! Powers of two: Legendre's φ₂, per-family ε, the congruence obstruction
//! for each family, and exhaustive odd-residue reachability.

use crate::error::{invalid, Error, Result};
use crate::invariants::{assemble_point, coefficients, g_value, perm, VarietyFamily, VarietyPoint};
use crate::matrices::IntMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Default cap on enumerated (y, z) residue combinations.
pub const DEFAULT_REACH_BUDGET: u64 = 10_000_000;
/// Largest exponent accepted by the reachability engine.
pub const MAX_REACH_EXPONENT: u32 = 20;

/// Exponent of 2 in `n!`.
pub fn phi2(n: u64) -> u64 {
    n - n.count_ones() as u64
}

/// `⌊log₂(n+1)⌋`.
pub fn perm_s(n: usize) -> u32 {
    (n as u64 + 1).ilog2()
}

/// Residue class `residue mod modulus` with `0 <= residue < modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClass {
    #[serde(with = "crate::serde_big::single")]
    pub residue: BigInt,
    #[serde(with = "crate::serde_big::single")]
    pub modulus: BigInt,
}

impl ResidueClass {
    fn pow2(residue: u64, exp: u32) -> Self {
        let modulus = BigInt::one() << exp;
        ResidueClass { residue: BigInt::from(residue).mod_floor(&modulus), modulus }
    }

    pub fn contains(&self, v: &BigInt) -> bool {
        v.mod_floor(&self.modulus) == self.residue
    }

    /// Exponent of the (power of two) modulus.
    pub fn exponent(&self) -> u32 {
        (self.modulus.bits() - 1) as u32
    }

    pub fn describe(&self) -> String {
        format!("m = {} mod {}", self.residue, self.modulus)
    }
}

/// The family's ε: the 2-adic level of the row coefficients at odd points.
pub fn epsilon_for_family(family: VarietyFamily) -> Result<u32> {
    family.validate()?;
    Ok(match family {
        VarietyFamily::Det { n } => (n - 1) as u32,
        VarietyFamily::Quad { .. } | VarietyFamily::Pf { .. } | VarietyFamily::Haf { .. } => 1,
        VarietyFamily::Rect { n, .. } => (2 * n - 1) as u32,
        VarietyFamily::Perm { n } => n as u32 - perm_s(n),
    })
}

/// Residue class of the invariant over all odd points, as stated by the
/// density theorems (no hypothesis check).
pub fn admissible_class(family: VarietyFamily) -> Result<ResidueClass> {
    family.validate()?;
    Ok(match family {
        VarietyFamily::Det { n } => ResidueClass::pow2(0, (n - 1) as u32),
        VarietyFamily::Quad { n, k } => ResidueClass::pow2((n + k) as u64 % 2, 1),
        VarietyFamily::Pf { .. } | VarietyFamily::Haf { .. } => ResidueClass::pow2(1, 1),
        VarietyFamily::Rect { n, .. } => ResidueClass::pow2(0, (2 * n - 1) as u32),
        VarietyFamily::Perm { n } => perm_class(n),
    })
}

/// Class of `perm(x)` for odd n×n `x`.
pub fn perm_class(n: usize) -> ResidueClass {
    let s = perm_s(n);
    let e = n as u32 - s;
    if n as u64 + 1 == 1 << s {
        ResidueClass::pow2(1 << e, e + 1)
    } else {
        ResidueClass::pow2(0, e)
    }
}

fn check_hypotheses(family: VarietyFamily) -> Result<()> {
    family.validate()?;
    let bound = match family {
        VarietyFamily::Det { n } if n < 3 => Some("Det needs n >= 3"),
        VarietyFamily::Quad { n, .. } if n < 3 => Some("Quad needs n >= 3"),
        VarietyFamily::Pf { n } if n < 2 => Some("Pf needs n >= 2"),
        VarietyFamily::Haf { n } if n < 2 => Some("Haf needs n >= 2"),
        VarietyFamily::Rect { l, .. } if l < 2 => Some("Rect needs l >= 2"),
        VarietyFamily::Perm { n } if n < 3 => Some("Perm needs n >= 3"),
        _ => None,
    };
    match bound {
        Some(b) => Err(Error::HypothesisViolation(b.into())),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub family: VarietyFamily,
    #[serde(with = "crate::serde_big::single")]
    pub m: BigInt,
    pub epsilon: u32,
    /// `2^epsilon`.
    #[serde(with = "crate::serde_big::single")]
    pub modulus: BigInt,
    pub admissible: bool,
    pub admissible_class: ResidueClass,
    pub admissible_class_description: String,
}

/// Whether `m` lies in the family's congruence class.
pub fn obstruction_admits_primes(family: VarietyFamily, m: &BigInt) -> Result<ObstructionReport> {
    if m.is_zero() {
        return invalid("m must be nonzero");
    }
    check_hypotheses(family)?;
    let epsilon = epsilon_for_family(family)?;
    let class = admissible_class(family)?;
    Ok(ObstructionReport {
        family,
        m: m.clone(),
        epsilon,
        modulus: BigInt::one() << epsilon,
        admissible: class.contains(m),
        admissible_class_description: class.describe(),
        admissible_class: class,
    })
}

/// Largest ε with `2^{ε−1}` dividing every row coefficient at `y`.
pub fn epsilon_of_y(family: VarietyFamily, y: &[BigInt]) -> Result<u32> {
    let f = coefficients(family, y)?;
    f.iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.trailing_zeros().expect("nonzero") as u32 + 1)
        .min()
        .ok_or(Error::UndefinedEpsilon)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachWitness {
    pub residue: u64,
    pub point: VarietyPoint,
}

/// Residues attained by the invariant mod `2^e` on odd integer points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilitySet {
    pub modulus: u64,
    pub residues: Vec<u64>,
    pub witnesses: Vec<ReachWitness>,
}

impl ReachabilitySet {
    pub fn contains(&self, r: u64) -> bool {
        self.residues.binary_search(&r).is_ok()
    }
}

pub fn odd_residue_reachability(family: VarietyFamily, e: u32) -> Result<ReachabilitySet> {
    odd_residue_reachability_with_budget(family, e, DEFAULT_REACH_BUDGET)
}

/// Exhaustive over odd (y, z) residues mod `2^e`; ξ is handled through the
/// linear structure, so only `Σ Fᵢ(y)uᵢ + G(z)` with odd `uᵢ` is explored.
pub fn odd_residue_reachability_with_budget(family: VarietyFamily, e: u32, budget: u64) -> Result<ReachabilitySet> {
    family.validate()?;
    if e == 0 || e > MAX_REACH_EXPONENT {
        return invalid(format!("exponent must be in 1..={MAX_REACH_EXPONENT}, got {e}"));
    }
    let modulus = 1u64 << e;
    let odd_per_coord = modulus / 2;
    let free = family.y_count() + family.z_count();
    let combos = (free as u32)
        .checked_mul(e - 1)
        .filter(|&bits| bits < 64)
        .map(|bits| 1u64 << bits)
        .filter(|&c| c <= budget)
        .ok_or_else(|| {
            Error::ResourceLimit(format!(
                "{free} free coordinates mod 2^{e} exceed the budget of {budget} combinations"
            ))
        })?;

    let big_mod = BigInt::from(modulus);
    let mut found: Vec<Option<VarietyPoint>> = vec![None; modulus as usize];
    let mut remaining = modulus;
    let mut digits = vec![0u64; free];
    for _ in 0..combos {
        let vals: Vec<BigInt> = digits.iter().map(|&d| BigInt::from(2 * d + 1)).collect();
        let (y, z) = vals.split_at(family.y_count());
        let f: Vec<u64> =
            coefficients(family, y)?.iter().map(|v| v.mod_floor(&big_mod).to_u64().expect("reduced")).collect();
        let g = g_value(family, z).mod_floor(&big_mod).to_u64().expect("reduced");
        for (r, u) in linear_odd_reach(&f, g, modulus) {
            if found[r as usize].is_none() {
                let xi: Vec<BigInt> = u.into_iter().map(BigInt::from).collect();
                found[r as usize] = Some(assemble_point(family, &xi, y, z)?);
                remaining -= 1;
            }
        }
        if remaining == 0 {
            break;
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < odd_per_coord {
                break;
            }
            *d = 0;
        }
    }
    let mut residues = Vec::new();
    let mut witnesses = Vec::new();
    for (r, w) in found.into_iter().enumerate() {
        if let Some(point) = w {
            residues.push(r as u64);
            witnesses.push(ReachWitness { residue: r as u64, point });
        }
    }
    Ok(ReachabilitySet { modulus, residues, witnesses })
}

/// Every residue of `g + Σ fᵢuᵢ` (uᵢ odd) mod `modulus`, each with one odd `u`.
fn linear_odd_reach(f: &[u64], g: u64, modulus: u64) -> Vec<(u64, Vec<u64>)> {
    let size = modulus as usize;
    // back[i][r] = (previous residue, u_i) for residue r after step i
    let mut back: Vec<Vec<Option<(u64, u64)>>> = Vec::with_capacity(f.len());
    let mut cur = vec![false; size];
    cur[g as usize] = true;
    for &fi in f {
        let mut next = vec![false; size];
        let mut ptr = vec![None; size];
        for (r, _) in cur.iter().enumerate().filter(|(_, &on)| on) {
            for u in (1..modulus).step_by(2) {
                let t = ((r as u128 + fi as u128 * u as u128) % modulus as u128) as usize;
                if !next[t] {
                    next[t] = true;
                    ptr[t] = Some((r as u64, u));
                }
            }
        }
        back.push(ptr);
        cur = next;
    }
    let mut out = Vec::new();
    for r in (0..size).filter(|&r| cur[r]) {
        let mut u = vec![0u64; f.len()];
        let mut at = r as u64;
        for i in (0..f.len()).rev() {
            let (prev, ui) = back[i][at as usize].expect("reached");
            u[i] = ui;
            at = prev;
        }
        out.push((r as u64, u));
    }
    out
}

/// Comparison of exhaustive reachability against the theorem's class, at
/// the class modulus and at `2^ε`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessityCheck {
    pub family: VarietyFamily,
    pub class: ResidueClass,
    pub epsilon: u32,
    pub at_class_modulus: ReachabilitySet,
    pub at_epsilon: ReachabilitySet,
    /// Reachable set equals the admissible class at the class modulus.
    pub consistent: bool,
    pub discrepancy: Option<String>,
}

pub fn necessity_check(family: VarietyFamily, budget: u64) -> Result<NecessityCheck> {
    check_hypotheses(family)?;
    let class = admissible_class(family)?;
    let epsilon = epsilon_for_family(family)?;
    let e_class = class.exponent();
    let at_class_modulus = odd_residue_reachability_with_budget(family, e_class, budget)?;
    let at_epsilon = if epsilon == e_class {
        at_class_modulus.clone()
    } else {
        odd_residue_reachability_with_budget(family, epsilon, budget)?
    };
    let expected = vec![class.residue.to_u64().expect("small modulus")];
    let expected_eps = vec![expected[0] % (1u64 << epsilon)];
    let consistent = at_class_modulus.residues == expected;
    let mut notes = Vec::new();
    if !consistent {
        notes.push(format!("mod 2^{e_class}: reachable {:?}, class {:?}", at_class_modulus.residues, expected));
    }
    if at_epsilon.residues != expected_eps {
        notes
            .push(format!("mod 2^{epsilon}: reachable {:?}, class reduces to {:?}", at_epsilon.residues, expected_eps));
    }
    Ok(NecessityCheck {
        family,
        class,
        epsilon,
        at_class_modulus,
        at_epsilon,
        consistent,
        discrepancy: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

fn border(corner: i64, inner: &IntMatrix) -> IntMatrix {
    let n = inner.rows() + 1;
    IntMatrix::from_fn(n, n, |i, j| match (i, j) {
        (0, 0) => BigInt::from(corner),
        (0, _) | (_, 0) => BigInt::one(),
        _ => inner.get(i - 1, j - 1).clone(),
    })
}

/// Odd n×n matrices `(x0, x1)` with `perm(x0) ≡ 0` and
/// `perm(x1) ≡ 2^{n−s}` mod `2^{n−s+1}`, for `2^s <= n < 2^{s+1} − 1`,
/// built by bordering with a corner of 3 or 1.
pub fn perm_bordered_pair(n: usize) -> Result<(IntMatrix, IntMatrix)> {
    let s = perm_s(n);
    if n < 2 || n as u64 + 1 == 1 << s {
        return invalid(format!("bordered construction needs 2^s <= n < 2^(s+1)-1, got n={n}"));
    }
    let inner = if n as u64 == 1 << s {
        IntMatrix::from_fn(n - 1, n - 1, |_, _| BigInt::one())
    } else {
        perm_bordered_pair(n - 1)?.1
    };
    let a = border(3, &inner);
    let b = border(1, &inner);
    let e = n as u32 - s;
    let top = BigInt::one() << (e + 1);
    let ra = perm(&a)?.mod_floor(&top);
    if ra.is_zero() {
        Ok((a, b))
    } else {
        debug_assert_eq!(ra, BigInt::one() << e);
        Ok((b, a))
    }
}
