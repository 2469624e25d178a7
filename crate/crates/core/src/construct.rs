//! Prime tuples with prescribed 2-adic residues whose linear images avoid
//! the odd primes of a given integer, and prime points on which an
//! intertwined pair and a constant are pairwise 2-coprime.

use crate::error::{invalid, Error, Result};
use crate::intertwined::{validate_witness, IntertwinedWitness};
use crate::poly::SparsePoly;
use crate::primes::{crt, inv_mod, is_prime_u64, prime_factors, primes_in_progression, Progression, ProgressionSystem};
use crate::serde_big;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TUPLE_BUDGET: u64 = 1_000_000;

/// `y ≡ q (mod 2^s)` with `q` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OddResidue {
    pub q: u64,
    pub s: u32,
}

impl OddResidue {
    pub fn new(q: u64, s: u32) -> Result<Self> {
        if q.is_multiple_of(2) {
            return invalid(format!("residue {q} must be odd"));
        }
        if s > 62 {
            return invalid(format!("2-adic exponent {s} exceeds 62"));
        }
        Ok(OddResidue { q, s })
    }

    /// Any odd value.
    pub fn odd() -> Self {
        OddResidue { q: 1, s: 1 }
    }

    /// The class as a progression; `s = 0` still forces oddness.
    pub fn progression(&self) -> Progression {
        let m = 1u64 << self.s.max(1);
        Progression { residue: self.q % m, modulus: m }
    }

    pub fn contains(&self, y: u64) -> bool {
        let m = 1u64 << self.s;
        y % m == self.q % m
    }
}

fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

fn power_of_two(g: &BigInt) -> bool {
    g.is_positive() && (g & (g - BigInt::one())).is_zero()
}

/// `gcd(|a|, |b|)` is a power of two.
pub fn is_two_coprime(a: i64, b: i64) -> Result<bool> {
    if a == 0 || b == 0 {
        return invalid("2-coprimality is defined for nonzero integers");
    }
    Ok(power_of_two(&gcd_big(&BigInt::from(a), &BigInt::from(b))))
}

/// Like [`is_two_coprime`], with `gcd(a, 0) = |a|` and `gcd(0, 0) = 0`.
pub(crate) fn two_coprime_big(a: &BigInt, b: &BigInt) -> bool {
    power_of_two(&gcd_big(a, b))
}

fn gcd_all(alphas: &[i128]) -> i128 {
    alphas.iter().fold(0i128, |g, &a| g.gcd(&a))
}

/// Extended gcd over a list: `Σ μᵢαᵢ = gcd(α) >= 0`.
fn bezout(alphas: &[i128]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    let mut mu: Vec<BigInt> = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let e = g.extended_gcd(&BigInt::from(a));
        for m in mu.iter_mut() {
            *m *= &e.x;
        }
        mu.push(e.y);
        g = e.gcd;
    }
    if g.is_negative() {
        mu.iter_mut().for_each(|m| *m = -&*m);
    }
    mu
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::Precondition("p must be odd".into()));
    }
    if !is_prime_u64(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    Ok(())
}

fn check_alphas(alphas: &[i128], p: u64) -> Result<i128> {
    if alphas.is_empty() {
        return invalid("at least one coefficient is required");
    }
    check_odd_prime(p)?;
    let d = gcd_all(alphas);
    if d == 0 {
        return invalid("coefficients are all zero");
    }
    if d % p as i128 == 0 {
        return Err(Error::Precondition(format!("{p} divides gcd {d}")));
    }
    Ok(d)
}

/// Coefficients `t` with `Σ tᵢαᵢ = gcd(α)` and `p ∤ tᵢ`, adjusted from the
/// extended-gcd coefficients.
pub fn bezout_avoiding_prime(alphas: &[i64], p: u64) -> Result<Vec<i64>> {
    let a: Vec<i128> = alphas.iter().map(|&x| x as i128).collect();
    if a.contains(&0) {
        return invalid("coefficients must be nonzero");
    }
    check_alphas(&a, p)?;
    narrow(avoid_prime_from(&a, p, bezout(&a))?)
}

/// As [`bezout_avoiding_prime`], starting from a caller-supplied
/// presentation `Σ μᵢαᵢ = gcd(α)`.
pub fn bezout_avoiding_prime_from(alphas: &[i64], p: u64, mu: &[i64]) -> Result<Vec<i64>> {
    let a: Vec<i128> = alphas.iter().map(|&x| x as i128).collect();
    if a.contains(&0) {
        return invalid("coefficients must be nonzero");
    }
    let d = check_alphas(&a, p)?;
    if mu.len() != a.len() || mu.iter().zip(&a).map(|(&x, &y)| x as i128 * y).sum::<i128>() != d {
        return invalid(format!("starting coefficients do not combine to {d}"));
    }
    narrow(avoid_prime_from(&a, p, mu.iter().map(|&x| BigInt::from(x)).collect())?)
}

fn narrow(v: Vec<BigInt>) -> Result<Vec<i64>> {
    v.into_iter().map(|x| x.to_i64().ok_or_else(|| Error::Unsupported("coefficient exceeds 64 bits".into()))).collect()
}

fn avoid_prime_from(alphas: &[i128], p: u64, mu: Vec<BigInt>) -> Result<Vec<BigInt>> {
    let pb = BigInt::from(p);
    let bad = |x: &BigInt| (x % &pb).is_zero();
    if !mu.iter().any(bad) {
        return Ok(mu);
    }
    let a: Vec<BigInt> = alphas.iter().map(|&x| BigInt::from(x)).collect();
    let r = (0..a.len())
        .rev()
        .find(|&i| !bad(&mu[i]) && !bad(&a[i]))
        .ok_or_else(|| Error::Internal("no pivot coefficient".into()))?;
    let k: Vec<usize> = (0..a.len()).filter(|&i| i != r && bad(&mu[i])).collect();
    let sum_k: BigInt = k.iter().map(|&i| &a[i]).sum();
    for round in 1..=2 {
        let mut t = mu.clone();
        for &i in &k {
            t[i] += &a[r] * round;
        }
        t[r] -= &sum_k * round;
        if !bad(&t[r]) {
            return Ok(t);
        }
    }
    Err(Error::Internal("second adjustment still divisible by p".into()))
}

/// Auxiliary choice for one odd prime `p | γ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuChoice {
    pub p: u64,
    pub delta: u64,
    pub nu: u64,
}

fn nu_core(d: i128, beta: i128, p: u64) -> NuChoice {
    let pi = p as i128;
    let b = beta.rem_euclid(pi);
    let delta = (1..pi).find(|&x| x != b).expect("p >= 3");
    let nu = ((delta - b) * inv_mod(d, pi).expect("p does not divide d")).rem_euclid(pi);
    NuChoice { p, delta: delta as u64, nu: nu as u64 }
}

/// `ν` with `p ∤ ν` and `p ∤ ν·gcd(α) + β`, from the least `δ ∈ 1..p` with
/// `δ ≢ β`, as the least positive representative of `(δ − β)/gcd(α)`.
pub fn nu_for_prime(alphas: &[i64], beta: i64, p: u64) -> Result<NuChoice> {
    let a: Vec<i128> = alphas.iter().map(|&x| x as i128).collect();
    let d = check_alphas(&a, p)?;
    Ok(nu_core(d, beta as i128, p))
}

/// Inputs for [`two_coprime_tuples`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCoprimeSpec {
    pub alphas: Vec<i64>,
    pub beta: i64,
    pub gamma: i64,
    pub residues: Vec<OddResidue>,
}

impl TwoCoprimeSpec {
    pub fn new(alphas: Vec<i64>, beta: i64, gamma: i64, residues: Vec<OddResidue>) -> Result<Self> {
        let s = TwoCoprimeSpec { alphas, beta, gamma, residues };
        s.validate()?;
        Ok(s)
    }

    /// Several moduli folded into their lcm.
    pub fn with_gammas(alphas: Vec<i64>, beta: i64, gammas: &[i64], residues: Vec<OddResidue>) -> Result<Self> {
        if gammas.is_empty() || gammas.contains(&0) {
            return invalid("moduli must be nonzero and nonempty");
        }
        let l = gammas.iter().fold(1i128, |acc, &g| acc.lcm(&(g as i128)));
        let gamma = i64::try_from(l).map_err(|_| Error::Unsupported("lcm exceeds 64 bits".into()))?;
        TwoCoprimeSpec::new(alphas, beta, gamma, residues)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.alphas.contains(&0) {
            return invalid("coefficients must be nonempty and nonzero");
        }
        if self.gamma == 0 {
            return invalid("gamma must be nonzero");
        }
        if self.residues.len() != self.alphas.len() {
            return invalid(format!("{} residues for {} variables", self.residues.len(), self.alphas.len()));
        }
        for r in &self.residues {
            OddResidue::new(r.q, r.s)?;
        }
        let d = gcd_all(&self.alphas.iter().map(|&x| x as i128).collect::<Vec<_>>());
        if !is_two_coprime(self.gamma, d as i64)? {
            return invalid(format!("gamma {} is not 2-coprime to gcd {d}", self.gamma));
        }
        Ok(())
    }

    pub fn f_value(&self, y: &[u64]) -> BigInt {
        self.alphas.iter().zip(y).map(|(&a, &v)| BigInt::from(a) * v).sum::<BigInt>() + self.beta
    }
}

/// Outcome of the independent tuple check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleCheck {
    pub tuple: Vec<u64>,
    #[serde(with = "serde_big::single")]
    pub f_value: BigInt,
    #[serde(with = "serde_big::single")]
    pub gcd_with_gamma: BigInt,
    pub valid: bool,
    pub failure: Option<String>,
}

/// Odd primes, 2-adic residues, and `gcd(f(y), γ)` a power of two.
pub fn check_two_coprime_tuple(spec: &TwoCoprimeSpec, y: &[u64]) -> TupleCheck {
    let f_value = spec.f_value(y);
    let g = gcd_big(&f_value, &BigInt::from(spec.gamma));
    let failure = if y.len() != spec.alphas.len() {
        Some(format!("tuple has {} entries, expected {}", y.len(), spec.alphas.len()))
    } else if let Some(v) = y.iter().find(|&&v| v == 2 || !is_prime_u64(v)) {
        Some(format!("{v} is not an odd prime"))
    } else if let Some((v, r)) = y.iter().zip(&spec.residues).find(|(v, r)| !r.contains(**v)) {
        Some(format!("{v} is not {} mod 2^{}", r.q, r.s))
    } else if !power_of_two(&g) {
        Some(format!("gcd(f(y), gamma) = {g}"))
    } else {
        None
    };
    TupleCheck { tuple: y.to_vec(), f_value, gcd_with_gamma: g, valid: failure.is_none(), failure }
}

/// Per-prime data and per-coordinate progressions of a generator run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCondition {
    pub choice: NuChoice,
    #[serde(with = "serde_big::seq")]
    pub t: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCoprimeRun {
    pub spec: TwoCoprimeSpec,
    pub seed: u64,
    pub conditions: Vec<PrimeCondition>,
    pub progressions: Vec<Progression>,
    pub tuples: Vec<Vec<u64>>,
    pub checks: Vec<TupleCheck>,
}

/// Where the upward prime walk begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleOptions {
    pub start: u64,
    /// Each coordinate starts a seeded number of steps in `[0, spread)`
    /// past `start`.
    pub spread: u64,
    pub budget: u64,
}

impl Default for TupleOptions {
    fn default() -> Self {
        TupleOptions { start: 3, spread: 4, budget: DEFAULT_TUPLE_BUDGET }
    }
}

struct Plan {
    conditions: Vec<PrimeCondition>,
    progressions: Vec<Progression>,
}

/// Residue system per coordinate: the 2-adic class and `νₚ tᵢ` mod every
/// odd `p | γ`.
fn plan(alphas: &[i128], beta: i128, gamma: &BigInt, residues: &[OddResidue]) -> Result<Plan> {
    let d = gcd_all(alphas);
    let odd = odd_part(gamma)?;
    let mut conditions = Vec::new();
    for p in prime_factors(odd) {
        let choice = nu_core(d, beta, p);
        let t = avoid_prime_from(alphas, p, bezout(alphas))?;
        conditions.push(PrimeCondition { choice, t });
    }
    let mut progressions = Vec::with_capacity(alphas.len());
    for (i, r) in residues.iter().enumerate() {
        let mut parts = vec![r.progression()];
        for c in &conditions {
            let ti = (&c.t[i] % c.choice.p).to_i128().expect("reduced");
            parts.push(Progression::new(c.choice.nu as i128 * ti, c.choice.p)?);
        }
        let prog = crt(&ProgressionSystem::new(parts)?)?;
        if prog.residue.gcd(&prog.modulus) != 1 {
            return Err(Error::Internal(format!("progression {} mod {} has no primes", prog.residue, prog.modulus)));
        }
        progressions.push(prog);
    }
    Ok(Plan { conditions, progressions })
}

fn odd_part(g: &BigInt) -> Result<u64> {
    let mut a = g.abs();
    if a.is_zero() {
        return invalid("modulus must be nonzero");
    }
    while a.is_even() {
        a >>= 1;
    }
    a.to_u64().ok_or_else(|| Error::Unsupported(format!("odd part of {g} exceeds 64 bits")))
}

fn walk(plan: &Plan, count: usize, rng: &mut ChaCha8Rng, opts: &TupleOptions) -> Result<Vec<Vec<u64>>> {
    let mut cols = Vec::with_capacity(plan.progressions.len());
    for (i, prog) in plan.progressions.iter().enumerate() {
        let steps = if opts.spread > 0 { rng.gen_range(0..opts.spread) } else { 0 };
        let start = opts.start as i128 + steps as i128 * prog.modulus as i128;
        let col = primes_in_progression(*prog, count, start.max(3), opts.budget).map_err(|e| match e {
            Error::Budget(m) => Error::Budget(format!("coordinate {}: {m}", i + 1)),
            other => other,
        })?;
        cols.push(col);
    }
    Ok((0..count).map(|k| cols.iter().map(|c| c[k]).collect()).collect())
}

/// `count` prime tuples `y` with `yᵢ ≡ qᵢ (mod 2^sᵢ)` and `f(y)` 2-coprime
/// to `γ`; every tuple is re-checked by [`check_two_coprime_tuple`].
pub fn two_coprime_tuples(spec: &TwoCoprimeSpec, count: usize, seed: u64) -> Result<TwoCoprimeRun> {
    two_coprime_tuples_with(spec, count, seed, &TupleOptions::default())
}

pub fn two_coprime_tuples_with(
    spec: &TwoCoprimeSpec,
    count: usize,
    seed: u64,
    opts: &TupleOptions,
) -> Result<TwoCoprimeRun> {
    spec.validate()?;
    let alphas: Vec<i128> = spec.alphas.iter().map(|&a| a as i128).collect();
    let p = plan(&alphas, spec.beta as i128, &BigInt::from(spec.gamma), &spec.residues)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples = walk(&p, count, &mut rng, opts)?;
    let checks: Vec<TupleCheck> = tuples.iter().map(|y| check_two_coprime_tuple(spec, y)).collect();
    if let Some(c) = checks.iter().find(|c| !c.valid) {
        return Err(Error::Internal(format!("generated tuple failed validation: {:?}", c.failure)));
    }
    Ok(TwoCoprimeRun {
        spec: spec.clone(),
        seed,
        conditions: p.conditions,
        progressions: p.progressions,
        tuples,
        checks,
    })
}

// ---------------------------------------------------------------- intertwined

const CANDIDATES: usize = 4;

fn to_i128(x: &BigInt, what: &str) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::Unsupported(format!("{what} exceeds 128 bits")))
}

struct Filler<'a> {
    residues: &'a [OddResidue],
    y: Vec<Option<u64>>,
    rng: ChaCha8Rng,
    opts: TupleOptions,
}

impl Filler<'_> {
    fn point(&self) -> Vec<BigInt> {
        self.y.iter().map(|v| BigInt::from(v.unwrap_or(0))).collect()
    }

    fn fill_free(&mut self, vars: &[usize]) -> Result<()> {
        for &x in vars {
            let prog = self.residues[x - 1].progression();
            let steps = self.rng.gen_range(0..self.opts.spread.max(1));
            let start = self.opts.start as i128 + (steps * prog.modulus) as i128;
            self.y[x - 1] = Some(primes_in_progression(prog, 1, start, self.opts.budget)?[0]);
        }
        Ok(())
    }

    /// A linear block `Σ αᵢ xᵢ + β` 2-coprime to `gamma` (and nonzero).
    fn solve_block(&mut self, vars: &[usize], alphas: &[i128], beta: i128, gamma: &BigInt, stage: &str) -> Result<()> {
        let res: Vec<OddResidue> = vars.iter().map(|&x| self.residues[x - 1]).collect();
        let p = plan(alphas, beta, gamma, &res)?;
        let tuples = walk(&p, CANDIDATES, &mut self.rng, &self.opts).map_err(|e| {
            if let Error::Budget(m) = e {
                Error::Budget(format!("{stage}: {m}"))
            } else {
                e
            }
        })?;
        let value = |t: &[u64]| alphas.iter().zip(t).map(|(&a, &v)| a * v as i128).sum::<i128>() + beta;
        let pick = tuples
            .iter()
            .find(|t| value(t) != 0)
            .ok_or_else(|| Error::Budget(format!("{stage}: every candidate gave a zero value")))?;
        for (&x, &v) in vars.iter().zip(pick) {
            self.y[x - 1] = Some(v);
        }
        Ok(())
    }

    fn fill(&mut self, w: &IntertwinedWitness, m: &BigInt, depth_label: usize) -> Result<()> {
        if let Some(c) = &w.child {
            self.fill(&c.witness, m, depth_label + 1)?;
        }
        self.fill_free(w.w_vars.as_slice())?;
        let x = self.point();
        let alphas: Vec<i128> = w.coeffs.iter().map(|c| to_i128(&c.eval(&x)?, "coefficient")).collect::<Result<_>>()?;
        let beta = to_i128(&w.beta.eval(&x)?, "beta")?;
        if !power_of_two(&BigInt::from(gcd_all(&alphas))) {
            return Err(Error::Internal(format!("level {depth_label}: coefficient gcd is not a power of 2")));
        }
        self.solve_block(&w.u_vars, &alphas, beta, m, &format!("level {depth_label}, u block"))?;
        let f_u = alphas.iter().zip(&w.u_vars).map(|(&a, &v)| a * self.y[v - 1].unwrap() as i128).sum::<i128>() + beta;
        let gamma = m.lcm(&BigInt::from(f_u));
        self.solve_block(&w.utilde_vars, &alphas, beta, &gamma, &format!("level {depth_label}, ũ block"))
    }
}

/// Odd-prime points, honoring per-variable 2-adic residues, on which
/// `F`, `F̃` and `m` are pairwise 2-coprime. Built level by level from the
/// witness: the child pair fixes `v`, then `u` and `ũ` are solved as
/// linear blocks.
///
/// Values roughly square with each level, so depth 3 and beyond can leave
/// the 64-bit progression range (`Unsupported`).
// TODO: BigInt progressions would lift the 64-bit ceiling for deep witnesses.
pub fn intertwined_prime_points(
    f: &SparsePoly,
    ft: &SparsePoly,
    w: &IntertwinedWitness,
    m: &BigInt,
    residues: &[OddResidue],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<u64>>> {
    intertwined_prime_points_with(f, ft, w, m, residues, count, seed, &TupleOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn intertwined_prime_points_with(
    f: &SparsePoly,
    ft: &SparsePoly,
    w: &IntertwinedWitness,
    m: &BigInt,
    residues: &[OddResidue],
    count: usize,
    seed: u64,
    opts: &TupleOptions,
) -> Result<Vec<Vec<u64>>> {
    if m.is_zero() {
        return invalid("m must be nonzero");
    }
    if residues.len() != w.arity {
        return invalid(format!("{} residues for {} variables", residues.len(), w.arity));
    }
    for r in residues {
        OddResidue::new(r.q, r.s)?;
    }
    let v = validate_witness(f, ft, w, 20, 50, seed)?;
    if !v.valid {
        return Err(Error::Precondition(format!("witness is invalid: {}", v.failure.unwrap_or_default())));
    }
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut filler = Filler { residues, y: vec![None; w.arity], rng, opts: *opts };
        filler.fill(w, m, 1)?;
        let y: Vec<u64> = filler
            .y
            .iter()
            .map(|v| v.ok_or_else(|| Error::Internal("variable left unassigned".into())))
            .collect::<Result<_>>()?;
        check_intertwined_point(f, ft, m, residues, &y).map_err(Error::Internal)?;
        out.push(y);
    }
    Ok(out)
}

/// Independent check: odd primes, residues, and `F(y)`, `F̃(y)`, `m`
/// pairwise 2-coprime.
pub fn check_intertwined_point(
    f: &SparsePoly,
    ft: &SparsePoly,
    m: &BigInt,
    residues: &[OddResidue],
    y: &[u64],
) -> std::result::Result<(), String> {
    if y.len() != f.arity() || residues.len() != y.len() {
        return Err("length mismatch".into());
    }
    if let Some(v) = y.iter().find(|&&v| v == 2 || !is_prime_u64(v)) {
        return Err(format!("{v} is not an odd prime"));
    }
    if let Some((v, r)) = y.iter().zip(residues).find(|(v, r)| !r.contains(**v)) {
        return Err(format!("{v} is not {} mod 2^{}", r.q, r.s));
    }
    let x: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
    let a = f.eval(&x).map_err(|e| e.to_string())?;
    let b = ft.eval(&x).map_err(|e| e.to_string())?;
    for (p, q, name) in [(&a, &b, "F, F̃"), (&a, m, "F, m"), (&b, m, "F̃, m")] {
        if !two_coprime_big(p, q) {
            return Err(format!("{name} not 2-coprime: gcd = {}", gcd_big(p, q)));
        }
    }
    Ok(())
}
