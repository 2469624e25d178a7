//! Linear equations in primes: the local solvability conditions and
//! brute-force counting of prime solutions with `|pᵢ| <= T`.

use crate::error::{invalid, Error, Result};
use crate::primes::Sieve;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest bound accepted by the counters unless overridden.
pub const DEFAULT_MAX_BOUND: u64 = 100_000;
/// Largest arity for exact counting.
pub const MAX_COUNT_ARITY: usize = 4;
/// Cap on the inner-loop iterations of a count.
pub const DEFAULT_ITERATION_BUDGET: u128 = 20_000_000_000;

/// `α₁p₁ + … + αₙpₙ = m` with `n >= 3` and nonzero data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearEquation {
    alphas: Vec<i64>,
    m: i64,
}

impl LinearEquation {
    pub fn new(alphas: Vec<i64>, m: i64) -> Result<Self> {
        if alphas.len() < 3 {
            return invalid(format!("need at least 3 coefficients, got {}", alphas.len()));
        }
        if alphas.contains(&0) {
            return invalid("coefficients must be nonzero");
        }
        if m == 0 {
            return invalid("m must be nonzero");
        }
        Ok(LinearEquation { alphas, m })
    }

    pub fn alphas(&self) -> &[i64] {
        &self.alphas
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn arity(&self) -> usize {
        self.alphas.len()
    }

    pub fn evaluate(&self, p: &[i64]) -> i128 {
        self.alphas.iter().zip(p).map(|(&a, &x)| a as i128 * x as i128).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub gcd_all: i64,
    /// `gcd(α) == gcd({α, m} ∖ {αᵢ})` for each i.
    pub gcd_equalities: Vec<bool>,
    /// `Σα − m ≡ 0 mod 2·gcd(α, m)`.
    pub parity_ok: bool,
    pub solvable: bool,
}

fn gcd_of(it: impl IntoIterator<Item = i64>) -> i64 {
    it.into_iter().fold(0i64, |g, v| g.gcd(&v))
}

pub fn check_conditions(eq: &LinearEquation) -> ConditionReport {
    let a = &eq.alphas;
    let gcd_all = gcd_of(a.iter().copied());
    let gcd_equalities: Vec<bool> = (0..a.len())
        .map(|i| {
            let rest = a.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v);
            gcd_of(rest.chain([eq.m])) == gcd_all
        })
        .collect();
    let d = 2 * gcd_of(a.iter().copied().chain([eq.m])) as i128;
    let sum: i128 = a.iter().map(|&v| v as i128).sum::<i128>() - eq.m as i128;
    let parity_ok = sum.rem_euclid(d) == 0;
    let solvable = parity_ok && gcd_equalities.iter().all(|&b| b);
    ConditionReport { gcd_all, gcd_equalities, parity_ok, solvable }
}

/// Which integers count as primes in a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignMode {
    /// `|pᵢ|` prime.
    #[default]
    Signed,
    /// `pᵢ >= 2` prime.
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    pub mode: SignMode,
    /// Drop ±2 from the admissible primes.
    pub exclude_two: bool,
    pub max_bound: u64,
    pub iteration_budget: u128,
    /// Number of solutions kept in a count report.
    pub sample_cap: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            mode: SignMode::Signed,
            exclude_two: false,
            max_bound: DEFAULT_MAX_BOUND,
            iteration_budget: DEFAULT_ITERATION_BUDGET,
            sample_cap: 10,
        }
    }
}

impl CountOptions {
    pub fn with_mode(mode: SignMode) -> Self {
        CountOptions { mode, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCountReport {
    #[serde(rename = "T")]
    pub t: u64,
    pub mode: SignMode,
    pub count: u64,
    pub solutions_sampled: Vec<Vec<i64>>,
}

struct Setup {
    values: Vec<i64>,
    sieve: Sieve,
}

impl Setup {
    fn new(eq: &LinearEquation, t: u64, opts: &CountOptions, full_count: bool) -> Result<Self> {
        if t < 2 {
            return invalid(format!("bound T must be at least 2, got {t}"));
        }
        if t > opts.max_bound {
            return Err(Error::ResourceLimit(format!("T = {t} exceeds the bound cap {}", opts.max_bound)));
        }
        if full_count && eq.arity() > MAX_COUNT_ARITY {
            return Err(Error::ResourceLimit(format!(
                "exact counting supports at most {MAX_COUNT_ARITY} unknowns, got {}",
                eq.arity()
            )));
        }
        let sieve = Sieve::new(t);
        let mut primes: Vec<i64> = sieve.primes().into_iter().map(|p| p as i64).collect();
        if opts.exclude_two {
            primes.retain(|&p| p != 2);
        }
        let values = match opts.mode {
            SignMode::Positive => primes,
            SignMode::Signed => primes.iter().rev().map(|&p| -p).chain(primes.iter().copied()).collect(),
        };
        {
            let work = (values.len() as u128).saturating_pow(eq.arity() as u32 - 1);
            if work > opts.iteration_budget {
                return Err(Error::ResourceLimit(format!(
                    "{work} iterations exceed the budget of {}",
                    opts.iteration_budget
                )));
            }
        }
        Ok(Setup { values, sieve })
    }

    /// Value of the last slot, if it is an admissible prime.
    fn last(&self, eq: &LinearEquation, residual: i128, t: u64, opts: &CountOptions) -> Option<i64> {
        let a = *eq.alphas.last().expect("n >= 3") as i128;
        if residual % a != 0 {
            return None;
        }
        let p = residual / a;
        if p.unsigned_abs() > t as u128 {
            return None;
        }
        let p = p as i64;
        if opts.mode == SignMode::Positive && p < 2 {
            return None;
        }
        if opts.exclude_two && p.abs() == 2 {
            return None;
        }
        self.sieve.contains(p.unsigned_abs()).then_some(p)
    }
}

fn walk(
    eq: &LinearEquation,
    setup: &Setup,
    t: u64,
    opts: &CountOptions,
    prefix: &mut Vec<i64>,
    residual: i128,
    visit: &mut dyn FnMut(&[i64]) -> bool,
) -> bool {
    let slot = prefix.len();
    if slot == eq.arity() - 1 {
        if let Some(p) = setup.last(eq, residual, t, opts) {
            prefix.push(p);
            let go_on = visit(prefix);
            prefix.pop();
            return go_on;
        }
        return true;
    }
    let a = eq.alphas[slot] as i128;
    for &v in &setup.values {
        prefix.push(v);
        let go_on = walk(eq, setup, t, opts, prefix, residual - a * v as i128, visit);
        prefix.pop();
        if !go_on {
            return false;
        }
    }
    true
}

/// Exact number of prime tuples with `|pᵢ| <= T`.
pub fn count_prime_solutions(eq: &LinearEquation, t: u64, opts: &CountOptions) -> Result<PrimeCountReport> {
    let setup = Setup::new(eq, t, opts, true)?;
    let a0 = eq.alphas[0] as i128;
    let count: u64 = setup
        .values
        .par_iter()
        .map(|&v| {
            let mut c = 0u64;
            let mut prefix = vec![v];
            walk(eq, &setup, t, opts, &mut prefix, eq.m as i128 - a0 * v as i128, &mut |_| {
                c += 1;
                true
            });
            c
        })
        .sum();
    let solutions_sampled = enumerate_with(eq, &setup, t, opts, opts.sample_cap);
    Ok(PrimeCountReport { t, mode: opts.mode, count, solutions_sampled })
}

fn enumerate_with(eq: &LinearEquation, setup: &Setup, t: u64, opts: &CountOptions, limit: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    walk(eq, setup, t, opts, &mut Vec::new(), eq.m as i128, &mut |s| {
        out.push(s.to_vec());
        out.len() < limit
    });
    out
}

/// First `limit` solutions in lexicographic order.
pub fn enumerate_prime_solutions(
    eq: &LinearEquation,
    t: u64,
    opts: &CountOptions,
    limit: usize,
) -> Result<Vec<Vec<i64>>> {
    let setup = Setup::new(eq, t, opts, false)?;
    Ok(enumerate_with(eq, &setup, t, opts, limit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "T")]
    pub t: u64,
    pub count: u64,
    /// `count · (ln T)^n / T^(n−1)`.
    pub normalized: f64,
}

pub fn growth_report(eq: &LinearEquation, ts: &[u64], opts: &CountOptions) -> Result<Vec<GrowthRow>> {
    if ts.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("bounds must be strictly increasing");
    }
    let n = eq.arity() as i32;
    ts.iter()
        .map(|&t| {
            let count = count_prime_solutions(eq, t, &CountOptions { sample_cap: 0, ..*opts })?.count;
            let tf = t as f64;
            let normalized = count as f64 * tf.ln().powi(n) / tf.powi(n - 1);
            Ok(GrowthRow { t, count, normalized })
        })
        .collect()
}
