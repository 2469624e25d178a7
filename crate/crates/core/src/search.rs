//! Prime points on the variety families: choose the non-linear block
//! (y, z), keep it when the linear equation `Σ Fᵢ(y) ξᵢ = m − G(z)` meets
//! the solvability conditions, then enumerate prime ξ.

use crate::congruence::{admissible_class, obstruction_admits_primes, odd_residue_reachability, ObstructionReport};
use crate::construct::{two_coprime_tuples_with, OddResidue, TupleOptions, TwoCoprimeSpec};
use crate::error::{invalid, Error, Result};
use crate::invariants::{
    assemble_point, coefficients, decompose, delta_eval, det, g_value, VarietyFamily, VarietyPoint,
};
use crate::primes::{is_prime, primes_up_to};
use crate::vaughan::{check_conditions, enumerate_prime_solutions, CountOptions, LinearEquation, SignMode};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest product space walked exhaustively under [`Strategy::Auto`].
pub const DIRECT_ENUMERATION_CAP: u64 = 100_000;
pub const DEFAULT_CANDIDATE_BUDGET: u64 = 100_000;
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Direct when the product space is small, else construct (quad) or
    /// sampled.
    #[default]
    Auto,
    /// Every (y, z) block from primes up to T, in lexicographic order.
    Direct,
    /// Seeded random (y, z) blocks of primes up to T.
    Sampled,
    /// Quad only: z sampled, y distinct primes not dividing `m − G(z)`.
    Construct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub family: VarietyFamily,
    #[serde(with = "crate::serde_big::single")]
    pub m: BigInt,
    /// Bound on |coordinate|.
    #[serde(rename = "T")]
    pub t: u64,
    /// Cap on (y, z) candidates.
    pub budget: u64,
    pub limit: usize,
    pub seed: u64,
    pub force: bool,
    pub mode: SignMode,
    pub strategy: Strategy,
}

impl SearchConfig {
    pub fn new(family: VarietyFamily, m: impl Into<BigInt>, t: u64) -> Self {
        SearchConfig {
            family,
            m: m.into(),
            t,
            budget: DEFAULT_CANDIDATE_BUDGET,
            limit: 1,
            seed: 1,
            force: false,
            mode: SignMode::Positive,
            strategy: Strategy::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.t < 2 {
            return invalid("coordinate bound T must be at least 2");
        }
        if self.budget == 0 {
            return invalid("budget must be at least 1");
        }
        if self.m.is_zero() {
            return invalid("m must be nonzero");
        }
        if self.strategy == Strategy::Construct && !matches!(self.family, VarietyFamily::Quad { .. }) {
            return Err(Error::Unsupported("the construct strategy applies to quad only".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCheck {
    #[serde(with = "crate::serde_big::single")]
    pub value: BigInt,
    pub on_variety: bool,
    pub primes_ok: bool,
    /// Every coordinate odd.
    pub odd: bool,
    /// The row-coefficient recombination (and, for Pf, `det = pf²`) agree
    /// with the direct evaluation.
    pub consistent: bool,
}

impl PointCheck {
    pub fn verified(&self) -> bool {
        self.on_variety && self.primes_ok && self.consistent
    }
}

fn prime_coordinate(v: &BigInt, mode: SignMode) -> Result<bool> {
    match mode {
        SignMode::Positive => Ok(v.is_positive() && is_prime(v)?),
        SignMode::Signed => is_prime(&v.abs()),
    }
}

/// Full check of a candidate point.
pub fn check_point(point: &VarietyPoint, m: &BigInt, mode: SignMode) -> Result<PointCheck> {
    let value = delta_eval(point)?;
    let mut consistent = decompose(point)?.recombine() == value;
    if let VarietyFamily::Pf { .. } = point.family {
        let x = point.to_matrix().expect("matrix family");
        consistent &= det(&x)? == &value * &value;
    }
    let mut primes_ok = true;
    for c in &point.coordinates {
        primes_ok &= prime_coordinate(c, mode)?;
    }
    let odd = point.coordinates.iter().all(|c| c.is_odd());
    Ok(PointCheck { on_variety: &value == m, value, primes_ok, odd, consistent })
}

/// On the variety `Δ = m` with every coordinate a positive prime (Pf and
/// Haf store only the upper triangle, so the mirrored entries are the
/// forced negatives or copies).
pub fn verify_point(point: &VarietyPoint, m: &BigInt) -> Result<bool> {
    verify_point_with_mode(point, m, SignMode::Positive)
}

pub fn verify_point_with_mode(point: &VarietyPoint, m: &BigInt, mode: SignMode) -> Result<bool> {
    Ok(check_point(point, m, mode)?.verified())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundPoint {
    pub point: VarietyPoint,
    pub verified: bool,
    pub odd: bool,
}

/// Why an inadmissible `m` has no odd points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityCitation {
    pub modulus: u64,
    pub m_residue: u64,
    /// Residues attained on odd points; `None` if enumeration was too large.
    pub reachable_residues: Option<Vec<u64>>,
    pub m_reachable: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub strategy: Strategy,
    pub candidates_tried: u64,
    pub zero_coefficient: u64,
    /// Coefficients beyond 64 bits or coordinates beyond T.
    pub oversized: u64,
    pub conditions_failed: u64,
    pub no_solution_within_bound: u64,
    pub solved_candidates: u64,
    pub budget_exhausted: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePointReport {
    pub config: SearchConfig,
    pub obstruction_precheck: Option<ObstructionReport>,
    /// The precheck failed and the search was not run.
    pub short_circuited: bool,
    pub reachability: Option<ReachabilityCitation>,
    pub points: Vec<FoundPoint>,
    pub odd_point_count: usize,
    pub diagnostics: SearchDiagnostics,
}

fn cite(family: VarietyFamily, m: &BigInt) -> Result<ReachabilityCitation> {
    let class = admissible_class(family)?;
    let e = class.exponent();
    let modulus = 1u64 << e;
    let m_residue = m.mod_floor(&BigInt::from(modulus)).to_u64().expect("reduced");
    Ok(match odd_residue_reachability(family, e) {
        Ok(set) => {
            let reach = set.contains(m_residue);
            ReachabilityCitation {
                modulus,
                m_residue,
                m_reachable: Some(reach),
                note: format!(
                    "odd points reach {:?} mod {modulus}; m = {m_residue} mod {modulus} is {}",
                    set.residues,
                    if reach { "reachable" } else { "unreachable" }
                ),
                reachable_residues: Some(set.residues),
            }
        }
        Err(Error::ResourceLimit(msg)) => ReachabilityCitation {
            modulus,
            m_residue,
            reachable_residues: None,
            m_reachable: None,
            note: format!("reachability not enumerated: {msg}; admissible class {}", class.describe()),
        },
        Err(e) => return Err(e),
    })
}

struct Candidate {
    y: Vec<BigInt>,
    z: Vec<BigInt>,
    /// Some coordinate exceeds T.
    out_of_bound: bool,
}

enum Outcome {
    Zero,
    Oversized,
    ConditionsFailed,
    NoSolution,
    Solved(Vec<VarietyPoint>),
}

struct Searcher<'a> {
    cfg: &'a SearchConfig,
    pool: Vec<i64>,
    opts: CountOptions,
}

impl Searcher<'_> {
    fn evaluate(&self, c: &Candidate, want: usize) -> Result<Outcome> {
        if c.out_of_bound {
            return Ok(Outcome::Oversized);
        }
        let f = coefficients(self.cfg.family, &c.y)?;
        if f.iter().any(|v| v.is_zero()) {
            return Ok(Outcome::Zero);
        }
        let rhs = &self.cfg.m - g_value(self.cfg.family, &c.z);
        let (Some(alphas), Some(rhs)) = (f.iter().map(|v| v.to_i64()).collect::<Option<Vec<i64>>>(), rhs.to_i64())
        else {
            return Ok(Outcome::Oversized);
        };
        if rhs == 0 {
            return Ok(Outcome::ConditionsFailed);
        }
        let eq = LinearEquation::new(alphas, rhs)?;
        if !check_conditions(&eq).solvable {
            return Ok(Outcome::ConditionsFailed);
        }
        let sols = enumerate_prime_solutions(&eq, self.cfg.t, &self.opts, want)?;
        if sols.is_empty() {
            return Ok(Outcome::NoSolution);
        }
        let pts = sols
            .iter()
            .map(|xi| {
                let xi: Vec<BigInt> = xi.iter().map(|&v| BigInt::from(v)).collect();
                assemble_point(self.cfg.family, &xi, &c.y, &c.z)
            })
            .collect::<Result<_>>()?;
        Ok(Outcome::Solved(pts))
    }
}

fn block_len(f: VarietyFamily) -> usize {
    f.y_count() + f.z_count()
}

fn split_block(f: VarietyFamily, vals: Vec<BigInt>) -> Candidate {
    let mut y = vals;
    let z = y.split_off(f.y_count());
    Candidate { y, z, out_of_bound: false }
}

enum Source<'a> {
    Direct { index: u64, total: u64 },
    Sampled(ChaCha8Rng),
    Construct(ChaCha8Rng, &'a SearchConfig),
}

impl Source<'_> {
    fn next(&mut self, family: VarietyFamily, pool: &[i64], t: u64) -> Result<Option<Candidate>> {
        let k = block_len(family);
        match self {
            Source::Direct { index, total } => {
                if *index >= *total {
                    return Ok(None);
                }
                let mut rem = *index;
                let mut digits = vec![0usize; k];
                for d in digits.iter_mut().rev() {
                    *d = (rem % pool.len() as u64) as usize;
                    rem /= pool.len() as u64;
                }
                *index += 1;
                Ok(Some(split_block(family, digits.into_iter().map(|d| BigInt::from(pool[d])).collect())))
            }
            Source::Sampled(rng) => {
                let vals = (0..k).map(|_| BigInt::from(pool[rng.gen_range(0..pool.len())])).collect();
                Ok(Some(split_block(family, vals)))
            }
            Source::Construct(rng, cfg) => {
                let VarietyFamily::Quad { n, k: kz } = family else {
                    return Err(Error::Unsupported("the construct strategy applies to quad only".into()));
                };
                let z: Vec<BigInt> = (0..kz).map(|_| BigInt::from(pool[rng.gen_range(0..pool.len())])).collect();
                let rest = &cfg.m - g_value(family, &z);
                let Some(gamma) = rest.to_i64().filter(|&g| g != 0) else {
                    return Ok(Some(Candidate { y: vec![BigInt::zero(); n], z, out_of_bound: false }));
                };
                let spec = TwoCoprimeSpec::new(vec![1], 0, gamma, vec![OddResidue::odd()])?;
                let opts = TupleOptions { start: rng.gen_range(3..=t.max(3)), spread: 0, ..TupleOptions::default() };
                let run = two_coprime_tuples_with(&spec, n, rng.gen(), &opts)?;
                let out_of_bound = run.tuples.iter().any(|tp| tp[0] > t);
                let y = run.tuples.iter().map(|tp| BigInt::from(tp[0])).collect();
                Ok(Some(Candidate { y, z, out_of_bound }))
            }
        }
    }
}

/// Runs the precheck, then the candidate search; budget exhaustion yields
/// an empty point list with diagnostics, never an error.
pub fn find_prime_points(cfg: &SearchConfig) -> Result<PrimePointReport> {
    cfg.validate()?;
    let family = cfg.family;
    let mut diag = SearchDiagnostics::default();
    let (precheck, admissible) = match obstruction_admits_primes(family, &cfg.m) {
        Ok(r) => {
            let a = r.admissible;
            (Some(r), a)
        }
        Err(Error::HypothesisViolation(msg)) if cfg.force => {
            diag.notes.push(format!("outside theorem hypotheses: {msg}"));
            (None, true)
        }
        Err(e) => return Err(e),
    };
    let reachability = if admissible { None } else { Some(cite(family, &cfg.m)?) };
    let mut report = PrimePointReport {
        config: cfg.clone(),
        obstruction_precheck: precheck,
        short_circuited: false,
        reachability,
        points: Vec::new(),
        odd_point_count: 0,
        diagnostics: diag,
    };
    if !admissible && !cfg.force {
        report.short_circuited = true;
        report.diagnostics.notes.push("m fails the congruence precheck; rerun with force to search anyway".into());
        return Ok(report);
    }
    if family.xi_count() < 3 {
        return Err(Error::Unsupported(format!("{} has fewer than 3 linear variables", family.name())));
    }

    let primes: Vec<i64> = primes_up_to(cfg.t)?.into_iter().map(|p| p as i64).collect();
    let pool: Vec<i64> = match cfg.mode {
        SignMode::Positive => primes,
        SignMode::Signed => primes.iter().rev().map(|&p| -p).chain(primes.iter().copied()).collect(),
    };
    let total = (pool.len() as u64).checked_pow(block_len(family) as u32).unwrap_or(u64::MAX);
    let strategy = match cfg.strategy {
        Strategy::Auto if total <= DIRECT_ENUMERATION_CAP.min(cfg.budget) => Strategy::Direct,
        Strategy::Auto if matches!(family, VarietyFamily::Quad { .. }) => Strategy::Construct,
        Strategy::Auto => Strategy::Sampled,
        s => s,
    };
    report.diagnostics.strategy = strategy;
    let mut source = match strategy {
        Strategy::Direct => Source::Direct { index: 0, total },
        Strategy::Sampled => Source::Sampled(ChaCha8Rng::seed_from_u64(cfg.seed)),
        Strategy::Construct => Source::Construct(ChaCha8Rng::seed_from_u64(cfg.seed), cfg),
        Strategy::Auto => unreachable!(),
    };
    let opts = CountOptions {
        mode: cfg.mode,
        max_bound: cfg.t.max(crate::vaughan::DEFAULT_MAX_BOUND),
        ..CountOptions::default()
    };
    let searcher = Searcher { cfg, pool, opts };

    let d = &mut report.diagnostics;
    let mut points: Vec<VarietyPoint> = Vec::new();
    'outer: while points.len() < cfg.limit {
        let mut chunk = Vec::with_capacity(CHUNK);
        while chunk.len() < CHUNK && d.candidates_tried + (chunk.len() as u64) < cfg.budget {
            match source.next(family, &searcher.pool, cfg.t)? {
                Some(c) => chunk.push(c),
                None => break,
            }
        }
        if chunk.is_empty() {
            d.budget_exhausted = d.candidates_tried >= cfg.budget;
            break;
        }
        let want = cfg.limit - points.len();
        let outcomes: Vec<Result<Outcome>> = chunk.par_iter().map(|c| searcher.evaluate(c, want)).collect();
        for o in outcomes {
            d.candidates_tried += 1;
            match o? {
                Outcome::Zero => d.zero_coefficient += 1,
                Outcome::Oversized => d.oversized += 1,
                Outcome::ConditionsFailed => d.conditions_failed += 1,
                Outcome::NoSolution => d.no_solution_within_bound += 1,
                Outcome::Solved(pts) => {
                    d.solved_candidates += 1;
                    for p in pts {
                        points.push(p);
                        if points.len() == cfg.limit {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    if points.is_empty() && !d.budget_exhausted {
        d.notes.push("candidate space exhausted without a solution within the bound".into());
    }
    for p in points {
        let chk = check_point(&p, &cfg.m, cfg.mode)?;
        if !chk.verified() {
            return Err(Error::Internal(format!("search produced an unverified point {:?}", p.coordinates)));
        }
        report.points.push(FoundPoint { point: p, verified: true, odd: chk.odd });
    }
    report.odd_point_count = report.points.iter().filter(|p| p.odd).count();
    if !admissible && report.odd_point_count > 0 {
        return Err(Error::Internal("odd point found for an inadmissible m".into()));
    }
    Ok(report)
}
