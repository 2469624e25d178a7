//! Argument parsing, dispatch, JSON envelopes and run manifests for the
//! `prime-points` binary.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use prime_points::construct::{
    intertwined_prime_points_with, two_coprime_tuples_with, OddResidue, TupleOptions, TwoCoprimeSpec,
};
use prime_points::intertwined::{
    b_pair_witness, det_pair_witness, haf_pair_witness, perm_pair_witness, pf_pair_witness, validate_witness_symbolic,
    SYMBOLIC_VALIDATION_MAX_ARITY,
};
use prime_points::vaughan::enumerate_prime_solutions;
use prime_points::{
    big_p, check_conditions, count_prime_solutions, det, find_prime_points, growth_report, hf,
    obstruction_admits_primes, perm, pf, validate_witness, Axis, CountOptions, Error, IntMatrix, LinearEquation,
    SearchConfig, SignMode, Strategy, VarietyFamily, WitnessPair,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::time::Instant;

pub const BUDGET_ENV: &str = "PRIME_POINTS_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "prime-points", version, about = "Exact prime-point tools for determinantal and Pfaffian varieties")]
pub struct Cli {
    /// Seed for randomized steps (required when CI is set).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write the run manifest to this file.
    #[arg(long, global = true)]
    pub manifest_out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate det, perm, pf, hf or the rectangular Pfaffian of a matrix.
    Invariant(InvariantArgs),
    /// Congruence precheck for a family and right-hand side.
    Obstruction(ObstructionArgs),
    /// Residues of the invariant on odd points modulo 2^e.
    Reachability(ReachabilityArgs),
    /// Linear equations in primes.
    #[command(subcommand)]
    Vaughan(VaughanCommand),
    /// Intertwined polynomial pairs and their witnesses.
    #[command(subcommand)]
    Intertwined(IntertwinedCommand),
    /// Prime tuples with 2-coprime linear images.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Search for prime points on a variety.
    Search(SearchArgs),
    /// Re-run a manifest and compare result digests.
    VerifyManifest(VerifyManifestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantKind {
    Det,
    Perm,
    Pf,
    Hf,
    Bigp,
}

#[derive(Args, Debug)]
pub struct InvariantArgs {
    #[arg(long, value_enum)]
    pub kind: InvariantKind,
    /// JSON array of rows, entries as numbers or decimal strings.
    #[arg(long)]
    pub matrix: String,
    /// ℓ for `bigp` (rows = 2ℓ).
    #[arg(long)]
    pub ell: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Det,
    Perm,
    Pf,
    Haf,
    Quad,
    Rect,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    /// Size parameter: matrix order, half-order (pf/haf/rect) or pair count (quad).
    #[arg(long)]
    pub n: usize,
    /// Number of squares (quad).
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// ℓ (rect).
    #[arg(long)]
    pub l: Option<usize>,
}

impl FamilyArgs {
    fn family(&self) -> Result<VarietyFamily, CliError> {
        let n = self.n;
        let f = match self.family {
            FamilyKind::Det => VarietyFamily::Det { n },
            FamilyKind::Perm => VarietyFamily::Perm { n },
            FamilyKind::Pf => VarietyFamily::Pf { n },
            FamilyKind::Haf => VarietyFamily::Haf { n },
            FamilyKind::Quad => VarietyFamily::Quad { n, k: self.k },
            FamilyKind::Rect => VarietyFamily::Rect { l: self.l.ok_or_else(|| CliError::usage("rect needs --l"))?, n },
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Args, Debug)]
pub struct ObstructionArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Target value of the invariant.
    #[arg(long, allow_hyphen_values = true)]
    pub m: String,
}

#[derive(Args, Debug)]
pub struct ReachabilityArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Exponent e of the modulus 2^e.
    #[arg(long)]
    pub e: u32,
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Signed,
    Positive,
}

impl From<ModeArg> for SignMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Signed => SignMode::Signed,
            ModeArg::Positive => SignMode::Positive,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct EquationArgs {
    /// Comma-separated nonzero coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub alphas: Vec<i64>,
    /// Right-hand side.
    #[arg(long, allow_hyphen_values = true)]
    pub m: i64,
}

impl EquationArgs {
    fn equation(&self) -> Result<LinearEquation, CliError> {
        Ok(LinearEquation::new(self.alphas.clone(), self.m)?)
    }
}

#[derive(Subcommand, Debug)]
pub enum VaughanCommand {
    /// Solvability conditions.
    Check(EquationArgs),
    /// Exact count of prime solutions with |pᵢ| <= T.
    Count {
        #[command(flatten)]
        eq: EquationArgs,
        /// Bound on |pᵢ|.
        #[arg(long = "T")]
        t: u64,
        #[arg(long, value_enum, default_value = "signed")]
        mode: ModeArg,
        #[arg(long)]
        exclude_two: bool,
        /// Also list up to this many solutions.
        #[arg(long, default_value_t = 0)]
        list: usize,
    },
    /// Normalized counts for several bounds.
    Growth {
        #[command(flatten)]
        eq: EquationArgs,
        /// Increasing comma-separated bounds.
        #[arg(long = "T", value_delimiter = ',', required = true)]
        ts: Vec<u64>,
        #[arg(long, value_enum, default_value = "signed")]
        mode: ModeArg,
        #[arg(long)]
        exclude_two: bool,
        /// Emit CSV instead of JSON (manifest goes to stderr).
        #[arg(long)]
        csv: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    Det,
    Perm,
    Pf,
    Haf,
    Bpair,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisArg {
    Row,
    Column,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    #[arg(long, value_enum)]
    pub kind: PairKind,
    /// Matrix size (det/perm) or half-order n (pf/haf/bpair).
    #[arg(long)]
    pub n: usize,
    /// ℓ (bpair).
    #[arg(long)]
    pub l: Option<usize>,
    /// Replaced line (det/perm) or row i (bpair), 1-based.
    #[arg(long, default_value_t = 1)]
    pub index: usize,
    #[arg(long, value_enum, default_value = "column")]
    pub axis: AxisArg,
}

impl PairArgs {
    fn build(&self) -> Result<WitnessPair, CliError> {
        let axis = match self.axis {
            AxisArg::Row => Axis::Row,
            AxisArg::Column => Axis::Column,
        };
        Ok(match self.kind {
            PairKind::Det => det_pair_witness(self.n, axis, self.index)?,
            PairKind::Perm => perm_pair_witness(self.n, axis, self.index)?,
            PairKind::Pf => pf_pair_witness(self.n)?,
            PairKind::Haf => haf_pair_witness(self.n)?,
            PairKind::Bpair => {
                b_pair_witness(self.l.ok_or_else(|| CliError::usage("bpair needs --l"))?, self.n, self.index)?
            }
        })
    }
}

#[derive(Subcommand, Debug)]
pub enum IntertwinedCommand {
    /// Build a named pair with its witness and validate it.
    Demo {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        range: u64,
    },
    /// Validate a pair-with-witness JSON file.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        range: u64,
        /// Exact polynomial check (small arity only).
        #[arg(long)]
        symbolic: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConstructCommand {
    /// Prime tuples y with yᵢ ≡ qᵢ mod 2^sᵢ and Σ αᵢyᵢ + β 2-coprime to γ.
    TwoCoprime {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        alpha: Vec<i64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: i64,
        /// One or more moduli (folded into their lcm).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        gamma: Vec<i64>,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u32>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        start: u64,
    },
    /// Odd-prime points making a named pair and m pairwise 2-coprime.
    Points {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Residue applied to every variable.
        #[arg(long, default_value_t = 1)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        s: u32,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Auto,
    Direct,
    Sampled,
    Construct,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Target value of the invariant.
    #[arg(long, allow_hyphen_values = true)]
    pub m: String,
    /// Bound on every coordinate.
    #[arg(long = "T")]
    pub t: u64,
    /// Stop after this many points.
    #[arg(long, default_value_t = 1)]
    pub limit: usize,
    /// Candidate budget (default from PRIME_POINTS_BUDGET, else 100000).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Search even when the congruence precheck fails.
    #[arg(long)]
    pub force: bool,
    #[arg(long, value_enum, default_value = "positive")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
}

#[derive(Args, Debug)]
pub struct VerifyManifestArgs {
    /// A manifest file, or a saved JSON envelope containing one.
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Reproducibility record attached to every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_ms: f64,
    pub result_digest: String,
}

/// Error reported as `{"error": {...}}`.
#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
    pub details: Option<Value>,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { kind: "usage".into(), message: msg.into(), exit_code: 2, details: None }
    }

    fn domain(kind: &str, msg: impl Into<String>, details: Option<Value>) -> Self {
        CliError { kind: kind.into(), message: msg.into(), exit_code: 1, details }
    }

    pub fn to_json(&self) -> Value {
        let mut e = json!({ "kind": self.kind, "message": self.message });
        if let Some(d) = &self.details {
            e["details"] = d.clone();
        }
        json!({ "error": e })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::InvalidArgument(_)) { 2 } else { 1 };
        CliError { kind: e.kind().into(), message: e.to_string(), exit_code: code, details: None }
    }
}

/// Process environment relevant to a run.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub ci: bool,
    pub budget: Option<String>,
}

impl Env {
    pub fn from_process() -> Self {
        let ci = std::env::var("CI").map(|v| !v.is_empty() && v != "0" && v != "false").unwrap_or(false);
        Env { ci, budget: std::env::var(BUDGET_ENV).ok() }
    }

    fn budget(&self) -> Result<Option<u64>, CliError> {
        self.budget
            .as_deref()
            .map(|b| {
                b.trim().parse::<u64>().map_err(|_| CliError::usage(format!("{BUDGET_ENV}={b} is not an integer")))
            })
            .transpose()
    }
}

/// What a finished run prints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Output {
    Json(Value),
    /// CSV text plus the structured value used for the digest.
    Csv(String, Value),
}

impl Output {
    fn value(&self) -> &Value {
        match self {
            Output::Json(v) | Output::Csv(_, v) => v,
        }
    }
}

/// SHA-256 over the compact JSON form.
pub fn digest(v: &Value) -> String {
    format!("sha256:{:x}", Sha256::digest(v.to_string().as_bytes()))
}

fn parse_big(s: &str, name: &str) -> Result<BigInt, CliError> {
    s.trim().parse::<BigInt>().map_err(|_| CliError::usage(format!("--{name} must be an integer, got {s:?}")))
}

fn parse_matrix(s: &str) -> Result<IntMatrix, CliError> {
    let rows: Vec<Vec<Value>> =
        serde_json::from_str(s).map_err(|e| CliError::usage(format!("--matrix is not a JSON array of rows: {e}")))?;
    let cell = |v: &Value| -> Result<BigInt, CliError> {
        match v {
            Value::Number(n) if n.is_i64() || n.is_u64() => parse_big(&n.to_string(), "matrix"),
            Value::String(s) => parse_big(s, "matrix"),
            _ => Err(CliError::usage(format!("matrix entry {v} is not an integer"))),
        }
    };
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::usage("--matrix rows differ in length"));
    }
    let entries = rows.iter().flatten().map(cell).collect::<Result<Vec<_>, _>>()?;
    Ok(IntMatrix::new(rows.len(), cols, entries)?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn uses_seed(cmd: &Command) -> bool {
    matches!(cmd, Command::Intertwined(_) | Command::Construct(_) | Command::Search(_))
}

fn subcommand_name(cmd: &Command) -> String {
    match cmd {
        Command::Invariant(_) => "invariant".into(),
        Command::Obstruction(_) => "obstruction".into(),
        Command::Reachability(_) => "reachability".into(),
        Command::Vaughan(v) => format!(
            "vaughan {}",
            match v {
                VaughanCommand::Check(_) => "check",
                VaughanCommand::Count { .. } => "count",
                VaughanCommand::Growth { .. } => "growth",
            }
        ),
        Command::Intertwined(i) => format!(
            "intertwined {}",
            match i {
                IntertwinedCommand::Demo { .. } => "demo",
                IntertwinedCommand::Validate { .. } => "validate",
            }
        ),
        Command::Construct(c) => format!(
            "construct {}",
            match c {
                ConstructCommand::TwoCoprime { .. } => "two-coprime",
                ConstructCommand::Points { .. } => "points",
            }
        ),
        Command::Search(_) => "search".into(),
        Command::VerifyManifest(_) => "verify-manifest".into(),
    }
}

fn execute(cmd: &Command, seed: u64, env: &Env) -> Result<Output, CliError> {
    match cmd {
        Command::Invariant(a) => {
            let x = parse_matrix(&a.matrix)?;
            let value = match a.kind {
                InvariantKind::Det => det(&x)?,
                InvariantKind::Perm => perm(&x)?,
                InvariantKind::Pf => pf(&x)?,
                InvariantKind::Hf => hf(&x)?,
                InvariantKind::Bigp => big_p(&x, a.ell.ok_or_else(|| CliError::usage("bigp needs --ell"))?)?,
            };
            let kind = format!("{:?}", a.kind).to_lowercase();
            Ok(Output::Json(json!({ "kind": kind, "rows": x.rows(), "cols": x.cols(), "value": value.to_string() })))
        }
        Command::Obstruction(a) => {
            let family = a.family.family()?;
            let m = parse_big(&a.m, "m")?;
            let r = obstruction_admits_primes(family, &m)?;
            if r.admissible {
                Ok(Output::Json(to_value(&r)))
            } else {
                Err(CliError::domain(
                    "obstructed",
                    format!("no odd points: {} is outside {}", r.m, r.admissible_class_description),
                    Some(to_value(&r)),
                ))
            }
        }
        Command::Reachability(a) => {
            let family = a.family.family()?;
            let budget = a.budget.or(env.budget()?).unwrap_or(prime_points::congruence::DEFAULT_REACH_BUDGET);
            let r = prime_points::congruence::odd_residue_reachability_with_budget(family, a.e, budget)?;
            Ok(Output::Json(to_value(&r)))
        }
        Command::Vaughan(v) => vaughan(v),
        Command::Intertwined(i) => intertwined(i, seed),
        Command::Construct(c) => construct(c, seed, env),
        Command::Search(a) => {
            let mut cfg = SearchConfig::new(a.family.family()?, parse_big(&a.m, "m")?, a.t);
            cfg.limit = a.limit;
            cfg.seed = seed;
            cfg.force = a.force;
            cfg.mode = a.mode.into();
            cfg.strategy = match a.strategy {
                StrategyArg::Auto => Strategy::Auto,
                StrategyArg::Direct => Strategy::Direct,
                StrategyArg::Sampled => Strategy::Sampled,
                StrategyArg::Construct => Strategy::Construct,
            };
            if let Some(b) = a.budget.or(env.budget()?) {
                cfg.budget = b;
            }
            let r = find_prime_points(&cfg)?;
            if r.short_circuited {
                let msg = r.diagnostics.notes.join("; ");
                return Err(CliError::domain("obstructed", msg, Some(to_value(&r))));
            }
            Ok(Output::Json(to_value(&r)))
        }
        Command::VerifyManifest(a) => verify_manifest(&a.manifest, env),
    }
}

fn count_options(mode: ModeArg, exclude_two: bool) -> CountOptions {
    CountOptions { exclude_two, ..CountOptions::with_mode(mode.into()) }
}

fn vaughan(v: &VaughanCommand) -> Result<Output, CliError> {
    match v {
        VaughanCommand::Check(e) => {
            let eq = e.equation()?;
            Ok(Output::Json(json!({ "equation": eq, "conditions": check_conditions(&eq) })))
        }
        VaughanCommand::Count { eq, t, mode, exclude_two, list } => {
            let e = eq.equation()?;
            let opts = count_options(*mode, *exclude_two);
            let mut out = to_value(&count_prime_solutions(&e, *t, &opts)?);
            if *list > 0 {
                out["solutions"] = to_value(&enumerate_prime_solutions(&e, *t, &opts, *list)?);
            }
            Ok(Output::Json(json!({ "equation": e, "report": out })))
        }
        VaughanCommand::Growth { eq, ts, mode, exclude_two, csv } => {
            let e = eq.equation()?;
            let rows = growth_report(&e, ts, &count_options(*mode, *exclude_two))?;
            let value = json!({ "equation": e, "mode": SignMode::from(*mode), "rows": rows });
            if *csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["T", "count", "normalized"]).map_err(io_err)?;
                for r in &rows {
                    w.write_record([r.t.to_string(), r.count.to_string(), format!("{:.6}", r.normalized)])
                        .map_err(io_err)?;
                }
                let text = String::from_utf8(w.into_inner().map_err(|e| io_err(e.into_error()))?).expect("utf8");
                Ok(Output::Csv(text, value))
            } else {
                Ok(Output::Json(value))
            }
        }
    }
}

fn decimal(y: &[u64]) -> Vec<String> {
    y.iter().map(u64::to_string).collect()
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::domain("io", e.to_string(), None)
}

fn intertwined(i: &IntertwinedCommand, seed: u64) -> Result<Output, CliError> {
    match i {
        IntertwinedCommand::Demo { pair, trials, range } => {
            let p = pair.build()?;
            let v = validate_witness(&p.f, &p.f_tilde, &p.witness, *trials, *range, seed)?;
            let out = json!({
                "f_display": p.f.to_string(),
                "f_tilde_display": p.f_tilde.to_string(),
                "pair": p,
                "validation": v,
            });
            if v.valid {
                Ok(Output::Json(out))
            } else {
                Err(CliError::domain("validation-failed", v.failure.unwrap_or_default(), Some(out)))
            }
        }
        IntertwinedCommand::Validate { input, trials, range, symbolic } => {
            let text =
                std::fs::read_to_string(input).map_err(|e| CliError::usage(format!("{}: {e}", input.display())))?;
            let p: WitnessPair = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("{} is not a pair: {e}", input.display())))?;
            let v = if *symbolic {
                if p.witness.arity > SYMBOLIC_VALIDATION_MAX_ARITY {
                    return Err(CliError::usage(format!(
                        "--symbolic supports arity <= {SYMBOLIC_VALIDATION_MAX_ARITY}"
                    )));
                }
                validate_witness_symbolic(&p.f, &p.f_tilde, &p.witness)?
            } else {
                validate_witness(&p.f, &p.f_tilde, &p.witness, *trials, *range, seed)?
            };
            let out = json!({ "validation": v });
            if v.valid {
                Ok(Output::Json(out))
            } else {
                Err(CliError::domain("validation-failed", v.failure.unwrap_or_default(), Some(out)))
            }
        }
    }
}

fn construct(c: &ConstructCommand, seed: u64, env: &Env) -> Result<Output, CliError> {
    let mut opts = TupleOptions::default();
    if let Some(b) = env.budget()? {
        opts.budget = b;
    }
    match c {
        ConstructCommand::TwoCoprime { alpha, beta, gamma, q, s, count, start } => {
            if q.len() != alpha.len() || s.len() != alpha.len() {
                return Err(CliError::usage("--q and --s need one entry per coefficient"));
            }
            let residues =
                q.iter().zip(s).map(|(&q, &s)| OddResidue::new(q, s)).collect::<prime_points::Result<Vec<_>>>()?;
            let spec = TwoCoprimeSpec::with_gammas(alpha.clone(), *beta, gamma, residues)?;
            opts.start = *start;
            let run = two_coprime_tuples_with(&spec, *count, seed, &opts)?;
            let mut out = to_value(&run);
            out["tuples"] = json!(run.tuples.iter().map(|y| decimal(y)).collect::<Vec<_>>());
            for (c, y) in out["checks"].as_array_mut().expect("array").iter_mut().zip(&run.tuples) {
                c["tuple"] = json!(decimal(y));
            }
            Ok(Output::Json(out))
        }
        ConstructCommand::Points { pair, m, count, q, s } => {
            let p = pair.build()?;
            let m = parse_big(m, "m")?;
            let res = vec![OddResidue::new(*q, *s)?; p.witness.arity];
            let pts = intertwined_prime_points_with(&p.f, &p.f_tilde, &p.witness, &m, &res, *count, seed, &opts)?;
            let rows: Vec<Value> = pts
                .iter()
                .map(|y| {
                    let x: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
                    json!({
                        "y": decimal(y),
                        "f": p.f.eval(&x).map(|v| v.to_string()).unwrap_or_default(),
                        "f_tilde": p.f_tilde.eval(&x).map(|v| v.to_string()).unwrap_or_default(),
                    })
                })
                .collect();
            Ok(Output::Json(json!({ "m": m.to_string(), "arity": p.witness.arity, "points": rows })))
        }
    }
}

fn verify_manifest(path: &PathBuf, env: &Env) -> Result<Output, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid JSON: {e}")))?;
    let m = v.get("manifest").cloned().unwrap_or(v);
    let manifest: RunManifest =
        serde_json::from_value(m).map_err(|e| CliError::usage(format!("not a run manifest: {e}")))?;
    if manifest.argv.first().map(String::as_str) == Some("verify-manifest") {
        return Err(CliError::usage("refusing to verify a verify-manifest run"));
    }
    let mut argv = vec!["prime-points".to_string()];
    argv.extend(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::usage(format!("manifest argv does not parse: {e}")))?;
    let seed = resolve_seed(&cli, env)?;
    let actual = match execute(&cli.command, seed, env) {
        Ok(out) => digest(out.value()),
        Err(e) => digest(&e.to_json()),
    };
    let matches = actual == manifest.result_digest;
    let out =
        json!({ "matches": matches, "expected": manifest.result_digest, "actual": actual, "argv": manifest.argv });
    if matches {
        Ok(Output::Json(out))
    } else {
        Err(CliError::domain("digest-mismatch", "re-run produced a different result", Some(out)))
    }
}

fn resolve_seed(cli: &Cli, env: &Env) -> Result<u64, CliError> {
    match cli.seed {
        Some(s) => Ok(s),
        None if env.ci && uses_seed(&cli.command) => Err(CliError::usage("--seed is required when CI is set")),
        None => Ok(1),
    }
}

/// Parses `args` (program name first), runs, and renders the result.
pub fn run(args: Vec<String>, env: &Env) -> Outcome {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let started = Instant::now();
    let seed = resolve_seed(&cli, env);
    let result = seed.clone().and_then(|s| execute(&cli.command, s, env));
    let (code, value, csv) = match &result {
        Ok(Output::Json(v)) => (0, v.clone(), None),
        Ok(Output::Csv(text, v)) => (0, v.clone(), Some(text.clone())),
        Err(e) => (e.exit_code, e.to_json(), None),
    };
    let manifest = RunManifest {
        subcommand: subcommand_name(&cli.command),
        argv: args.iter().skip(1).cloned().collect(),
        seed: uses_seed(&cli.command).then(|| seed.as_ref().ok().copied()).flatten(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        result_digest: digest(&value),
    };
    let mut stderr = String::new();
    if let Some(path) = &cli.manifest_out {
        if let Err(e) = std::fs::write(path, serde_json::to_string_pretty(&manifest).expect("serializable")) {
            stderr.push_str(&format!("could not write manifest: {e}\n"));
        }
    }
    let stdout = match csv {
        Some(text) => {
            stderr.push_str(&serde_json::to_string(&json!({ "manifest": manifest })).expect("serializable"));
            stderr.push('\n');
            text
        }
        None => {
            let key = if code == 0 { "result" } else { "failure" };
            let mut env_obj = json!({ "manifest": manifest });
            env_obj[key] = value;
            format!("{}\n", serde_json::to_string_pretty(&env_obj).expect("serializable"))
        }
    };
    Outcome { code, stdout, stderr }
}
