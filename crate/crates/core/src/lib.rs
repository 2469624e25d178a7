//! Exact integer tools for locating prime points on determinant, permanent,
//! Pfaffian, hafnian, quadratic and rectangular-Pfaffian hypersurfaces.
//!
//! Everything is exact (`num_bigint::BigInt`), seeded where random, and
//! indexed from 1 at the public interface unless noted.

pub mod congruence;
pub mod construct;
pub mod error;
pub mod intertwined;
pub mod invariants;
pub mod matrices;
pub mod poly;
pub mod primes;
pub mod search;
pub mod serde_big;
pub mod vaughan;

pub use congruence::{
    admissible_class, necessity_check, obstruction_admits_primes, odd_residue_reachability, NecessityCheck,
    ObstructionReport, ReachabilitySet, ResidueClass,
};
pub use construct::{
    bezout_avoiding_prime, intertwined_prime_points, is_two_coprime, nu_for_prime, two_coprime_tuples, OddResidue,
    TwoCoprimeRun, TwoCoprimeSpec,
};
pub use error::{Error, Result};
pub use intertwined::{validate_witness, Axis, IntertwinedWitness, Validation, WitnessPair};
pub use invariants::{big_p, decompose, delta_eval, det, hf, perm, pf, Decomposition, VarietyFamily, VarietyPoint};
pub use matrices::{hat, minor, omega, z_select, IndexSet, IntMatrix};
pub use poly::SparsePoly;
pub use primes::{crt, is_prime, primes_in_system, primes_up_to, Progression, ProgressionSystem};
pub use search::{find_prime_points, verify_point, PrimePointReport, SearchConfig, Strategy};
pub use vaughan::{
    check_conditions, count_prime_solutions, growth_report, ConditionReport, CountOptions, LinearEquation,
    PrimeCountReport, SignMode,
};
