//! Primality, sieving, arithmetic progressions and the Chinese remainder
//! theorem.
//!
//! An integer `p` counts as prime when `|p|` is a rational prime; negative
//! primes are allowed wherever a signed value is accepted.

use crate::error::{invalid, Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Largest bound accepted by [`primes_up_to`].
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// Candidates examined by [`primes_in_system`] before giving up.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the first twelve prime bases are a proven
/// witness set for every 64-bit input.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Signed convenience wrapper.
pub fn is_prime_i64(n: i64) -> bool {
    is_prime_u64(n.unsigned_abs())
}

/// True iff `|n|` is prime. Magnitudes of 2⁶⁴ or more are rejected.
pub fn is_prime(n: &BigInt) -> Result<bool> {
    match n.abs().to_u64() {
        Some(v) => Ok(is_prime_u64(v)),
        None => Err(Error::Unsupported(format!("|{n}| does not fit in 64 bits"))),
    }
}

/// Odd-only sieve of Eratosthenes with constant-time membership queries.
#[derive(Debug, Clone)]
pub struct Sieve {
    limit: u64,
    // bit k set means 2k+1 is composite
    composite: Vec<u64>,
}

impl Sieve {
    pub fn new(limit: u64) -> Self {
        let slots = (limit / 2 + 1) as usize;
        let mut composite = vec![0u64; slots / 64 + 1];
        composite[0] |= 1; // 1 is not prime
        let mut i = 3u64;
        while i * i <= limit {
            if composite[(i / 2) as usize / 64] >> ((i / 2) % 64) & 1 == 0 {
                let mut j = i * i;
                while j <= limit {
                    let k = (j / 2) as usize;
                    composite[k / 64] |= 1 << (k % 64);
                    j += 2 * i;
                }
            }
            i += 2;
        }
        Sieve { limit, composite }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Membership for `n <= limit`; larger values fall back to Miller–Rabin.
    pub fn contains(&self, n: u64) -> bool {
        if n > self.limit {
            return is_prime_u64(n);
        }
        if n == 2 {
            return true;
        }
        if n < 2 || n.is_multiple_of(2) {
            return false;
        }
        let k = (n / 2) as usize;
        self.composite[k / 64] >> (k % 64) & 1 == 0
    }

    pub fn primes(&self) -> Vec<u64> {
        let mut out = Vec::new();
        if self.limit >= 2 {
            out.push(2);
        }
        let mut n = 3;
        while n <= self.limit {
            if self.contains(n) {
                out.push(n);
            }
            n += 2;
        }
        out
    }
}

/// All primes in `[2, bound]`, ascending.
pub fn primes_up_to(bound: u64) -> Result<Vec<u64>> {
    primes_up_to_capped(bound, DEFAULT_SIEVE_CAP)
}

pub fn primes_up_to_capped(bound: u64, cap: u64) -> Result<Vec<u64>> {
    if bound < 2 {
        return invalid(format!("sieve bound must be at least 2, got {bound}"));
    }
    if bound > cap {
        return Err(Error::ResourceLimit(format!("sieve bound {bound} exceeds cap {cap}")));
    }
    Ok(Sieve::new(bound).primes())
}

/// The residue class `residue + modulus·ℤ`, residue reduced into `[0, modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Progression {
    pub residue: u64,
    pub modulus: u64,
}

impl Progression {
    pub fn new(residue: i128, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return invalid("progression modulus must be positive");
        }
        let r = residue.rem_euclid(modulus as i128) as u64;
        Ok(Progression { residue: r, modulus })
    }

    pub fn contains(&self, n: i128) -> bool {
        n.rem_euclid(self.modulus as i128) as u64 == self.residue
    }
}

/// A nonempty list of congruence conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressionSystem(Vec<Progression>);

impl ProgressionSystem {
    pub fn new(parts: Vec<Progression>) -> Result<Self> {
        if parts.is_empty() {
            return invalid("a progression system needs at least one congruence");
        }
        Ok(ProgressionSystem(parts))
    }

    pub fn parts(&self) -> &[Progression] {
        &self.0
    }

    pub fn contains(&self, n: i128) -> bool {
        self.0.iter().all(|p| p.contains(n))
    }
}

/// Modular inverse of `a` modulo `m` (requires gcd(a, m) = 1).
pub(crate) fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    (e.gcd == 1).then(|| e.x.rem_euclid(m))
}

/// Combines pairwise-coprime congruences into a single progression.
pub fn crt(system: &ProgressionSystem) -> Result<Progression> {
    let mut acc = Progression { residue: 0, modulus: 1 };
    for p in system.parts() {
        let (m1, m2) = (acc.modulus as u128, p.modulus as u128);
        if m1.gcd(&m2) != 1 {
            return Err(Error::IncompatibleSystem(format!("moduli {} and {} are not coprime", acc.modulus, p.modulus)));
        }
        let l = m1 * m2;
        if l > u64::MAX as u128 {
            return Err(Error::Unsupported("combined modulus exceeds 64 bits".into()));
        }
        let inv = inv_mod(m1 as i128, m2 as i128).expect("coprime moduli");
        let diff = (p.residue as i128 - acc.residue as i128).rem_euclid(m2 as i128);
        let k = (diff * inv).rem_euclid(m2 as i128) as u128;
        let x = (acc.residue as u128 + m1 * k) % l;
        acc = Progression { residue: x as u64, modulus: l as u64 };
    }
    Ok(acc)
}

/// The first `count` primes `>= start` satisfying every congruence.
pub fn primes_in_system(system: &ProgressionSystem, count: usize, start: i128) -> Result<Vec<u64>> {
    primes_in_system_with_budget(system, count, start, DEFAULT_STEP_BUDGET)
}

pub fn primes_in_system_with_budget(
    system: &ProgressionSystem,
    count: usize,
    start: i128,
    budget: u64,
) -> Result<Vec<u64>> {
    let prog = crt(system)?;
    primes_in_progression(prog, count, start, budget)
}

pub(crate) fn primes_in_progression(prog: Progression, count: usize, start: i128, budget: u64) -> Result<Vec<u64>> {
    if prog.residue.gcd(&prog.modulus) != 1 {
        return Err(Error::NoPrimesGuaranteed(format!("gcd({}, {}) != 1", prog.residue, prog.modulus)));
    }
    let lo = start.max(2) as u128;
    let l = prog.modulus as u128;
    let mut c = lo + (prog.residue as u128 + l - lo % l) % l;
    let mut out = Vec::with_capacity(count);
    let mut tested = 0u64;
    while out.len() < count {
        if tested >= budget {
            return Err(Error::Budget(format!(
                "found {} of {count} primes in {} mod {} after {budget} candidates",
                out.len(),
                prog.residue,
                prog.modulus
            )));
        }
        if c > u64::MAX as u128 {
            return Err(Error::Unsupported("prime search left the 64-bit range".into()));
        }
        tested += 1;
        if is_prime_u64(c as u64) {
            out.push(c as u64);
        }
        c += l;
    }
    Ok(out)
}

/// Distinct prime factors of `n > 0`, ascending: trial division by small
/// primes, then Pollard–Brent.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for d in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            out.push(m);
            continue;
        }
        let d = pollard_brent(m);
        stack.push(d);
        stack.push(m / d);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// A nontrivial factor of an odd composite `n` with no factor below 41.
fn pollard_brent(n: u64) -> u64 {
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let (mut x, mut ys) = (y, y);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..128.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    fn sys(parts: &[(i128, u64)]) -> ProgressionSystem {
        ProgressionSystem::new(parts.iter().map(|&(r, m)| Progression::new(r, m).unwrap()).collect()).unwrap()
    }

    #[test]
    fn primality_small_values() {
        assert!(is_prime(&BigInt::from(2)).unwrap());
        assert!(is_prime(&BigInt::from(-7)).unwrap());
        assert!(!is_prime(&BigInt::from(1)).unwrap());
        assert!(!is_prime(&BigInt::from(0)).unwrap());
        assert!(!is_prime(&BigInt::from(-1)).unwrap());
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn primality_hard_cases() {
        // strong pseudoprimes to several small bases
        for n in [3215031751u64, 2152302898747, 3474749660383, 341550071728321, 3825123056546413051] {
            assert!(!is_prime_u64(n), "{n}");
        }
        assert!(is_prime_u64(18446744073709551557)); // largest 64-bit prime
        assert!(!is_prime_u64(u64::MAX));
        assert!(is_prime_u64(1_000_000_007));
    }

    #[test]
    fn primality_rejects_oversized() {
        let big = BigInt::from(u64::MAX) + 1;
        assert!(matches!(is_prime(&big), Err(Error::Unsupported(_))));
        assert!(is_prime(&-BigInt::from(u64::MAX)).is_ok());
    }

    #[test]
    fn sieve_values() {
        assert_eq!(primes_up_to(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(primes_up_to(2).unwrap(), vec![2]);
        assert_eq!(primes_up_to(10_000).unwrap().len(), 1229);
        assert!(primes_up_to(1).is_err());
        assert!(matches!(primes_up_to_capped(1000, 100), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn sieve_matches_trial_division() {
        let s = Sieve::new(3000);
        for n in 0..3000 {
            assert_eq!(s.contains(n), trial_division(n));
        }
    }

    #[test]
    fn crt_examples() {
        let brute = |parts: &[(i128, u64)]| {
            let l: u64 = parts.iter().map(|p| p.1).product();
            (0..l as i128).find(|&x| parts.iter().all(|&(r, m)| x.rem_euclid(m as i128) == r)).unwrap()
        };
        let a = [(1, 4), (2, 3)];
        assert_eq!(brute(&a), 5);
        assert_eq!(crt(&sys(&a)).unwrap(), Progression { residue: 5, modulus: 12 });
        let b = [(1, 4), (4, 5), (2, 3)];
        assert_eq!(brute(&b), 29);
        assert_eq!(crt(&sys(&b)).unwrap(), Progression { residue: 29, modulus: 60 });
        assert_eq!(crt(&sys(&[(0, 1)])).unwrap(), Progression { residue: 0, modulus: 1 });
    }

    #[test]
    fn crt_rejects_non_coprime() {
        assert!(matches!(crt(&sys(&[(1, 4), (3, 6)])), Err(Error::IncompatibleSystem(_))));
    }

    #[test]
    fn primes_in_system_examples() {
        assert_eq!(primes_in_system(&sys(&[(1, 4)]), 3, 2).unwrap(), vec![5, 13, 17]);
        assert_eq!(primes_in_system(&sys(&[(2, 3), (1, 4)]), 2, 2).unwrap(), vec![5, 17]);
        assert!(matches!(primes_in_system(&sys(&[(0, 2)]), 1, 2), Err(Error::NoPrimesGuaranteed(_))));
        assert_eq!(primes_in_system(&sys(&[(0, 1)]), 4, -10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(primes_in_system(&sys(&[(1, 4)]), 2, 14).unwrap(), vec![17, 29]);
    }

    #[test]
    fn primes_in_system_budget() {
        let r = primes_in_system_with_budget(&sys(&[(1, 4)]), 100, 2, 10);
        assert!(matches!(r, Err(Error::Budget(_))));
    }

    #[test]
    fn dirichlet_sanity() {
        for b in 1..=30u64 {
            for a in 0..b {
                if a.gcd(&b) != 1 {
                    continue;
                }
                let found = primes_in_system(&sys(&[(a as i128, b)]), 10, 2).unwrap();
                assert!(*found.last().unwrap() < 10_000, "{a} mod {b}");
            }
        }
    }

    #[test]
    fn factors() {
        assert_eq!(prime_factors(1), Vec::<u64>::new());
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
        assert_eq!(prime_factors(299), vec![13, 23]);
        assert_eq!(prime_factors(97), vec![97]);
        assert_eq!(prime_factors(1_000_000_007 * 998_244_353), vec![998_244_353, 1_000_000_007]);
        assert_eq!(prime_factors(41 * 41 * 43 * 4_294_967_291), vec![41, 43, 4_294_967_291]);
        assert_eq!(prime_factors(18_446_744_073_709_551_557), vec![18_446_744_073_709_551_557]);
    }
}
