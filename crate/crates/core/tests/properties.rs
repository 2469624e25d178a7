use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use prime_points::congruence::phi2;
use prime_points::construct::{check_two_coprime_tuple, two_coprime_tuples};
use prime_points::intertwined::{det_pair_witness, haf_pair_witness, perm_pair_witness, pf_pair_witness};
use prime_points::vaughan::enumerate_prime_solutions;
use prime_points::{
    bezout_avoiding_prime, big_p, count_prime_solutions, crt, decompose, delta_eval, det, find_prime_points, hat, hf,
    is_prime, minor, perm, pf, primes_in_system, z_select, Axis, CountOptions, IndexSet, IntMatrix, LinearEquation,
    OddResidue, Progression, ProgressionSystem, SearchConfig, SignMode, TwoCoprimeSpec, VarietyFamily, VarietyPoint,
};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn square(n: usize, range: i64) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-range..=range, n * n)
        .prop_map(move |v| IntMatrix::new(n, n, v.into_iter().map(big).collect()).unwrap())
}

fn antisymmetric(order: usize, entries: BoxedStrategy<i64>) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(entries, order * (order - 1) / 2).prop_map(move |v| {
        IntMatrix::antisymmetric_from_upper(order, &v.into_iter().map(big).collect::<Vec<_>>()).unwrap()
    })
}

fn odd(range: i64) -> BoxedStrategy<i64> {
    (-range..range).prop_map(|v| 2 * v + 1).boxed()
}

fn laplace_det(x: &IntMatrix) -> BigInt {
    let n = x.rows();
    if n == 0 {
        return BigInt::one();
    }
    let rows: Vec<usize> = (1..n).collect();
    (0..n)
        .map(|j| {
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let term = x.get(0, j) * laplace_det(&x.select(&rows, &cols));
            if j % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

fn laplace_perm(x: &IntMatrix) -> BigInt {
    let n = x.rows();
    if n == 0 {
        return BigInt::one();
    }
    let rows: Vec<usize> = (1..n).collect();
    (0..n)
        .map(|j| {
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            x.get(0, j) * laplace_perm(&x.select(&rows, &cols))
        })
        .sum()
}

fn family_strategy() -> impl Strategy<Value = VarietyFamily> {
    prop_oneof![
        (1usize..=4).prop_map(|n| VarietyFamily::Det { n }),
        (1usize..=4).prop_map(|n| VarietyFamily::Perm { n }),
        (1usize..=3).prop_map(|n| VarietyFamily::Pf { n }),
        (1usize..=3).prop_map(|n| VarietyFamily::Haf { n }),
        (1usize..=4, 0usize..=3).prop_map(|(n, k)| VarietyFamily::Quad { n, k }),
        (1usize..=3).prop_flat_map(|n| (n..=3).prop_map(move |l| VarietyFamily::Rect { l, n })),
    ]
}

fn point_in(family: VarietyFamily, entries: BoxedStrategy<i64>) -> impl Strategy<Value = VarietyPoint> {
    prop::collection::vec(entries, family.coordinate_count())
        .prop_map(move |c| VarietyPoint::new(family, c.into_iter().map(big).collect()).unwrap())
}

fn is_power_of_two(v: &BigInt) -> bool {
    let a = v.abs();
    !a.is_zero() && (&a & (&a - 1u32)).is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minor_composes(x in square(5, 9), a in subsequence((1usize..=5).collect::<Vec<_>>(), 0..=2),
                      bcols in subsequence((1usize..=5).collect::<Vec<_>>(), 0..=2)) {
        let a = IndexSet::new(a).unwrap();
        let bset = IndexSet::new(bcols).unwrap();
        let empty = IndexSet::new(vec![]).unwrap();
        let two_step = minor(&minor(&x, &a, &empty).unwrap(), &empty, &bset).unwrap();
        prop_assert_eq!(two_step, minor(&x, &a, &bset).unwrap());
    }

    #[test]
    fn z_select_shape(ell in 1usize..=4, cols in 1usize..=5, seed in any::<u64>(), k in 0usize..=4) {
        let x = IntMatrix::from_fn(2 * ell, cols, |i, j| big((seed as i64 ^ (i * 7 + j) as i64) % 97));
        let t = IndexSet::new((1..=k.min(ell)).collect()).unwrap();
        let z = z_select(&x, &t).unwrap();
        prop_assert_eq!(z.rows(), 2 * t.as_slice().len());
        prop_assert_eq!(z.cols(), cols);
    }

    #[test]
    fn hat_is_an_involution(ell in 1usize..=50, frac in 0.0f64..1.0) {
        let i = 1 + ((2 * ell) as f64 * frac) as usize % (2 * ell);
        let h = hat(i, ell);
        prop_assert!((1..=2 * ell).contains(&h));
        prop_assert_ne!(h, i);
        prop_assert_eq!(hat(h, ell), i);
    }

    #[test]
    fn crt_reduces_to_inputs(parts in prop::collection::vec((any::<i64>(), 1u64..200), 1..4)) {
        let progs: Vec<Progression> = parts.iter().map(|&(r, m)| Progression::new(r as i128, m).unwrap()).collect();
        let Ok(system) = ProgressionSystem::new(progs.clone()) else { return Ok(()) };
        match crt(&system) {
            Ok(sol) => {
                for p in &progs {
                    prop_assert_eq!(sol.modulus % p.modulus, 0);
                    prop_assert!(p.contains(sol.residue as i128));
                }
            }
            // incompatible systems are reported, never silently solved
            Err(e) => prop_assert_eq!(e.kind(), "incompatible-system"),
        }
    }

    #[test]
    fn primes_in_system_are_primes_in_the_system(b in 1u64..=30, a in 0u64..30, extra in 0u64..3) {
        let a = a % b;
        prop_assume!(a.gcd(&b) == 1);
        let mut parts = vec![Progression::new(a as i128, b).unwrap()];
        if extra > 0 && b % 2 == 1 {
            parts.push(Progression::new(1, 4).unwrap());
        }
        let system = ProgressionSystem::new(parts).unwrap();
        let found = primes_in_system(&system, 10, 2).unwrap();
        prop_assert_eq!(found.len(), 10);
        for &p in &found {
            prop_assert!(is_prime(&BigInt::from(p)).unwrap());
            prop_assert!(system.contains(p as i128));
            prop_assert!(p < 10_000);
        }
    }

    #[test]
    fn bareiss_and_ryser_match_laplace(n in 1usize..=7, seed in any::<u64>()) {
        let mut s = seed;
        let x = IntMatrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            big((s >> 33) as i64 % 41 - 20)
        });
        prop_assert_eq!(det(&x).unwrap(), laplace_det(&x));
        prop_assert_eq!(perm(&x).unwrap(), laplace_perm(&x));
    }

    #[test]
    fn cayley_identity(x in (1usize..=4).prop_flat_map(|h| antisymmetric(2 * h, (-50i64..=50).boxed()))) {
        let p = pf(&x).unwrap();
        prop_assert_eq!(det(&x).unwrap(), &p * &p);
    }

    #[test]
    fn pfaffian_covariance((x, g) in (1usize..=4).prop_flat_map(|h| (antisymmetric(2 * h, (-20i64..=20).boxed()), square(2 * h, 6)))) {
        let lhs = pf(&g.transpose().mul(&x).unwrap().mul(&g).unwrap()).unwrap();
        prop_assert_eq!(lhs, det(&g).unwrap() * pf(&x).unwrap());
    }

    #[test]
    fn odd_pairing_invariants_are_odd(h in 1usize..=4, v in prop::collection::vec(odd(100), 28)) {
        let order = 2 * h;
        let upper: Vec<BigInt> = v[..order * (order - 1) / 2].iter().map(|&e| big(e)).collect();
        prop_assert!(pf(&IntMatrix::antisymmetric_from_upper(order, &upper).unwrap()).unwrap().is_odd());
        prop_assert!(hf(&IntMatrix::symmetric_from_upper(order, &upper).unwrap()).unwrap().is_odd());
    }

    #[test]
    fn odd_det_divisibility(n in 1usize..=6, v in prop::collection::vec(odd(50), 36)) {
        let x = IntMatrix::new(n, n, v[..n * n].iter().map(|&e| big(e)).collect()).unwrap();
        let d = det(&x).unwrap();
        prop_assert!(d.mod_floor(&(BigInt::one() << (n - 1))).is_zero());
    }

    #[test]
    fn decomposition_recombines(p in family_strategy().prop_flat_map(|f| point_in(f, (-30i64..=30).boxed()))) {
        let d = decompose(&p).unwrap();
        prop_assert_eq!(d.recombine(), delta_eval(&p).unwrap());
        let manual: BigInt = d.f_values.iter().zip(&d.xi).map(|(f, x)| f * x).sum::<BigInt>() + &d.g_value;
        prop_assert_eq!(manual, delta_eval(&p).unwrap());
    }

    #[test]
    fn closing_formula((ell, n, v) in (1usize..=3).prop_flat_map(|n| (n..=3usize).prop_flat_map(move |l| (Just(l), Just(n), prop::collection::vec(-9i64..=9, 4 * l * n))))) {
        let x = IntMatrix::new(2 * ell, 2 * n, v.into_iter().map(big).collect()).unwrap();
        let mut sum = BigInt::zero();
        for mask in 0u32..1 << ell {
            if mask.count_ones() as usize == n {
                let t: Vec<usize> = (1..=ell).filter(|t| mask >> (t - 1) & 1 == 1).collect();
                sum += det(&z_select(&x, &IndexSet::new(t).unwrap()).unwrap()).unwrap();
            }
        }
        prop_assert_eq!(big_p(&x, ell).unwrap(), sum);
    }

    #[test]
    fn residue_stability(family in family_strategy(), e in 1u32..=6, seed in any::<u64>()) {
        let count = family.coordinate_count();
        let modulus = 1i64 << e;
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1); (s >> 35) as i64 % 200 - 100 };
        let y: Vec<BigInt> = (0..count).map(|_| big(next())).collect();
        let y2: Vec<BigInt> = y.iter().map(|v| v + big(next() * modulus)).collect();
        let a = delta_eval(&VarietyPoint::new(family, y).unwrap()).unwrap();
        let b = delta_eval(&VarietyPoint::new(family, y2).unwrap()).unwrap();
        prop_assert!((a - b).mod_floor(&big(modulus)).is_zero());
    }

    #[test]
    fn vaughan_enumeration_is_sound(alphas in prop::collection::vec(prop_oneof![-3i64..=-1, 1i64..=3], 3), m in -40i64..=40, t in 5u64..=40, positive in any::<bool>()) {
        prop_assume!(m != 0);
        let eq = LinearEquation::new(alphas.clone(), m).unwrap();
        let mode = if positive { SignMode::Positive } else { SignMode::Signed };
        let opts = CountOptions::with_mode(mode);
        let sols = enumerate_prime_solutions(&eq, t, &opts, 10_000).unwrap();
        let count = count_prime_solutions(&eq, t, &opts).unwrap().count;
        prop_assert_eq!(sols.len() as u64, count);
        for s in &sols {
            prop_assert_eq!(s.iter().zip(&alphas).map(|(p, a)| p * a).sum::<i64>(), m);
            for &p in s {
                prop_assert!(is_prime(&big(p)).unwrap() && p.unsigned_abs() <= t);
                prop_assert!(!positive || p > 0);
            }
        }
    }

    #[test]
    fn equal_coefficients_give_symmetric_counts(a in 1i64..=3, m in 1i64..=60, t in 5u64..=40) {
        let eq = LinearEquation::new(vec![a; 3], m).unwrap();
        let opts = CountOptions::with_mode(SignMode::Signed);
        let sols: std::collections::HashSet<Vec<i64>> = enumerate_prime_solutions(&eq, t, &opts, 100_000).unwrap().into_iter().collect();
        for s in &sols {
            for perm in [[1, 0, 2], [0, 2, 1], [2, 1, 0]] {
                let q: Vec<i64> = perm.iter().map(|&i| s[i]).collect();
                prop_assert!(sols.contains(&q));
            }
        }
    }

    #[test]
    fn bezout_postconditions(alphas in prop::collection::vec(prop_oneof![-1000i64..=-1, 1i64..=1000], 2..=5), pi in 0usize..10) {
        let p = [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31][pi];
        let g = alphas.iter().fold(0i64, |g, &a| g.gcd(&a));
        prop_assume!(g % p as i64 != 0);
        let t = bezout_avoiding_prime(&alphas, p).unwrap();
        let sum: i128 = t.iter().zip(&alphas).map(|(&t, &a)| t as i128 * a as i128).sum();
        prop_assert_eq!(sum, g as i128);
        prop_assert!(t.iter().all(|&v| v % p as i64 != 0));
    }

    #[test]
    fn two_coprime_tuples_validate_and_repeat(a1 in 1i64..=9, a2 in 1i64..=9, beta in -20i64..=20, gi in 0usize..4, seed in 0u64..1000) {
        let gamma = [15i64, 21, 35, 105][gi];
        prop_assume!(is_power_of_two(&BigInt::from(a1.gcd(&a2).gcd(&gamma))));
        let residues = vec![OddResidue::new(1, 2).unwrap(), OddResidue::new(3, 2).unwrap()];
        let spec = TwoCoprimeSpec::new(vec![a1, a2], beta, gamma, residues).unwrap();
        let Ok(run) = two_coprime_tuples(&spec, 3, seed) else { return Ok(()) };
        for y in &run.tuples {
            prop_assert!(check_two_coprime_tuple(&spec, y).valid);
            let v = BigInt::from(a1) * y[0] + BigInt::from(a2) * y[1] + beta;
            prop_assert!(is_power_of_two(&v.gcd(&BigInt::from(gamma))));
            prop_assert_eq!((y[0] % 4, y[1] % 4), (1, 3));
        }
        prop_assert_eq!(run, two_coprime_tuples(&spec, 3, seed).unwrap());
    }

    #[test]
    fn witness_forms_are_linear_in_u(which in 0usize..4, seed in any::<u64>(), d in 1i64..=7) {
        let pair = match which {
            0 => det_pair_witness(3, Axis::Row, 2).unwrap(),
            1 => perm_pair_witness(3, Axis::Column, 1).unwrap(),
            2 => pf_pair_witness(2).unwrap(),
            _ => haf_pair_witness(3).unwrap(),
        };
        let w = &pair.witness;
        let mut s = seed;
        let x: Vec<BigInt> = (0..w.arity).map(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(3); big((s >> 40) as i64 % 21 - 10) }).collect();
        for (poly, vars) in [(&pair.f, &w.u_vars), (&pair.f_tilde, &w.utilde_vars)] {
            for &u in vars {
                let at = |k: i64| -> BigInt {
                    let mut y = x.clone();
                    y[u - 1] += big(k * d);
                    poly.eval(&y).unwrap()
                };
                let second: BigInt = at(2) - at(1) * BigInt::from(2) + at(0);
                prop_assert!(second.is_zero());
            }
        }
    }

    #[test]
    fn search_is_deterministic_and_coherent(m in prop::sample::select(vec![2i64, 6, 10, 14, -2, -6]), seed in 0u64..50) {
        let mut cfg = SearchConfig::new(VarietyFamily::Det { n: 3 }, m, 20);
        cfg.force = true;
        cfg.limit = 3;
        cfg.seed = seed;
        cfg.budget = 5_000;
        let r = find_prime_points(&cfg).unwrap();
        prop_assert_eq!(r.odd_point_count, 0);
        for p in &r.points {
            prop_assert!(p.verified);
            prop_assert!(p.point.coordinates.iter().any(|c| c.is_even()));
        }
        prop_assert_eq!(r, find_prime_points(&cfg).unwrap());
    }
}

#[test]
fn dirichlet_sanity() {
    for b in 1u64..=30 {
        for a in 0..b {
            if a.gcd(&b) != 1 {
                continue;
            }
            let system = ProgressionSystem::new(vec![Progression::new(a as i128, b).unwrap()]).unwrap();
            let found = primes_in_system(&system, 10, 2).unwrap();
            assert_eq!(found.len(), 10, "{a} mod {b}");
            assert!(found.iter().all(|&p| p < 10_000), "{a} mod {b}: {found:?}");
        }
    }
}

#[test]
fn phi2_is_the_two_adic_valuation_of_factorial() {
    let mut fact = BigInt::one();
    for n in 1u64..=25 {
        fact *= n;
        let mut v = 0;
        let mut f = fact.clone();
        while f.is_even() {
            f >>= 1;
            v += 1;
        }
        assert_eq!(phi2(n), v, "n={n}");
    }
}
