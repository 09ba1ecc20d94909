use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsdyn_core::lattice::{lattice_invariants, short_vectors, strong_approx_reduce_rational};
use qsdyn_core::linalg::{rational, Matrix};
use qsdyn_core::qs_arith::rational_valuation;
use qsdyn_core::{Place, ZSLattice};

fn q(n: i64) -> BigRational {
    rational(n, 1)
}

fn m2(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Matrix<BigRational> {
    Matrix::from_rows(vec![vec![a, b], vec![c, d]])
}

/// A word of length below `max_len` in the elementary matrices with entries drawn by `entry`.
fn elementary_word(rng: &mut ChaCha8Rng, max_len: usize, mut entry: impl FnMut(&mut ChaCha8Rng) -> BigRational) -> Matrix<BigRational> {
    let mut g = m2(q(1), q(0), q(0), q(1));
    let len = rng.gen_range(1..max_len);
    for k in 0..len {
        let x = entry(rng);
        let e = if k % 2 == 0 { m2(q(1), x, q(0), q(1)) } else { m2(q(1), q(0), x, q(1)) };
        g = g.mul(&e);
    }
    g
}

fn unimodular(rng: &mut ChaCha8Rng, primes: &[u64]) -> Matrix<BigRational> {
    let mut g = elementary_word(rng, 6, |r| q(r.gen_range(-3..=3)));
    // Diagonal Z_S units.
    if let Some(&p) = primes.first() {
        let e = rng.gen_range(-2i64..=2);
        let u = rational(p.pow(e.unsigned_abs() as u32) as i64, 1);
        let u = if e < 0 { u.recip() } else { u };
        g = m2(u.clone(), q(0), q(0), q(1)).mul(&g);
    }
    if rng.gen_bool(0.5) {
        g = m2(q(0), q(1), q(1), q(0)).mul(&g);
    }
    g
}

#[test]
fn invariants_are_left_unimodular_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for places in [vec![Place::Real], vec![Place::Real, Place::Padic(2)]] {
        let primes: Vec<u64> = places.iter().filter_map(|v| if let Place::Padic(p) = v { Some(*p) } else { None }).collect();
        let g = m2(rational(7, 3), rational(1, 2), rational(-2, 5), rational(4, 9));
        let base = lattice_invariants(&ZSLattice::from_rational(&places, g.clone()).unwrap()).unwrap();
        let real = ZSLattice::from_real(g.map(|x| num_traits::ToPrimitive::to_f64(x).unwrap())).unwrap();
        let real_base = lattice_invariants(&real).unwrap();
        for _ in 0..100 {
            let gamma = unimodular(&mut rng, &primes);
            let l = ZSLattice::from_rational(&places, g.clone()).unwrap().left_mul(&gamma).unwrap();
            let inv = lattice_invariants(&l).unwrap();
            assert_eq!(inv.covolume_exact, base.covolume_exact);
            assert_eq!(inv.systole_squared, base.systole_squared);
            assert!((inv.systole - base.systole).abs() < 1e-9);
            if primes.is_empty() {
                let r = lattice_invariants(&real.left_mul(&gamma).unwrap()).unwrap();
                assert!((r.systole - real_base.systole).abs() < 1e-9);
                assert!((r.covolume - real_base.covolume).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_covolume_is_the_gram_volume(e in prop::collection::vec(-3.0f64..3.0, 4)) {
        let g = Matrix::from_rows(vec![vec![e[0], e[1]], vec![e[2], e[3]]]);
        let det = e[0] * e[3] - e[1] * e[2];
        prop_assume!(det.abs() > 0.05);
        let gram = g.mul(&g.transpose());
        let vol = (gram[(0, 0)] * gram[(1, 1)] - gram[(0, 1)] * gram[(1, 0)]).sqrt();
        let inv = lattice_invariants(&ZSLattice::from_real(g).unwrap()).unwrap();
        prop_assert!((inv.covolume - vol).abs() < 1e-9 * vol.max(1.0));
    }

    #[test]
    fn short_vectors_grow_with_the_bound(
        e in prop::collection::vec(-20i64..20, 4),
        den in 1i64..6,
        b in 0.2f64..3.0,
        extra in 0.0f64..2.0,
        padic in any::<bool>(),
    ) {
        let g = m2(rational(e[0], den), rational(e[1], den), rational(e[2], den), rational(e[3], den));
        prop_assume!(!g.det().is_zero());
        let places = if padic { vec![Place::Real, Place::Padic(3)] } else { vec![Place::Real] };
        let l = ZSLattice::from_rational(&places, g).unwrap();
        let (small, big) = (short_vectors(&l, b, 12).unwrap(), short_vectors(&l, b + extra, 12).unwrap());
        prop_assert!(small.vectors.iter().all(|v| v.content <= b * (1.0 + 1e-9)));
        for v in &small.vectors {
            prop_assert!(big.vectors.iter().any(|w| w.coeffs == v.coeffs));
        }
    }
}

fn pow(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(e))
}

/// Random `SL2(Z[1/p]) . SL2(Z_p)` products with rational `Z_p` factors.
#[test]
fn strong_approximation_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..1000 {
        let p = [2u64, 3, 5][k % 3];
        let gamma = elementary_word(&mut rng, 5, |r| {
            rational(r.gen_range(-20..20), 1) / pow(p, r.gen_range(0..4))
        });
        let kp = elementary_word(&mut rng, 5, |r| loop {
            let d = r.gen_range(1i64..30);
            if !(d as u64).is_multiple_of(p) {
                break rational(r.gen_range(-30..30), d);
            }
        });
        let g = gamma.mul(&kp);
        let (g1, k1) = strong_approx_reduce_rational(&g, p).unwrap();
        assert_eq!(g1.mul(&k1), g);
        assert!(g1.det().is_one() && k1.det().is_one());
        for x in k1.data() {
            assert!(rational_valuation(x, p).is_none_or(|v| v >= 0));
        }
        // The Z[1/p] factor only has p in its denominators.
        for x in g1.data() {
            let mut d = x.denom().abs();
            while (&d % BigInt::from(p)).is_zero() {
                d /= BigInt::from(p);
            }
            assert!(d.is_one());
        }
    }
}
