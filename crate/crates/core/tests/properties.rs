use num_bigint::BigInt;
use proptest::prelude::*;
use quatcm::arith;
use quatcm::equidist::{mu_canonical_from, tv_distance, WeightedMeasure};
use quatcm::genus::automorph_count;
use quatcm::grosslattice::{rep_number, theta_coeffs, primitive_rep_number, TernaryLattice};
use quatcm::lattice::reduce::congruent;
use quatcm::lattice::{canonical_form, IntMatrix};
use quatcm::quadorders::{self, class_number_bruteforce, class_number_formula, factor_discriminant};
use quatcm::rational::{parse_pq, to_pq, Rational};

fn measure(raw: &[u32]) -> WeightedMeasure {
    let labels = (0..raw.len()).map(|i| i.to_string()).collect();
    let w = raw.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect();
    WeightedMeasure::normalized(labels, w).unwrap()
}

fn positive_weights(n: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..20, n).prop_filter("nonzero", |v| v.iter().any(|&x| x > 0))
}

/// Unimodular matrix as a product of elementary row operations.
fn unimodular() -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec((0usize..3, 0usize..3, -3i64..=3), 0..6).prop_map(|ops| {
        let mut u: IntMatrix = (0..3).map(|i| (0..3).map(|j| (i == j) as i64).collect()).collect();
        for (i, j, k) in ops {
            if i != j {
                for c in 0..3 {
                    u[i][c] += k * u[j][c];
                }
            } else if k < 0 {
                u.swap(i, (i + 1) % 3);
            }
        }
        u
    })
}

fn ternaries() -> Vec<IntMatrix> {
    vec![
        vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]],
        vec![vec![8, -4, 0], vec![-4, 24, 0], vec![0, 0, 22]],
        vec![vec![6, 2, 2], vec![2, 30, -14], vec![2, -14, 30]],
        vec![vec![4, 2, 0], vec![2, 6, 2], vec![0, 2, 10]],
    ]
}

proptest! {
    #[test]
    fn tv_is_a_metric(a in positive_weights(4), b in positive_weights(4), c in positive_weights(4)) {
        let (a, b, c) = (measure(&a), measure(&b), measure(&c));
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert_eq!(&ab, &tv_distance(&b, &a).unwrap());
        prop_assert!(tv_distance(&a, &a).unwrap() == Rational::from_integer(0.into()));
        prop_assert!(ab >= Rational::from_integer(0.into()) && ab <= Rational::from_integer(1.into()));
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap());
    }

    #[test]
    fn canonical_measure_ignores_common_factor(w in prop::collection::vec(1u64..30, 1..6), k in 1u64..5) {
        let scaled: Vec<u64> = w.iter().map(|x| x * k).collect();
        prop_assert_eq!(mu_canonical_from(&w).unwrap(), mu_canonical_from(&scaled).unwrap());
        prop_assert!(mu_canonical_from(&w).unwrap().is_probability());
    }

    #[test]
    fn discriminants_factor_and_recompose(n in 3u64..5000, f in 1u64..12) {
        let d = -(n as i64);
        prop_assume!(quadorders::is_fundamental(d));
        let big = d * (f * f) as i64;
        prop_assert_eq!(factor_discriminant(big).unwrap(), (d, f));
    }

    #[test]
    fn conductor_formula_matches_forms(n in 3u64..2000, f in 1u64..15) {
        let d = -(n as i64);
        prop_assume!(quadorders::is_fundamental(d));
        prop_assert_eq!(class_number_formula(d, f).unwrap(), class_number_bruteforce(d * (f * f) as i64).unwrap());
    }

    #[test]
    fn kronecker_is_periodic_in_d(n in 3u64..500, k in -5i64..5) {
        let d = -(n as i64);
        prop_assume!(quadorders::is_fundamental(d));
        for p in arith::primes_up_to(60) {
            let shifted = d + k * 4 * (p as i64);
            prop_assert_eq!(arith::kronecker_prime(d, p), arith::kronecker_prime(shifted, p));
        }
    }

    #[test]
    fn pq_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = Rational::new(n.into(), d.into());
        prop_assert_eq!(parse_pq(&to_pq(&r)).unwrap(), r);
    }

    #[test]
    fn lattice_invariants_survive_base_change(idx in 0usize..4, u in unimodular()) {
        let g = &ternaries()[idx];
        let h = congruent(g, &u);
        prop_assert_eq!(canonical_form(g).unwrap().gram, canonical_form(&h).unwrap().gram);
        let (l, m) = (TernaryLattice::new(g.clone()).unwrap(), TernaryLattice::new(h).unwrap());
        prop_assert_eq!(theta_coeffs(&l, 60).unwrap(), theta_coeffs(&m, 60).unwrap());
        prop_assert_eq!(automorph_count(&l).unwrap(), automorph_count(&m).unwrap());
    }

    #[test]
    fn representation_inequalities(idx in 0usize..4, m in 1u64..150, k in 1u64..4) {
        let l = TernaryLattice::new(ternaries()[idx].clone()).unwrap();
        let r = rep_number(&l, m).unwrap();
        let rs = primitive_rep_number(&l, m).unwrap();
        prop_assert!(rs <= r);
        prop_assert_eq!(r % 2, 0);
        if arith::is_squarefree(m) {
            prop_assert_eq!(r, rs);
        }
        prop_assert!(rep_number(&l, k * k * m).unwrap() >= rs);
        prop_assert_eq!(theta_coeffs(&l, m).unwrap()[m as usize], r);
    }
}
