mod oracle;

use katofan_core::abelian::{
    short_exact_check, smith_normal_form, FGAbelianGroup, GroupHom, IntMatrix, LatticeSolver,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let rows = rng.random_range(1..=3);
    let cols = rng.random_range(1..=3);
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-3..=3)).collect())
        .collect()
}

fn cokernel_of(rows: &[Vec<i64>]) -> FGAbelianGroup {
    GroupHom::free(IntMatrix::from_rows(rows)).cokernel()
}

#[test]
fn cokernel_matches_coset_enumeration_on_seeded_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..1000 {
        let a = random_matrix(&mut rng);
        let expected = oracle::coset_cokernel(&a, a[0].len());
        assert_eq!(cokernel_of(&a), expected, "trial {trial}: {a:?}");
    }
}

#[test]
fn oracle_known_groups() {
    assert_eq!(
        oracle::coset_cokernel(&[vec![2]], 1),
        FGAbelianGroup::new(0, vec![BigInt::from(2)]).unwrap()
    );
    assert_eq!(
        oracle::coset_cokernel(&[vec![0]], 1),
        FGAbelianGroup::free(1)
    );
    assert_eq!(
        oracle::coset_cokernel(&[vec![2, 0], vec![0, 4], vec![0, 0]], 2),
        FGAbelianGroup::new(1, vec![BigInt::from(2), BigInt::from(4)]).unwrap()
    );
    assert_eq!(
        oracle::coset_cokernel(&[vec![2, 0], vec![0, 3]], 2),
        FGAbelianGroup::new(0, vec![BigInt::from(6)]).unwrap()
    );
}

fn matrix_strategy(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max, 1..=max)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-4i64..=4, c), r))
}

fn unimodular_strategy(n: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 0..8).prop_map(move |ops| {
        let mut m = IntMatrix::identity(n);
        for (i, j, k, swap) in ops {
            if i == j {
                continue;
            }
            if swap {
                for c in 0..n {
                    let a = m.get(i, c).clone();
                    let b = m.get(j, c).clone();
                    m.set(i, c, b);
                    m.set(j, c, a);
                }
            } else {
                for c in 0..n {
                    let v = m.get(i, c) + m.get(j, c) * k;
                    m.set(i, c, v);
                }
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn snf_diagonalizes_with_unimodular_factors(rows in matrix_strategy(4)) {
        let a = IntMatrix::from_rows(&rows);
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
        prop_assert!(s.d.is_diagonal());
        prop_assert_eq!(s.u.determinant().abs(), BigInt::one());
        prop_assert_eq!(s.v.determinant().abs(), BigInt::one());
        prop_assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(a.rows()));
        let f = s.invariant_factors();
        for w in f.windows(2) {
            prop_assert!(w[1].is_multiple_of(&w[0]));
        }
        prop_assert!(f.iter().all(|x| x.is_positive()));
    }

    #[test]
    fn cokernel_invariant_under_unimodular_change(
        (rows, p, q) in (1usize..=3, 1usize..=3).prop_flat_map(|(r, c)| (
            prop::collection::vec(prop::collection::vec(-4i64..=4, c), r),
            unimodular_strategy(r),
            unimodular_strategy(c),
        ))
    ) {
        let a = IntMatrix::from_rows(&rows);
        let b = p.mul(&a).mul(&q);
        prop_assert_eq!(GroupHom::free(a).cokernel(), GroupHom::free(b).cokernel());
    }

    #[test]
    fn rank_plus_nullity(rows in matrix_strategy(4)) {
        let a = IntMatrix::from_rows(&rows);
        let solver = LatticeSolver::new(&a);
        let kernel = solver.kernel_basis();
        prop_assert_eq!(solver.rank() + kernel.cols(), a.cols());
        prop_assert!(a.mul(&kernel).is_zero());
    }

    #[test]
    fn solutions_reproduce_the_target(rows in matrix_strategy(3), x in prop::collection::vec(-3i64..=3, 3)) {
        let a = IntMatrix::from_rows(&rows);
        let x: Vec<BigInt> = x.into_iter().take(a.cols()).map(BigInt::from).collect();
        let b = a.mul_vec(&x);
        let solver = LatticeSolver::new(&a);
        let y = solver.solve(&b).expect("b is in the image");
        prop_assert_eq!(a.mul_vec(&y), b);
    }

    #[test]
    fn cokernel_order_is_product_of_invariant_factors(rows in matrix_strategy(3)) {
        let a = IntMatrix::from_rows(&rows);
        let g = GroupHom::free(a.clone()).cokernel();
        let s = smith_normal_form(&a);
        prop_assert_eq!(g.rank(), a.rows() - s.rank);
        let prod: BigInt = s.invariant_factors().iter().product();
        prop_assert_eq!(g.torsion_order(), prod);
    }

    // A <= A + Z^n <= C inside Z^dim with the middle sum direct: the torsion
    // of C/A embeds into that of C/(A + Z^n).
    #[test]
    fn torsion_embeds_through_a_free_extension(
        a in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 1..=2),
        extra in prop::collection::vec(-3i64..=3, 3),
    ) {
        let to_big = |v: &Vec<i64>| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        let a_big: Vec<Vec<BigInt>> = a.iter().map(to_big).collect();
        let mut rows = a.clone();
        rows.push(extra.clone());
        // keep A + Z^n direct: the extra vector must be independent of A
        let cols: Vec<Vec<i64>> = (0..3).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        let with = LatticeSolver::new(&IntMatrix::from_rows(&cols)).rank();
        let without = LatticeSolver::new(&IntMatrix::from_rows(&(0..3).map(|j| a.iter().map(|r| r[j]).collect()).collect::<Vec<_>>())).rank();
        prop_assume!(with == without + 1);

        let b: Vec<Vec<BigInt>> = rows.iter().map(to_big).collect();
        let c: Vec<Vec<BigInt>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let report = short_exact_check(3, &a_big, &b, &c).unwrap();
        prop_assert!(report.is_exact());
        prop_assert!(report.c_mod_b.torsion_order().is_multiple_of(&report.c_mod_a.torsion_order()));
        prop_assert_eq!(report.b_mod_a.rank(), 1);
    }
}

#[test]
fn quotient_chain_n_torsion() {
    // 2Z <= Z <= Z gives 0 -> Z/2 -> Z/2 -> 0 -> 0
    let two = vec![vec![BigInt::from(2)]];
    let one = vec![vec![BigInt::one()]];
    let r = short_exact_check(1, &two, &one, &one).unwrap();
    assert!(r.is_exact());
    assert_eq!(
        r.b_mod_a,
        FGAbelianGroup::new(0, vec![BigInt::from(2)]).unwrap()
    );
    assert!(r.c_mod_b.is_trivial());
}
