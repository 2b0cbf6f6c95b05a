//! The standard test corpus of small fine monoids.

use num_bigint::BigInt;

use crate::groupoid::PMonoid;
use crate::monoid::{Ambient, FineMonoid, MonoidHom};

/// Named corpus monoids: `0`, `N`, `N^2`, `N^3`, `<2,3>`, the cone over a
/// segment with a middle lattice point, the index-two lattice cone, and a
/// monoid with torsion in its ambient group.
pub fn corpus() -> Vec<(&'static str, FineMonoid)> {
    let torsion = Ambient::new(1, vec![BigInt::from(2)]).expect("valid modulus");
    let tilted = FineMonoid::new(torsion, vec![vec![BigInt::from(1), BigInt::from(1)]])
        .expect("one generator");
    vec![
        ("0", FineMonoid::trivial()),
        ("N", FineMonoid::natural(1)),
        ("N2", FineMonoid::natural(2)),
        ("N3", FineMonoid::natural(3)),
        (
            "S23",
            FineMonoid::free(1, &[vec![2], vec![3]]).expect("valid"),
        ),
        (
            "C3",
            FineMonoid::free(2, &[vec![1, 0], vec![1, 1], vec![1, 2]]).expect("valid"),
        ),
        (
            "A1",
            FineMonoid::free(2, &[vec![2, 0], vec![1, 1], vec![0, 2]]).expect("valid"),
        ),
        ("T", tilted),
    ]
}

pub fn get(name: &str) -> Option<FineMonoid> {
    corpus()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, m)| m)
}

/// `Q` over `N` with `1` sent to the sum of the generators of `Q`.
pub fn over_natural(q: &FineMonoid) -> PMonoid {
    let n = FineMonoid::natural(1);
    let sum = q
        .ambient()
        .combine(&vec![BigInt::from(1); q.len()], q.generators());
    PMonoid::new(MonoidHom::new(n, q.clone(), vec![sum]).expect("sum of generators lies in Q"))
}
