mod oracle;

use std::sync::Arc;

use katofan_core::corpus::{corpus, get, over_natural};
use katofan_core::fan::{fan_isomorphic, Fan};
use katofan_core::groupoid::{
    build_truncation, facelem_check, join, joint_face_poset, tuple_map, verify_groupoid, PMonoid,
};
use katofan_core::monoid::FineMonoid;
use katofan_core::par::Exec;

fn over_zero(names: &[&str]) -> Vec<PMonoid> {
    names
        .iter()
        .map(|n| PMonoid::over_trivial(&get(n).unwrap()))
        .collect()
}

#[test]
fn join_of_one_monoid_is_its_spec() {
    for (name, m) in corpus() {
        for p in [PMonoid::over_trivial(&m), over_natural(&m)] {
            let j = join(std::slice::from_ref(&p)).unwrap();
            let s = Arc::new(p.spec());
            assert!(fan_isomorphic(j.fan(), &s).is_some(), "{name}");
        }
    }
}

#[test]
fn joint_face_counts_match_the_free_formula() {
    for len in 1..=3 {
        for ranks in katofan_core::groupoid::all_tuples(4, len) {
            let tuple: Vec<PMonoid> = ranks
                .iter()
                .map(|&k| PMonoid::over_trivial(&FineMonoid::natural(k)))
                .collect();
            let ranks64: Vec<u64> = ranks.iter().map(|&k| k as u64).collect();
            let expected = oracle::free_joint_face_count(&ranks64);
            assert_eq!(
                joint_face_poset(&tuple).unwrap().len() as u64,
                expected,
                "{ranks:?}"
            );
        }
    }
}

#[test]
fn joint_face_count_ignores_order() {
    let c = corpus();
    for (a, m) in &c {
        for (b, n) in &c {
            let ab =
                joint_face_poset(&[PMonoid::over_trivial(m), PMonoid::over_trivial(n)]).unwrap();
            let ba =
                joint_face_poset(&[PMonoid::over_trivial(n), PMonoid::over_trivial(m)]).unwrap();
            assert_eq!(ab.len(), ba.len(), "{a} {b}");
        }
    }
}

#[test]
fn joins_project_to_their_members() {
    let tuple = over_zero(&["N2", "C3", "N"]);
    let big = join(&tuple).unwrap();
    for i in 0..tuple.len() {
        let small = join(&tuple[i..=i]).unwrap();
        let f = tuple_map(&big, &small, &[i]).unwrap();
        assert!(f.is_etale(), "{i}");
        assert!(f.validate().is_ok());
    }
    let pair = join(&tuple[..2]).unwrap();
    assert!(tuple_map(&big, &pair, &[0, 1]).unwrap().is_etale());
}

#[test]
fn facelem_over_short_tuples() {
    let c = corpus();
    for (a, m) in &c {
        for (b, n) in &c {
            let tuple = [PMonoid::over_trivial(m), PMonoid::over_trivial(n)];
            for split in 0..2 {
                let r = facelem_check(&tuple, split).unwrap();
                assert!(r.passed, "{a} {b} split {split}");
                assert_eq!(r.join_points, r.product_points);
                let w = r.witness.expect("passing checks carry a witness");
                assert!(w.is_isomorphism());
            }
        }
    }
}

#[test]
fn truncation_satisfies_the_axioms() {
    for charts in [
        over_zero(&["N"]),
        over_zero(&["N", "S23"]),
        over_zero(&["T", "C3"]),
    ] {
        let t = build_truncation(&charts, 3, Exec::Parallel).unwrap();
        let r = verify_groupoid(&t).unwrap();
        assert!(
            r.passed(),
            "{:?} {:?} {:?} {:?}",
            r.simplicial.failures,
            r.segal.failures,
            r.associativity.failures,
            r.unique_lift.failures
        );
        assert!(r.lift_counts.iter().all(|&n| n == 1));
        for n in 0..=3 {
            let expected = t.level(n).tuples.len();
            assert_eq!(expected, charts.len().pow(n as u32 + 1));
        }
    }
    let charts: Vec<PMonoid> = ["N", "N2"]
        .iter()
        .map(|n| over_natural(&get(n).unwrap()))
        .collect();
    let t = build_truncation(&charts, 3, Exec::Sequential).unwrap();
    assert!(verify_groupoid(&t).unwrap().passed());
}

#[test]
fn sequential_and_parallel_truncations_agree() {
    let charts = over_zero(&["N", "N2"]);
    let a = build_truncation(&charts, 2, Exec::Sequential).unwrap();
    let b = build_truncation(&charts, 2, Exec::Parallel).unwrap();
    for n in 0..=2 {
        assert_eq!(a.level(n).fan, b.level(n).fan);
        assert_eq!(a.level(n).tuples, b.level(n).tuples);
    }
}

#[test]
fn source_and_target_split_the_degeneracy() {
    let charts = over_zero(&["N", "C3"]);
    let t = build_truncation(&charts, 1, Exec::Parallel).unwrap();
    let e = t.degeneracy(0, 0).unwrap();
    let id = katofan_core::fan::FanMorphism::identity(&t.level(0).fan);
    assert_eq!(e.then(&t.source_map().unwrap()), id);
    assert_eq!(e.then(&t.target_map().unwrap()), id);
    let l0: &Fan = &t.level(0).fan;
    assert_eq!(
        l0.len(),
        charts.iter().map(|c| c.spec().len()).sum::<usize>()
    );
}
