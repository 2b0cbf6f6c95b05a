//! Joint faces, join fans and the truncated universal groupoid `L_0..L_3`.
//!
//! A joint face of a tuple `(Q_0, ..., Q_n)` of monoids over `P` is a choice
//! of face `F_i` in each `Q_i` together with isomorphisms over `P` between
//! the sharpened localizations. Representatives are rooted at index 0: the
//! witness `w_i` maps the stalk of `Q_0` at `F_0` to the stalk of `Q_i` at
//! `F_i`, so `w_0` is the identity and no automorphisms remain to quotient by.
//! The join fan has one point per joint face.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::fan::{descend, etale_fiber_product, fan_isomorphic, Fan, FanError, FanMorphism};
use crate::monoid::{isomorphisms, Element, FineMonoid, MonoidError, MonoidHom};
use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("tuple members have different base monoids")]
    BaseMismatch,
    #[error("empty tuple")]
    EmptyTuple,
    #[error("split index {split} out of range for a tuple of length {len}")]
    BadSplit { split: usize, len: usize },
    #[error("no charts given")]
    NoCharts,
    #[error("joint face missing from the target join")]
    Malformed,
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

pub type Result<T> = std::result::Result<T, GroupoidError>;

/// A fine monoid `Q` with a structure homomorphism `P -> Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PMonoid {
    structure: MonoidHom,
}

impl PMonoid {
    pub fn new(structure: MonoidHom) -> Self {
        PMonoid { structure }
    }

    /// `Q` over the trivial monoid.
    pub fn over_trivial(q: &FineMonoid) -> Self {
        PMonoid {
            structure: MonoidHom::zero(&FineMonoid::trivial(), q),
        }
    }

    pub fn base(&self) -> &FineMonoid {
        self.structure.source()
    }

    pub fn monoid(&self) -> &FineMonoid {
        self.structure.target()
    }

    pub fn structure(&self) -> &MonoidHom {
        &self.structure
    }

    pub fn spec(&self) -> Fan {
        Fan::spec_over(self.monoid(), &self.structure)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointFace {
    /// point of `Spec(Q_i)` (a face of `Q_i`) for each member
    pub points: Vec<usize>,
    /// `witnesses[i]`: stalk of `Q_0` at `points[0]` to stalk of `Q_i` at `points[i]`
    pub witnesses: Vec<MonoidHom>,
}

type FaceKey = (Vec<usize>, Vec<Vec<Element>>);

impl JointFace {
    fn key(&self) -> FaceKey {
        (
            self.points.clone(),
            self.witnesses[1..]
                .iter()
                .map(|w| w.images().to_vec())
                .collect(),
        )
    }
}

pub struct JoinFan {
    tuple: Vec<PMonoid>,
    specs: Vec<Fan>,
    joint_faces: Vec<JointFace>,
    index: HashMap<FaceKey, usize>,
    fan: Arc<Fan>,
}

impl JoinFan {
    pub fn tuple(&self) -> &[PMonoid] {
        &self.tuple
    }

    pub fn joint_faces(&self) -> &[JointFace] {
        &self.joint_faces
    }

    pub fn fan(&self) -> &Arc<Fan> {
        &self.fan
    }

    /// `Spec(Q_i)` as used for the faces of member `i`.
    pub fn member_spec(&self, i: usize) -> &Fan {
        &self.specs[i]
    }

    fn lookup(&self, jf: &JointFace) -> Option<usize> {
        self.index.get(&jf.key()).copied()
    }
}

impl fmt::Debug for JoinFan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JoinFan({} joint faces)", self.joint_faces.len())
    }
}

fn check_tuple(tuple: &[PMonoid]) -> Result<()> {
    let first = tuple.first().ok_or(GroupoidError::EmptyTuple)?;
    if tuple.iter().any(|m| m.base() != first.base()) {
        return Err(GroupoidError::BaseMismatch);
    }
    Ok(())
}

/// All joint faces of a tuple, sorted by member faces and then witnesses.
pub fn joint_face_poset(tuple: &[PMonoid]) -> Result<Vec<JointFace>> {
    Ok(join(tuple)?.joint_faces)
}

/// The join fan `J(Q_0, ..., Q_n)`.
pub fn join(tuple: &[PMonoid]) -> Result<JoinFan> {
    check_tuple(tuple)?;
    let specs: Vec<Fan> = tuple.iter().map(PMonoid::spec).collect();
    join_with_specs(tuple.to_vec(), specs)
}

fn join_with_specs(tuple: Vec<PMonoid>, specs: Vec<Fan>) -> Result<JoinFan> {
    let s0 = &specs[0];
    let mut joint_faces = Vec::new();
    for p0 in 0..s0.len() {
        let root = s0.stalk(p0);
        let mut options: Vec<Vec<(usize, MonoidHom)>> = Vec::with_capacity(specs.len());
        options.push(vec![(p0, MonoidHom::identity(root))]);
        for si in &specs[1..] {
            let mut opts = Vec::new();
            for p in 0..si.len() {
                let st = si.stalk(p);
                if st.gp_rank() != root.gp_rank() {
                    continue;
                }
                for w in isomorphisms(
                    root,
                    st,
                    Some((s0.structure(p0), si.structure(p))),
                    usize::MAX,
                )? {
                    opts.push((p, w));
                }
            }
            options.push(opts);
        }
        let sizes: Vec<usize> = options.iter().map(Vec::len).collect();
        for choice in product_indices(&sizes) {
            let (points, witnesses) = choice
                .iter()
                .zip(&options)
                .map(|(&c, o)| o[c].clone())
                .unzip();
            joint_faces.push(JointFace { points, witnesses });
        }
    }
    let index: HashMap<FaceKey, usize> = joint_faces
        .iter()
        .enumerate()
        .map(|(i, jf)| (jf.key(), i))
        .collect();

    let n = joint_faces.len();
    let mut leq = vec![vec![false; n]; n];
    let mut genmaps = std::collections::BTreeMap::new();
    for (a, jf) in joint_faces.iter().enumerate() {
        let p0 = jf.points[0];
        let inverses: Vec<MonoidHom> = jf
            .witnesses
            .iter()
            .map(MonoidHom::inverse)
            .collect::<std::result::Result<_, _>>()?;
        for q0 in s0.up_set(p0) {
            let g0 = s0.genmap(p0, q0);
            let mut points = vec![q0];
            let mut witnesses = vec![MonoidHom::identity(s0.stalk(q0))];
            for (i, si) in specs.iter().enumerate().skip(1) {
                let pi = jf.points[i];
                let back = inverses[i].then(&g0);
                let pattern: Vec<bool> = back
                    .images()
                    .iter()
                    .map(|x| x.iter().all(Zero::is_zero))
                    .collect();
                let qi = si
                    .up_set(pi)
                    .into_iter()
                    .find(|&q| {
                        let gi = si.genmap(pi, q);
                        gi.images()
                            .iter()
                            .map(|x| x.iter().all(Zero::is_zero))
                            .eq(pattern.iter().copied())
                    })
                    .ok_or(GroupoidError::Malformed)?;
                let gi = si.genmap(pi, qi);
                let images =
                    descend(&g0, &jf.witnesses[i].then(&gi)).ok_or(GroupoidError::Malformed)?;
                points.push(qi);
                witnesses.push(MonoidHom::new_unchecked(
                    s0.stalk(q0).clone(),
                    si.stalk(qi).clone(),
                    images,
                ));
            }
            let b = *index
                .get(&JointFace { points, witnesses }.key())
                .ok_or(GroupoidError::Malformed)?;
            leq[a][b] = true;
            if a != b {
                genmaps.insert((a, b), g0);
            }
        }
    }
    let stalks = joint_faces
        .iter()
        .map(|jf| s0.stalk(jf.points[0]).clone())
        .collect();
    let structure = joint_faces
        .iter()
        .map(|jf| s0.structure(jf.points[0]).clone())
        .collect();
    let labels = joint_faces.iter().map(label).collect();
    let fan = Fan::from_parts(
        tuple[0].base().clone(),
        stalks,
        structure,
        leq,
        genmaps,
        labels,
    );
    Ok(JoinFan {
        tuple,
        specs,
        joint_faces,
        index,
        fan: Arc::new(fan),
    })
}

fn label(jf: &JointFace) -> String {
    let pts: Vec<String> = jf.points.iter().map(ToString::to_string).collect();
    format!("({})", pts.join(","))
}

/// Index vectors of the cartesian product of ranges `0..sizes[i]`, lexicographically.
fn product_indices(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in sizes {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..k).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Restriction `J(Q_0..Q_n) -> J(Q_idx[0]..Q_idx[m])`; repeated indices give
/// degeneracies. `small` must be the join of the selected members.
pub fn tuple_map(big: &JoinFan, small: &JoinFan, idx: &[usize]) -> Result<FanMorphism> {
    let root = idx[0];
    let mut point_map = Vec::with_capacity(big.joint_faces.len());
    let mut stalk_maps = Vec::with_capacity(big.joint_faces.len());
    for jf in &big.joint_faces {
        let inv = jf.witnesses[root].inverse()?;
        let points = idx.iter().map(|&k| jf.points[k]).collect();
        let witnesses = idx.iter().map(|&k| inv.then(&jf.witnesses[k])).collect();
        let b = small
            .lookup(&JointFace { points, witnesses })
            .ok_or(GroupoidError::Malformed)?;
        point_map.push(b);
        stalk_maps.push(inv);
    }
    Ok(FanMorphism::from_parts(
        big.fan.clone(),
        small.fan.clone(),
        point_map,
        stalk_maps,
    ))
}

/// Outcome of [`facelem_check`], with the comparison map when it succeeds.
pub struct FacelemOutcome {
    pub passed: bool,
    pub join_points: usize,
    pub product_points: usize,
    pub witness: Option<FanMorphism>,
}

/// Runs [`facelem_check`] on every `(tuple, split)` pair.
pub fn facelem_sweep(cases: &[(Vec<PMonoid>, usize)], exec: Exec) -> Vec<Result<FacelemOutcome>> {
    exec.map(cases, |(tuple, split)| facelem_check(tuple, *split))
}

/// Compares `J(Q_0..Q_n)` with `J(Q_0..Q_l) ×_{Spec Q_l} J(Q_l..Q_n)`.
pub fn facelem_check(tuple: &[PMonoid], split: usize) -> Result<FacelemOutcome> {
    check_tuple(tuple)?;
    let n = tuple.len();
    if split >= n {
        return Err(GroupoidError::BadSplit { split, len: n });
    }
    let whole = join(tuple)?;
    let left = join_with_specs(tuple[..=split].to_vec(), whole.specs[..=split].to_vec())?;
    let right = join_with_specs(tuple[split..].to_vec(), whole.specs[split..].to_vec())?;
    let middle = join_with_specs(vec![tuple[split].clone()], vec![whole.specs[split].clone()])?;
    let f = tuple_map(&left, &middle, &[split])?;
    let g = tuple_map(&right, &middle, &[0])?;
    let product = etale_fiber_product(&f, &g)?;
    let to_left = tuple_map(&whole, &left, &(0..=split).collect::<Vec<_>>())?;
    let to_right = tuple_map(&whole, &right, &(split..n).collect::<Vec<_>>())?;
    let witness = product
        .pair_into(&to_left, &to_right)
        .filter(FanMorphism::is_isomorphism)
        .or_else(|| fan_isomorphic(&whole.fan, &product.fan));
    Ok(FacelemOutcome {
        passed: witness.is_some(),
        join_points: whole.fan.len(),
        product_points: product.fan.len(),
        witness,
    })
}

/// One simplicial level: the disjoint union of joins over all tuples.
pub struct Level {
    pub tuples: Vec<Vec<usize>>,
    pub joins: Vec<JoinFan>,
    pub offsets: Vec<usize>,
    pub fan: Arc<Fan>,
}

impl Level {
    fn component(&self, tuple: &[usize]) -> usize {
        self.tuples
            .iter()
            .position(|t| t == tuple)
            .expect("every tuple has a component")
    }
}

pub struct GroupoidTruncation {
    base: FineMonoid,
    charts: Vec<PMonoid>,
    levels: Vec<Level>,
}

impl GroupoidTruncation {
    pub fn base(&self) -> &FineMonoid {
        &self.base
    }

    pub fn charts(&self) -> &[PMonoid] {
        &self.charts
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n]
    }

    /// Face map `d_i: L_n -> L_(n-1)`, dropping index `i`.
    pub fn face_map(&self, n: usize, i: usize) -> Result<FanMorphism> {
        let idx: Vec<usize> = (0..=n).filter(|&k| k != i).collect();
        self.level_map(n, n - 1, &idx)
    }

    /// Degeneracy `s_i: L_n -> L_(n+1)`, repeating index `i`.
    pub fn degeneracy(&self, n: usize, i: usize) -> Result<FanMorphism> {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.insert(i, i);
        self.level_map(n, n + 1, &idx)
    }

    /// Source `s = d_1` and target `t = d_0` on `L_1`.
    pub fn source_map(&self) -> Result<FanMorphism> {
        self.face_map(1, 1)
    }

    pub fn target_map(&self) -> Result<FanMorphism> {
        self.face_map(1, 0)
    }

    /// Map `L_from -> L_to` selecting tuple entries `idx`.
    pub fn level_map(&self, from: usize, to: usize, idx: &[usize]) -> Result<FanMorphism> {
        let (src, dst) = (&self.levels[from], &self.levels[to]);
        let mut point_map = vec![0; src.fan.len()];
        let mut stalk_maps = Vec::with_capacity(src.fan.len());
        for (k, tuple) in src.tuples.iter().enumerate() {
            let sub: Vec<usize> = idx.iter().map(|&i| tuple[i]).collect();
            let c = dst.component(&sub);
            let f = tuple_map(&src.joins[k], &dst.joins[c], idx)?;
            for (a, &b) in f.point_map().iter().enumerate() {
                point_map[src.offsets[k] + a] = dst.offsets[c] + b;
            }
            stalk_maps.extend(f.stalk_maps().iter().cloned());
        }
        Ok(FanMorphism::from_parts(
            src.fan.clone(),
            dst.fan.clone(),
            point_map,
            stalk_maps,
        ))
    }
}

/// Builds `L_0..L_top` (`top <= 3`) for a chart set over a common base.
pub fn build_truncation(charts: &[PMonoid], top: usize, exec: Exec) -> Result<GroupoidTruncation> {
    let first = charts.first().ok_or(GroupoidError::NoCharts)?;
    check_tuple(charts)?;
    let base = first.base().clone();
    let specs: Vec<Fan> = exec.map(charts, PMonoid::spec);
    let mut levels = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let tuples = all_tuples(charts.len(), n + 1);
        let joins: Vec<Result<JoinFan>> = exec.map(&tuples, |t| {
            join_with_specs(
                t.iter().map(|&i| charts[i].clone()).collect(),
                t.iter().map(|&i| specs[i].clone()).collect(),
            )
        });
        let joins: Vec<JoinFan> = joins.into_iter().collect::<Result<_>>()?;
        let parts: Vec<Fan> = joins.iter().map(|j| (*j.fan).clone()).collect();
        let (fan, offsets) = Fan::disjoint_union(&parts, &base)?;
        levels.push(Level {
            tuples,
            joins,
            offsets,
            fan: Arc::new(fan),
        });
    }
    Ok(GroupoidTruncation {
        base,
        charts: charts.to_vec(),
        levels,
    })
}

/// All tuples of the given length over `0..k`, lexicographically.
pub fn all_tuples(k: usize, len: usize) -> Vec<Vec<usize>> {
    product_indices(&vec![k; len])
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomCheck {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidReport {
    pub simplicial: AxiomCheck,
    pub segal: AxiomCheck,
    pub associativity: AxiomCheck,
    pub unique_lift: AxiomCheck,
    /// number of lifts found for each (test fan, f, g) triple
    pub lift_counts: Vec<usize>,
    pub scope: String,
}

impl GroupoidReport {
    pub fn passed(&self) -> bool {
        self.simplicial.passed()
            && self.segal.passed()
            && self.associativity.passed()
            && self.unique_lift.passed()
    }
}

/// Checks the groupoid axioms on a truncation with at least levels 0..3.
pub fn verify_groupoid(t: &GroupoidTruncation) -> Result<GroupoidReport> {
    let top = t.levels.len() - 1;
    let mut simplicial = AxiomCheck::default();
    let d = |n: usize, i: usize| t.face_map(n, i);
    let s = |n: usize, i: usize| t.degeneracy(n, i);

    for n in 2..=top {
        for j in 0..=n {
            for i in 0..j {
                // d_i d_j = d_(j-1) d_i on L_n
                let lhs = d(n, j)?.then(&d(n - 1, i)?);
                let rhs = d(n, i)?.then(&d(n - 1, j - 1)?);
                simplicial.record(lhs == rhs, || {
                    format!("d{i} d{j} != d{} d{i} on L{n}", j - 1)
                });
            }
        }
    }
    for n in 0..top {
        let id = FanMorphism::identity(&t.levels[n].fan);
        for j in 0..=n {
            let sj = s(n, j)?;
            simplicial.record(sj.then(&d(n + 1, j)?) == id, || {
                format!("d{j} s{j} != id on L{n}")
            });
            simplicial.record(sj.then(&d(n + 1, j + 1)?) == id, || {
                format!("d{} s{j} != id on L{n}", j + 1)
            });
            for i in 0..=n + 1 {
                if i < j {
                    let lhs = sj.then(&d(n + 1, i)?);
                    let rhs = d(n, i)?.then(&s(n - 1, j - 1)?);
                    simplicial.record(lhs == rhs, || {
                        format!("d{i} s{j} != s{} d{i} on L{n}", j - 1)
                    });
                } else if i > j + 1 {
                    let lhs = sj.then(&d(n + 1, i)?);
                    let rhs = d(n, i - 1)?.then(&s(n - 1, j)?);
                    simplicial.record(lhs == rhs, || {
                        format!("d{i} s{j} != s{j} d{} on L{n}", i - 1)
                    });
                }
            }
        }
        if n + 2 <= top {
            for j in 0..=n {
                for i in 0..=j {
                    let lhs = s(n, j)?.then(&s(n + 1, i)?);
                    let rhs = s(n, i)?.then(&s(n + 1, j + 1)?);
                    simplicial.record(lhs == rhs, || {
                        format!("s{i} s{j} != s{} s{i} on L{n}", j + 1)
                    });
                }
            }
        }
    }
    for n in 1..=top {
        for i in 0..=n {
            simplicial.record(d(n, i)?.is_etale(), || format!("d{i} on L{n} is not etale"));
        }
    }

    let mut segal = AxiomCheck::default();
    if top >= 2 {
        let src = t.source_map()?;
        let tgt = t.target_map()?;
        for n in 2..=top {
            let edge = |k: usize| t.level_map(n, 1, &[k, k + 1]);
            // iterated product L1 ×_{L0} L1 ×_{L0} ... along t(first) = s(second)
            let mut acc_map = edge(0)?;
            let mut acc_tail = tgt.clone();
            let mut ok = true;
            let mut points = 0;
            for k in 1..n {
                let prod = etale_fiber_product(&acc_tail, &src)?;
                match prod.pair_into(&acc_map, &edge(k)?) {
                    Some(m) => {
                        acc_tail = prod.p2.then(&tgt);
                        acc_map = m;
                        points = prod.fan.len();
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            let iso = ok && acc_map.is_isomorphism();
            segal.record(iso, || {
                format!("Segal map on L{n} is not an isomorphism ({points} product points)")
            });
        }
    }

    let mut associativity = AxiomCheck::default();
    if top >= 3 {
        let a = d(3, 2)?.then(&d(2, 1)?);
        let b = d(3, 1)?.then(&d(2, 1)?);
        associativity.record(a == b, || {
            "composites L3 -> L1 through (0,1,3) and (0,2,3) differ".to_string()
        });
        // composition is associative on every pointwise triple as well
        for (k, tuple) in t.levels[3].tuples.iter().enumerate() {
            let off = t.levels[3].offsets[k];
            let len = t.levels[3].joins[k].fan.len();
            let same = (off..off + len).all(|p| a.point_map()[p] == b.point_map()[p]);
            associativity.record(same, || format!("composites disagree on tuple {tuple:?}"));
        }
    }

    let (unique_lift, lift_counts) = unique_lift_check(t)?;
    let scope = format!(
        "truncated at L{top}; {} chart(s) over base {}; affine base only",
        t.charts.len(),
        t.base
    );
    Ok(GroupoidReport {
        simplicial,
        segal,
        associativity,
        unique_lift,
        lift_counts,
        scope,
    })
}

/// For every affine test fan `Spec S` (one per isomorphism class of stalks
/// of `L_0`) and every pair of étale maps `f, g: Spec S -> L_0`, counts the
/// maps `h: Spec S -> L_1` with `s h = f` and `t h = g` by exhaustive
/// enumeration of étale maps into `L_1`.
fn unique_lift_check(t: &GroupoidTruncation) -> Result<(AxiomCheck, Vec<usize>)> {
    let mut check = AxiomCheck::default();
    let mut counts = Vec::new();
    if t.levels.len() < 2 {
        return Ok((check, counts));
    }
    let l0 = &t.levels[0].fan;
    let l1 = &t.levels[1].fan;
    let src = t.source_map()?;
    let tgt = t.target_map()?;
    let mut tests: Vec<(FineMonoid, MonoidHom)> = Vec::new();
    for z in 0..l0.len() {
        let st = l0.stalk(z);
        let structure = l0.structure(z);
        let seen = tests.iter().any(|(m, sm)| {
            !isomorphisms(st, m, Some((structure, sm)), 1)
                .unwrap_or_default()
                .is_empty()
        });
        if !seen {
            tests.push((st.clone(), structure.clone()));
        }
    }
    for (m, structure) in &tests {
        let spec = Arc::new(Fan::spec_over(m, structure));
        let fs = affine_etale_maps(&spec, l0)?;
        let hs = affine_etale_maps(&spec, l1)?;
        let mut table = vec![vec![0usize; fs.len()]; fs.len()];
        for h in &hs {
            let sf = h.then(&src);
            let tg = h.then(&tgt);
            let (Some(i), Some(j)) = (
                fs.iter().position(|f| *f == sf),
                fs.iter().position(|f| *f == tg),
            ) else {
                check.record(false, || {
                    "lift does not project to an enumerated map".to_string()
                });
                continue;
            };
            table[i][j] += 1;
        }
        for (i, row) in table.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                counts.push(c);
                check.record(c == 1, || {
                    format!("test fan {m}: pair ({i},{j}) has {c} lifts")
                });
            }
        }
    }
    Ok((check, counts))
}

/// All étale maps `Spec S -> X`, where `spec` is `Spec S` (closed point 0).
/// Such a map is fixed by the image `z` of the closed point and an
/// isomorphism `stalk_X(z) -> S` over the base.
pub fn affine_etale_maps(spec: &Arc<Fan>, x: &Arc<Fan>) -> Result<Vec<FanMorphism>> {
    let s = spec.stalk(0);
    let mut out = Vec::new();
    for z in 0..x.len() {
        let up = x.up_set(z);
        if up.len() != spec.len() {
            continue;
        }
        for alpha in isomorphisms(
            x.stalk(z),
            s,
            Some((x.structure(z), spec.structure(0))),
            usize::MAX,
        )? {
            if let Some(f) = affine_map(spec, x, z, &alpha) {
                out.push(f);
            }
        }
    }
    Ok(out)
}

fn affine_map(spec: &Arc<Fan>, x: &Arc<Fan>, z: usize, alpha: &MonoidHom) -> Option<FanMorphism> {
    let n = spec.len();
    let mut point_map = vec![usize::MAX; n];
    let mut stalk_maps: Vec<Option<MonoidHom>> = vec![None; n];
    let inv = alpha.inverse().ok()?;
    for z2 in x.up_set(z) {
        let gz = x.genmap(z, z2);
        // generators of S killed by gz ∘ alpha^-1 determine the face
        let pattern: Vec<bool> = inv
            .then(&gz)
            .images()
            .iter()
            .map(|v| v.iter().all(Zero::is_zero))
            .collect();
        let g = (0..n).find(|&g| {
            spec.genmap(0, g)
                .images()
                .iter()
                .map(|v| v.iter().all(Zero::is_zero))
                .eq(pattern.iter().copied())
        })?;
        let images = descend(&gz, &alpha.then(&spec.genmap(0, g)))?;
        point_map[g] = z2;
        stalk_maps[g] = Some(MonoidHom::new_unchecked(
            x.stalk(z2).clone(),
            spec.stalk(g).clone(),
            images,
        ));
    }
    let stalk_maps: Option<Vec<MonoidHom>> = stalk_maps.into_iter().collect();
    let f = FanMorphism::from_parts(spec.clone(), x.clone(), point_map, stalk_maps?);
    (f.validate().is_ok() && f.is_etale()).then_some(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn over0(q: FineMonoid) -> PMonoid {
        PMonoid::over_trivial(&q)
    }

    #[test]
    fn single_member_join_is_spec() {
        let q = FineMonoid::natural(2);
        let j = join(&[over0(q.clone())]).unwrap();
        j.fan().validate().unwrap();
        assert_eq!(j.joint_faces().len(), 4);
        assert!(fan_isomorphic(j.fan(), &Arc::new(Fan::spec(&q))).is_some());
    }

    #[test]
    fn joint_face_counts() {
        let n = over0(FineMonoid::natural(1));
        let n2 = over0(FineMonoid::natural(2));
        assert_eq!(joint_face_poset(&[n.clone(), n.clone()]).unwrap().len(), 2);
        assert_eq!(joint_face_poset(&[n2.clone(), n.clone()]).unwrap().len(), 3);
        assert_eq!(joint_face_poset(&[n.clone(), n2.clone()]).unwrap().len(), 3);
        assert_eq!(joint_face_poset(&[n2.clone(), n2]).unwrap().len(), 7);
    }

    #[test]
    fn join_n_n_is_spec_n() {
        let n = over0(FineMonoid::natural(1));
        let j = join(&[n.clone(), n]).unwrap();
        j.fan().validate().unwrap();
        assert!(fan_isomorphic(j.fan(), &Arc::new(Fan::spec(&FineMonoid::natural(1)))).is_some());
    }

    #[test]
    fn facelem_small() {
        let n = over0(FineMonoid::natural(1));
        let n2 = over0(FineMonoid::natural(2));
        assert!(facelem_check(std::slice::from_ref(&n), 0).unwrap().passed);
        assert!(facelem_check(&[n.clone(), n.clone()], 1).unwrap().passed);
        assert!(facelem_check(&[n2, n.clone(), n], 1).unwrap().passed);
    }

    #[test]
    fn base_mismatch() {
        let a = over0(FineMonoid::natural(1));
        let nat = FineMonoid::natural(1);
        let b = PMonoid::new(MonoidHom::identity(&nat));
        assert!(matches!(join(&[a, b]), Err(GroupoidError::BaseMismatch)));
    }

    #[test]
    fn truncation_for_n() {
        let t = build_truncation(&[over0(FineMonoid::natural(1))], 3, Exec::Sequential).unwrap();
        assert_eq!(t.level(0).fan.len(), 2);
        assert_eq!(t.level(1).fan.len(), 2);
        let r = verify_groupoid(&t).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.lift_counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn truncation_for_n_and_n2() {
        let charts = [over0(FineMonoid::natural(1)), over0(FineMonoid::natural(2))];
        let t = build_truncation(&charts, 3, Exec::Parallel).unwrap();
        assert_eq!(t.level(0).fan.len(), 6);
        assert_eq!(t.level(1).joins.len(), 4);
        let r = verify_groupoid(&t).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
