//! Kato fans modeled as finite posets with sharp monoid stalks.
//!
//! A point `a` lies below `b` (`a <= b`) when `b` is a generization of `a`;
//! the up-set of a point is its smallest open neighbourhood. Every fan
//! carries a base monoid `P` and structure maps `P -> stalk(a)` so that
//! fans over a fixed `P` and their morphisms can be compared.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::abelian::{IntMatrix, LatticeSolver};
use crate::monoid::{isomorphisms, Element, FineMonoid, MonoidError, MonoidHom};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("unknown point {0}")]
    UnknownPoint(usize),
    #[error("order is not a partial order")]
    NotPartialOrder,
    #[error("stalk at point {0} is not sharp")]
    StalkNotSharp(usize),
    #[error("missing or inconsistent generization map {0} -> {1}")]
    BadGenmap(usize, usize),
    #[error("structure map at point {0} is incompatible")]
    BadStructure(usize),
    #[error("point map is not monotone at {0} <= {1}")]
    NotMonotone(usize, usize),
    #[error("stalk map at point {0} is incompatible")]
    BadStalkMap(usize),
    #[error("fans live over different base monoids")]
    BaseMismatch,
    #[error("morphism is not etale")]
    NotEtale,
    #[error("morphisms have different targets")]
    TargetMismatch,
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

pub type Result<T> = std::result::Result<T, FanError>;

#[derive(Clone)]
pub struct Fan {
    base: FineMonoid,
    stalks: Vec<FineMonoid>,
    structure: Vec<MonoidHom>,
    leq: Vec<Vec<bool>>,
    genmaps: BTreeMap<(usize, usize), MonoidHom>,
    labels: Vec<String>,
}

impl Fan {
    /// Validating constructor. `genmaps` must hold a map for every strict
    /// relation `a < b`.
    pub fn new(
        base: FineMonoid,
        stalks: Vec<FineMonoid>,
        structure: Vec<MonoidHom>,
        leq: Vec<Vec<bool>>,
        genmaps: BTreeMap<(usize, usize), MonoidHom>,
    ) -> Result<Self> {
        let labels = (0..stalks.len()).map(|i| i.to_string()).collect();
        let fan = Fan {
            base,
            stalks,
            structure,
            leq,
            genmaps,
            labels,
        };
        fan.validate()?;
        Ok(fan)
    }

    pub(crate) fn from_parts(
        base: FineMonoid,
        stalks: Vec<FineMonoid>,
        structure: Vec<MonoidHom>,
        leq: Vec<Vec<bool>>,
        genmaps: BTreeMap<(usize, usize), MonoidHom>,
        labels: Vec<String>,
    ) -> Self {
        Fan {
            base,
            stalks,
            structure,
            leq,
            genmaps,
            labels,
        }
    }

    /// `Spec(Q)` over the trivial base.
    pub fn spec(q: &FineMonoid) -> Fan {
        let base = FineMonoid::trivial();
        let structure = MonoidHom::zero(&base, q);
        Self::spec_over(q, &structure)
    }

    /// `Spec(Q)` with stalks over `P` through `structure: P -> Q`.
    ///
    /// Points are the faces of `Q` in canonical face order; the point of face
    /// `F` lies below the point of `G` when `F ⊆ G`, and its stalk is the
    /// sharpened localization at `F`.
    pub fn spec_over(q: &FineMonoid, structure: &MonoidHom) -> Fan {
        let faces: Vec<Vec<usize>> = q.face_index_sets().to_vec();
        let locs: Vec<_> = faces.iter().map(|f| q.sharp_localize_indices(f)).collect();
        let n = faces.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| faces[a].iter().all(|i| faces[b].contains(i)))
                    .collect()
            })
            .collect();
        let mut genmaps = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if a == b || !leq[a][b] {
                    continue;
                }
                let (src, _, _, rep) = &locs[a];
                let to_b = &locs[b].1;
                let images = rep.iter().map(|&i| to_b.images()[i].clone()).collect();
                genmaps.insert(
                    (a, b),
                    MonoidHom::new_unchecked(src.clone(), locs[b].0.clone(), images),
                );
            }
        }
        let stalks = locs.iter().map(|l| l.0.clone()).collect();
        let structs = locs.iter().map(|l| structure.then(&l.1)).collect();
        let labels = faces
            .iter()
            .map(|f| {
                format!(
                    "{{{}}}",
                    f.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        Fan::from_parts(
            structure.source().clone(),
            stalks,
            structs,
            leq,
            genmaps,
            labels,
        )
    }

    /// Disjoint union of fans over a common base, with the offset of each part.
    pub fn disjoint_union(parts: &[Fan], base: &FineMonoid) -> Result<(Fan, Vec<usize>)> {
        let mut stalks = Vec::new();
        let mut structure = Vec::new();
        let mut labels = Vec::new();
        let mut genmaps = BTreeMap::new();
        let mut offsets = Vec::with_capacity(parts.len());
        let total: usize = parts.iter().map(Fan::len).sum();
        let mut leq = vec![vec![false; total]; total];
        for (k, part) in parts.iter().enumerate() {
            if &part.base != base {
                return Err(FanError::BaseMismatch);
            }
            let off = stalks.len();
            offsets.push(off);
            for a in 0..part.len() {
                for b in 0..part.len() {
                    leq[off + a][off + b] = part.leq[a][b];
                }
            }
            for ((a, b), h) in &part.genmaps {
                genmaps.insert((off + a, off + b), h.clone());
            }
            stalks.extend(part.stalks.iter().cloned());
            structure.extend(part.structure.iter().cloned());
            labels.extend(part.labels.iter().map(|l| format!("{k}:{l}")));
        }
        Ok((
            Fan::from_parts(base.clone(), stalks, structure, leq, genmaps, labels),
            offsets,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.leq.len() != n || self.structure.len() != n || self.labels.len() != n {
            return Err(FanError::NotPartialOrder);
        }
        for a in 0..n {
            if self.leq[a].len() != n || !self.leq[a][a] {
                return Err(FanError::NotPartialOrder);
            }
            for b in 0..n {
                if a != b && self.leq[a][b] && self.leq[b][a] {
                    return Err(FanError::NotPartialOrder);
                }
                for c in 0..n {
                    if self.leq[a][b] && self.leq[b][c] && !self.leq[a][c] {
                        return Err(FanError::NotPartialOrder);
                    }
                }
            }
        }
        for (a, s) in self.stalks.iter().enumerate() {
            if !s.is_sharp() {
                return Err(FanError::StalkNotSharp(a));
            }
            let st = &self.structure[a];
            if st.source() != &self.base || st.target() != s {
                return Err(FanError::BadStructure(a));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a == b || !self.leq[a][b] {
                    if self.genmaps.contains_key(&(a, b)) {
                        return Err(FanError::BadGenmap(a, b));
                    }
                    continue;
                }
                let h = self.genmaps.get(&(a, b)).ok_or(FanError::BadGenmap(a, b))?;
                if h.source() != &self.stalks[a] || h.target() != &self.stalks[b] {
                    return Err(FanError::BadGenmap(a, b));
                }
                if self.structure[a].then(h) != self.structure[b] {
                    return Err(FanError::BadStructure(b));
                }
                for c in 0..n {
                    if c != b
                        && self.leq[b][c]
                        && self.genmap(a, b).then(&self.genmap(b, c)) != self.genmap(a, c)
                    {
                        return Err(FanError::BadGenmap(a, c));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.stalks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stalks.is_empty()
    }

    pub fn base(&self) -> &FineMonoid {
        &self.base
    }

    pub fn stalk(&self, a: usize) -> &FineMonoid {
        &self.stalks[a]
    }

    pub fn stalks(&self) -> &[FineMonoid] {
        &self.stalks
    }

    pub fn structure(&self, a: usize) -> &MonoidHom {
        &self.structure[a]
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.len());
        self.labels = labels;
        self
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// Generization map `stalk(a) -> stalk(b)` for `a <= b`.
    pub fn genmap(&self, a: usize, b: usize) -> MonoidHom {
        assert!(self.leq[a][b], "no generization {a} -> {b}");
        if a == b {
            MonoidHom::identity(&self.stalks[a])
        } else {
            self.genmaps[&(a, b)].clone()
        }
    }

    pub fn genmaps(&self) -> &BTreeMap<(usize, usize), MonoidHom> {
        &self.genmaps
    }

    pub fn up_set(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.leq[a][b]).collect()
    }

    pub fn down_set(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.leq[b][a]).collect()
    }

    /// Cover relations `(a, b)`: `a < b` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b
                    && self.leq[a][b]
                    && !(0..n).any(|c| c != a && c != b && self.leq[a][c] && self.leq[c][b])
                {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Points with nothing below them.
    pub fn closed_points(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| self.down_set(a).len() == 1)
            .collect()
    }

    /// Connected components of the comparability graph, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            comp[start] = id;
            while let Some(a) = stack.pop() {
                members.push(a);
                for (b, c) in comp.iter_mut().enumerate() {
                    if *c == usize::MAX && (self.leq[a][b] || self.leq[b][a]) {
                        *c = id;
                        stack.push(b);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Full subfan on a subset of points (kept in the given order).
    pub fn restrict(&self, points: &[usize]) -> Fan {
        let stalks = points.iter().map(|&a| self.stalks[a].clone()).collect();
        let structure = points.iter().map(|&a| self.structure[a].clone()).collect();
        let leq = points
            .iter()
            .map(|&a| points.iter().map(|&b| self.leq[a][b]).collect())
            .collect();
        let mut genmaps = BTreeMap::new();
        for (i, &a) in points.iter().enumerate() {
            for (j, &b) in points.iter().enumerate() {
                if let Some(h) = self.genmaps.get(&(a, b)) {
                    genmaps.insert((i, j), h.clone());
                }
            }
        }
        let labels = points.iter().map(|&a| self.labels[a].clone()).collect();
        Fan::from_parts(self.base.clone(), stalks, structure, leq, genmaps, labels)
    }

    /// The up-set of `x` with its open immersion into `self`.
    pub fn open_subfan(self: &Arc<Self>, x: usize) -> Result<(Arc<Fan>, FanMorphism)> {
        if x >= self.len() {
            return Err(FanError::UnknownPoint(x));
        }
        let points = self.up_set(x);
        let sub = Arc::new(self.restrict(&points));
        let stalk_maps = points
            .iter()
            .map(|&a| MonoidHom::identity(&self.stalks[a]))
            .collect();
        let f = FanMorphism::from_parts(sub.clone(), self.clone(), points, stalk_maps);
        Ok((sub, f))
    }

    fn point_invariant(&self, a: usize) -> (usize, usize, usize, usize) {
        let s = &self.stalks[a];
        let irr = s
            .irreducible_indices()
            .map(<[usize]>::len)
            .unwrap_or(usize::MAX);
        (
            self.up_set(a).len(),
            self.down_set(a).len(),
            s.gp_rank(),
            irr,
        )
    }
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.stalks == other.stalks
            && self.structure == other.structure
            && self.leq == other.leq
            && self.genmaps == other.genmaps
    }
}

impl Eq for Fan {}

impl fmt::Debug for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fan with {} points", self.len())?;
        for a in 0..self.len() {
            writeln!(f, "  {} [{}]: {}", a, self.labels[a], self.stalks[a])?;
        }
        for (a, b) in self.covers() {
            writeln!(f, "  {a} < {b}")?;
        }
        Ok(())
    }
}

/// Morphism of fans; `stalk_maps[x]` goes from the target stalk at `point_map[x]`
/// to the source stalk at `x`.
#[derive(Clone)]
pub struct FanMorphism {
    source: Arc<Fan>,
    target: Arc<Fan>,
    point_map: Vec<usize>,
    stalk_maps: Vec<MonoidHom>,
}

impl FanMorphism {
    pub fn new(
        source: Arc<Fan>,
        target: Arc<Fan>,
        point_map: Vec<usize>,
        stalk_maps: Vec<MonoidHom>,
    ) -> Result<Self> {
        let f = Self::from_parts(source, target, point_map, stalk_maps);
        f.validate()?;
        Ok(f)
    }

    pub(crate) fn from_parts(
        source: Arc<Fan>,
        target: Arc<Fan>,
        point_map: Vec<usize>,
        stalk_maps: Vec<MonoidHom>,
    ) -> Self {
        FanMorphism {
            source,
            target,
            point_map,
            stalk_maps,
        }
    }

    pub fn identity(x: &Arc<Fan>) -> Self {
        let stalk_maps = x.stalks.iter().map(MonoidHom::identity).collect();
        Self::from_parts(x.clone(), x.clone(), (0..x.len()).collect(), stalk_maps)
    }

    pub fn validate(&self) -> Result<()> {
        let (x, y) = (&self.source, &self.target);
        if x.base != y.base {
            return Err(FanError::BaseMismatch);
        }
        if self.point_map.len() != x.len() || self.stalk_maps.len() != x.len() {
            return Err(FanError::UnknownPoint(self.point_map.len()));
        }
        for (a, &fa) in self.point_map.iter().enumerate() {
            if fa >= y.len() {
                return Err(FanError::UnknownPoint(fa));
            }
            let h = &self.stalk_maps[a];
            if h.source() != &y.stalks[fa] || h.target() != &x.stalks[a] {
                return Err(FanError::BadStalkMap(a));
            }
            if y.structure[fa].then(h) != x.structure[a] {
                return Err(FanError::BadStalkMap(a));
            }
        }
        for a in 0..x.len() {
            for b in 0..x.len() {
                if a == b || !x.leq[a][b] {
                    continue;
                }
                let (fa, fb) = (self.point_map[a], self.point_map[b]);
                if !y.leq[fa][fb] {
                    return Err(FanError::NotMonotone(a, b));
                }
                let left = self.stalk_maps[a].then(&x.genmap(a, b));
                let right = y.genmap(fa, fb).then(&self.stalk_maps[b]);
                if left != right {
                    return Err(FanError::BadStalkMap(b));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Arc<Fan> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Fan> {
        &self.target
    }

    pub fn point_map(&self) -> &[usize] {
        &self.point_map
    }

    pub fn stalk_maps(&self) -> &[MonoidHom] {
        &self.stalk_maps
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FanMorphism) -> FanMorphism {
        assert!(
            same_fan(&self.target, &next.source),
            "composing fan morphisms with mismatched fans"
        );
        let point_map = self.point_map.iter().map(|&p| next.point_map[p]).collect();
        let stalk_maps = self
            .point_map
            .iter()
            .zip(&self.stalk_maps)
            .map(|(&p, h)| next.stalk_maps[p].then(h))
            .collect();
        FanMorphism::from_parts(
            self.source.clone(),
            next.target.clone(),
            point_map,
            stalk_maps,
        )
    }

    /// Local isomorphism: stalk maps are isomorphisms and every up-set maps
    /// order-isomorphically onto the up-set of its image.
    pub fn is_etale(&self) -> bool {
        if !self.stalk_maps.iter().all(MonoidHom::is_isomorphism) {
            return false;
        }
        let (x, y) = (&self.source, &self.target);
        (0..x.len()).all(|a| {
            let up = x.up_set(a);
            let mut image: Vec<usize> = up.iter().map(|&b| self.point_map[b]).collect();
            image.sort_unstable();
            image.dedup();
            if image != y.up_set(self.point_map[a]) || image.len() != up.len() {
                return false;
            }
            up.iter().all(|&b| {
                up.iter()
                    .all(|&c| x.leq[b][c] == y.leq[self.point_map[b]][self.point_map[c]])
            })
        })
    }

    pub fn is_isomorphism(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &p in &self.point_map {
            if seen[p] {
                return false;
            }
            seen[p] = true;
        }
        self.source.len() == self.target.len() && self.is_etale()
    }
}

fn same_fan(a: &Arc<Fan>, b: &Arc<Fan>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl PartialEq for FanMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.point_map == other.point_map
            && self.stalk_maps == other.stalk_maps
            && same_fan(&self.source, &other.source)
            && same_fan(&self.target, &other.target)
    }
}

impl fmt::Debug for FanMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FanMorphism({:?})", self.point_map)
    }
}

/// Fiber product of two étale morphisms with common target.
pub struct FiberProduct {
    pub fan: Arc<Fan>,
    pub p1: FanMorphism,
    pub p2: FanMorphism,
    /// for each point of the product, the pair of points it came from
    pub pairs: Vec<(usize, usize)>,
}

impl FiberProduct {
    /// The map `T -> X ×_S Y` induced by `h1: T -> X`, `h2: T -> Y` agreeing over `S`.
    pub fn pair_into(&self, h1: &FanMorphism, h2: &FanMorphism) -> Option<FanMorphism> {
        let point_map: Option<Vec<usize>> = h1
            .point_map
            .iter()
            .zip(&h2.point_map)
            .map(|(&a, &b)| self.pairs.iter().position(|&p| p == (a, b)))
            .collect();
        let f = FanMorphism::from_parts(
            h1.source.clone(),
            self.fan.clone(),
            point_map?,
            h1.stalk_maps.clone(),
        );
        f.validate().ok()?;
        (f.then(&self.p2) == *h2).then_some(f)
    }
}

pub fn etale_fiber_product(f: &FanMorphism, g: &FanMorphism) -> Result<FiberProduct> {
    if !same_fan(&f.target, &g.target) {
        return Err(FanError::TargetMismatch);
    }
    if !f.is_etale() || !g.is_etale() {
        return Err(FanError::NotEtale);
    }
    let (x, y) = (&f.source, &g.source);
    let mut pairs = Vec::new();
    for a in 0..x.len() {
        for b in 0..y.len() {
            if f.point_map[a] == g.point_map[b] {
                pairs.push((a, b));
            }
        }
    }
    let n = pairs.len();
    let leq: Vec<Vec<bool>> = pairs
        .iter()
        .map(|&(a, b)| {
            pairs
                .iter()
                .map(|&(c, d)| x.leq[a][c] && y.leq[b][d])
                .collect()
        })
        .collect();
    let mut genmaps = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && leq[i][j] {
                genmaps.insert((i, j), x.genmap(pairs[i].0, pairs[j].0));
            }
        }
    }
    let stalks = pairs.iter().map(|&(a, _)| x.stalks[a].clone()).collect();
    let structure = pairs.iter().map(|&(a, _)| x.structure[a].clone()).collect();
    let labels = pairs
        .iter()
        .map(|&(a, b)| format!("({},{})", x.labels[a], y.labels[b]))
        .collect();
    let fan = Arc::new(Fan::from_parts(
        x.base.clone(),
        stalks,
        structure,
        leq,
        genmaps,
        labels,
    ));
    let p1 = FanMorphism::from_parts(
        fan.clone(),
        x.clone(),
        pairs.iter().map(|p| p.0).collect(),
        pairs
            .iter()
            .map(|&(a, _)| MonoidHom::identity(&x.stalks[a]))
            .collect(),
    );
    let mut p2_maps = Vec::with_capacity(n);
    for &(a, b) in &pairs {
        let inv = g.stalk_maps[b].inverse()?;
        p2_maps.push(inv.then(&f.stalk_maps[a]));
    }
    let p2 = FanMorphism::from_parts(
        fan.clone(),
        y.clone(),
        pairs.iter().map(|p| p.1).collect(),
        p2_maps,
    );
    Ok(FiberProduct { fan, p1, p2, pairs })
}

/// Searches for an isomorphism `X -> Y` of fans over a common base.
pub fn fan_isomorphic(x: &Arc<Fan>, y: &Arc<Fan>) -> Option<FanMorphism> {
    if x.len() != y.len() || x.base != y.base {
        return None;
    }
    let mut inv_x: Vec<_> = (0..x.len()).map(|a| x.point_invariant(a)).collect();
    let mut inv_y: Vec<_> = (0..y.len()).map(|a| y.point_invariant(a)).collect();
    let (sx, sy) = (inv_x.clone(), inv_y.clone());
    inv_x.sort_unstable();
    inv_y.sort_unstable();
    if inv_x != inv_y {
        return None;
    }
    let comps_x = x.components();
    let comps_y = y.components();
    if comps_x.len() != comps_y.len() {
        return None;
    }
    let mut point_map = vec![usize::MAX; x.len()];
    let mut stalk_maps: Vec<Option<MonoidHom>> = vec![None; x.len()];
    let mut used = vec![false; comps_y.len()];
    for cx in &comps_x {
        let mut matched = false;
        for (k, cy) in comps_y.iter().enumerate() {
            if used[k] || cy.len() != cx.len() {
                continue;
            }
            if let Some((pm, sm)) = component_iso(x, y, cx, cy, &sx, &sy) {
                for (i, &a) in cx.iter().enumerate() {
                    point_map[a] = pm[i];
                    stalk_maps[a] = Some(sm[i].clone());
                }
                used[k] = true;
                matched = true;
                break;
            }
        }
        if !matched {
            return None;
        }
    }
    let f = FanMorphism::from_parts(
        x.clone(),
        y.clone(),
        point_map,
        stalk_maps
            .into_iter()
            .map(|h| h.expect("every point matched"))
            .collect(),
    );
    debug_assert!(f.validate().is_ok());
    Some(f)
}

type Invariant = (usize, usize, usize, usize);

fn component_iso(
    x: &Fan,
    y: &Fan,
    cx: &[usize],
    cy: &[usize],
    inv_x: &[Invariant],
    inv_y: &[Invariant],
) -> Option<(Vec<usize>, Vec<MonoidHom>)> {
    let n = cx.len();
    let mut sigma = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut result = None;
    poset_search(
        x,
        y,
        cx,
        cy,
        inv_x,
        inv_y,
        0,
        &mut sigma,
        &mut used,
        &mut |sigma| {
            if let Some(maps) = stalk_isos(x, y, cx, cy, sigma) {
                result = Some((sigma.iter().map(|&j| cy[j]).collect(), maps));
                true
            } else {
                false
            }
        },
    );
    result
}

#[allow(clippy::too_many_arguments)]
fn poset_search(
    x: &Fan,
    y: &Fan,
    cx: &[usize],
    cy: &[usize],
    inv_x: &[Invariant],
    inv_y: &[Invariant],
    pos: usize,
    sigma: &mut Vec<usize>,
    used: &mut Vec<bool>,
    found: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if pos == cx.len() {
        return found(sigma);
    }
    let a = cx[pos];
    for j in 0..cy.len() {
        let b = cy[j];
        if used[j] || inv_x[a] != inv_y[b] {
            continue;
        }
        let consistent = (0..pos).all(|i| {
            let (a2, b2) = (cx[i], cy[sigma[i]]);
            x.leq[a][a2] == y.leq[b][b2] && x.leq[a2][a] == y.leq[b2][b]
        });
        if !consistent {
            continue;
        }
        sigma[pos] = j;
        used[j] = true;
        if poset_search(x, y, cx, cy, inv_x, inv_y, pos + 1, sigma, used, found) {
            return true;
        }
        used[j] = false;
        sigma[pos] = usize::MAX;
    }
    false
}

/// Stalk isomorphisms `stalk_Y(sigma a) -> stalk_X(a)` compatible with
/// generization maps, chosen at minimal points and propagated upwards.
fn stalk_isos(
    x: &Fan,
    y: &Fan,
    cx: &[usize],
    cy: &[usize],
    sigma: &[usize],
) -> Option<Vec<MonoidHom>> {
    let n = cx.len();
    let minimal: Vec<usize> = (0..n)
        .filter(|&i| (0..n).all(|k| k == i || !x.leq[cx[k]][cx[i]]))
        .collect();
    let mut maps: Vec<Option<MonoidHom>> = vec![None; n];
    assign_minimal(x, y, cx, cy, sigma, &minimal, 0, &mut maps)?;
    maps.into_iter().collect()
}

#[allow(clippy::too_many_arguments)]
fn assign_minimal(
    x: &Fan,
    y: &Fan,
    cx: &[usize],
    cy: &[usize],
    sigma: &[usize],
    minimal: &[usize],
    k: usize,
    maps: &mut Vec<Option<MonoidHom>>,
) -> Option<()> {
    if k == minimal.len() {
        return Some(());
    }
    let i = minimal[k];
    let (a, b) = (cx[i], cy[sigma[i]]);
    let candidates = isomorphisms(
        &y.stalks[b],
        &x.stalks[a],
        Some((&y.structure[b], &x.structure[a])),
        usize::MAX,
    )
    .ok()?;
    for phi in candidates {
        let saved = maps.clone();
        if propagate(x, y, cx, cy, sigma, i, &phi, maps)
            && assign_minimal(x, y, cx, cy, sigma, minimal, k + 1, maps).is_some()
        {
            return Some(());
        }
        *maps = saved;
    }
    None
}

/// Fixes the stalk map at minimal point `i` to `phi` and derives the maps on
/// its up-set; returns false on a conflict with earlier choices.
#[allow(clippy::too_many_arguments)]
fn propagate(
    x: &Fan,
    y: &Fan,
    cx: &[usize],
    cy: &[usize],
    sigma: &[usize],
    i: usize,
    phi: &MonoidHom,
    maps: &mut [Option<MonoidHom>],
) -> bool {
    let (a, b) = (cx[i], cy[sigma[i]]);
    for k in 0..cx.len() {
        let (a2, b2) = (cx[k], cy[sigma[k]]);
        if !x.leq[a][a2] {
            continue;
        }
        let derived = if k == i {
            phi.clone()
        } else {
            let gy = y.genmap(b, b2);
            let gx = x.genmap(a, a2);
            let Some(images) = descend(&gy, &phi.then(&gx)) else {
                return false;
            };
            let h = MonoidHom::new_unchecked(y.stalks[b2].clone(), x.stalks[a2].clone(), images);
            if !h.is_isomorphism() || y.structure[b2].then(&h) != x.structure[a2] {
                return false;
            }
            h
        };
        match &maps[k] {
            Some(existing) if *existing != derived => return false,
            Some(_) => {}
            None => maps[k] = Some(derived),
        }
    }
    true
}

/// Given surjective `q: A -> B` and `h: A -> C` killing `ker q`, images under
/// the induced `B -> C` of the generators of `B`.
pub(crate) fn descend(q: &MonoidHom, h: &MonoidHom) -> Option<Vec<Element>> {
    let b = q.target();
    let m = IntMatrix::from_columns(b.ambient().dim(), q.images()).hcat(&b.ambient().relations());
    let solver = LatticeSolver::new(&m);
    let k = q.images().len();
    let mut out = Vec::with_capacity(b.len());
    for g in b.generators() {
        let sol: Vec<BigInt> = solver.solve(g)?;
        out.push(h.target().ambient().combine(&sol[..k], h.images()));
    }
    // well-definedness: relations of the images of q must map to zero
    for rel in solver.kernel_basis().columns() {
        if h.target()
            .ambient()
            .combine(&rel[..k], h.images())
            .iter()
            .any(|v| v != &BigInt::from(0))
        {
            return None;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(f: Fan) -> Arc<Fan> {
        Arc::new(f)
    }

    #[test]
    fn spec_examples() {
        let n = Fan::spec(&FineMonoid::natural(1));
        assert_eq!(n.len(), 2);
        assert!(n.leq(0, 1));
        assert!(n.stalk(1).is_trivial());
        n.validate().unwrap();
        let n2 = Fan::spec(&FineMonoid::natural(2));
        assert_eq!(n2.len(), 4);
        assert_eq!(n2.covers().len(), 4);
        n2.validate().unwrap();
        let z = FineMonoid::free(1, &[vec![1], vec![-1]]).unwrap();
        let sz = Fan::spec(&z);
        assert_eq!(sz.len(), 1);
        assert!(sz.stalk(0).is_trivial());
    }

    #[test]
    fn open_subfans() {
        let n2 = arc(Fan::spec(&FineMonoid::natural(2)));
        let (generic, f) = n2.open_subfan(3).unwrap();
        assert_eq!(generic.len(), 1);
        assert!(f.is_etale());
        let (mid, _) = n2.open_subfan(1).unwrap();
        assert!(fan_isomorphic(&mid, &arc(Fan::spec(&FineMonoid::natural(1)))).is_some());
        let (all, _) = n2.open_subfan(0).unwrap();
        assert_eq!(*all, *n2);
        assert!(matches!(n2.open_subfan(9), Err(FanError::UnknownPoint(9))));
    }

    #[test]
    fn etale_examples() {
        let n2 = arc(Fan::spec(&FineMonoid::natural(2)));
        assert!(FanMorphism::identity(&n2).is_etale());
        let (_, inc) = n2.open_subfan(1).unwrap();
        assert!(inc.is_etale());
        let n = arc(Fan::spec(&FineMonoid::natural(1)));
        let zero = arc(Fan::spec(&FineMonoid::trivial()));
        let t = FineMonoid::trivial();
        let to_point = FanMorphism::new(
            n.clone(),
            zero,
            vec![0, 0],
            vec![MonoidHom::zero(&t, n.stalk(0)), MonoidHom::identity(&t)],
        )
        .unwrap();
        assert!(!to_point.is_etale());
    }

    #[test]
    fn fiber_products() {
        let n = arc(Fan::spec(&FineMonoid::natural(1)));
        let id = FanMorphism::identity(&n);
        let p = etale_fiber_product(&id, &id).unwrap();
        assert!(fan_isomorphic(&p.fan, &n).is_some());
        let (generic, inc) = n.open_subfan(1).unwrap();
        let p = etale_fiber_product(&id, &inc).unwrap();
        assert!(fan_isomorphic(&p.fan, &generic).is_some());
    }

    #[test]
    fn isomorphism_examples() {
        let n = arc(Fan::spec(&FineMonoid::natural(1)));
        assert!(fan_isomorphic(&n, &n).is_some());
        let n2 = arc(Fan::spec(&FineMonoid::natural(2)));
        let emb = arc(Fan::spec(
            &FineMonoid::free(3, &[vec![1, 0, 0], vec![0, 1, 0]]).unwrap(),
        ));
        let w = fan_isomorphic(&n2, &emb).unwrap();
        w.validate().unwrap();
        assert!(w.is_isomorphism());
        assert!(fan_isomorphic(&n, &n2).is_none());
    }
}
