//! Fine monoids as finitely generated submonoids of finitely generated
//! abelian groups.
//!
//! A [`FineMonoid`] is a list of generators inside an [`Ambient`] group
//! `Z^r + Z/m1 + ... + Z/mk`. Integrality comes for free from the
//! embedding. Everything derived from the generators (relation lattice,
//! canonical coordinates of the groupification, the rational cone and its
//! faces, the sharpening) is computed lazily once and shared between clones.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::abelian::{
    self, dot, AbelianError, CanonicalCoords, FGAbelianGroup, GroupHom, IntMatrix, Lattice,
    LatticeSolver, Presentation,
};
use crate::cone::{combinations, nonnegative_combination, Cone};
use crate::par::Exec;

/// Default degree bound for membership searches and Hilbert-basis enumeration.
pub const DEFAULT_BOUND: usize = 12;

pub type Element = Vec<BigInt>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoidError {
    #[error("element has {found} coordinates, ambient group has {expected}")]
    AmbientMismatch { expected: usize, found: usize },
    #[error("torsion modulus {0} must be at least 2")]
    BadModulus(BigInt),
    #[error("a monoid needs at least one generator")]
    NoGenerators,
    #[error("not a face of this monoid")]
    NotAFace,
    #[error("lattice enumeration needs {needed} points per cell, bound allows {allowed}")]
    BoundExceeded { needed: BigInt, allowed: BigInt },
    #[error("homomorphism is not well defined on the groupification")]
    NotWellDefined,
    #[error("image of generator {0} is not in the target monoid")]
    ImageNotInTarget(usize),
    #[error("expected {expected} generator images, found {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("monoid is not sharp")]
    NotSharp,
    #[error("homomorphism is not an isomorphism")]
    NotIsomorphism,
    #[error(transparent)]
    Abelian(#[from] AbelianError),
}

pub type Result<T> = std::result::Result<T, MonoidError>;

/// `Z^rank + Z/m1 + ... + Z/mk`; elements are coordinate vectors with the
/// torsion coordinates reduced into `[0, mi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ambient {
    rank: usize,
    moduli: Vec<BigInt>,
}

impl Ambient {
    pub fn new(rank: usize, moduli: Vec<BigInt>) -> Result<Self> {
        if let Some(m) = moduli.iter().find(|m| **m < abelian::big(2)) {
            return Err(MonoidError::BadModulus(m.clone()));
        }
        Ok(Ambient { rank, moduli })
    }

    pub fn free(rank: usize) -> Self {
        Ambient {
            rank,
            moduli: Vec::new(),
        }
    }

    pub fn from_group(g: &FGAbelianGroup) -> Self {
        Ambient {
            rank: g.rank(),
            moduli: g.torsion().to_vec(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn moduli(&self) -> &[BigInt] {
        &self.moduli
    }

    pub fn dim(&self) -> usize {
        self.rank + self.moduli.len()
    }

    pub fn zero(&self) -> Element {
        vec![BigInt::zero(); self.dim()]
    }

    pub fn reduce(&self, x: &mut [BigInt]) {
        for (k, m) in self.moduli.iter().enumerate() {
            let i = self.rank + k;
            x[i] = x[i].mod_floor(m);
        }
    }

    /// Validates the coordinate count and reduces torsion residues.
    pub fn element(&self, mut coords: Vec<BigInt>) -> Result<Element> {
        if coords.len() != self.dim() {
            return Err(MonoidError::AmbientMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        self.reduce(&mut coords);
        Ok(coords)
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> Element {
        let mut s: Element = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&mut s);
        s
    }

    pub fn sub(&self, a: &[BigInt], b: &[BigInt]) -> Element {
        let mut s: Element = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.reduce(&mut s);
        s
    }

    pub fn neg(&self, a: &[BigInt]) -> Element {
        let mut s: Element = a.iter().map(|x| -x).collect();
        self.reduce(&mut s);
        s
    }

    /// `sum coeffs[j] * elems[j]`
    pub fn combine(&self, coeffs: &[BigInt], elems: &[Element]) -> Element {
        let mut s = self.zero();
        for (c, e) in coeffs.iter().zip(elems) {
            if c.is_zero() {
                continue;
            }
            for (a, b) in s.iter_mut().zip(e) {
                *a += c * b;
            }
        }
        self.reduce(&mut s);
        s
    }

    /// Relation columns `mi * e_(rank+i)`.
    pub fn relations(&self) -> IntMatrix {
        let cols: Vec<Vec<BigInt>> = self
            .moduli
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mut c = vec![BigInt::zero(); self.dim()];
                c[self.rank + k] = m.clone();
                c
            })
            .collect();
        IntMatrix::from_columns(self.dim(), &cols)
    }

    pub fn presentation(&self) -> Presentation {
        Presentation::new(self.dim(), self.relations())
    }

    pub fn exponent(&self) -> BigInt {
        self.moduli.iter().fold(BigInt::one(), |acc, m| acc.lcm(m))
    }

    /// Quotient by the subgroup generated by `sub`, in canonical coordinates.
    pub fn quotient_map(&self, sub: &[Element]) -> AmbientMap {
        let extra = IntMatrix::from_columns(self.dim(), sub);
        let coords = self
            .presentation()
            .with_extra_relations(&extra)
            .coordinates();
        AmbientMap {
            source: self.clone(),
            target: Ambient::from_group(&coords.group),
            matrix: coords.to_canonical,
        }
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.rank != 1 || self.moduli.is_empty() {
            parts.push(format!("Z^{}", self.rank));
        } else {
            parts.push("Z".to_string());
        }
        if self.rank == 0 && !self.moduli.is_empty() {
            parts.clear();
        }
        parts.extend(self.moduli.iter().map(|m| format!("Z/{m}")));
        write!(f, "{}", parts.join(" + "))
    }
}

/// Linear map between ambient groups given by an integer matrix on coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientMap {
    pub source: Ambient,
    pub target: Ambient,
    pub matrix: IntMatrix,
}

impl AmbientMap {
    pub fn apply(&self, x: &[BigInt]) -> Element {
        let mut y = self.matrix.mul_vec(x);
        self.target.reduce(&mut y);
        y
    }
}

/// Outcome of a bounded membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Nonnegative coefficients on the generators reproducing the element.
    Member(Vec<BigInt>),
    NotMember,
    Unknown {
        bound: usize,
    },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

/// Three-valued answer used where a question is only decided up to a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Unknown => "unknown",
        })
    }
}

#[derive(Clone)]
pub struct FineMonoid {
    inner: Arc<Inner>,
}

struct Inner {
    ambient: Ambient,
    gens: Vec<Element>,
    data: OnceLock<Data>,
    sharp: OnceLock<SharpData>,
    irreducibles: OnceLock<Vec<usize>>,
}

struct Data {
    solver: LatticeSolver,
    gp: Presentation,
    coords: CanonicalCoords,
    free_part: IntMatrix,
    cone: Cone,
    faces: Vec<Vec<usize>>,
}

struct SharpData {
    quotient: AmbientMap,
    monoid: FineMonoid,
    /// for each generator of the sharpening, a generator of `self` mapping onto it
    rep: Vec<usize>,
    /// strictly positive relation on the unit generators (zero elsewhere)
    unit_relation: Vec<BigInt>,
}

impl FineMonoid {
    /// Generators are reduced and deduplicated, keeping first occurrences.
    pub fn new(ambient: Ambient, gens: Vec<Element>) -> Result<Self> {
        if gens.is_empty() {
            return Err(MonoidError::NoGenerators);
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(gens.len());
        for g in gens {
            let g = ambient.element(g)?;
            if seen.insert(g.clone()) {
                out.push(g);
            }
        }
        Ok(Self::from_parts(ambient, out))
    }

    fn from_parts(ambient: Ambient, gens: Vec<Element>) -> Self {
        FineMonoid {
            inner: Arc::new(Inner {
                ambient,
                gens,
                data: OnceLock::new(),
                sharp: OnceLock::new(),
                irreducibles: OnceLock::new(),
            }),
        }
    }

    /// Convenience constructor for a torsion-free ambient `Z^rank`.
    pub fn free(rank: usize, gens: &[Vec<i64>]) -> Result<Self> {
        let gens = gens
            .iter()
            .map(|g| g.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::new(Ambient::free(rank), gens)
    }

    /// `N^k` inside `Z^k` with the standard basis; `k = 0` gives the trivial monoid.
    pub fn natural(k: usize) -> Self {
        if k == 0 {
            return Self::trivial();
        }
        let gens = (0..k)
            .map(|i| (0..k).map(|j| BigInt::from(i64::from(i == j))).collect())
            .collect();
        Self::from_parts(Ambient::free(k), gens)
    }

    /// The zero monoid inside the zero group.
    pub fn trivial() -> Self {
        Self::from_parts(Ambient::free(0), vec![Vec::new()])
    }

    pub fn ambient(&self) -> &Ambient {
        &self.inner.ambient
    }

    pub fn generators(&self) -> &[Element] {
        &self.inner.gens
    }

    pub fn generator(&self, i: usize) -> &Element {
        &self.inner.gens[i]
    }

    pub fn len(&self) -> usize {
        self.inner.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn data(&self) -> &Data {
        self.inner.data.get_or_init(|| {
            let ambient = &self.inner.ambient;
            let n = self.inner.gens.len();
            let g = IntMatrix::from_columns(ambient.dim(), &self.inner.gens);
            let solver = LatticeSolver::new(&g.hcat(&ambient.relations()));
            let rows: Vec<usize> = (0..n).collect();
            let rels = solver.kernel_basis().select_rows(&rows);
            let gp = Presentation::new(n, rels);
            let coords = gp.coordinates();
            let free_part = coords.free_part();
            let cone = Cone::new(coords.group.rank(), free_part.columns());
            let faces = cone
                .faces()
                .into_iter()
                .map(|f| f.into_iter().collect())
                .collect();
            Data {
                solver,
                gp,
                coords,
                free_part,
                cone,
                faces,
            }
        })
    }

    /// Presentation of the groupification on the generators.
    pub fn gp_presentation(&self) -> &Presentation {
        &self.data().gp
    }

    pub fn gp_coordinates(&self) -> &CanonicalCoords {
        &self.data().coords
    }

    pub fn cone(&self) -> &Cone {
        &self.data().cone
    }

    /// Integer coefficients on the generators summing to `x`, if `x` lies in
    /// the groupification.
    pub fn gp_coords(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        if x.len() != self.ambient().dim() {
            return None;
        }
        let sol = self.data().solver.solve(x)?;
        Some(sol[..self.len()].to_vec())
    }

    /// Coordinates of `x` in the free quotient of the groupification.
    pub fn free_coords(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let c = self.gp_coords(x)?;
        Some(self.data().free_part.mul_vec(&c))
    }

    /// Canonical coordinates of `x` in the groupification.
    pub fn canonical_coords(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let c = self.gp_coords(x)?;
        Some(self.data().coords.apply(&c))
    }

    /// Element of the groupification with the given canonical coordinates.
    pub fn from_canonical(&self, c: &[BigInt]) -> Element {
        let lifted = self.data().coords.lift(c);
        self.ambient().combine(&lifted, self.generators())
    }

    pub fn in_gp(&self, x: &[BigInt]) -> bool {
        self.gp_coords(x).is_some()
    }

    /// Whether `x` lies in the rational cone of the monoid (and in the groupification).
    pub fn in_cone(&self, x: &[BigInt]) -> bool {
        match self.free_coords(x) {
            Some(f) => self.cone().contains(&f),
            None => false,
        }
    }

    pub fn groupify(&self) -> FGAbelianGroup {
        self.data().coords.group.clone()
    }

    pub fn gp_rank(&self) -> usize {
        self.data().coords.group.rank()
    }

    /// All faces, each once, ordered by (size, lexicographic generator indices).
    pub fn faces(&self) -> Vec<Face> {
        self.data()
            .faces
            .iter()
            .map(|f| Face {
                parent: self.clone(),
                indices: f.clone(),
            })
            .collect()
    }

    pub fn face_index_sets(&self) -> &[Vec<usize>] {
        &self.data().faces
    }

    /// The face of units: generators `g` with `-g` in the monoid.
    pub fn units(&self) -> Face {
        Face {
            parent: self.clone(),
            indices: self.data().faces[0].clone(),
        }
    }

    pub fn is_sharp(&self) -> bool {
        self.data().faces[0]
            .iter()
            .all(|&i| self.inner.gens[i].iter().all(Zero::is_zero))
    }

    pub fn is_trivial(&self) -> bool {
        self.inner.gens.iter().all(|g| g.iter().all(Zero::is_zero))
    }

    /// Whether an element of the monoid is a unit.
    pub fn is_unit(&self, x: &[BigInt]) -> bool {
        match self.free_coords(x) {
            Some(f) => match self.cone().span_coords(&f) {
                Some(s) => self.cone().evaluate(&s).iter().all(Zero::is_zero),
                None => false,
            },
            None => false,
        }
    }

    pub fn face(&self, indices: &[usize]) -> Result<Face> {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if self.data().faces.contains(&idx) {
            Ok(Face {
                parent: self.clone(),
                indices: idx,
            })
        } else {
            Err(MonoidError::NotAFace)
        }
    }

    fn check_face(&self, f: &Face) -> Result<()> {
        if &f.parent != self || !self.data().faces.contains(&f.indices) {
            return Err(MonoidError::NotAFace);
        }
        Ok(())
    }

    /// `M + (-F)`.
    pub fn localize(&self, f: &Face) -> Result<FineMonoid> {
        self.check_face(f)?;
        let mut gens = self.inner.gens.clone();
        gens.extend(
            f.indices
                .iter()
                .map(|&i| self.ambient().neg(&self.inner.gens[i])),
        );
        FineMonoid::new(self.ambient().clone(), gens)
    }

    /// Sharpened localization at a face, with the canonical map from `self`.
    pub fn sharp_localize(&self, f: &Face) -> Result<(FineMonoid, MonoidHom)> {
        self.check_face(f)?;
        let (m, hom, _, _) = self.sharp_localize_indices(&f.indices);
        Ok((m, hom))
    }

    /// Sharpened localization at the generator subset `face` (assumed a face).
    /// Also returns the ambient quotient and, per generator of the result, a
    /// generator of `self` mapping onto it.
    pub(crate) fn sharp_localize_indices(
        &self,
        face: &[usize],
    ) -> (FineMonoid, MonoidHom, AmbientMap, Vec<usize>) {
        let sub: Vec<Element> = face.iter().map(|&i| self.inner.gens[i].clone()).collect();
        let quotient = self.ambient().quotient_map(&sub);
        let images: Vec<Element> = self.inner.gens.iter().map(|g| quotient.apply(g)).collect();
        let mut pairs: Vec<(Element, usize)> = Vec::new();
        for (i, img) in images.iter().enumerate() {
            if face.contains(&i) || img.iter().all(Zero::is_zero) {
                continue;
            }
            if !pairs.iter().any(|(e, _)| e == img) {
                pairs.push((img.clone(), i));
            }
        }
        pairs.sort();
        let (gens, rep): (Vec<Element>, Vec<usize>) = if pairs.is_empty() {
            (
                vec![quotient.target.zero()],
                vec![face.first().copied().unwrap_or(0)],
            )
        } else {
            pairs.into_iter().unzip()
        };
        let target = FineMonoid::from_parts(quotient.target.clone(), gens);
        let hom = MonoidHom::new_unchecked(self.clone(), target.clone(), images);
        (target, hom, quotient, rep)
    }

    fn sharp_data(&self) -> &SharpData {
        self.inner.sharp.get_or_init(|| {
            let units = self.data().faces[0].clone();
            let (monoid, _, quotient, rep) = self.sharp_localize_indices(&units);
            let unit_relation = self.positive_unit_relation(&units);
            SharpData {
                quotient,
                monoid,
                rep,
                unit_relation,
            }
        })
    }

    /// Coefficients `a` with `a_i >= 1` on unit generators, zero elsewhere,
    /// and `sum a_i g_i = 0`.
    fn positive_unit_relation(&self, units: &[usize]) -> Vec<BigInt> {
        let n = self.len();
        let mut total = vec![BigInt::zero(); n];
        if units.is_empty() {
            return total;
        }
        let data = self.data();
        let d = data.coords.group.rank();
        let unit_free: Vec<Vec<BigInt>> = units.iter().map(|&i| data.free_part.column(i)).collect();
        let exponent = self.ambient().exponent();
        for (k, &i) in units.iter().enumerate() {
            let target: Vec<BigInt> = unit_free[k].iter().map(|x| -x).collect();
            let lambda = nonnegative_combination(d, &unit_free, &target)
                .expect("the unit cone is a linear subspace");
            let denom = lambda
                .iter()
                .fold(BigInt::one(), |acc, l| acc.lcm(l.denom()));
            let scale = &denom * &exponent;
            total[i] += &scale;
            for (kk, &j) in units.iter().enumerate() {
                total[j] +=
                    (&lambda[kk] * num_rational::BigRational::from(scale.clone())).to_integer();
            }
        }
        debug_assert!(self
            .ambient()
            .combine(&total, self.generators())
            .iter()
            .all(Zero::is_zero));
        total
    }

    /// Sharpening `M / M*` with the projection from `M`.
    pub fn sharpen(&self) -> (FineMonoid, MonoidHom) {
        let sd = self.sharp_data();
        let images = self
            .inner
            .gens
            .iter()
            .map(|g| sd.quotient.apply(g))
            .collect();
        (
            sd.monoid.clone(),
            MonoidHom::new_unchecked(self.clone(), sd.monoid.clone(), images),
        )
    }

    pub fn sharpening(&self) -> FineMonoid {
        self.sharp_data().monoid.clone()
    }

    /// Image of an ambient element in the ambient of the sharpening.
    pub fn project_to_sharpening(&self, x: &[BigInt]) -> Element {
        self.sharp_data().quotient.apply(x)
    }

    /// Bounded membership test.
    ///
    /// `NotMember` is returned only when it is certain: the element lies outside
    /// the groupification or the cone, or the search over all generator
    /// combinations of admissible degree came back empty. The admissible
    /// degree is bounded through a linear form positive on the sharpening.
    pub fn membership(&self, x: &[BigInt], bound: usize) -> Result<Membership> {
        let x = self.ambient().element(x.to_vec())?;
        if !self.in_cone(&x) {
            return Ok(Membership::NotMember);
        }
        let sd = self.sharp_data();
        let xs = sd.quotient.apply(&x);
        match sd.monoid.sharp_search(&xs, bound) {
            Search::Found(cs) => {
                let mut coeffs = vec![BigInt::zero(); self.len()];
                for (j, c) in cs.iter().enumerate() {
                    coeffs[sd.rep[j]] += c;
                }
                let partial = self.ambient().combine(&coeffs, self.generators());
                let residual = self.ambient().sub(&x, &partial);
                if residual.iter().any(|r| !r.is_zero()) {
                    let unit_coeffs = self.unit_certificate(&residual);
                    for (c, u) in coeffs.iter_mut().zip(unit_coeffs) {
                        *c += u;
                    }
                }
                debug_assert_eq!(self.ambient().combine(&coeffs, self.generators()), x);
                Ok(Membership::Member(coeffs))
            }
            Search::Exhausted => Ok(Membership::NotMember),
            Search::Truncated => Ok(Membership::Unknown { bound }),
        }
    }

    /// [`FineMonoid::membership`] over a list of elements.
    pub fn membership_batch(
        &self,
        xs: &[Element],
        bound: usize,
        exec: Exec,
    ) -> Vec<Result<Membership>> {
        exec.map(xs, |x| self.membership(x, bound))
    }

    /// Exact membership (no degree bound).
    pub fn contains(&self, x: &[BigInt]) -> bool {
        if x.len() != self.ambient().dim() {
            return false;
        }
        if self.inner.gens.iter().any(|g| g.as_slice() == x) || x.iter().all(Zero::is_zero) {
            return true;
        }
        matches!(self.membership(x, usize::MAX), Ok(Membership::Member(_)))
    }

    /// Nonnegative unit-generator coefficients for an element of the unit group.
    fn unit_certificate(&self, w: &[BigInt]) -> Vec<BigInt> {
        let units = &self.data().faces[0];
        let unit_gens: Vec<Element> = units.iter().map(|&i| self.inner.gens[i].clone()).collect();
        let m = IntMatrix::from_columns(self.ambient().dim(), &unit_gens)
            .hcat(&self.ambient().relations());
        let sol = LatticeSolver::new(&m)
            .solve(w)
            .expect("residual lies in the unit group");
        let rel = &self.sharp_data().unit_relation;
        let mut t = BigInt::zero();
        for (k, &i) in units.iter().enumerate() {
            if sol[k].is_negative() {
                let need = (-&sol[k]).div_ceil(&rel[i]);
                if need > t {
                    t = need;
                }
            }
        }
        let mut coeffs = vec![BigInt::zero(); self.len()];
        for (k, &i) in units.iter().enumerate() {
            coeffs[i] = &sol[k] + &t * &rel[i];
        }
        coeffs
    }

    /// Linear form on free coordinates, positive on nonzero generators of a sharp monoid.
    fn height(&self, x: &[BigInt]) -> Option<BigInt> {
        let f = self.free_coords(x)?;
        let s = self.cone().span_coords(&f)?;
        Some(dot(&self.cone().interior_form(), &s))
    }

    /// Degree-layered search over sums of generators, pruned to partial sums
    /// whose remainder stays in the cone. `self` must be sharp.
    fn sharp_search(&self, target: &[BigInt], limit: usize) -> Search {
        let n = self.len();
        if target.iter().all(Zero::is_zero) {
            return Search::Found(vec![BigInt::zero(); n]);
        }
        if !self.in_cone(target) {
            return Search::Exhausted;
        }
        let gens: Vec<(usize, &Element, BigInt)> = self
            .inner
            .gens
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|x| !x.is_zero()))
            .map(|(i, g)| {
                (
                    i,
                    g,
                    self.height(g)
                        .expect("generator lies in its groupification"),
                )
            })
            .collect();
        if gens.is_empty() {
            return Search::Exhausted;
        }
        let h_target = self
            .height(target)
            .expect("target lies in the groupification");
        let h_min = gens
            .iter()
            .map(|(_, _, h)| h.clone())
            .min()
            .expect("nonempty");
        debug_assert!(h_min.is_positive());
        let max_degree = (&h_target / &h_min).to_usize().unwrap_or(usize::MAX);
        let depth = max_degree.min(limit);

        let ambient = self.ambient();
        let zero = ambient.zero();
        // parent links: element -> (previous element, generator index)
        let mut parents: std::collections::HashMap<Element, (Element, usize)> =
            std::collections::HashMap::new();
        let mut visited: HashSet<Element> = HashSet::new();
        visited.insert(zero.clone());
        let mut layer = vec![zero];
        for _ in 0..depth {
            let mut next = Vec::new();
            for y in &layer {
                for (i, g, _) in &gens {
                    let z = ambient.add(y, g);
                    if visited.contains(&z) {
                        continue;
                    }
                    let rest = ambient.sub(target, &z);
                    let done = rest.iter().all(Zero::is_zero);
                    if !done && !self.in_cone(&rest) {
                        continue;
                    }
                    visited.insert(z.clone());
                    parents.insert(z.clone(), (y.clone(), *i));
                    if done {
                        let mut coeffs = vec![BigInt::zero(); n];
                        let mut cur = z;
                        while let Some((prev, gi)) = parents.get(&cur) {
                            coeffs[*gi] += 1;
                            cur = prev.clone();
                        }
                        return Search::Found(coeffs);
                    }
                    next.push(z);
                }
            }
            if next.is_empty() {
                return Search::Exhausted;
            }
            layer = next;
        }
        if max_degree <= limit {
            Search::Exhausted
        } else {
            Search::Truncated
        }
    }

    /// Indices of the irreducible generators of a sharp monoid.
    pub fn irreducible_indices(&self) -> Result<&[usize]> {
        if !self.is_sharp() {
            return Err(MonoidError::NotSharp);
        }
        Ok(self.inner.irreducibles.get_or_init(|| {
            let nonzero: Vec<usize> = (0..self.len())
                .filter(|&i| self.inner.gens[i].iter().any(|x| !x.is_zero()))
                .collect();
            nonzero
                .iter()
                .copied()
                .filter(|&i| {
                    let others: Vec<Element> = nonzero
                        .iter()
                        .filter(|&&j| j != i)
                        .map(|&j| self.inner.gens[j].clone())
                        .collect();
                    if others.is_empty() {
                        return true;
                    }
                    let rest = FineMonoid::from_parts(self.ambient().clone(), others);
                    !rest.contains(&self.inner.gens[i])
                })
                .collect()
        }))
    }

    pub fn irreducibles(&self) -> Result<Vec<Element>> {
        Ok(self
            .irreducible_indices()?
            .iter()
            .map(|&i| self.inner.gens[i].clone())
            .collect())
    }

    /// `{x in M^gp : n x in M for some n >= 1}`.
    ///
    /// The free part is the set of lattice points of the cone, generated by
    /// the generators together with the lattice points of the half-open
    /// parallelepipeds over independent generator subsets. Torsion of the
    /// groupification is always saturated in and added back. `bound` limits
    /// each parallelepiped to `bound^d` lattice points.
    pub fn saturate(&self, bound: usize) -> Result<FineMonoid> {
        let data = self.data();
        let d = data.coords.group.rank();
        let free: Vec<Vec<BigInt>> = data.free_part.columns();
        let allowed = BigInt::from(bound).pow(d as u32);

        let mut distinct: Vec<Vec<BigInt>> = Vec::new();
        for v in &free {
            if v.iter().any(|x| !x.is_zero()) && !distinct.contains(v) {
                distinct.push(v.clone());
            }
        }
        let mut points: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        for subset in combinations(distinct.len(), d) {
            let cols: Vec<Vec<BigInt>> = subset.iter().map(|&i| distinct[i].clone()).collect();
            let b = IntMatrix::from_columns(d, &cols);
            let det = b.determinant().abs();
            if det.is_zero() {
                continue;
            }
            if det > allowed {
                return Err(MonoidError::BoundExceeded {
                    needed: det,
                    allowed,
                });
            }
            for p in parallelepiped_points(&b) {
                if p.iter().any(|x| !x.is_zero()) {
                    points.insert(p);
                }
            }
        }

        let torsion_count = data.coords.group.torsion().len();
        let lift = |free_coords: &[BigInt]| {
            let mut c = free_coords.to_vec();
            c.extend(std::iter::repeat_n(BigInt::zero(), torsion_count));
            self.from_canonical(&c)
        };
        let mut candidates: Vec<Element> = self.inner.gens.clone();
        for p in &points {
            candidates.push(lift(p));
        }
        for k in 0..torsion_count {
            let mut c = vec![BigInt::zero(); d + torsion_count];
            c[d + k] = BigInt::one();
            candidates.push(self.from_canonical(&c));
        }
        let mut seen = HashSet::new();
        candidates.retain(|c| c.iter().any(|x| !x.is_zero()) && seen.insert(c.clone()));
        Ok(minimize_generators(self.ambient(), candidates))
    }

    pub fn is_saturated(&self, bound: usize) -> Result<bool> {
        let sat = self.saturate(bound)?;
        Ok(sat.generators().iter().all(|g| self.contains(g)))
    }

    /// Deterministic presentation inside the canonical form of the groupification.
    pub fn canonical(&self) -> FineMonoid {
        let ambient = Ambient::from_group(&self.groupify());
        let mut gens: Vec<Element> = self
            .inner
            .gens
            .iter()
            .map(|g| {
                self.canonical_coords(g)
                    .expect("generator lies in its groupification")
            })
            .collect();
        gens.sort();
        gens.dedup();
        if gens.len() > 1 {
            gens.retain(|g| g.iter().any(|x| !x.is_zero()));
        }
        FineMonoid::from_parts(ambient, gens)
    }
}

enum Search {
    Found(Vec<BigInt>),
    Exhausted,
    Truncated,
}

/// Lattice points of `Z^d` in the half-open parallelepiped spanned by the
/// columns of the nonsingular matrix `b`.
fn parallelepiped_points(b: &IntMatrix) -> Vec<Vec<BigInt>> {
    let d = b.rows();
    let snf = abelian::smith_normal_form(b);
    let solver = LatticeSolver::new(b);
    let diag: Vec<BigInt> = (0..d).map(|i| snf.diag(i)).collect();
    let mut out = Vec::new();
    let mut counter = vec![BigInt::zero(); d];
    loop {
        let r = snf.u_inv.mul_vec(&counter);
        let lambda = solver.solve_rational(&r).expect("nonsingular");
        let floors: Vec<BigInt> = lambda.iter().map(|l| l.floor().to_integer()).collect();
        let shift = b.mul_vec(&floors);
        out.push(r.iter().zip(&shift).map(|(x, s)| x - s).collect());
        // odometer over the box prod [0, diag_i)
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            counter[k] += 1;
            if counter[k] < diag[k] {
                break;
            }
            counter[k] = BigInt::zero();
            k += 1;
        }
    }
}

/// Drops generators lying in the monoid generated by the others, largest first.
fn minimize_generators(ambient: &Ambient, mut gens: Vec<Element>) -> FineMonoid {
    gens.sort_by(|a, b| {
        let na: BigInt = a.iter().map(|x| x.abs()).sum();
        let nb: BigInt = b.iter().map(|x| x.abs()).sum();
        nb.cmp(&na).then_with(|| a.cmp(b))
    });
    let mut i = 0;
    while i < gens.len() {
        if gens.len() > 1 {
            let others: Vec<Element> = gens
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, g)| g.clone())
                .collect();
            let rest = FineMonoid::from_parts(ambient.clone(), others);
            if rest.contains(&gens[i]) {
                gens.remove(i);
                continue;
            }
        }
        i += 1;
    }
    if gens.is_empty() {
        gens.push(ambient.zero());
    }
    gens.sort();
    FineMonoid::from_parts(ambient.clone(), gens)
}

impl PartialEq for FineMonoid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.ambient == other.inner.ambient && self.inner.gens == other.inner.gens)
    }
}

impl Eq for FineMonoid {}

impl std::hash::Hash for FineMonoid {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.ambient.hash(state);
        self.inner.gens.hash(state);
    }
}

impl fmt::Debug for FineMonoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FineMonoid({self})")
    }
}

pub fn format_element(x: &[BigInt]) -> String {
    let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

impl fmt::Display for FineMonoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.inner.gens.iter().map(|g| format_element(g)).collect();
        write!(f, "<{}> in {}", gens.join(" "), self.inner.ambient)
    }
}

/// A face, recorded by the full set of generators it contains.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Face {
    parent: FineMonoid,
    indices: Vec<usize>,
}

impl Face {
    pub fn parent(&self) -> &FineMonoid {
        &self.parent
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains_face(&self, other: &Face) -> bool {
        other.indices.iter().all(|i| self.indices.contains(i))
    }

    /// The face as a monoid in the parent's ambient.
    pub fn submonoid(&self) -> FineMonoid {
        let ambient = self.parent.ambient().clone();
        let mut gens: Vec<Element> = self
            .indices
            .iter()
            .map(|&i| self.parent.generator(i).clone())
            .collect();
        if gens.is_empty() {
            gens.push(ambient.zero());
        }
        FineMonoid::from_parts(ambient, gens)
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Homomorphism of fine monoids given by the images of the source generators.
#[derive(Clone)]
pub struct MonoidHom {
    source: FineMonoid,
    target: FineMonoid,
    images: Vec<Element>,
    gp_map: GroupHom,
}

impl MonoidHom {
    /// Checks well-definedness on the groupification and that every
    /// generator lands in the target monoid.
    pub fn new(source: FineMonoid, target: FineMonoid, images: Vec<Element>) -> Result<Self> {
        let hom = Self::try_build(source, target, images)?;
        for (i, img) in hom.images.iter().enumerate() {
            if !hom.target.contains(img) {
                return Err(MonoidError::ImageNotInTarget(i));
            }
        }
        Ok(hom)
    }

    fn try_build(source: FineMonoid, target: FineMonoid, images: Vec<Element>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(MonoidError::ImageCount {
                expected: source.len(),
                found: images.len(),
            });
        }
        let images: Vec<Element> = images
            .into_iter()
            .map(|x| target.ambient().element(x))
            .collect::<Result<_>>()?;
        let mut cols = Vec::with_capacity(images.len());
        for (i, img) in images.iter().enumerate() {
            cols.push(
                target
                    .gp_coords(img)
                    .ok_or(MonoidError::ImageNotInTarget(i))?,
            );
        }
        let matrix = IntMatrix::from_columns(target.len(), &cols);
        let gp_map = GroupHom::new(
            source.gp_presentation().clone(),
            target.gp_presentation().clone(),
            matrix,
        )
        .map_err(|e| match e {
            AbelianError::NotWellDefined => MonoidError::NotWellDefined,
            other => MonoidError::Abelian(other),
        })?;
        Ok(MonoidHom {
            source,
            target,
            images,
            gp_map,
        })
    }

    /// Builds a hom known to be valid by construction.
    pub(crate) fn new_unchecked(
        source: FineMonoid,
        target: FineMonoid,
        images: Vec<Element>,
    ) -> Self {
        Self::try_build(source, target, images).expect("homomorphism valid by construction")
    }

    pub fn identity(m: &FineMonoid) -> Self {
        Self::new_unchecked(m.clone(), m.clone(), m.generators().to_vec())
    }

    /// The zero map; always a homomorphism.
    pub fn zero(source: &FineMonoid, target: &FineMonoid) -> Self {
        let images = vec![target.ambient().zero(); source.len()];
        Self::new_unchecked(source.clone(), target.clone(), images)
    }

    pub fn source(&self) -> &FineMonoid {
        &self.source
    }

    pub fn target(&self) -> &FineMonoid {
        &self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn gp_map(&self) -> &GroupHom {
        &self.gp_map
    }

    /// Image of an element of the source groupification.
    pub fn apply(&self, x: &[BigInt]) -> Option<Element> {
        let c = self.source.gp_coords(x)?;
        Some(self.target.ambient().combine(&c, &self.images))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &MonoidHom) -> MonoidHom {
        assert_eq!(
            self.target, next.source,
            "composing homs with mismatched monoids"
        );
        let images = self
            .images
            .iter()
            .map(|x| next.apply(x).expect("image lies in the groupification"))
            .collect();
        MonoidHom::new_unchecked(self.source.clone(), next.target.clone(), images)
    }

    pub fn is_injective(&self) -> bool {
        self.gp_map.is_injective()
    }

    /// Every target generator lies in the submonoid generated by the images.
    pub fn is_surjective(&self) -> bool {
        let nonzero: HashSet<&Element> = self
            .images
            .iter()
            .filter(|x| x.iter().any(|c| !c.is_zero()))
            .collect();
        if self
            .target
            .generators()
            .iter()
            .all(|g| g.iter().all(Zero::is_zero) || nonzero.contains(g))
        {
            return true;
        }
        let image = FineMonoid::from_parts(self.target.ambient().clone(), self.images_or_zero());
        self.target.generators().iter().all(|g| image.contains(g))
    }

    fn images_or_zero(&self) -> Vec<Element> {
        let mut v: Vec<Element> = Vec::new();
        for x in &self.images {
            if !v.contains(x) {
                v.push(x.clone());
            }
        }
        if v.is_empty() {
            v.push(self.target.ambient().zero());
        }
        v
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self) -> Result<MonoidHom> {
        if !self.is_isomorphism() {
            return Err(MonoidError::NotIsomorphism);
        }
        let m = self
            .gp_map
            .matrix()
            .hcat(self.target.gp_presentation().relations());
        let solver = LatticeSolver::new(&m);
        let ns = self.source.len();
        let mut images = Vec::with_capacity(self.target.len());
        for j in 0..self.target.len() {
            let mut e = vec![BigInt::zero(); self.target.len()];
            e[j] = BigInt::one();
            let sol = solver.solve(&e).ok_or(MonoidError::NotIsomorphism)?;
            images.push(
                self.source
                    .ambient()
                    .combine(&sol[..ns], self.source.generators()),
            );
        }
        Self::try_build(self.target.clone(), self.source.clone(), images)
    }
}

impl PartialEq for MonoidHom {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.images == other.images
    }
}

impl Eq for MonoidHom {}

impl fmt::Debug for MonoidHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonoidHom({self})")
    }
}

impl fmt::Display for MonoidHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .source
            .generators()
            .iter()
            .zip(&self.images)
            .map(|(g, x)| format!("{} -> {}", format_element(g), format_element(x)))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Diagnostics of a homomorphism; `exact_witness` is an element of the source
/// groupification outside the source monoid whose image lies in the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomFlags {
    pub injective: Truth,
    pub surjective: Truth,
    pub local: Truth,
    pub exact: Truth,
    pub exact_witness: Option<Element>,
}

pub fn hom_flags(u: &MonoidHom, bound: usize) -> HomFlags {
    let injective = Truth::from(u.is_injective());

    let image = FineMonoid::from_parts(u.target.ambient().clone(), u.images_or_zero());
    let mut surjective = Truth::True;
    for g in u.target.generators() {
        match image.membership(g, bound).expect("same ambient") {
            Membership::Member(_) => {}
            Membership::NotMember => {
                surjective = Truth::False;
                break;
            }
            Membership::Unknown { .. } => surjective = Truth::Unknown,
        }
    }

    let units = u.source.units();
    let local = Truth::from(
        (0..u.source.len()).all(|i| units.indices.contains(&i) == u.target.is_unit(&u.images[i])),
    );

    let (exact, exact_witness) = exactness(u, bound);
    HomFlags {
        injective,
        surjective,
        local,
        exact,
        exact_witness,
    }
}

fn exactness(u: &MonoidHom, bound: usize) -> (Truth, Option<Element>) {
    let fs = |m: &FineMonoid| {
        m.groupify().torsion().is_empty() && m.is_saturated(bound).unwrap_or(false)
    };
    if fs(&u.source) && fs(&u.target) {
        return (Truth::from(saturated_exact(u)), None);
    }
    // bounded search for x in P^gp \ P with u(x) in Q
    let p = &u.source;
    let g = p.groupify();
    let d = g.rank();
    let torsion: Vec<BigInt> = g.torsion().to_vec();
    let tors_count: usize = torsion
        .iter()
        .map(|t| t.to_usize().unwrap_or(usize::MAX))
        .product();
    let mut radius = bound as i64;
    while radius > 1
        && (2 * radius + 1)
            .pow(d as u32)
            .saturating_mul(tors_count as i64)
            > 20_000
    {
        radius -= 1;
    }
    let mut coords = vec![BigInt::zero(); d + torsion.len()];
    let mut limits: Vec<(BigInt, BigInt)> = (0..d)
        .map(|_| (BigInt::from(-radius), BigInt::from(radius)))
        .collect();
    limits.extend(torsion.iter().map(|t| (BigInt::zero(), t - 1)));
    for (c, (lo, _)) in coords.iter_mut().zip(&limits) {
        *c = lo.clone();
    }
    loop {
        let x = p.from_canonical(&coords);
        if let Some(y) = u.apply(&x) {
            if u.target.contains(&y) && !p.contains(&x) {
                return (Truth::False, Some(x));
            }
        }
        let mut k = 0;
        loop {
            if k == coords.len() {
                return (Truth::Unknown, None);
            }
            coords[k] += 1;
            if coords[k] <= limits[k].1 {
                break;
            }
            coords[k] = limits[k].0.clone();
            k += 1;
        }
    }
}

/// Exactness for saturated torsion-free source and target: the pullback of
/// the target cone must be contained in the source cone, checked by Farkas
/// through the facet normals of the source cone.
fn saturated_exact(u: &MonoidHom) -> bool {
    let p = &u.source;
    let q = &u.target;
    let dp = p.gp_rank();
    // free-coordinate matrix of u^gp: columns are images of the free basis of P^gp
    let cols: Vec<Vec<BigInt>> = (0..dp)
        .map(|k| {
            let mut c = vec![BigInt::zero(); dp];
            c[k] = BigInt::one();
            let x = p.from_canonical(&c);
            q.free_coords(&u.apply(&x).expect("in gp")).expect("in gp")
        })
        .collect();
    let a = IntMatrix::from_columns(q.gp_rank(), &cols);
    let q_forms = linear_forms(q);
    let pulled: Vec<Vec<BigInt>> = q_forms.iter().map(|f| a.transpose().mul_vec(f)).collect();
    let dual = Cone::new(dp, pulled);
    linear_forms(p).iter().all(|m| dual.contains(m))
}

/// Facet normals of a monoid's cone as forms on free coordinates.
fn linear_forms(m: &FineMonoid) -> Vec<Vec<BigInt>> {
    let d = m.gp_rank();
    let cone = m.cone();
    // span coordinates = first span_dim rows of the SNF transform
    let basis: Vec<Vec<BigInt>> = (0..d)
        .map(|k| {
            let mut e = vec![BigInt::zero(); d];
            e[k] = BigInt::one();
            cone.span_coords(&e)
                .unwrap_or_else(|| vec![BigInt::zero(); cone.span_dim()])
        })
        .collect();
    cone.normals()
        .iter()
        .map(|n| basis.iter().map(|b| dot(n, b)).collect())
        .collect()
}

/// Enumerates isomorphisms of sharp monoids by matching irreducibles. With
/// `base`, only isomorphisms carrying the first structure map onto the second
/// are kept. Stops after `limit` results.
pub fn isomorphisms(
    m: &FineMonoid,
    n: &FineMonoid,
    base: Option<(&MonoidHom, &MonoidHom)>,
    limit: usize,
) -> Result<Vec<MonoidHom>> {
    let im = m.irreducibles()?;
    let jn = n.irreducibles()?;
    if im.len() != jn.len() || m.groupify() != n.groupify() {
        return Ok(Vec::new());
    }
    let k = im.len();
    let rel_m = relation_lattice(m.ambient(), &im);
    let rel_n = relation_lattice(n.ambient(), &jn);
    if rel_m.rank() != rel_n.rank() {
        return Ok(Vec::new());
    }
    let inv_m = facet_incidence(m, &im);
    let inv_n = facet_incidence(n, &jn);
    let mut sorted_m = inv_m.clone();
    let mut sorted_n = inv_n.clone();
    sorted_m.sort_unstable();
    sorted_n.sort_unstable();
    if sorted_m != sorted_n {
        return Ok(Vec::new());
    }

    // express every generator of m over its irreducibles
    let solver = LatticeSolver::new(
        &IntMatrix::from_columns(m.ambient().dim(), &im).hcat(&m.ambient().relations()),
    );
    let gen_coords: Vec<Vec<BigInt>> = m
        .generators()
        .iter()
        .map(|g| solver.solve(g).expect("irreducibles generate")[..k].to_vec())
        .collect();

    let mut out = Vec::new();
    let mut sigma = vec![usize::MAX; k];
    let mut used = vec![false; k];
    let ctx = IsoSearch {
        m,
        n,
        jn: &jn,
        rel_m: &rel_m,
        rel_n: &rel_n,
        inv_m: &inv_m,
        inv_n: &inv_n,
        gen_coords: &gen_coords,
        base,
        limit,
    };
    ctx.search(0, &mut sigma, &mut used, &mut out);
    Ok(out)
}

struct IsoSearch<'a> {
    m: &'a FineMonoid,
    n: &'a FineMonoid,
    jn: &'a [Element],
    rel_m: &'a Lattice,
    rel_n: &'a Lattice,
    inv_m: &'a [usize],
    inv_n: &'a [usize],
    gen_coords: &'a [Vec<BigInt>],
    base: Option<(&'a MonoidHom, &'a MonoidHom)>,
    limit: usize,
}

impl IsoSearch<'_> {
    fn search(
        &self,
        pos: usize,
        sigma: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<MonoidHom>,
    ) {
        if out.len() >= self.limit {
            return;
        }
        let k = sigma.len();
        if pos == k {
            if let Some(h) = self.check(sigma) {
                out.push(h);
            }
            return;
        }
        for j in 0..k {
            if used[j] || self.inv_m[pos] != self.inv_n[j] {
                continue;
            }
            sigma[pos] = j;
            used[j] = true;
            self.search(pos + 1, sigma, used, out);
            used[j] = false;
            sigma[pos] = usize::MAX;
        }
    }

    fn check(&self, sigma: &[usize]) -> Option<MonoidHom> {
        let k = sigma.len();
        let permute = |v: &[BigInt], forward: bool| {
            let mut w = vec![BigInt::zero(); k];
            for (i, &s) in sigma.iter().enumerate() {
                if forward {
                    w[s] = v[i].clone();
                } else {
                    w[i] = v[s].clone();
                }
            }
            w
        };
        if !self
            .rel_m
            .basis()
            .columns()
            .iter()
            .all(|c| self.rel_n.contains(&permute(c, true)))
        {
            return None;
        }
        if !self
            .rel_n
            .basis()
            .columns()
            .iter()
            .all(|c| self.rel_m.contains(&permute(c, false)))
        {
            return None;
        }
        let targets: Vec<Element> = sigma.iter().map(|&s| self.jn[s].clone()).collect();
        let images = self
            .gen_coords
            .iter()
            .map(|c| self.n.ambient().combine(c, &targets))
            .collect();
        let hom = MonoidHom::new_unchecked(self.m.clone(), self.n.clone(), images);
        if let Some((bm, bn)) = self.base {
            let ok = bm
                .images()
                .iter()
                .zip(bn.images())
                .all(|(x, y)| hom.apply(x).as_ref() == Some(y));
            if !ok {
                return None;
            }
        }
        Some(hom)
    }
}

fn relation_lattice(ambient: &Ambient, elems: &[Element]) -> Lattice {
    let k = elems.len();
    let m = IntMatrix::from_columns(ambient.dim(), elems).hcat(&ambient.relations());
    let rows: Vec<usize> = (0..k).collect();
    Lattice::new(&LatticeSolver::new(&m).kernel_basis().select_rows(&rows))
}

fn facet_incidence(m: &FineMonoid, elems: &[Element]) -> Vec<usize> {
    let cone = m.cone();
    elems
        .iter()
        .map(|e| {
            let f = m.free_coords(e).expect("in gp");
            let s = cone.span_coords(&f).expect("in span");
            cone.evaluate(&s).iter().filter(|v| v.is_zero()).count()
        })
        .collect()
}

/// Isomorphism test. Sharp inputs get a witness between the inputs; otherwise
/// the unit groups are compared and the witness relates the sharpenings.
pub fn is_isomorphic(m: &FineMonoid, n: &FineMonoid) -> Option<MonoidHom> {
    if m.is_sharp() && n.is_sharp() {
        return isomorphisms(m, n, None, 1).ok()?.into_iter().next();
    }
    if m.units().submonoid().groupify() != n.units().submonoid().groupify() {
        return None;
    }
    isomorphisms(&m.sharpening(), &n.sharpening(), None, 1)
        .ok()?
        .into_iter()
        .next()
}

/// First face `F` of `q` (canonical face order) whose sharpened localization
/// is isomorphic to `q2`.
pub fn is_sharpened_localization(q: &FineMonoid, q2: &FineMonoid) -> Option<Face> {
    if !q2.is_sharp() {
        return None;
    }
    q.faces().into_iter().find(|f| {
        let (s, _) = q.sharp_localize(f).expect("face of q");
        s.gp_rank() == q2.gp_rank() && is_isomorphic(&s, q2).is_some()
    })
}
