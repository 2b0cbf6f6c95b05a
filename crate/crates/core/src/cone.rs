//! Rational polyhedral cones spanned by finitely many integer vectors.
//!
//! Facets are found by supporting-hyperplane search: every facet of the cone
//! is spanned by generators lying on it, so it suffices to try hyperplanes
//! through `dim - 1` independent generators. Faces are the intersections of
//! facets, recorded by the set of generator indices they contain.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::abelian::{cross_product, dot, gcd_all, IntMatrix, LatticeSolver};

#[derive(Clone, Debug)]
pub struct Cone {
    ambient_dim: usize,
    /// rational span coordinates: first `span_dim` rows of `to_span` are the coordinates,
    /// the remaining rows must vanish on the span
    to_span: IntMatrix,
    span_dim: usize,
    generators: Vec<Vec<BigInt>>,
    normals: Vec<Vec<BigInt>>,
}

impl Cone {
    pub fn new(ambient_dim: usize, generators: Vec<Vec<BigInt>>) -> Self {
        let m = IntMatrix::from_columns(ambient_dim, &generators);
        let solver = LatticeSolver::new(&m);
        let span_dim = solver.rank();
        let to_span = solver.snf().u.clone();
        let coords: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| to_span.mul_vec(g)[..span_dim].to_vec())
            .collect();
        let normals = facet_normals(span_dim, &coords);
        Cone {
            ambient_dim,
            to_span,
            span_dim,
            generators,
            normals,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn span_dim(&self) -> usize {
        self.span_dim
    }

    pub fn generators(&self) -> &[Vec<BigInt>] {
        &self.generators
    }

    /// Inward facet normals in span coordinates.
    pub fn normals(&self) -> &[Vec<BigInt>] {
        &self.normals
    }

    /// Span coordinates of `v`, `None` if `v` leaves the rational span.
    pub fn span_coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.to_span.mul_vec(v);
        if y[self.span_dim..].iter().any(|x| !x.is_zero()) {
            return None;
        }
        Some(y[..self.span_dim].to_vec())
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        match self.span_coords(v) {
            Some(c) => self.normals.iter().all(|n| !dot(n, &c).is_negative()),
            None => false,
        }
    }

    /// Values of every facet normal on `v` (span coordinates expected).
    pub fn evaluate(&self, coords: &[BigInt]) -> Vec<BigInt> {
        self.normals.iter().map(|n| dot(n, coords)).collect()
    }

    /// A linear form, in span coordinates, positive on every nonzero vector of
    /// a pointed cone.
    pub fn interior_form(&self) -> Vec<BigInt> {
        let mut h = vec![BigInt::zero(); self.span_dim];
        for n in &self.normals {
            for (a, b) in h.iter_mut().zip(n) {
                *a += b;
            }
        }
        h
    }

    /// Indices of generators lying on each facet.
    pub fn facet_sets(&self) -> Vec<BTreeSet<usize>> {
        let coords = self.generator_coords();
        self.normals
            .iter()
            .map(|n| {
                coords
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| dot(n, c).is_zero())
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }

    pub fn generator_coords(&self) -> Vec<Vec<BigInt>> {
        self.generators
            .iter()
            .map(|g| self.to_span.mul_vec(g)[..self.span_dim].to_vec())
            .collect()
    }

    /// All faces as generator index sets, sorted by (size, lexicographic).
    pub fn faces(&self) -> Vec<BTreeSet<usize>> {
        let all: BTreeSet<usize> = (0..self.generators.len()).collect();
        let mut faces: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        faces.insert(all);
        let facets = self.facet_sets();
        let mut frontier: Vec<BTreeSet<usize>> = facets.clone();
        while let Some(f) = frontier.pop() {
            if faces.insert(f.clone()) {
                for g in &facets {
                    let meet: BTreeSet<usize> = f.intersection(g).copied().collect();
                    if !faces.contains(&meet) {
                        frontier.push(meet);
                    }
                }
            }
        }
        let mut out: Vec<_> = faces.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
        out
    }

    /// Whether `v` is a nonnegative rational combination of the generators
    /// with indices in `subset`, decided through the sub-cone's facets.
    pub fn subcone_contains(&self, subset: &[usize], v: &[BigInt]) -> bool {
        let gens: Vec<_> = subset.iter().map(|&i| self.generators[i].clone()).collect();
        Cone::new(self.ambient_dim, gens).contains(v)
    }
}

fn facet_normals(dim: usize, coords: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if dim == 0 {
        return Vec::new();
    }
    let mut distinct: Vec<&Vec<BigInt>> = Vec::new();
    for c in coords {
        if c.iter().any(|x| !x.is_zero()) && !distinct.contains(&c) {
            distinct.push(c);
        }
    }
    let mut normals: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for subset in combinations(distinct.len(), dim - 1) {
        let vs: Vec<Vec<BigInt>> = subset.iter().map(|&i| distinct[i].clone()).collect();
        let mut n = cross_product(dim, &vs);
        if n.iter().all(Zero::is_zero) {
            continue;
        }
        let vals: Vec<BigInt> = distinct.iter().map(|c| dot(&n, c)).collect();
        let has_pos = vals.iter().any(Signed::is_positive);
        let has_neg = vals.iter().any(Signed::is_negative);
        if has_pos && has_neg {
            continue;
        }
        if has_neg {
            n.iter_mut().for_each(|x| *x = -x.clone());
        }
        let g = gcd_all(&n);
        n.iter_mut().for_each(|x| *x /= &g);
        normals.insert(n);
    }
    normals.into_iter().collect()
}

/// All `k`-element subsets of `0..n`, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Nonnegative rational coefficients `lambda` with `sum lambda_i v_i = target`,
/// found by Caratheodory search over independent subsets.
pub fn nonnegative_combination(
    dim: usize,
    vectors: &[Vec<BigInt>],
    target: &[BigInt],
) -> Option<Vec<BigRational>> {
    if target.iter().all(Zero::is_zero) {
        return Some(vec![BigRational::zero(); vectors.len()]);
    }
    for k in 1..=vectors.len().min(dim) {
        for subset in combinations(vectors.len(), k) {
            let cols: Vec<Vec<BigInt>> = subset.iter().map(|&i| vectors[i].clone()).collect();
            let solver = LatticeSolver::new(&IntMatrix::from_columns(dim, &cols));
            if solver.rank() < k {
                continue;
            }
            let Some(lambda) = solver.solve_rational(target) else {
                continue;
            };
            if lambda.iter().any(Signed::is_negative) {
                continue;
            }
            let mut full = vec![BigRational::zero(); vectors.len()];
            for (&i, l) in subset.iter().zip(lambda) {
                full[i] = l;
            }
            return Some(full);
        }
    }
    None
}
