//! Exact integer linear algebra.
//!
//! Everything here works over `Z` with arbitrary-precision entries: dense
//! integer matrices, the Smith normal form with its unimodular transforms,
//! integer lattices and their subquotients, finitely presented abelian groups
//! and homomorphisms between them.
//!
//! A finitely generated abelian group is always reported in canonical form:
//! a free rank together with a divisor chain `d1 | d2 | ... | dk`, `di >= 2`.
//! Two groups are isomorphic exactly when their canonical forms are equal.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbelianError {
    #[error("matrix has {found} entries, expected {rows}x{cols}")]
    BadShape {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix does not carry source relations into target relations")]
    NotWellDefined,
    #[error("{0} is not contained in the stated ambient lattice")]
    NotContained(String),
}

pub type Result<T> = std::result::Result<T, AbelianError>;

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(AbelianError::BadShape {
                rows,
                cols,
                found: entries.len(),
            });
        }
        Ok(IntMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from small integer rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let entries = rows.iter().flatten().map(|&x| big(x)).collect();
        IntMatrix {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                m.entries[i * columns.len() + j] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "hcat row mismatch");
        let cols = self.cols + other.cols;
        let mut out = Self::zeros(self.rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Keeps the listed rows, in the listed order.
    pub fn select_rows(&self, rows: &[usize]) -> IntMatrix {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            entries.extend_from_slice(&self.entries[i * self.cols..(i + 1) * self.cols]);
        }
        IntMatrix {
            rows: rows.len(),
            cols: self.cols,
            entries,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> IntMatrix {
        let columns: Vec<_> = cols.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.rows, &columns)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * factor;
            if !v.is_zero() {
                self.entries[dst * self.cols + j] += v;
            }
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * factor;
            if !v.is_zero() {
                self.entries[i * self.cols + dst] += v;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// `d = u * a * v` with `u`, `v` unimodular and `d` diagonal, nonzero
/// diagonal entries first, positive, forming a divisor chain.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl Snf {
    /// Diagonal entry `i`, or zero past the end of the diagonal.
    pub fn diag(&self, i: usize) -> BigInt {
        if i < self.d.rows().min(self.d.cols()) {
            self.d.get(i, i).clone()
        } else {
            BigInt::zero()
        }
    }

    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.diag(i)).collect()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> Snf {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut u_inv = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut rank = 0;

    for t in 0..m.min(n) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            if pi != t {
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                u_inv.swap_cols(t, pi);
            }
            if pj != t {
                d.swap_cols(t, pj);
                v.swap_cols(t, pj);
            }

            let mut clean = true;
            for i in t + 1..m {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(d.get(t, t));
                let neg = -q.clone();
                d.add_row(i, t, &neg);
                u.add_row(i, t, &neg);
                u_inv.add_col(t, i, &q);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(d.get(t, t));
                let neg = -q;
                d.add_col(j, t, &neg);
                v.add_col(j, t, &neg);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }

            // enforce the divisor chain
            let pivot = d.get(t, t).clone();
            let offender =
                (t + 1..m).find(|&i| (t + 1..n).any(|j| !d.get(i, j).is_multiple_of(&pivot)));
            if let Some(i) = offender {
                let one = BigInt::one();
                d.add_row(t, i, &one);
                u.add_row(t, i, &one);
                u_inv.add_col(i, t, &-one);
                continue;
            }
            break;
        }
        if d.get(t, t).is_zero() {
            break;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        rank += 1;
    }
    Snf {
        u,
        u_inv,
        d,
        v,
        rank,
    }
}

/// Finitely generated abelian group in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FGAbelianGroup {
    rank: usize,
    torsion: Vec<BigInt>,
}

impl FGAbelianGroup {
    /// Validates the divisor chain (each entry at least 2, each dividing the next).
    pub fn new(rank: usize, torsion: Vec<BigInt>) -> Result<Self> {
        let two = big(2);
        let chain = torsion.windows(2).all(|w| w[1].is_multiple_of(&w[0]));
        if torsion.iter().any(|d| d < &two) || !chain {
            return Err(AbelianError::NotWellDefined);
        }
        Ok(FGAbelianGroup { rank, torsion })
    }

    pub fn trivial() -> Self {
        FGAbelianGroup {
            rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn free(rank: usize) -> Self {
        FGAbelianGroup {
            rank,
            torsion: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rank == 0
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    /// Order of the group, `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion_order())
    }

    pub fn torsion_part(&self) -> FGAbelianGroup {
        FGAbelianGroup {
            rank: 0,
            torsion: self.torsion.clone(),
        }
    }
}

impl fmt::Display for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" + "))
    }
}

/// Solves integer linear systems `a x = b`.
#[derive(Clone, Debug)]
pub struct LatticeSolver {
    snf: Snf,
}

impl LatticeSolver {
    pub fn new(a: &IntMatrix) -> Self {
        LatticeSolver {
            snf: smith_normal_form(a),
        }
    }

    pub fn rows(&self) -> usize {
        self.snf.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.snf.v.rows()
    }

    pub fn rank(&self) -> usize {
        self.snf.rank
    }

    pub fn snf(&self) -> &Snf {
        &self.snf
    }

    /// Some integer solution of `a x = b`, if one exists.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.snf.u.mul_vec(b);
        let mut z = vec![BigInt::zero(); self.cols()];
        for (i, yi) in y.iter().enumerate() {
            if i < self.snf.rank {
                let (q, r) = yi.div_rem(self.snf.d.get(i, i));
                if !r.is_zero() {
                    return None;
                }
                z[i] = q;
            } else if !yi.is_zero() {
                return None;
            }
        }
        Some(self.snf.v.mul_vec(&z))
    }

    /// A rational solution of `a x = b` (unique when the columns are independent).
    pub fn solve_rational(&self, b: &[BigInt]) -> Option<Vec<BigRational>> {
        let y = self.snf.u.mul_vec(b);
        let mut z = vec![BigRational::zero(); self.cols()];
        for (i, yi) in y.iter().enumerate() {
            if i < self.snf.rank {
                z[i] = BigRational::new(yi.clone(), self.snf.d.get(i, i).clone());
            } else if !yi.is_zero() {
                return None;
            }
        }
        let v = &self.snf.v;
        Some(
            (0..v.rows())
                .map(|i| {
                    z.iter()
                        .enumerate()
                        .fold(BigRational::zero(), |acc, (j, zj)| {
                            acc + zj * BigRational::from(v.get(i, j).clone())
                        })
                })
                .collect(),
        )
    }

    /// Basis of the integer kernel of `a`, as columns.
    pub fn kernel_basis(&self) -> IntMatrix {
        let cols: Vec<usize> = (self.snf.rank..self.cols()).collect();
        self.snf.v.select_columns(&cols)
    }
}

/// A subgroup of `Z^n`, stored through a basis and a coordinate solver.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    basis: IntMatrix,
    snf: Snf,
}

impl Lattice {
    /// The lattice spanned by the columns of `gens`.
    pub fn new(gens: &IntMatrix) -> Self {
        let snf = smith_normal_form(gens);
        let dim = gens.rows();
        let columns: Vec<Vec<BigInt>> = (0..snf.rank)
            .map(|i| {
                snf.u_inv
                    .column(i)
                    .into_iter()
                    .map(|x| x * snf.diag(i))
                    .collect()
            })
            .collect();
        let basis = IntMatrix::from_columns(dim, &columns);
        Lattice { dim, basis, snf }
    }

    pub fn from_vectors(dim: usize, vectors: &[Vec<BigInt>]) -> Self {
        Self::new(&IntMatrix::from_columns(dim, vectors))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.snf.rank
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// Coordinates of `v` in the stored basis.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.snf.u.mul_vec(v);
        let mut c = Vec::with_capacity(self.snf.rank);
        for (i, yi) in y.into_iter().enumerate() {
            if i < self.snf.rank {
                let (q, r) = yi.div_rem(&self.snf.diag(i));
                if !r.is_zero() {
                    return None;
                }
                c.push(q);
            } else if !yi.is_zero() {
                return None;
            }
        }
        Some(c)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.columns().iter().all(|c| self.contains(c))
    }

    /// Presentation of `self / sub`; errors if `sub` is not contained in `self`.
    pub fn quotient(&self, sub: &Lattice) -> Result<Presentation> {
        let mut rels = Vec::with_capacity(sub.rank());
        for col in sub.basis.columns() {
            rels.push(
                self.coords(&col)
                    .ok_or_else(|| AbelianError::NotContained("sublattice".into()))?,
            );
        }
        Ok(Presentation::new(
            self.rank(),
            IntMatrix::from_columns(self.rank(), &rels),
        ))
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.contains_lattice(other) && other.contains_lattice(self)
    }
}

/// `Z^gens` modulo the column span of `relations`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    gens: usize,
    relations: IntMatrix,
}

impl Presentation {
    pub fn new(gens: usize, relations: IntMatrix) -> Self {
        assert_eq!(
            relations.rows(),
            gens,
            "relation matrix must have one row per generator"
        );
        Presentation { gens, relations }
    }

    pub fn free(gens: usize) -> Self {
        Presentation {
            gens,
            relations: IntMatrix::zeros(gens, 0),
        }
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn with_extra_relations(&self, extra: &IntMatrix) -> Presentation {
        Presentation::new(self.gens, self.relations.hcat(extra))
    }

    pub fn canonical(&self) -> FGAbelianGroup {
        self.coordinates().group
    }

    pub fn coordinates(&self) -> CanonicalCoords {
        CanonicalCoords::new(self)
    }

    pub fn relation_lattice(&self) -> Lattice {
        Lattice::new(&self.relations)
    }
}

/// Change of coordinates from a presentation to its canonical form.
///
/// Canonical coordinates list the free part first, then one residue per
/// torsion divisor, in divisor-chain order.
#[derive(Clone, Debug)]
pub struct CanonicalCoords {
    pub group: FGAbelianGroup,
    /// rows: canonical coordinates; columns: presentation generators
    pub to_canonical: IntMatrix,
    /// columns: a preimage of each canonical basis vector
    pub from_canonical: IntMatrix,
}

impl CanonicalCoords {
    fn new(p: &Presentation) -> Self {
        let snf = smith_normal_form(&p.relations);
        let one = BigInt::one();
        let mut free_rows = Vec::new();
        let mut tors_rows = Vec::new();
        let mut torsion = Vec::new();
        for i in 0..p.gens {
            let d = snf.diag(i);
            if d.is_zero() {
                free_rows.push(i);
            } else if d != one {
                tors_rows.push(i);
                torsion.push(d);
            }
        }
        let rows: Vec<usize> = free_rows.iter().chain(&tors_rows).copied().collect();
        CanonicalCoords {
            group: FGAbelianGroup {
                rank: free_rows.len(),
                torsion,
            },
            to_canonical: snf.u.select_rows(&rows),
            from_canonical: snf.u_inv.select_columns(&rows),
        }
    }

    /// Canonical coordinates of a presentation vector, torsion residues reduced.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut c = self.to_canonical.mul_vec(v);
        self.reduce(&mut c);
        c
    }

    pub fn reduce(&self, c: &mut [BigInt]) {
        let r = self.group.rank;
        for (k, d) in self.group.torsion.iter().enumerate() {
            c[r + k] = c[r + k].mod_floor(d);
        }
    }

    /// A presentation vector mapping to the given canonical coordinates.
    pub fn lift(&self, c: &[BigInt]) -> Vec<BigInt> {
        self.from_canonical.mul_vec(c)
    }

    /// Rows of `to_canonical` belonging to the free part.
    pub fn free_part(&self) -> IntMatrix {
        let rows: Vec<usize> = (0..self.group.rank).collect();
        self.to_canonical.select_rows(&rows)
    }
}

/// Homomorphism between finitely presented abelian groups, given on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    source: Presentation,
    target: Presentation,
    matrix: IntMatrix,
}

impl GroupHom {
    pub fn new(source: Presentation, target: Presentation, matrix: IntMatrix) -> Result<Self> {
        if matrix.rows() != target.gens {
            return Err(AbelianError::DimensionMismatch {
                expected: target.gens,
                found: matrix.rows(),
            });
        }
        if matrix.cols() != source.gens {
            return Err(AbelianError::DimensionMismatch {
                expected: source.gens,
                found: matrix.cols(),
            });
        }
        let image_of_rels = matrix.mul(&source.relations);
        if !image_of_rels.is_zero() {
            let target_rels = Lattice::new(&target.relations);
            if !image_of_rels
                .columns()
                .iter()
                .all(|c| target_rels.contains(c))
            {
                return Err(AbelianError::NotWellDefined);
            }
        }
        Ok(GroupHom {
            source,
            target,
            matrix,
        })
    }

    /// Map `Z^n -> Z^m` between free groups.
    pub fn free(matrix: IntMatrix) -> Self {
        GroupHom {
            source: Presentation::free(matrix.cols()),
            target: Presentation::free(matrix.rows()),
            matrix,
        }
    }

    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn target(&self) -> &Presentation {
        &self.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn cokernel(&self) -> FGAbelianGroup {
        cokernel(self)
    }

    pub fn kernel_image(&self) -> (FGAbelianGroup, FGAbelianGroup) {
        kernel_image(self)
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_image().0.is_trivial()
    }

    pub fn is_surjective(&self) -> bool {
        self.cokernel().is_trivial()
    }

    /// Sublattice of `Z^source_gens` of vectors mapped into the target relations.
    pub fn preimage_of_zero(&self) -> Lattice {
        let n = self.source.gens;
        let solver = LatticeSolver::new(&self.matrix.hcat(&self.target.relations));
        let ker = solver.kernel_basis();
        let rows: Vec<usize> = (0..n).collect();
        Lattice::new(&ker.select_rows(&rows))
    }

    /// Sublattice of `Z^target_gens` spanned by the image and the target relations.
    pub fn image_lattice(&self) -> Lattice {
        Lattice::new(&self.matrix.hcat(&self.target.relations))
    }
}

pub fn cokernel(h: &GroupHom) -> FGAbelianGroup {
    h.target.with_extra_relations(&h.matrix).canonical()
}

/// Cokernels of many maps at once.
pub fn batch_cokernels(maps: &[GroupHom], exec: Exec) -> Vec<FGAbelianGroup> {
    exec.map(maps, cokernel)
}

pub fn kernel_image(h: &GroupHom) -> (FGAbelianGroup, FGAbelianGroup) {
    let preimage = h.preimage_of_zero();
    let rels = Lattice::new(&h.source.relations);
    let kernel = preimage
        .quotient(&rels)
        .expect("well-defined maps send relations to relations")
        .canonical();
    let image = Presentation::new(h.source.gens, preimage.basis().clone()).canonical();
    (kernel, image)
}

/// The three quotients of a chain `A <= B <= C` and the verdict on exactness
/// of `0 -> B/A -> C/A -> C/B -> 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSequenceReport {
    pub b_mod_a: FGAbelianGroup,
    pub c_mod_a: FGAbelianGroup,
    pub c_mod_b: FGAbelianGroup,
    pub injective: bool,
    pub exact_in_middle: bool,
    pub surjective: bool,
}

impl ExactSequenceReport {
    pub fn is_exact(&self) -> bool {
        self.injective && self.exact_in_middle && self.surjective
    }
}

/// Checks `0 -> B/A -> C/A -> C/B -> 0` for nested subgroups of `Z^dim`
/// given by generator lists.
pub fn short_exact_check(
    dim: usize,
    a: &[Vec<BigInt>],
    b: &[Vec<BigInt>],
    c: &[Vec<BigInt>],
) -> Result<ExactSequenceReport> {
    for v in a.iter().chain(b).chain(c) {
        if v.len() != dim {
            return Err(AbelianError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let la = Lattice::from_vectors(dim, a);
    let lb = Lattice::from_vectors(dim, b);
    let lc = Lattice::from_vectors(dim, c);
    if !lb.contains_lattice(&la) {
        return Err(AbelianError::NotContained("A in B".into()));
    }
    if !lc.contains_lattice(&lb) {
        return Err(AbelianError::NotContained("B in C".into()));
    }

    let b_mod_a = lb.quotient(&la)?;
    let c_mod_a = lc.quotient(&la)?;
    let c_mod_b = lc.quotient(&lb)?;

    // B/A -> C/A: basis of B written in the basis of C
    let b_in_c: Vec<Vec<BigInt>> = lb
        .basis()
        .columns()
        .iter()
        .map(|col| lc.coords(col).expect("B is contained in C"))
        .collect();
    let f = GroupHom::new(
        b_mod_a.clone(),
        c_mod_a.clone(),
        IntMatrix::from_columns(lc.rank(), &b_in_c),
    )?;
    // C/A -> C/B: identity on C-coordinates
    let g = GroupHom::new(
        c_mod_a.clone(),
        c_mod_b.clone(),
        IntMatrix::identity(lc.rank()),
    )?;

    let exact_in_middle = f.image_lattice() == g.preimage_of_zero();
    Ok(ExactSequenceReport {
        injective: f.is_injective(),
        exact_in_middle,
        surjective: g.is_surjective(),
        b_mod_a: b_mod_a.canonical(),
        c_mod_a: c_mod_a.canonical(),
        c_mod_b: c_mod_b.canonical(),
    })
}

/// Generalized cross product: a vector orthogonal to the `n - 1` given vectors of `Z^n`.
pub fn cross_product(n: usize, vectors: &[Vec<BigInt>]) -> Vec<BigInt> {
    assert_eq!(vectors.len() + 1, n, "need n - 1 vectors");
    (0..n)
        .map(|i| {
            let rows: Vec<BigInt> = vectors
                .iter()
                .flat_map(|v| {
                    v.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, x)| x.clone())
                })
                .collect();
            let minor = IntMatrix::new(n - 1, n - 1, rows).expect("square minor");
            let det = minor.determinant();
            if i % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

pub fn gcd_all(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(rank: usize, torsion: &[i64]) -> FGAbelianGroup {
        FGAbelianGroup::new(rank, torsion.iter().map(|&d| big(d)).collect()).unwrap()
    }

    #[test]
    fn snf_one_by_one() {
        let a = IntMatrix::from_rows(&[vec![2]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.d, a);
        assert_eq!(s.u, IntMatrix::identity(1));
        assert_eq!(s.v, IntMatrix::identity(1));
    }

    #[test]
    fn snf_zero_matrix() {
        let a = IntMatrix::zeros(2, 2);
        let s = smith_normal_form(&a);
        assert!(s.d.is_zero());
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn snf_two_by_two() {
        let a = IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.d, IntMatrix::from_rows(&[vec![2, 0], vec![0, 4]]));
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(2));
    }

    #[test]
    fn snf_negative_and_rectangular() {
        let a = IntMatrix::from_rows(&[vec![-3, 0, 6], vec![0, 9, 12]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        assert!(s.d.is_diagonal());
        assert_eq!(s.invariant_factors(), vec![big(3), big(3)]);
    }

    #[test]
    fn cokernel_examples() {
        let times2 = GroupHom::free(IntMatrix::from_rows(&[vec![2]]));
        assert_eq!(times2.cokernel(), group(0, &[2]));
        let zero = GroupHom::free(IntMatrix::zeros(1, 0));
        assert_eq!(zero.cokernel(), group(1, &[]));
        let m = GroupHom::free(IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]));
        assert_eq!(m.cokernel(), group(0, &[2, 4]));
    }

    #[test]
    fn kernel_image_examples() {
        let times2 = GroupHom::free(IntMatrix::from_rows(&[vec![2]]));
        assert_eq!(times2.kernel_image(), (group(0, &[]), group(1, &[])));
        let proj = GroupHom::free(IntMatrix::from_rows(&[vec![1, 0]]));
        assert_eq!(proj.kernel_image(), (group(1, &[]), group(1, &[])));
        let ones = GroupHom::free(IntMatrix::from_rows(&[vec![1, 1], vec![1, 1]]));
        assert_eq!(ones.kernel_image(), (group(1, &[]), group(1, &[])));
    }

    #[test]
    fn hom_with_torsion_target() {
        // Z -> Z/4, 1 -> 2: image Z/2, kernel Z, cokernel Z/2
        let target = Presentation::new(1, IntMatrix::from_rows(&[vec![4]]));
        let h = GroupHom::new(
            Presentation::free(1),
            target,
            IntMatrix::from_rows(&[vec![2]]),
        )
        .unwrap();
        assert_eq!(h.cokernel(), group(0, &[2]));
        assert_eq!(h.kernel_image(), (group(1, &[]), group(0, &[2])));
    }

    #[test]
    fn ill_defined_hom_rejected() {
        // Z/2 -> Z/3, 1 -> 1 is not well defined
        let source = Presentation::new(1, IntMatrix::from_rows(&[vec![2]]));
        let target = Presentation::new(1, IntMatrix::from_rows(&[vec![3]]));
        let err = GroupHom::new(source, target, IntMatrix::from_rows(&[vec![1]]));
        assert_eq!(err, Err(AbelianError::NotWellDefined));
    }

    #[test]
    fn short_exact_examples() {
        let v = |xs: &[i64]| xs.iter().map(|&x| big(x)).collect::<Vec<_>>();
        let r = short_exact_check(1, &[v(&[1])], &[v(&[1])], &[v(&[1])]).unwrap();
        assert!(r.is_exact());
        assert!(r.b_mod_a.is_trivial() && r.c_mod_a.is_trivial() && r.c_mod_b.is_trivial());

        let r = short_exact_check(
            2,
            &[v(&[2, 0])],
            &[v(&[2, 0]), v(&[0, 1])],
            &[v(&[1, 0]), v(&[0, 1])],
        )
        .unwrap();
        assert!(r.is_exact());
        assert_eq!(r.b_mod_a, group(1, &[]));
        assert_eq!(r.c_mod_a, group(1, &[2]));
        assert_eq!(r.c_mod_b, group(0, &[2]));

        let r = short_exact_check(1, &[v(&[2])], &[v(&[1])], &[v(&[1])]).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.b_mod_a, group(0, &[2]));
        assert_eq!(r.c_mod_a, group(0, &[2]));
        assert!(r.c_mod_b.is_trivial());
    }

    #[test]
    fn short_exact_rejects_non_nested() {
        let v = |xs: &[i64]| xs.iter().map(|&x| big(x)).collect::<Vec<_>>();
        let err = short_exact_check(1, &[v(&[1])], &[v(&[2])], &[v(&[1])]);
        assert!(matches!(err, Err(AbelianError::NotContained(_))));
    }

    #[test]
    fn solver_and_kernel() {
        let a = IntMatrix::from_rows(&[vec![2, 3]]);
        let s = LatticeSolver::new(&a);
        let x = s.solve(&[big(1)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![big(1)]);
        let k = s.kernel_basis();
        assert_eq!(k.cols(), 1);
        assert!(a.mul(&k).is_zero());
        assert!(LatticeSolver::new(&IntMatrix::from_rows(&[vec![2, 4]]))
            .solve(&[big(1)])
            .is_none());
    }

    #[test]
    fn determinant_and_cross() {
        let m = IntMatrix::from_rows(&[vec![0, 2, 1], vec![1, 0, 0], vec![3, 1, 1]]);
        assert_eq!(m.determinant(), big(-1));
        let c = cross_product(
            3,
            &[vec![big(1), big(0), big(0)], vec![big(0), big(1), big(0)]],
        );
        assert_eq!(c, vec![big(0), big(0), big(1)]);
        assert_eq!(cross_product(1, &[]), vec![big(1)]);
    }

    #[test]
    fn display_groups() {
        assert_eq!(group(0, &[]).to_string(), "0");
        assert_eq!(group(1, &[2]).to_string(), "Z + Z/2");
        assert_eq!(group(2, &[]).to_string(), "Z^2");
        assert_eq!(group(0, &[2, 4]).to_string(), "Z/2 + Z/4");
    }
}
