//! Structured (`katofan/1`) documents, their ingestion, and Graphviz output.
//!
//! Every document is `{"format": "katofan/1", "object": {KIND: BODY}}` with
//! `KIND` one of `monoid`, `hom`, `group`, `matrix`, `snf`, `faces`, `fan`,
//! `report` or `batch`. Unknown fields are rejected on ingestion.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use katofan_core::abelian::{smith_normal_form, FGAbelianGroup, IntMatrix};
use katofan_core::fan::Fan;
use katofan_core::monoid::{Ambient, Element, FineMonoid, MonoidHom};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT: &str = "katofan/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub format: String,
    pub object: Object,
}

impl Document {
    pub fn new(object: Object) -> Self {
        Document {
            format: FORMAT.to_string(),
            object,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Object {
    Monoid(MonoidDoc),
    Hom(HomDoc),
    Group(GroupDoc),
    Matrix(MatrixDoc),
    Snf(SnfDoc),
    Faces(FacesDoc),
    Fan(FanDoc),
    Report(ReportDoc),
    Batch(Vec<Object>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientDoc {
    pub rank: usize,
    pub torsion: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonoidDoc {
    pub ambient: AmbientDoc,
    pub generators: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomDoc {
    pub source: MonoidDoc,
    pub target: MonoidDoc,
    pub images: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub rank: usize,
    pub torsion: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnfDoc {
    pub input: MatrixDoc,
    pub diagonal: Vec<i64>,
    pub u: MatrixDoc,
    pub v: MatrixDoc,
    pub cokernel: GroupDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceDoc {
    pub indices: Vec<usize>,
    pub generators: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacesDoc {
    pub monoid: MonoidDoc,
    pub faces: Vec<FaceDoc>,
    /// covering pairs `[a, b]` with face `a` maximal inside face `b`
    pub covers: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub label: String,
    pub stalk: MonoidDoc,
    /// images of the base generators in the stalk
    pub structure: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenmapDoc {
    pub from: usize,
    pub to: usize,
    pub images: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanDoc {
    pub base: MonoidDoc,
    pub points: Vec<PointDoc>,
    /// all strict relations `[a, b]`, meaning `a < b`
    pub order: Vec<[usize; 2]>,
    pub genmaps: Vec<GenmapDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub command: String,
    pub flags: BTreeMap<String, bool>,
    pub values: BTreeMap<String, String>,
    pub verdict: String,
}

impl ReportDoc {
    pub fn new(command: &str, verdict: impl Into<String>) -> Self {
        ReportDoc {
            command: command.to_string(),
            verdict: verdict.into(),
            ..Default::default()
        }
    }

    pub fn flag(mut self, key: &str, value: bool) -> Self {
        self.flags.insert(key.to_string(), value);
        self
    }

    pub fn value(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }
}

// ---------------------------------------------------------------- emission

fn small(x: &BigInt) -> Result<i64, CliError> {
    x.to_i64()
        .ok_or_else(|| CliError::domain(format!("integer {x} does not fit structured output")))
}

fn vector(v: &[BigInt]) -> Result<Vec<i64>, CliError> {
    v.iter().map(small).collect()
}

fn vectors(vs: &[Element]) -> Result<Vec<Vec<i64>>, CliError> {
    vs.iter().map(|v| vector(v)).collect()
}

fn big(v: &[i64]) -> Element {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn monoid_doc(m: &FineMonoid) -> Result<MonoidDoc, CliError> {
    Ok(MonoidDoc {
        ambient: AmbientDoc {
            rank: m.ambient().rank(),
            torsion: vector(m.ambient().moduli())?,
        },
        generators: vectors(m.generators())?,
    })
}

pub fn hom_doc(h: &MonoidHom) -> Result<HomDoc, CliError> {
    Ok(HomDoc {
        source: monoid_doc(h.source())?,
        target: monoid_doc(h.target())?,
        images: vectors(h.images())?,
    })
}

pub fn group_doc(g: &FGAbelianGroup) -> Result<GroupDoc, CliError> {
    Ok(GroupDoc {
        rank: g.rank(),
        torsion: vector(g.torsion())?,
    })
}

pub fn matrix_doc(a: &IntMatrix) -> Result<MatrixDoc, CliError> {
    let entries = (0..a.rows())
        .map(|i| vector(&a.row(i)))
        .collect::<Result<_, _>>()?;
    Ok(MatrixDoc {
        rows: a.rows(),
        cols: a.cols(),
        entries,
    })
}

pub fn snf_doc(a: &IntMatrix) -> Result<SnfDoc, CliError> {
    let s = smith_normal_form(a);
    let diagonal = (0..a.rows().min(a.cols()))
        .map(|i| small(&s.diag(i)))
        .collect::<Result<_, _>>()?;
    let cokernel = katofan_core::abelian::GroupHom::free(a.clone()).cokernel();
    Ok(SnfDoc {
        input: matrix_doc(a)?,
        diagonal,
        u: matrix_doc(&s.u)?,
        v: matrix_doc(&s.v)?,
        cokernel: group_doc(&cokernel)?,
    })
}

fn face_covers(faces: &[Vec<usize>]) -> Vec<[usize; 2]> {
    let inside = |a: &Vec<usize>, b: &Vec<usize>| a != b && a.iter().all(|i| b.contains(i));
    let mut out = Vec::new();
    for (a, fa) in faces.iter().enumerate() {
        for (b, fb) in faces.iter().enumerate() {
            if inside(fa, fb) && !faces.iter().any(|fc| inside(fa, fc) && inside(fc, fb)) {
                out.push([a, b]);
            }
        }
    }
    out
}

pub fn faces_doc(m: &FineMonoid) -> Result<FacesDoc, CliError> {
    let sets = m.face_index_sets();
    let faces = sets
        .iter()
        .map(|f| {
            let gens: Vec<Element> = f.iter().map(|&i| m.generator(i).clone()).collect();
            Ok(FaceDoc {
                indices: f.clone(),
                generators: vectors(&gens)?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(FacesDoc {
        monoid: monoid_doc(m)?,
        faces,
        covers: face_covers(sets),
    })
}

pub fn fan_doc(x: &Fan) -> Result<FanDoc, CliError> {
    let points = (0..x.len())
        .map(|a| {
            Ok(PointDoc {
                label: x.label(a).to_string(),
                stalk: monoid_doc(x.stalk(a))?,
                structure: vectors(x.structure(a).images())?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut order = Vec::new();
    for a in 0..x.len() {
        for b in 0..x.len() {
            if a != b && x.leq(a, b) {
                order.push([a, b]);
            }
        }
    }
    let genmaps = x
        .genmaps()
        .iter()
        .map(|(&(from, to), h)| {
            Ok(GenmapDoc {
                from,
                to,
                images: vectors(h.images())?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(FanDoc {
        base: monoid_doc(x.base())?,
        points,
        order,
        genmaps,
    })
}

// ---------------------------------------------------------------- ingestion

/// A structured document turned back into library objects.
#[derive(Clone, Debug)]
pub enum Ingested {
    Monoid(FineMonoid),
    Hom(MonoidHom),
    Group(FGAbelianGroup),
    Matrix(IntMatrix),
    /// a matrix whose Smith form was checked on ingestion
    Snf(IntMatrix),
    Faces(FineMonoid),
    Fan(Fan),
    Report(ReportDoc),
    Batch(Vec<Ingested>),
}

fn invalid(message: impl std::fmt::Display) -> CliError {
    CliError::domain(format!("invalid document: {message}"))
}

fn monoid_from(d: &MonoidDoc) -> Result<FineMonoid, CliError> {
    let ambient = Ambient::new(
        d.ambient.rank,
        d.ambient.torsion.iter().map(|&x| BigInt::from(x)).collect(),
    )
    .map_err(invalid)?;
    for g in &d.generators {
        if g.len() != ambient.dim() {
            return Err(invalid(format!(
                "generator of length {} in an ambient of dimension {}",
                g.len(),
                ambient.dim()
            )));
        }
    }
    FineMonoid::new(ambient, d.generators.iter().map(|g| big(g)).collect()).map_err(invalid)
}

fn hom_from(d: &HomDoc) -> Result<MonoidHom, CliError> {
    MonoidHom::new(
        monoid_from(&d.source)?,
        monoid_from(&d.target)?,
        d.images.iter().map(|g| big(g)).collect(),
    )
    .map_err(invalid)
}

fn matrix_from(d: &MatrixDoc) -> Result<IntMatrix, CliError> {
    if d.entries.len() != d.rows || d.entries.iter().any(|r| r.len() != d.cols) {
        return Err(invalid("matrix shape does not match its entries"));
    }
    IntMatrix::new(
        d.rows,
        d.cols,
        d.entries
            .iter()
            .flatten()
            .map(|&x| BigInt::from(x))
            .collect(),
    )
    .map_err(invalid)
}

fn group_from(d: &GroupDoc) -> Result<FGAbelianGroup, CliError> {
    FGAbelianGroup::new(d.rank, d.torsion.iter().map(|&x| BigInt::from(x)).collect())
        .map_err(invalid)
}

fn fan_from(d: &FanDoc) -> Result<Fan, CliError> {
    let base = monoid_from(&d.base)?;
    let n = d.points.len();
    let mut stalks = Vec::with_capacity(n);
    let mut structure = Vec::with_capacity(n);
    for p in &d.points {
        let s = monoid_from(&p.stalk)?;
        structure.push(
            MonoidHom::new(
                base.clone(),
                s.clone(),
                p.structure.iter().map(|g| big(g)).collect(),
            )
            .map_err(invalid)?,
        );
        stalks.push(s);
    }
    let mut leq = vec![vec![false; n]; n];
    for (a, row) in leq.iter_mut().enumerate() {
        row[a] = true;
    }
    for &[a, b] in &d.order {
        if a >= n || b >= n {
            return Err(invalid(format!("order pair [{a}, {b}] out of range")));
        }
        leq[a][b] = true;
    }
    let mut genmaps = BTreeMap::new();
    for g in &d.genmaps {
        if g.from >= n || g.to >= n {
            return Err(invalid(format!(
                "genmap {} -> {} out of range",
                g.from, g.to
            )));
        }
        let h = MonoidHom::new(
            stalks[g.from].clone(),
            stalks[g.to].clone(),
            g.images.iter().map(|x| big(x)).collect(),
        )
        .map_err(invalid)?;
        genmaps.insert((g.from, g.to), h);
    }
    let labels = d.points.iter().map(|p| p.label.clone()).collect();
    Ok(Fan::new(base, stalks, structure, leq, genmaps)
        .map_err(invalid)?
        .with_labels(labels))
}

fn ingest_object(o: &Object) -> Result<Ingested, CliError> {
    Ok(match o {
        Object::Monoid(d) => Ingested::Monoid(monoid_from(d)?),
        Object::Hom(d) => Ingested::Hom(hom_from(d)?),
        Object::Group(d) => Ingested::Group(group_from(d)?),
        Object::Matrix(d) => Ingested::Matrix(matrix_from(d)?),
        Object::Snf(d) => {
            let a = matrix_from(&d.input)?;
            if snf_doc(&a)? != *d {
                return Err(invalid("Smith form does not match its input matrix"));
            }
            Ingested::Snf(a)
        }
        Object::Faces(d) => {
            let m = monoid_from(&d.monoid)?;
            if faces_doc(&m)? != *d {
                return Err(invalid("face list does not match the monoid"));
            }
            Ingested::Faces(m)
        }
        Object::Fan(d) => Ingested::Fan(fan_from(d)?),
        Object::Report(r) => Ingested::Report(r.clone()),
        Object::Batch(items) => {
            Ingested::Batch(items.iter().map(ingest_object).collect::<Result<_, _>>()?)
        }
    })
}

/// Parses and validates a structured document.
pub fn ingest(json: &str) -> Result<(Document, Ingested), CliError> {
    let doc: Document = serde_json::from_str(json).map_err(|e| {
        CliError::Parse(crate::syntax::ParseError {
            pos: crate::syntax::Pos {
                line: e.line(),
                col: e.column(),
            },
            message: format!("invalid {FORMAT} document: {e}"),
        })
    })?;
    if doc.format != FORMAT {
        return Err(invalid(format!(
            "unsupported format `{}`, expected `{FORMAT}`",
            doc.format
        )));
    }
    let object = ingest_object(&doc.object)?;
    Ok((doc, object))
}

/// Re-emits an ingested object.
pub fn reemit(x: &Ingested) -> Result<Object, CliError> {
    Ok(match x {
        Ingested::Monoid(m) => Object::Monoid(monoid_doc(m)?),
        Ingested::Hom(h) => Object::Hom(hom_doc(h)?),
        Ingested::Group(g) => Object::Group(group_doc(g)?),
        Ingested::Matrix(a) => Object::Matrix(matrix_doc(a)?),
        Ingested::Snf(a) => Object::Snf(snf_doc(a)?),
        Ingested::Faces(m) => Object::Faces(faces_doc(m)?),
        Ingested::Fan(f) => Object::Fan(fan_doc(f)?),
        Ingested::Report(r) => Object::Report(r.clone()),
        Ingested::Batch(items) => {
            Object::Batch(items.iter().map(reemit).collect::<Result<_, _>>()?)
        }
    })
}

// ---------------------------------------------------------------- dot

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Hasse diagram with edges drawn from smaller to larger elements.
pub fn hasse_dot(name: &str, labels: &[String], covers: &[[usize; 2]]) -> String {
    let mut s = format!("digraph {name} {{\n  rankdir=BT;\n");
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(s, "  n{i} [label=\"{}\"];", escape(l));
    }
    for [a, b] in covers {
        let _ = writeln!(s, "  n{a} -> n{b};");
    }
    s.push_str("}\n");
    s
}

pub fn faces_dot(m: &FineMonoid) -> String {
    let sets = m.face_index_sets();
    let labels: Vec<String> = sets
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
    hasse_dot("faces", &labels, &face_covers(sets))
}

pub fn fan_dot(x: &Fan) -> String {
    let labels: Vec<String> = (0..x.len())
        .map(|a| format!("{}: {}", x.label(a), x.stalk(a)))
        .collect();
    let covers: Vec<[usize; 2]> = x.covers().into_iter().map(|(a, b)| [a, b]).collect();
    hasse_dot("fan", &labels, &covers)
}
