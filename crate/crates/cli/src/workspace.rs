//! Evaluation of a parsed script into library objects.

use std::collections::HashMap;

use katofan_core::abelian::IntMatrix;
use katofan_core::charts::ChartDatum;
use katofan_core::groupoid::PMonoid;
use katofan_core::monoid::{Ambient, Element, FineMonoid, MonoidHom};
use num_bigint::BigInt;

use crate::error::CliError;
use crate::syntax::{Item, Kind, Name, Pos, Script, Vector};

#[derive(Clone, Debug)]
pub enum Binding {
    Monoid(FineMonoid),
    Hom(MonoidHom),
    Tuple {
        members: Vec<PMonoid>,
        base: FineMonoid,
    },
    Chart(Box<ChartDatum>),
    Matrix(IntMatrix),
}

impl Binding {
    pub fn kind(&self) -> Kind {
        match self {
            Binding::Monoid(_) => Kind::Monoid,
            Binding::Hom(_) => Kind::Hom,
            Binding::Tuple { .. } => Kind::Tuple,
            Binding::Chart(_) => Kind::Chart,
            Binding::Matrix(_) => Kind::Matrix,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    order: Vec<String>,
    bindings: HashMap<String, (Binding, Pos)>,
}

fn domain(pos: Pos, message: impl std::fmt::Display) -> CliError {
    CliError::Domain {
        pos: Some(pos),
        message: message.to_string(),
    }
}

fn element(v: &Vector) -> Element {
    v.values.clone()
}

impl Workspace {
    pub fn build(script: &Script) -> Result<Self, CliError> {
        let mut ws = Workspace::default();
        for item in &script.items {
            let Some(name) = item.name() else { continue };
            let binding = match item {
                Item::Monoid(d) => {
                    let ambient = Ambient::new(d.ambient.rank, d.ambient.torsion.clone())
                        .map_err(|e| domain(d.name.pos(), e))?;
                    let gens = d.gens.iter().map(element).collect();
                    Binding::Monoid(
                        FineMonoid::new(ambient, gens).map_err(|e| domain(d.name.pos(), e))?,
                    )
                }
                Item::Hom(d) => {
                    let src = ws.monoid(&d.source)?;
                    let dst = ws.monoid(&d.target)?;
                    let mut images: Vec<Option<Element>> = vec![None; src.len()];
                    for (from, to) in &d.assignments {
                        let g = src
                            .ambient()
                            .element(element(from))
                            .map_err(|e| domain(from.at.0, e))?;
                        let Some(i) = src.generators().iter().position(|h| *h == g) else {
                            return Err(domain(
                                from.at.0,
                                format!("{} is not a generator of {}", fmt(from), d.source.text),
                            ));
                        };
                        if images[i].is_some() {
                            return Err(domain(
                                from.at.0,
                                format!("generator {} assigned twice", fmt(from)),
                            ));
                        }
                        images[i] = Some(element(to));
                    }
                    let images: Option<Vec<Element>> = images.into_iter().collect();
                    let Some(images) = images else {
                        return Err(domain(
                            d.name.pos(),
                            format!("hom {} leaves a generator unassigned", d.name.text),
                        ));
                    };
                    Binding::Hom(
                        MonoidHom::new(src, dst, images).map_err(|e| domain(d.name.pos(), e))?,
                    )
                }
                Item::Tuple(d) => {
                    let (members, base) = match &d.base {
                        None => {
                            let ms: Result<Vec<PMonoid>, CliError> = d
                                .members
                                .iter()
                                .map(|m| Ok(PMonoid::over_trivial(&ws.monoid(m)?)))
                                .collect();
                            (ms?, FineMonoid::trivial())
                        }
                        Some(b) => {
                            let base = ws.monoid(b)?;
                            let mut ms = Vec::new();
                            for m in &d.members {
                                let h = ws.hom(m)?;
                                if h.source() != &base {
                                    return Err(domain(
                                        m.pos(),
                                        format!("{} does not start at the base {}", m.text, b.text),
                                    ));
                                }
                                ms.push(PMonoid::new(h));
                            }
                            (ms, base)
                        }
                    };
                    Binding::Tuple { members, base }
                }
                Item::Chart(d) => {
                    let u = ws.hom(&d.via)?;
                    let expect = |m: &Name, got: &FineMonoid, role: &str| -> Result<(), CliError> {
                        if ws.monoid(m)? == *got {
                            Ok(())
                        } else {
                            Err(domain(
                                m.pos(),
                                format!("{} does not match the {role} of the chart maps", m.text),
                            ))
                        }
                    };
                    expect(&d.base, u.source(), "source")?;
                    expect(&d.chart, u.target(), "target")?;
                    let c_y = ws.hom(&d.c_y)?;
                    let c_x = ws.hom(&d.c_x)?;
                    let phi = ws.hom(&d.phi)?;
                    expect(&d.my, phi.source(), "source of phi")?;
                    expect(&d.mx, phi.target(), "target of phi")?;
                    let datum = ChartDatum::new(u, c_y, c_x, phi, d.residue_char)
                        .map_err(|e| domain(d.name.pos(), e))?;
                    Binding::Chart(Box::new(datum))
                }
                Item::Matrix(d) => {
                    let cols = d.rows[0].values.len();
                    let entries = d
                        .rows
                        .iter()
                        .flat_map(|r| r.values.iter().cloned())
                        .collect();
                    Binding::Matrix(
                        IntMatrix::new(d.rows.len(), cols, entries)
                            .map_err(|e| domain(d.name.pos(), e))?,
                    )
                }
                Item::Do(_) => unreachable!("commands carry no name"),
            };
            ws.order.push(name.text.clone());
            ws.bindings.insert(name.text.clone(), (binding, name.pos()));
        }
        Ok(ws)
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name).map(|(b, _)| b)
    }

    pub fn position(&self, name: &str) -> Option<Pos> {
        self.bindings.get(name).map(|(_, p)| *p)
    }

    /// Name of the last declared binding of one of the given kinds.
    pub fn last_of(&self, kinds: &[Kind]) -> Option<&str> {
        self.order
            .iter()
            .rev()
            .find(|n| kinds.contains(&self.bindings[*n].0.kind()))
            .map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.order
    }

    fn monoid(&self, n: &Name) -> Result<FineMonoid, CliError> {
        match self.get(&n.text) {
            Some(Binding::Monoid(m)) => Ok(m.clone()),
            _ => Err(domain(n.pos(), format!("`{}` is not a monoid", n.text))),
        }
    }

    fn hom(&self, n: &Name) -> Result<MonoidHom, CliError> {
        match self.get(&n.text) {
            Some(Binding::Hom(h)) => Ok(h.clone()),
            _ => Err(domain(n.pos(), format!("`{}` is not a hom", n.text))),
        }
    }
}

fn fmt(v: &Vector) -> String {
    let parts: Vec<String> = v.values.iter().map(BigInt::to_string).collect();
    format!("({})", parts.join(","))
}
