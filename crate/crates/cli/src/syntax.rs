//! The `.kf` script language: lexer, parser, static checks and the
//! canonical printer.
//!
//! ```text
//! script   = { item } ;
//! item     = monoid | hom | tuple | chart | matrix | command ;
//! monoid   = "monoid" NAME "in" ambient "{" "gens" vector { vector } "}" ;
//! ambient  = "Z" "^" INT { "+" "Z" "/" INT } ;
//! hom      = "hom" NAME ":" NAME "->" NAME "{" { "gen" vector "->" vector } "}" ;
//! tuple    = "tuple" NAME "=" "(" NAME { "," NAME } ")" "over" ( NAME | "0" ) ;
//! chart    = "chart" NAME "{" "base" NAME "chart" NAME "via" NAME
//!            "stalks" NAME NAME "via" NAME NAME NAME "char" INT "}" ;
//! matrix   = "matrix" NAME "{" "rows" vector { vector } "}" ;
//! command  = "do" WORD { arg } ;
//! arg      = NAME | INT | vector | NAME "=" ( NAME | INT ) ;
//! vector   = "(" [ INT { "," INT } ] ")" ;
//! ```
//!
//! `#` starts a comment running to the end of the line.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source position attached to a syntax node. Positions never take part in
/// equality, so a script equals its re-parsed canonical print.
#[derive(Clone, Copy, Debug, Default)]
pub struct At(pub Pos);

impl PartialEq for At {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for At {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }

    fn expected(pos: Pos, expected: &str, found: &Tok) -> Self {
        Self::new(pos, format!("expected {expected}, found {found}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub at: At,
}

impl Name {
    pub fn pos(&self) -> Pos {
        self.at.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vector {
    pub values: Vec<BigInt>,
    pub at: At,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientSpec {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AmbientSpec {
    pub fn dim(&self) -> usize {
        self.rank + self.torsion.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoidDecl {
    pub name: Name,
    pub ambient: AmbientSpec,
    pub gens: Vec<Vector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomDecl {
    pub name: Name,
    pub source: Name,
    pub target: Name,
    pub assignments: Vec<(Vector, Vector)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleDecl {
    pub name: Name,
    pub members: Vec<Name>,
    /// `None` for the trivial base `0`
    pub base: Option<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartDecl {
    pub name: Name,
    pub base: Name,
    pub chart: Name,
    pub via: Name,
    pub my: Name,
    pub mx: Name,
    pub c_y: Name,
    pub c_x: Name,
    pub phi: Name,
    pub residue_char: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixDecl {
    pub name: Name,
    pub rows: Vec<Vector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Name(Name),
    Int(BigInt),
    Vector(Vector),
    Option(String, Box<Arg>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoCommand {
    pub command: Name,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Monoid(MonoidDecl),
    Hom(HomDecl),
    Tuple(TupleDecl),
    Chart(Box<ChartDecl>),
    Matrix(MatrixDecl),
    Do(DoCommand),
}

impl Item {
    pub fn name(&self) -> Option<&Name> {
        match self {
            Item::Monoid(d) => Some(&d.name),
            Item::Hom(d) => Some(&d.name),
            Item::Tuple(d) => Some(&d.name),
            Item::Chart(d) => Some(&d.name),
            Item::Matrix(d) => Some(&d.name),
            Item::Do(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    pub items: Vec<Item>,
}

const KEYWORDS: [&str; 15] = [
    "monoid", "hom", "tuple", "chart", "matrix", "do", "in", "gens", "gen", "over", "base", "via",
    "stalks", "char", "rows",
];

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(BigInt),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: [&str; 11] = ["->", "{", "}", "(", ")", ",", ":", "=", "+", "^", "/"];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                let d = chars[i];
                advance(&mut i, &mut line, &mut col, d);
            }
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            advance(&mut i, &mut line, &mut col, c);
            while i < chars.len() && chars[i].is_ascii_digit() {
                let d = chars[i];
                advance(&mut i, &mut line, &mut col, d);
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), pos));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let joins_word =
                    d == '-' && chars.get(i + 1).is_some_and(|e| e.is_ascii_alphabetic());
                if d.is_ascii_alphanumeric() || d == '_' || d == '\'' || joins_word {
                    advance(&mut i, &mut line, &mut col, d);
                } else {
                    break;
                }
            }
            out.push((Tok::Word(chars[start..i].iter().collect()), pos));
        } else if let Some(sym) = SYMBOLS
            .iter()
            .find(|s| s.chars().zip(&chars[i..]).all(|(a, &b)| a == b))
        {
            for _ in 0..sym.len() {
                let d = chars[i];
                advance(&mut i, &mut line, &mut col, d);
            }
            out.push((Tok::Sym(sym), pos));
        } else {
            return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn keyword(&mut self, w: &str) -> Result<(), ParseError> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::expected(
                self.pos(),
                &format!("`{w}`"),
                self.peek(),
            ))
        }
    }

    fn sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::expected(
                self.pos(),
                &format!("`{s}`"),
                self.peek(),
            ))
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) && !w.contains('-') => {
                let (_, pos) = self.bump();
                Ok(Name {
                    text: w,
                    at: At(pos),
                })
            }
            other => Err(ParseError::expected(self.pos(), "a name", &other)),
        }
    }

    fn int(&mut self) -> Result<(BigInt, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                let (_, pos) = self.bump();
                Ok((n, pos))
            }
            other => Err(ParseError::expected(self.pos(), "an integer", &other)),
        }
    }

    fn small(&mut self, what: &str) -> Result<u64, ParseError> {
        let (n, pos) = self.int()?;
        n.to_u64().ok_or_else(|| {
            ParseError::new(pos, format!("{what} must be a small nonnegative integer"))
        })
    }

    fn vector(&mut self) -> Result<Vector, ParseError> {
        let pos = self.pos();
        self.sym("(")?;
        let mut values = Vec::new();
        if !self.is_sym(")") {
            values.push(self.int()?.0);
            while self.is_sym(",") {
                self.bump();
                values.push(self.int()?.0);
            }
        }
        self.sym(")")?;
        Ok(Vector {
            values,
            at: At(pos),
        })
    }

    fn vectors(&mut self) -> Result<Vec<Vector>, ParseError> {
        let mut out = vec![self.vector()?];
        while self.is_sym("(") {
            out.push(self.vector()?);
        }
        Ok(out)
    }

    fn ambient(&mut self) -> Result<AmbientSpec, ParseError> {
        self.keyword("Z")?;
        self.sym("^")?;
        let rank = self.small("rank")? as usize;
        let mut torsion = Vec::new();
        while self.is_sym("+") {
            self.bump();
            self.keyword("Z")?;
            self.sym("/")?;
            let (d, pos) = self.int()?;
            if d < BigInt::from(2) {
                return Err(ParseError::new(
                    pos,
                    format!("torsion order must be at least 2, found {d}"),
                ));
            }
            torsion.push(d);
        }
        Ok(AmbientSpec { rank, torsion })
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let pos = self.pos();
        let word = match self.peek() {
            Tok::Word(w) => w.clone(),
            other => return Err(ParseError::expected(pos, "a declaration or `do`", other)),
        };
        match word.as_str() {
            "monoid" => {
                self.bump();
                let name = self.name()?;
                self.keyword("in")?;
                let ambient = self.ambient()?;
                self.sym("{")?;
                self.keyword("gens")?;
                let gens = self.vectors()?;
                self.sym("}")?;
                Ok(Item::Monoid(MonoidDecl {
                    name,
                    ambient,
                    gens,
                }))
            }
            "hom" => {
                self.bump();
                let name = self.name()?;
                self.sym(":")?;
                let source = self.name()?;
                self.sym("->")?;
                let target = self.name()?;
                self.sym("{")?;
                let mut assignments = Vec::new();
                while self.is_word("gen") {
                    self.bump();
                    let from = self.vector()?;
                    self.sym("->")?;
                    let to = self.vector()?;
                    assignments.push((from, to));
                }
                self.sym("}")?;
                Ok(Item::Hom(HomDecl {
                    name,
                    source,
                    target,
                    assignments,
                }))
            }
            "tuple" => {
                self.bump();
                let name = self.name()?;
                self.sym("=")?;
                self.sym("(")?;
                let mut members = vec![self.name()?];
                while self.is_sym(",") {
                    self.bump();
                    members.push(self.name()?);
                }
                self.sym(")")?;
                self.keyword("over")?;
                let base = if matches!(self.peek(), Tok::Int(n) if n == &BigInt::from(0)) {
                    self.bump();
                    None
                } else {
                    Some(self.name()?)
                };
                Ok(Item::Tuple(TupleDecl {
                    name,
                    members,
                    base,
                }))
            }
            "chart" => {
                self.bump();
                let name = self.name()?;
                self.sym("{")?;
                self.keyword("base")?;
                let base = self.name()?;
                self.keyword("chart")?;
                let chart = self.name()?;
                self.keyword("via")?;
                let via = self.name()?;
                self.keyword("stalks")?;
                let my = self.name()?;
                let mx = self.name()?;
                self.keyword("via")?;
                let c_y = self.name()?;
                let c_x = self.name()?;
                let phi = self.name()?;
                self.keyword("char")?;
                let residue_char = self.small("residue characteristic")?;
                self.sym("}")?;
                Ok(Item::Chart(Box::new(ChartDecl {
                    name,
                    base,
                    chart,
                    via,
                    my,
                    mx,
                    c_y,
                    c_x,
                    phi,
                    residue_char,
                })))
            }
            "matrix" => {
                self.bump();
                let name = self.name()?;
                self.sym("{")?;
                self.keyword("rows")?;
                let rows = self.vectors()?;
                self.sym("}")?;
                Ok(Item::Matrix(MatrixDecl { name, rows }))
            }
            "do" => {
                self.bump();
                let command = match self.peek().clone() {
                    Tok::Word(w) => {
                        let (_, p) = self.bump();
                        Name { text: w, at: At(p) }
                    }
                    other => return Err(ParseError::expected(self.pos(), "a command", &other)),
                };
                let mut args = Vec::new();
                loop {
                    match self.peek().clone() {
                        Tok::Int(n) => {
                            self.bump();
                            args.push(Arg::Int(n));
                        }
                        Tok::Sym("(") => args.push(Arg::Vector(self.vector()?)),
                        Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                            let name = self.name()?;
                            if self.is_sym("=") {
                                self.bump();
                                let value = match self.peek().clone() {
                                    Tok::Int(n) => {
                                        self.bump();
                                        Arg::Int(n)
                                    }
                                    _ => Arg::Name(self.name()?),
                                };
                                args.push(Arg::Option(name.text, Box::new(value)));
                            } else {
                                args.push(Arg::Name(name));
                            }
                        }
                        _ => break,
                    }
                }
                Ok(Item::Do(DoCommand { command, args }))
            }
            _ => Err(ParseError::expected(
                pos,
                "a declaration or `do`",
                self.peek(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Monoid,
    Hom,
    Tuple,
    Chart,
    Matrix,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Monoid => "monoid",
            Kind::Hom => "hom",
            Kind::Tuple => "tuple",
            Kind::Chart => "chart",
            Kind::Matrix => "matrix",
        })
    }
}

/// Parses and statically checks a script: names are unique and resolve to
/// earlier declarations of the right kind, and vector arities match the
/// declared ambients.
pub fn parse(text: &str) -> Result<Script, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut items = Vec::new();
    while *p.peek() != Tok::Eof {
        items.push(p.item()?);
    }
    let script = Script { items };
    check(&script)?;
    Ok(script)
}

type Scope<'a> = HashMap<&'a str, (Kind, Option<&'a AmbientSpec>)>;

fn lookup<'a>(
    scope: &Scope<'a>,
    n: &Name,
    kind: Kind,
) -> Result<Option<&'a AmbientSpec>, ParseError> {
    match scope.get(n.text.as_str()) {
        None => Err(ParseError::new(
            n.pos(),
            format!("unresolved reference `{}`", n.text),
        )),
        Some((k, _)) if *k != kind => Err(ParseError::new(
            n.pos(),
            format!("`{}` is a {k}, expected a {kind}", n.text),
        )),
        Some((_, amb)) => Ok(*amb),
    }
}

fn check(script: &Script) -> Result<(), ParseError> {
    let mut scope: Scope = HashMap::new();
    let arity = |v: &Vector, amb: &AmbientSpec| {
        if v.values.len() == amb.dim() {
            Ok(())
        } else {
            Err(ParseError::new(
                v.at.0,
                format!(
                    "arity mismatch: tuple has {} entries, ambient expects {}",
                    v.values.len(),
                    amb.dim()
                ),
            ))
        }
    };
    for item in &script.items {
        if let Some(name) = item.name() {
            if scope.contains_key(name.text.as_str()) {
                return Err(ParseError::new(
                    name.pos(),
                    format!("duplicate name `{}`", name.text),
                ));
            }
        }
        match item {
            Item::Monoid(d) => {
                for g in &d.gens {
                    arity(g, &d.ambient)?;
                }
                scope.insert(&d.name.text, (Kind::Monoid, Some(&d.ambient)));
            }
            Item::Hom(d) => {
                let src = lookup(&scope, &d.source, Kind::Monoid)?.expect("monoids carry ambients");
                let dst = lookup(&scope, &d.target, Kind::Monoid)?.expect("monoids carry ambients");
                for (a, b) in &d.assignments {
                    arity(a, src)?;
                    arity(b, dst)?;
                }
                scope.insert(&d.name.text, (Kind::Hom, None));
            }
            Item::Tuple(d) => {
                let kind = if d.base.is_some() {
                    Kind::Hom
                } else {
                    Kind::Monoid
                };
                if let Some(b) = &d.base {
                    lookup(&scope, b, Kind::Monoid)?;
                }
                for m in &d.members {
                    lookup(&scope, m, kind)?;
                }
                scope.insert(&d.name.text, (Kind::Tuple, None));
            }
            Item::Chart(d) => {
                for n in [&d.base, &d.chart, &d.my, &d.mx] {
                    lookup(&scope, n, Kind::Monoid)?;
                }
                for n in [&d.via, &d.c_y, &d.c_x, &d.phi] {
                    lookup(&scope, n, Kind::Hom)?;
                }
                scope.insert(&d.name.text, (Kind::Chart, None));
            }
            Item::Matrix(d) => {
                let width = d.rows[0].values.len();
                for r in &d.rows {
                    if r.values.len() != width {
                        return Err(ParseError::new(
                            r.at.0,
                            format!(
                                "arity mismatch: row has {} entries, expected {width}",
                                r.values.len()
                            ),
                        ));
                    }
                }
                scope.insert(&d.name.text, (Kind::Matrix, None));
            }
            Item::Do(c) => {
                for a in &c.args {
                    if let Arg::Name(n) = a {
                        if !scope.contains_key(n.text.as_str()) {
                            return Err(ParseError::new(
                                n.pos(),
                                format!("unresolved reference `{}`", n.text),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- printer

fn fmt_vector(v: &Vector) -> String {
    let parts: Vec<String> = v.values.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

fn fmt_arg(a: &Arg) -> String {
    match a {
        Arg::Name(n) => n.text.clone(),
        Arg::Int(n) => n.to_string(),
        Arg::Vector(v) => fmt_vector(v),
        Arg::Option(k, v) => format!("{k}={}", fmt_arg(v)),
    }
}

impl fmt::Display for AmbientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z^{}", self.rank)?;
        for d in &self.torsion {
            write!(f, " + Z/{d}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vectors = |vs: &[Vector]| vs.iter().map(fmt_vector).collect::<Vec<_>>().join(" ");
        match self {
            Item::Monoid(d) => write!(
                f,
                "monoid {} in {} {{ gens {} }}",
                d.name.text,
                d.ambient,
                vectors(&d.gens)
            ),
            Item::Hom(d) => {
                write!(
                    f,
                    "hom {} : {} -> {} {{",
                    d.name.text, d.source.text, d.target.text
                )?;
                for (a, b) in &d.assignments {
                    write!(f, " gen {} -> {}", fmt_vector(a), fmt_vector(b))?;
                }
                f.write_str(" }")
            }
            Item::Tuple(d) => {
                let members: Vec<&str> = d.members.iter().map(|m| m.text.as_str()).collect();
                let base = d.base.as_ref().map_or("0", |b| b.text.as_str());
                write!(
                    f,
                    "tuple {} = ({}) over {base}",
                    d.name.text,
                    members.join(", ")
                )
            }
            Item::Chart(d) => write!(
                f,
                "chart {} {{ base {} chart {} via {} stalks {} {} via {} {} {} char {} }}",
                d.name.text,
                d.base.text,
                d.chart.text,
                d.via.text,
                d.my.text,
                d.mx.text,
                d.c_y.text,
                d.c_x.text,
                d.phi.text,
                d.residue_char
            ),
            Item::Matrix(d) => write!(f, "matrix {} {{ rows {} }}", d.name.text, vectors(&d.rows)),
            Item::Do(c) => {
                write!(f, "do {}", c.command.text)?;
                for a in &c.args {
                    write!(f, " {}", fmt_arg(a))?;
                }
                Ok(())
            }
        }
    }
}

/// Canonical text of a script, one item per line.
pub fn unparse(script: &Script) -> String {
    script.items.iter().map(|i| format!("{i}\n")).collect()
}

/// A monoid declaration in canonical form.
pub fn monoid_item(name: &str, ambient: AmbientSpec, gens: Vec<Vec<BigInt>>) -> Item {
    let at = At::default();
    Item::Monoid(MonoidDecl {
        name: Name {
            text: name.to_string(),
            at,
        },
        ambient,
        gens: gens
            .into_iter()
            .map(|values| Vector { values, at })
            .collect(),
    })
}

/// Parses a lone vector such as `(1,-2)`.
pub fn parse_vector(text: &str) -> Result<Vec<BigInt>, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let v = p.vector()?;
    if *p.peek() != Tok::Eof {
        return Err(ParseError::expected(p.pos(), "end of input", p.peek()));
    }
    Ok(v.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_monoid() {
        let s = parse("monoid N2 in Z^2 { gens (1,0) (0,1) }").unwrap();
        assert_eq!(s.items.len(), 1);
        let Item::Monoid(d) = &s.items[0] else {
            panic!()
        };
        assert_eq!(d.gens.len(), 2);
        assert_eq!(
            d.ambient,
            AmbientSpec {
                rank: 2,
                torsion: vec![]
            }
        );
    }

    #[test]
    fn doubling_hom() {
        let s = parse("monoid N in Z^1 { gens (1) }\nhom u : N -> N { gen (1) -> (2) }").unwrap();
        let Item::Hom(h) = &s.items[1] else { panic!() };
        assert_eq!(h.assignments[0].1.values, vec![BigInt::from(2)]);
    }

    #[test]
    fn arity_mismatch_points_at_the_tuple() {
        let e = parse("monoid M in Z^2 { gens (1,0,0) }").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 24 });
        assert!(e.message.contains("arity mismatch"), "{e}");
    }

    #[test]
    fn errors_name_what_was_expected() {
        let e = parse("monoid M Z^2 { gens (1,0) }").unwrap_err();
        assert_eq!(e.message, "expected `in`, found `Z`");
        assert_eq!(e.pos, Pos { line: 1, col: 10 });
        let e = parse("monoid N in Z^1 { gens (1) }\nmonoid N in Z^1 { gens (2) }").unwrap_err();
        assert_eq!(e.pos.line, 2);
        assert!(e.message.starts_with("duplicate name"));
        let e = parse("hom u : A -> A { }").unwrap_err();
        assert!(e.message.starts_with("unresolved reference"));
    }

    #[test]
    fn round_trip_keeps_structure() {
        let text =
            "# comment\nmonoid T in Z^1 + Z/2 { gens (1, 1) }\nmonoid N in Z^1 { gens (1) }\n\
                    hom s : N -> T { gen (1) -> (1,1) }\ntuple P = (s, s) over N\n\
                    matrix A { rows (1,2) (3,-4) }\ndo facelem-check P split=1\ndo snf A\n";
        let s = parse(text).unwrap();
        let printed = unparse(&s);
        assert_eq!(parse(&printed).unwrap(), s);
        assert_eq!(unparse(&parse(&printed).unwrap()), printed);
    }
}
