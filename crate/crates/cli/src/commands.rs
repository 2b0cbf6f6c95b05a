//! Command dispatch. Every command maps onto one library operation and
//! produces text, a structured document and, for posets, a dot diagram.

use std::fmt::Write as _;

use clap::ValueEnum;
use katofan_core::abelian::{GroupHom, IntMatrix};
use katofan_core::charts::{
    construct_neat_chart, criterion_report, log_etale_condition, log_smooth_condition,
    neatness_check, rel_char, ChartDatum,
};
use katofan_core::fan::Fan;
use katofan_core::groupoid::{
    build_truncation, facelem_check, join, verify_groupoid, AxiomCheck, PMonoid,
};
use katofan_core::monoid::{
    format_element, hom_flags, FineMonoid, Membership, MonoidHom, DEFAULT_BOUND,
};
use katofan_core::par::Exec;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::emit::{self, Document, Object, ReportDoc};
use crate::error::CliError;
use crate::syntax::{self, Arg, Item, Kind, Script};
use crate::workspace::{Binding, Workspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Faces,
    Spec,
    Sharpen,
    Saturate,
    Units,
    Gp,
    Rank,
    Snf,
    Membership,
    Flags,
    Join,
    FacelemCheck,
    GroupoidVerify,
    RelChar,
    NeatCheck,
    NeatConstruct,
    SmoothCheck,
    EtaleCheck,
    CriterionReport,
    /// structured form of a declared monoid, hom or matrix
    Emit,
    /// execute the `do` commands of a script in order
    Run,
    /// check a script and print its canonical form
    Parse,
    /// validate a structured document and re-emit it
    Ingest,
    /// print a random script (reproducible through `--seed`)
    Sample,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn from_name(name: &str) -> Option<Self> {
        Command::value_variants()
            .iter()
            .copied()
            .find(|c| c.name() == name)
    }

    /// Kinds of binding the command acts on, in order of preference.
    fn targets(self) -> &'static [Kind] {
        use Command::*;
        match self {
            Faces | Spec | Sharpen | Saturate | Units | Gp | Membership => &[Kind::Monoid],
            Rank => &[Kind::Monoid, Kind::Matrix],
            Snf => &[Kind::Matrix, Kind::Hom],
            Flags => &[Kind::Hom],
            SmoothCheck | EtaleCheck => &[Kind::Hom, Kind::Chart],
            Join | FacelemCheck | GroupoidVerify => &[Kind::Tuple],
            RelChar | NeatCheck | NeatConstruct | CriterionReport => &[Kind::Chart],
            Emit => &[Kind::Monoid, Kind::Hom, Kind::Matrix],
            Run | Parse | Ingest | Sample => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
    Dot,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub split: Option<usize>,
    pub residue_char: Option<u64>,
    pub bound: usize,
    pub format: Format,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            split: None,
            residue_char: None,
            bound: DEFAULT_BOUND,
            format: Format::Text,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Output {
    pub text: String,
    pub object: Option<Object>,
    pub dot: Option<String>,
}

impl Output {
    fn text(text: String) -> Self {
        Output {
            text,
            object: None,
            dot: None,
        }
    }

    fn with(text: String, object: Object) -> Self {
        Output {
            text,
            object: Some(object),
            dot: None,
        }
    }

    fn dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }

    pub fn render(&self, command: Command, format: Format) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(self.text.clone()),
            Format::Structured => self
                .object
                .clone()
                .map(|o| Document::new(o).to_json())
                .ok_or_else(|| {
                    CliError::Usage(format!("{} has no structured output", command.name()))
                }),
            Format::Dot => self
                .dot
                .clone()
                .ok_or_else(|| CliError::Usage(format!("{} has no dot output", command.name()))),
        }
    }
}

fn lib(e: impl std::fmt::Display) -> CliError {
    CliError::domain(e)
}

/// Runs a command. `input` is the script (or document, for `ingest`) and
/// `args` the positional arguments after it.
pub fn execute(
    command: Command,
    input: Option<&str>,
    args: &[String],
    opts: &Options,
) -> Result<Output, CliError> {
    match command {
        Command::Sample => return Ok(Output::text(sample(opts.seed))),
        Command::Ingest => {
            let text = input.ok_or_else(|| CliError::Usage("ingest needs a document".into()))?;
            let (_, x) = emit::ingest(text)?;
            let object = emit::reemit(&x)?;
            let json = Document::new(object.clone()).to_json();
            return Ok(Output::with(json, object));
        }
        _ => {}
    }
    let text =
        input.ok_or_else(|| CliError::Usage(format!("{} needs a script", command.name())))?;
    let script = syntax::parse(text)?;
    match command {
        Command::Parse => Ok(Output::text(syntax::unparse(&script))),
        Command::Run => run_script(&script, opts),
        _ => {
            let ws = Workspace::build(&script)?;
            invoke(command, &ws, args, opts)
        }
    }
}

fn run_script(script: &Script, opts: &Options) -> Result<Output, CliError> {
    let ws = Workspace::build(script)?;
    let mut text = String::new();
    let mut objects = Vec::new();
    for item in &script.items {
        let Item::Do(c) = item else { continue };
        let command = Command::from_name(&c.command.text)
            .filter(|k| {
                !matches!(
                    k,
                    Command::Run | Command::Parse | Command::Ingest | Command::Sample
                )
            })
            .ok_or_else(|| CliError::Domain {
                pos: Some(c.command.pos()),
                message: format!("unknown command `{}`", c.command.text),
            })?;
        let mut local = opts.clone();
        let mut args = Vec::new();
        for a in &c.args {
            match a {
                Arg::Option(key, value) => {
                    let Arg::Int(n) = value.as_ref() else {
                        return Err(CliError::Domain {
                            pos: Some(c.command.pos()),
                            message: format!("option {key} needs an integer"),
                        });
                    };
                    let n: u64 = n
                        .try_into()
                        .map_err(|_| lib(format!("option {key} out of range")))?;
                    match key.as_str() {
                        "split" => local.split = Some(n as usize),
                        "char" => local.residue_char = Some(n),
                        "bound" => local.bound = n as usize,
                        other => {
                            return Err(CliError::Domain {
                                pos: Some(c.command.pos()),
                                message: format!("unknown option `{other}`"),
                            })
                        }
                    }
                }
                other => args.push(syntax_arg(other)),
            }
        }
        let out = invoke(command, &ws, &args, &local).map_err(|e| match e {
            CliError::Domain { pos: None, message } => CliError::Domain {
                pos: Some(c.command.pos()),
                message,
            },
            other => other,
        })?;
        let _ = writeln!(text, "> {item}");
        text.push_str(&out.text);
        if let Some(o) = out.object {
            objects.push(o);
        }
    }
    Ok(Output::with(text, Object::Batch(objects)))
}

fn syntax_arg(a: &Arg) -> String {
    match a {
        Arg::Name(n) => n.text.clone(),
        Arg::Int(n) => n.to_string(),
        Arg::Vector(v) => format!(
            "({})",
            v.values
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        ),
        Arg::Option(k, v) => format!("{k}={}", syntax_arg(v)),
    }
}

/// Picks the target binding: the first argument if it names one, otherwise
/// the last declaration of a suitable kind.
fn resolve<'a>(
    command: Command,
    ws: &'a Workspace,
    args: &'a [String],
) -> Result<(&'a str, &'a Binding, &'a [String]), CliError> {
    let kinds = command.targets();
    if let Some(first) = args.first() {
        if let Some(b) = ws.get(first) {
            if !kinds.contains(&b.kind()) {
                let wanted: Vec<String> = kinds.iter().map(ToString::to_string).collect();
                return Err(CliError::Domain {
                    pos: ws.position(first),
                    message: format!(
                        "{} expects a {}, `{first}` is a {}",
                        command.name(),
                        wanted.join(" or "),
                        b.kind()
                    ),
                });
            }
            return Ok((first.as_str(), b, &args[1..]));
        }
    }
    let name = ws.last_of(kinds).ok_or_else(|| {
        let wanted: Vec<String> = kinds.iter().map(ToString::to_string).collect();
        CliError::domain(format!(
            "script declares no {} for {}",
            wanted.join(" or "),
            command.name()
        ))
    })?;
    Ok((name, ws.get(name).expect("declared"), args))
}

fn invoke(
    command: Command,
    ws: &Workspace,
    args: &[String],
    opts: &Options,
) -> Result<Output, CliError> {
    let (name, target, rest) = resolve(command, ws, args)?;
    match (command, target) {
        (Command::Faces, Binding::Monoid(m)) => faces(name, m),
        (Command::Spec, Binding::Monoid(m)) => {
            let x = Fan::spec(m);
            Ok(
                Output::with(format!("Spec {name}: {x}"), Object::Fan(emit::fan_doc(&x)?))
                    .dot(emit::fan_dot(&x)),
            )
        }
        (Command::Sharpen, Binding::Monoid(m)) => {
            let s = m.sharpening();
            Ok(Output::with(
                format!("sharpening of {name}: {s}\n"),
                Object::Monoid(emit::monoid_doc(&s)?),
            ))
        }
        (Command::Saturate, Binding::Monoid(m)) => {
            let s = m.saturate(opts.bound).map_err(lib)?;
            let already = s.generators().iter().all(|g| m.contains(g));
            let note = if already { " (already saturated)" } else { "" };
            Ok(Output::with(
                format!("saturation of {name}: {s}{note}\n"),
                Object::Monoid(emit::monoid_doc(&s)?),
            ))
        }
        (Command::Units, Binding::Monoid(m)) => {
            let u = m.units();
            let group = u.submonoid().groupify();
            let gens: Vec<String> = u
                .indices()
                .iter()
                .map(|&i| format_element(m.generator(i)))
                .collect();
            let report = ReportDoc::new("units", if m.is_sharp() { "sharp" } else { "not sharp" })
                .flag("sharp", m.is_sharp())
                .value("unit_group", &group)
                .value("unit_generators", gens.join(" "));
            let text = format!(
                "units of {name}: {} (group {group}); {}\n",
                if gens.is_empty() {
                    "none".to_string()
                } else {
                    gens.join(" ")
                },
                report.verdict
            );
            Ok(Output::with(text, Object::Report(report)))
        }
        (Command::Gp, Binding::Monoid(m)) => {
            let g = m.groupify();
            Ok(Output::with(
                format!("{name}^gp = {g}\n"),
                Object::Group(emit::group_doc(&g)?),
            ))
        }
        (Command::Rank, Binding::Monoid(m)) => {
            let r = m.gp_rank();
            Ok(Output::with(
                format!("rank {name}^gp = {r}\n"),
                Object::Report(ReportDoc::new("rank", r.to_string()).value("rank", r)),
            ))
        }
        (Command::Rank, Binding::Matrix(a)) => {
            let r = katofan_core::abelian::LatticeSolver::new(a).rank();
            Ok(Output::with(
                format!("rank {name} = {r}\n"),
                Object::Report(ReportDoc::new("rank", r.to_string()).value("rank", r)),
            ))
        }
        (Command::Snf, Binding::Matrix(a)) => snf(name, a),
        (Command::Snf, Binding::Hom(h)) => snf(name, h.gp_map().matrix()),
        (Command::Membership, Binding::Monoid(m)) => {
            let point = rest.first().ok_or_else(|| {
                CliError::Usage("membership needs an element such as (1,2)".into())
            })?;
            let x = syntax::parse_vector(point)?;
            if x.len() != m.ambient().dim() {
                return Err(CliError::domain(format!(
                    "arity mismatch: {point} in an ambient of dimension {}",
                    m.ambient().dim()
                )));
            }
            membership(name, m, &x, opts.bound)
        }
        (Command::Flags, Binding::Hom(h)) => {
            let f = hom_flags(h, opts.bound);
            let mut report = ReportDoc::new("flags", format!("{name}: {h}"))
                .value("injective", f.injective)
                .value("surjective", f.surjective)
                .value("local", f.local)
                .value("exact", f.exact);
            let mut text = format!(
                "{name}: injective {}, surjective {}, local {}, exact {}",
                f.injective, f.surjective, f.local, f.exact
            );
            if let Some(w) = &f.exact_witness {
                report = report.value("exact_witness", format_element(w));
                let _ = write!(text, " (witness {})", format_element(w));
            }
            text.push('\n');
            Ok(Output::with(text, Object::Report(report)))
        }
        (Command::Join, Binding::Tuple { members, .. }) => {
            let j = join(members).map_err(lib)?;
            let x = j.fan();
            let text = format!("J({name}): {} joint faces\n{x}", j.joint_faces().len());
            Ok(Output::with(text, Object::Fan(emit::fan_doc(x)?)).dot(emit::fan_dot(x)))
        }
        (Command::FacelemCheck, Binding::Tuple { members, .. }) => {
            let split = opts.split.unwrap_or(0);
            let r = facelem_check(members, split).map_err(lib)?;
            let verdict = if r.passed {
                format!(
                    "PASS: witness on {} points (join {} points, fiber product {} points)",
                    r.witness.as_ref().map_or(0, |w| w.source().len()),
                    r.join_points,
                    r.product_points
                )
            } else {
                format!(
                    "FAIL: join has {} points, fiber product {} points",
                    r.join_points, r.product_points
                )
            };
            let report = ReportDoc::new("facelem-check", verdict.clone())
                .flag("passed", r.passed)
                .value("split", split)
                .value("join_points", r.join_points)
                .value("product_points", r.product_points);
            Ok(Output::with(format!("{verdict}\n"), Object::Report(report)))
        }
        (Command::GroupoidVerify, Binding::Tuple { members, .. }) => groupoid_verify(name, members),
        (Command::RelChar, Binding::Chart(d)) => {
            let r = rel_char(d);
            let text = format!(
                "relative characteristic of {name}: {} (group {}, sharpening {})\n",
                r.monoid, r.gp, r.sharpening
            );
            let report = ReportDoc::new("rel-char", r.gp.to_string())
                .value("monoid", &r.monoid)
                .value("group", &r.gp)
                .value("sharpening", &r.sharpening);
            Ok(Output::with(text, Object::Report(report)))
        }
        (Command::NeatCheck, Binding::Chart(d)) => {
            let r = neatness_check(d);
            let verdict = if r.neat {
                "PASS: neat".to_string()
            } else {
                format!("FAIL: {}", r.diagnostics.join("; "))
            };
            let report = ReportDoc::new("neat-check", verdict.clone())
                .flag("neat", r.neat)
                .flag("injective", r.injective)
                .flag("induced_iso", r.induced_iso)
                .value("chart_cokernel", &r.chart_cokernel)
                .value("rel_gp", &r.rel_gp);
            Ok(Output::with(format!("{verdict}\n"), Object::Report(report)))
        }
        (Command::NeatConstruct, Binding::Chart(d)) => {
            let built = construct_neat_chart(d).map_err(lib)?;
            let script = chart_script(&format!("{name}_neat"), &built);
            let neat = neatness_check(&built).neat;
            let report = ReportDoc::new("neat-construct", if neat { "neat" } else { "not neat" })
                .flag("neat", neat)
                .value("chart", syntax::unparse(&script));
            Ok(Output::with(
                syntax::unparse(&script),
                Object::Report(report),
            ))
        }
        (Command::SmoothCheck, b) => {
            let (u, p) = hom_and_char(b, opts);
            let r = log_smooth_condition(u, p).map_err(lib)?;
            let msg = r.message(p);
            let report = ReportDoc::new("smooth-check", msg.clone())
                .flag("strict", r.strict)
                .flag("kato", r.kato)
                .flag("discrepancy", r.discrepancy)
                .value("cokernel", &r.cokernel)
                .value("char", p);
            let mut text = format!("{msg}\n");
            if r.discrepancy {
                text.push_str(
                    "note: infinite cokernel; the strict and torsion readings differ here\n",
                );
            }
            Ok(Output::with(text, Object::Report(report)))
        }
        (Command::EtaleCheck, b) => {
            let (u, p) = hom_and_char(b, opts);
            let ok = log_etale_condition(u, p);
            let g: &GroupHom = u.gp_map();
            let (kernel, _) = g.kernel_image();
            let cokernel = g.cokernel();
            let verdict = format!(
                "{}: kernel {kernel}, cokernel {cokernel}, char {p}",
                if ok { "PASS" } else { "FAIL" }
            );
            let report = ReportDoc::new("etale-check", verdict.clone())
                .flag("etale", ok)
                .value("kernel", &kernel)
                .value("cokernel", &cokernel)
                .value("char", p);
            Ok(Output::with(format!("{verdict}\n"), Object::Report(report)))
        }
        (Command::CriterionReport, Binding::Chart(d)) => {
            let d = with_char(d, opts);
            let r = criterion_report(&d, true);
            let report = ReportDoc::new("criterion-report", r.verdict.clone())
                .flag("injective", r.injective)
                .flag("torsion_invertible", r.torsion_invertible)
                .flag("neat", r.neat)
                .flag("positive", r.positive)
                .value("torsion_order", &r.torsion_order);
            Ok(Output::with(format!("{r}\n"), Object::Report(report)))
        }
        (Command::Emit, Binding::Monoid(m)) => Ok(Output::with(
            format!("{m}\n"),
            Object::Monoid(emit::monoid_doc(m)?),
        )
        .dot(emit::faces_dot(m))),
        (Command::Emit, Binding::Hom(h)) => Ok(Output::with(
            format!("{h}\n"),
            Object::Hom(emit::hom_doc(h)?),
        )),
        (Command::Emit, Binding::Matrix(a)) => Ok(Output::with(
            format!("{a}\n"),
            Object::Matrix(emit::matrix_doc(a)?),
        )),
        (c, b) => Err(CliError::domain(format!(
            "{} does not apply to a {}",
            c.name(),
            b.kind()
        ))),
    }
}

fn faces(name: &str, m: &FineMonoid) -> Result<Output, CliError> {
    let sets = m.face_index_sets();
    let mut text = format!("{} faces of {name} = {m}\n", sets.len());
    for f in sets {
        let idx: Vec<String> = f.iter().map(ToString::to_string).collect();
        let gens: Vec<String> = f.iter().map(|&i| format_element(m.generator(i))).collect();
        if gens.is_empty() {
            let _ = writeln!(text, "  {{}}");
        } else {
            let _ = writeln!(text, "  {{{}}}: {}", idx.join(","), gens.join(" "));
        }
    }
    Ok(Output::with(text, Object::Faces(emit::faces_doc(m)?)).dot(emit::faces_dot(m)))
}

fn snf(name: &str, a: &IntMatrix) -> Result<Output, CliError> {
    let doc = emit::snf_doc(a)?;
    let diag: Vec<String> = doc.diagonal.iter().map(ToString::to_string).collect();
    let coker = GroupHom::free(a.clone()).cokernel();
    let text = format!(
        "Smith form of {name}: diag({}), cokernel {coker}\n",
        diag.join(", ")
    );
    Ok(Output::with(text, Object::Snf(doc)))
}

fn membership(name: &str, m: &FineMonoid, x: &[BigInt], bound: usize) -> Result<Output, CliError> {
    let answer = m.membership(x, bound).map_err(lib)?;
    let xs = format_element(x);
    let (verdict, report) = match &answer {
        Membership::Member(c) => {
            let terms: Vec<String> = c
                .iter()
                .zip(m.generators())
                .filter(|(k, _)| **k != BigInt::from(0))
                .map(|(k, g)| format!("{k}*{}", format_element(g)))
                .collect();
            let cert = if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            };
            let v = format!("member: {xs} = {cert}");
            (
                v.clone(),
                ReportDoc::new("membership", v)
                    .flag("member", true)
                    .value("certificate", format_element(c)),
            )
        }
        Membership::NotMember => {
            let v = format!("not a member: {xs} is not in {name}");
            (
                v.clone(),
                ReportDoc::new("membership", v).flag("member", false),
            )
        }
        Membership::Unknown { bound } => {
            let v = format!("unknown: no decision for {xs} within degree bound {bound}");
            (
                v.clone(),
                ReportDoc::new("membership", v).value("bound", bound),
            )
        }
    };
    Ok(Output::with(
        format!("{verdict}\n"),
        Object::Report(report.value("element", xs)),
    ))
}

fn axiom_line(label: &str, a: &AxiomCheck) -> String {
    let status = if a.passed() { "PASS" } else { "FAIL" };
    let mut s = format!("  {label}: {status} ({} checks)\n", a.checked);
    for f in a.failures.iter().take(5) {
        let _ = writeln!(s, "    {f}");
    }
    s
}

fn groupoid_verify(name: &str, charts: &[PMonoid]) -> Result<Output, CliError> {
    let t = build_truncation(charts, 3, Exec::default()).map_err(lib)?;
    let r = verify_groupoid(&t).map_err(lib)?;
    let sizes: Vec<String> = t.levels().iter().map(|l| l.fan.len().to_string()).collect();
    let mut text = format!(
        "groupoid truncation of {name}: level sizes {}\n",
        sizes.join(", ")
    );
    text.push_str(&axiom_line("simplicial identities", &r.simplicial));
    text.push_str(&axiom_line("Segal maps", &r.segal));
    text.push_str(&axiom_line("associativity", &r.associativity));
    text.push_str(&axiom_line("unique lifts", &r.unique_lift));
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    let _ = writeln!(text, "{verdict} ({})", r.scope);
    let report = ReportDoc::new("groupoid-verify", verdict)
        .flag("simplicial", r.simplicial.passed())
        .flag("segal", r.segal.passed())
        .flag("associativity", r.associativity.passed())
        .flag("unique_lift", r.unique_lift.passed())
        .value("level_sizes", sizes.join(","))
        .value("scope", &r.scope);
    Ok(Output::with(text, Object::Report(report)))
}

fn with_char(d: &ChartDatum, opts: &Options) -> ChartDatum {
    let mut d = d.clone();
    if let Some(p) = opts.residue_char {
        d.residue_char = p;
    }
    d
}

fn hom_and_char<'a>(b: &'a Binding, opts: &Options) -> (&'a MonoidHom, u64) {
    match b {
        Binding::Chart(d) => (&d.u, opts.residue_char.unwrap_or(d.residue_char)),
        Binding::Hom(h) => (h, opts.residue_char.unwrap_or(0)),
        _ => unreachable!("resolved to a hom or chart"),
    }
}

fn monoid_decl(name: &str, m: &FineMonoid) -> Item {
    let ambient = syntax::AmbientSpec {
        rank: m.ambient().rank(),
        torsion: m.ambient().moduli().to_vec(),
    };
    syntax::monoid_item(name, ambient, m.generators().to_vec())
}

fn hom_decl(name: &str, src: &str, dst: &str, h: &MonoidHom) -> Item {
    let at = syntax::At::default();
    let n = |s: &str| syntax::Name {
        text: s.to_string(),
        at,
    };
    let v = |x: &[BigInt]| syntax::Vector {
        values: x.to_vec(),
        at,
    };
    Item::Hom(syntax::HomDecl {
        name: n(name),
        source: n(src),
        target: n(dst),
        assignments: h
            .source()
            .generators()
            .iter()
            .zip(h.images())
            .map(|(g, x)| (v(g), v(x)))
            .collect(),
    })
}

/// A chart datum written out as a self-contained script.
pub fn chart_script(name: &str, d: &ChartDatum) -> Script {
    let at = syntax::At::default();
    let n = |s: &str| syntax::Name {
        text: format!("{name}_{s}"),
        at,
    };
    let items = vec![
        monoid_decl(&n("P").text, d.p()),
        monoid_decl(&n("Q").text, d.q()),
        monoid_decl(&n("My").text, d.my()),
        monoid_decl(&n("Mx").text, d.mx()),
        hom_decl(&n("u").text, &n("P").text, &n("Q").text, &d.u),
        hom_decl(&n("cY").text, &n("P").text, &n("My").text, &d.c_y),
        hom_decl(&n("cX").text, &n("Q").text, &n("Mx").text, &d.c_x),
        hom_decl(&n("phi").text, &n("My").text, &n("Mx").text, &d.phi),
        Item::Chart(Box::new(syntax::ChartDecl {
            name: syntax::Name {
                text: name.to_string(),
                at,
            },
            base: n("P"),
            chart: n("Q"),
            via: n("u"),
            my: n("My"),
            mx: n("Mx"),
            c_y: n("cY"),
            c_x: n("cX"),
            phi: n("phi"),
            residue_char: d.residue_char,
        })),
    ];
    Script { items }
}

/// A random script: three monoids in `Z^2`, a hom from `N^k` into each, and
/// a few commands.
pub fn sample(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();
    let mut names = Vec::new();
    for i in 0..3 {
        let count = rng.random_range(1..=3);
        let mut gens: Vec<Vec<BigInt>> = Vec::new();
        while gens.len() < count {
            let g: Vec<BigInt> = (0..2)
                .map(|_| BigInt::from(rng.random_range(0..=3)))
                .collect();
            if g.iter().any(|x| *x != BigInt::from(0)) && !gens.contains(&g) {
                gens.push(g);
            }
        }
        let name = format!("M{i}");
        let m = FineMonoid::new(katofan_core::monoid::Ambient::free(2), gens.clone())
            .expect("nonzero generators");
        items.push(syntax::monoid_item(
            &name,
            syntax::AmbientSpec {
                rank: 2,
                torsion: vec![],
            },
            gens,
        ));
        names.push((name, m));
    }
    let nat = FineMonoid::natural(1);
    items.push(monoid_decl("N", &nat));
    for (name, m) in &names {
        let coeffs: Vec<BigInt> = (0..m.len())
            .map(|_| BigInt::from(rng.random_range(0..=2)))
            .collect();
        let image = m.ambient().combine(&coeffs, m.generators());
        let h =
            MonoidHom::new(nat.clone(), m.clone(), vec![image]).expect("combination of generators");
        items.push(hom_decl(&format!("s{}", &name[1..]), "N", name, &h));
    }
    let mut text = syntax::unparse(&Script { items });
    let _ = writeln!(text, "tuple T = (M0, M1) over 0");
    let _ = writeln!(text, "do faces M0");
    let _ = writeln!(text, "do join T");
    let _ = writeln!(text, "do facelem-check T split=1");
    let _ = writeln!(text, "do flags s0");
    text
}
