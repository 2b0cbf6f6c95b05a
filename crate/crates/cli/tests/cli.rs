use std::path::{Path, PathBuf};
use std::process::Command as Process;

use katofan_cli::commands::sample;
use katofan_cli::emit::{ingest, reemit, Document};
use katofan_cli::syntax::{parse, unparse};
use katofan_cli::{execute, Command, Format, Options};

fn golden() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "kf"))
        .collect();
    files.sort();
    assert!(!files.is_empty());
    files
}

fn katofan(args: &[&str]) -> (i32, String, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_katofan"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn golden_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn golden_scripts_are_parse_fixpoints() {
    for path in golden() {
        let text = std::fs::read_to_string(&path).unwrap();
        let script = parse(&text).unwrap();
        let printed = unparse(&script);
        assert_eq!(parse(&printed).unwrap(), script, "{}", path.display());
        assert_eq!(unparse(&parse(&printed).unwrap()), printed);
    }
}

#[test]
fn sampled_scripts_are_parse_fixpoints() {
    for seed in 0..20 {
        let text = sample(seed);
        let script = parse(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(parse(&unparse(&script)).unwrap(), script);
        assert_eq!(sample(seed), text);
    }
}

#[test]
fn emitted_documents_ingest_to_themselves() {
    let opts = Options::default();
    for path in golden() {
        let text = std::fs::read_to_string(&path).unwrap();
        let script = parse(&text).unwrap();
        for item in &script.items {
            let Some(name) = item.name() else { continue };
            for command in [
                Command::Emit,
                Command::Faces,
                Command::Spec,
                Command::Gp,
                Command::Snf,
            ] {
                let Ok(out) = execute(
                    command,
                    Some(&text),
                    std::slice::from_ref(&name.text),
                    &opts,
                ) else {
                    continue;
                };
                let Some(object) = out.object else { continue };
                let json = Document::new(object.clone()).to_json();
                let (doc, back) = ingest(&json)
                    .unwrap_or_else(|e| panic!("{} {}: {e}", name.text, command.name()));
                assert_eq!(doc.object, object);
                assert_eq!(
                    reemit(&back).unwrap(),
                    object,
                    "{} {}",
                    name.text,
                    command.name()
                );
            }
        }
    }
}

#[test]
fn documented_examples() {
    let (code, out, _) = katofan(&["faces", &golden_path("N2.kf")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("4 faces of N2"), "{out}");

    let (code, out, _) = katofan(&["facelem-check", &golden_path("tuple.kf"), "--split", "1"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS: witness on "), "{out}");

    let (code, out, _) = katofan(&["smooth-check", &golden_path("doubling.kf"), "--char", "2"]);
    assert_eq!(code, 0);
    assert_eq!(
        out.lines().next(),
        Some("FAIL: cokernel Z/2, 2 not invertible mod 2")
    );

    let (code, out, _) = katofan(&["spec", &golden_path("N2.kf"), "--format", "dot"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches(" -> ").count(), 4);
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("katofan-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let bad_syntax = write("syntax.kf", "monoid M in Z^2 { gens (1,0,0) }\n");
    let (code, _, err) = katofan(&["faces", &bad_syntax]);
    assert_eq!(code, 2);
    assert!(err.contains("1:24"), "{err}");

    let unresolved = write("unresolved.kf", "hom u : N -> N { gen (1) -> (2) }\n");
    assert_eq!(katofan(&["faces", &unresolved]).0, 2);

    // (1) -> (-1) is not a monoid hom N -> N
    let domain = write(
        "domain.kf",
        "monoid N in Z^1 { gens (1) }\nhom v : N -> N { gen (1) -> (-1) }\n",
    );
    let (code, _, err) = katofan(&["emit", &domain, "v"]);
    assert_eq!(code, 1);
    assert!(err.contains("error at 2:"), "{err}");

    assert_eq!(
        katofan(&["faces", &dir.join("missing.kf").display().to_string()]).0,
        1
    );
    assert_eq!(
        katofan(&["gp", &golden_path("N2.kf"), "--format", "dot"]).0,
        2
    );
    assert_eq!(
        katofan(&["faces", &golden_path("N2.kf"), "--format", "yaml"]).0,
        2
    );

    let doc = write(
        "doc.json",
        "{\"format\":\"katofan/9\",\"object\":{\"group\":{\"rank\":1,\"torsion\":[]}}}",
    );
    assert_eq!(katofan(&["ingest", &doc]).0, 1);
    let doc = write("broken.json", "{\"format\":");
    assert_eq!(katofan(&["ingest", &doc]).0, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_flag_writes_only_the_named_file() {
    let dir = std::env::temp_dir().join(format!("katofan-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("n2.json");
    let (code, stdout, _) = katofan(&[
        "emit",
        &golden_path("N2.kf"),
        "--format",
        "structured",
        "--out",
        &target.display().to_string(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let json = std::fs::read_to_string(&target).unwrap();
    assert!(ingest(&json).is_ok());
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scripts_run_their_commands_in_order() {
    let text = std::fs::read_to_string(golden_path("mixed.kf")).unwrap();
    let out = execute(Command::Run, Some(&text), &[], &Options::default()).unwrap();
    let headers: Vec<&str> = out.text.lines().filter(|l| l.starts_with("> ")).collect();
    assert_eq!(headers, ["> do snf A", "> do saturate S", "> do units T"]);
    assert!(out.text.contains("cokernel Z/2 + Z/4"), "{}", out.text);
    assert!(out.render(Command::Run, Format::Structured).is_ok());
}

#[test]
fn output_is_deterministic() {
    let a = katofan(&[
        "spec",
        &golden_path("tuple.kf"),
        "C3",
        "--format",
        "structured",
    ]);
    let b = katofan(&[
        "spec",
        &golden_path("tuple.kf"),
        "C3",
        "--format",
        "structured",
    ]);
    assert_eq!(a, b);
    assert_eq!(
        katofan(&["sample", "--seed", "7"]),
        katofan(&["sample", "--seed", "7"])
    );
}
