//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always show.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::sync::Arc;
use std::time::{Duration, Instant};

use katofan_cli::emit::{ingest, reemit, Document};
use katofan_cli::syntax::{parse, unparse};
use katofan_cli::{execute, Command, Options};
use katofan_core::abelian::{GroupHom, IntMatrix};
use katofan_core::charts::{
    construct_neat_chart, log_etale_condition, log_smooth_condition, neatness_check,
    torsion_invertible, ChartDatum, ChartError,
};
use katofan_core::corpus::{corpus, get, over_natural};
use katofan_core::fan::{fan_isomorphic, Fan};
use katofan_core::groupoid::{
    all_tuples, build_truncation, facelem_sweep, join, verify_groupoid, PMonoid,
};
use katofan_core::monoid::{is_isomorphic, FineMonoid, Membership, MonoidHom, DEFAULT_BOUND};
use katofan_core::par::Exec;
use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn c1_face_lattices() -> Outcome {
    let start = Instant::now();
    for k in 0..=4 {
        let n = FineMonoid::natural(k).faces().len();
        ensure!(n == 1 << k, "N^{k} has {n} faces");
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(1), "took {t:?}");
    Ok(format!("2^k faces for k = 0..4 in {t:.2?}"))
}

fn with_units() -> Vec<(&'static str, FineMonoid)> {
    vec![
        (
            "N+Z",
            FineMonoid::free(2, &[vec![1, 0], vec![0, 1], vec![0, -1]]).unwrap(),
        ),
        ("Z", FineMonoid::free(1, &[vec![1], vec![-1]]).unwrap()),
        (
            "C3+Z",
            FineMonoid::free(
                3,
                &[
                    vec![1, 0, 0],
                    vec![1, 1, 0],
                    vec![1, 2, 0],
                    vec![0, 0, 1],
                    vec![0, 0, -1],
                ],
            )
            .unwrap(),
        ),
    ]
}

fn c2_sharpening_invariance() -> Outcome {
    let all: Vec<_> = corpus().into_iter().chain(with_units()).collect();
    for (name, p) in &all {
        let a = Arc::new(Fan::spec(p));
        let b = Arc::new(Fan::spec(&p.sharpening()));
        ensure!(fan_isomorphic(&a, &b).is_some(), "{name}");
    }
    Ok(format!(
        "{} monoids (corpus plus {} with units)",
        all.len(),
        with_units().len()
    ))
}

fn c3_join_of_one() -> Outcome {
    let mut n = 0;
    for (name, q) in corpus() {
        for p in [PMonoid::over_trivial(&q), over_natural(&q)] {
            let j = join(std::slice::from_ref(&p)).map_err(|e| format!("{name}: {e}"))?;
            ensure!(
                fan_isomorphic(j.fan(), &Arc::new(p.spec())).is_some(),
                "{name} over {}",
                p.base()
            );
            n += 1;
        }
    }
    Ok(format!("{n} cases over 0 and over N"))
}

fn c4_facelem() -> Outcome {
    let start = Instant::now();
    let c = corpus();
    let mut cases = Vec::new();
    for len in 1..=3 {
        for idx in all_tuples(c.len(), len) {
            let tuple: Vec<PMonoid> = idx
                .iter()
                .map(|&i| PMonoid::over_trivial(&c[i].1))
                .collect();
            for split in 0..len {
                cases.push((tuple.clone(), split));
            }
        }
    }
    for ((tuple, split), r) in cases.iter().zip(facelem_sweep(&cases, Exec::Parallel)) {
        let names: Vec<String> = tuple.iter().map(|p| p.monoid().to_string()).collect();
        let r = r.map_err(|e| format!("{names:?} split {split}: {e}"))?;
        ensure!(r.passed, "{names:?} split {split}");
        let w = r.witness.as_ref().expect("passing checks carry a witness");
        ensure!(
            w.is_isomorphism() && r.join_points == r.product_points,
            "{names:?} split {split}: inexact witness"
        );
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(300), "took {t:?}");
    Ok(format!("{} (tuple, split) cases in {t:.1?}", cases.len()))
}

fn c5_groupoid() -> Outcome {
    let start = Instant::now();
    let c = corpus();
    let mut sets = 0;
    for over_n in [false, true] {
        for size in 1..=2 {
            for idx in all_tuples(c.len(), size) {
                if size == 2 && idx[0] >= idx[1] {
                    continue;
                }
                let charts: Vec<PMonoid> = idx
                    .iter()
                    .map(|&i| {
                        if over_n {
                            over_natural(&c[i].1)
                        } else {
                            PMonoid::over_trivial(&c[i].1)
                        }
                    })
                    .collect();
                let label: Vec<&str> = idx.iter().map(|&i| c[i].0).collect();
                let base = if over_n { "N" } else { "0" };
                let t = build_truncation(&charts, 3, Exec::Parallel)
                    .map_err(|e| format!("{label:?} over {base}: {e}"))?;
                let r = verify_groupoid(&t).map_err(|e| format!("{label:?} over {base}: {e}"))?;
                ensure!(r.passed(), "{label:?} over {base}");
                ensure!(
                    r.lift_counts.iter().all(|&n| n == 1),
                    "{label:?} over {base}: lift counts {:?}",
                    r.lift_counts
                );
                sets += 1;
            }
        }
    }
    Ok(format!(
        "{sets} chart sets over 0 and N in {:.1?}",
        start.elapsed()
    ))
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let rows = rng.random_range(1..=3);
    let cols = rng.random_range(1..=3);
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-3..=3)).collect())
        .collect()
}

fn c6_cokernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..1000 {
        let a = random_matrix(&mut rng);
        let got = GroupHom::free(IntMatrix::from_rows(&a)).cokernel();
        let want = oracle::coset_cokernel(&a, a[0].len());
        ensure!(got == want, "trial {trial} {a:?}: {got} vs {want}");
    }
    Ok("1000 seeded matrices match coset enumeration".into())
}

fn c7_saturation() -> Outcome {
    let sat = get("S23")
        .unwrap()
        .saturate(DEFAULT_BOUND)
        .map_err(|e| e.to_string())?;
    ensure!(
        is_isomorphic(&sat, &FineMonoid::natural(1)).is_some(),
        "saturate(<2,3>) = {sat}"
    );
    let a1 = get("A1").unwrap();
    let sat = a1.saturate(DEFAULT_BOUND).map_err(|e| e.to_string())?;
    ensure!(is_isomorphic(&sat, &a1).is_some(), "A1 is not saturated");
    ensure!(
        is_isomorphic(&sat, &FineMonoid::natural(2)).is_none(),
        "A1 saturates to N^2"
    );
    for (name, m) in corpus() {
        let s = m.saturate(DEFAULT_BOUND).map_err(|e| e.to_string())?;
        let ss = s.saturate(DEFAULT_BOUND).map_err(|e| e.to_string())?;
        ensure!(is_isomorphic(&s, &ss).is_some(), "{name}: not idempotent");
    }
    Ok("<2,3> saturates to N, idempotent on the corpus; amended: <(2,0),(1,1),(0,2)> is already saturated in its \
        own group and is not N^2"
        .into())
}

fn times(n: i64) -> MonoidHom {
    let nat = FineMonoid::natural(1);
    MonoidHom::new(nat.clone(), nat, vec![vec![BigInt::from(n)]]).unwrap()
}

const SHARP: [&str; 7] = ["0", "N", "N2", "S23", "C3", "A1", "T"];
const FS: [&str; 6] = ["0", "N", "N2", "C3", "A1", "T"];

fn c8_chart_arithmetic() -> Outcome {
    for n in 1..=6i64 {
        for p in [0u64, 2, 3, 5] {
            let expected = p == 0 || n.gcd(&(p as i64)) == 1;
            ensure!(torsion_invertible(&times(n), p) == expected, "x{n} p={p}");
        }
    }
    let mut homs = 0;
    for a in SHARP {
        for b in SHARP {
            for u in oracle::small_homs(&get(a).unwrap(), &get(b).unwrap(), 2) {
                for ch in [0u64, 2, 3] {
                    match log_smooth_condition(&u, ch) {
                        Ok(r) => {
                            ensure!(
                                r.discrepancy == !r.cokernel.is_finite(),
                                "{u}: discrepancy flag"
                            );
                            ensure!(
                                !log_etale_condition(&u, ch) || (r.strict && r.kato),
                                "{u} char {ch}"
                            );
                        }
                        Err(ChartError::NotInjective) => {
                            ensure!(!log_etale_condition(&u, ch), "{u}")
                        }
                        Err(e) => return Err(format!("{u}: {e}")),
                    }
                }
                homs += 1;
            }
        }
    }
    let into_n = MonoidHom::zero(&FineMonoid::trivial(), &FineMonoid::natural(1));
    ensure!(
        log_smooth_condition(&into_n, 0).unwrap().discrepancy,
        "0 -> N has no discrepancy flag"
    );
    Ok(format!(
        "{homs} homs; amended: in characteristic 0 every x n is invertible, primes follow gcd(n, p) = 1"
    ))
}

fn c9_neatness() -> Outcome {
    let mut built = 0;
    for a in FS {
        for b in FS {
            let (p, q) = (get(a).unwrap(), get(b).unwrap());
            for u in oracle::small_homs(&p, &q, 2)
                .into_iter()
                .filter(MonoidHom::is_injective)
            {
                let d = ChartDatum::new(
                    u.clone(),
                    MonoidHom::identity(&p),
                    MonoidHom::identity(&q),
                    u.clone(),
                    0,
                )
                .map_err(|e| format!("{u}: {e}"))?;
                let c = construct_neat_chart(&d).map_err(|e| format!("{u}: {e}"))?;
                let r = neatness_check(&c);
                ensure!(r.neat, "{u}: {:?}", r.diagnostics);
                built += 1;
            }
        }
    }
    let nat = FineMonoid::natural(1);
    let id = MonoidHom::identity(&nat);
    let d = ChartDatum::new(times(2), times(2), id.clone(), id, 2).map_err(|e| e.to_string())?;
    let r = neatness_check(&d);
    ensure!(!r.neat, "x2 datum is neat");
    ensure!(
        r.diagnostics
            .iter()
            .any(|s| s == "cokernel mismatch Z/2 vs 0"),
        "diagnostics {:?}",
        r.diagnostics
    );
    Ok(format!(
        "{built} constructed charts neat; x2 datum reports \"cokernel mismatch Z/2 vs 0\""
    ))
}

fn c10_membership() -> Outcome {
    let (mut points, mut unknown) = (0, 0);
    for (name, m) in corpus() {
        let within = oracle::reachable(&m, DEFAULT_BOUND);
        let far = oracle::reachable(&m, 3 * DEFAULT_BOUND);
        let xs = oracle::ambient_box(&m, -6, 6);
        for (x, answer) in xs
            .iter()
            .zip(m.membership_batch(&xs, DEFAULT_BOUND, Exec::Parallel))
        {
            let answer = answer.map_err(|e| format!("{name} {x:?}: {e}"))?;
            match &answer {
                Membership::Member(c) => {
                    ensure!(
                        oracle::is_nonnegative(c) && oracle::evaluate(&m, c) == *x,
                        "{name} {x:?}: bad certificate"
                    );
                }
                Membership::NotMember => ensure!(!far.contains(x), "{name} {x:?}: reachable"),
                Membership::Unknown { .. } => {
                    ensure!(!within.contains(x), "{name} {x:?}: unknown but reachable");
                    unknown += 1;
                }
            }
            ensure!(
                !within.contains(x) || answer.is_member(),
                "{name} {x:?}: missed member"
            );
            points += 1;
        }
    }
    Ok(format!(
        "{points} points, {unknown} unknown (all beyond the bound)"
    ))
}

fn golden() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "kf"))
        .collect();
    files.sort();
    files
}

fn exit_code(args: &[&str]) -> i32 {
    Process::new(env!("CARGO_BIN_EXE_katofan"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn c11_cli() -> Outcome {
    let files = golden();
    let mut docs = 0;
    for path in &files {
        let text = std::fs::read_to_string(path).unwrap();
        let script = parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let printed = unparse(&script);
        ensure!(
            parse(&printed).as_ref() == Ok(&script),
            "{}: unparse does not re-parse",
            path.display()
        );
        for item in &script.items {
            let Some(name) = item.name() else { continue };
            for command in [Command::Emit, Command::Faces, Command::Spec, Command::Snf] {
                let Ok(out) = execute(
                    command,
                    Some(&text),
                    std::slice::from_ref(&name.text),
                    &Options::default(),
                ) else {
                    continue;
                };
                let Some(object) = out.object else { continue };
                let (_, back) =
                    ingest(&Document::new(object.clone()).to_json()).map_err(|e| e.to_string())?;
                ensure!(
                    reemit(&back).map_err(|e| e.to_string())? == object,
                    "{} {}",
                    name.text,
                    command.name()
                );
                docs += 1;
            }
        }
    }
    let dir = std::env::temp_dir().join(format!("katofan-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.kf");
    std::fs::write(&bad, "monoid M in Z^2 { gens (1,0,0) }\n").unwrap();
    let domain = dir.join("domain.kf");
    std::fs::write(
        &domain,
        "monoid N in Z^1 { gens (1) }\nhom v : N -> N { gen (1) -> (-1) }\n",
    )
    .unwrap();
    let ok = files[0].display().to_string();
    let codes = [
        exit_code(&["faces", &ok]),
        exit_code(&["emit", &domain.display().to_string()]),
        exit_code(&["faces", &bad.display().to_string()]),
    ];
    std::fs::remove_dir_all(&dir).unwrap();
    ensure!(codes == [0, 1, 2], "exit codes {codes:?}");
    Ok(format!(
        "{} golden scripts, {docs} documents round-trip; exit codes 0/1/2 observed",
        files.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("face lattices", c1_face_lattices),
        ("spec sharpening invariance", c2_sharpening_invariance),
        ("join of one monoid is its spec", c3_join_of_one),
        ("join decomposition along a split", c4_facelem),
        ("groupoid axioms", c5_groupoid),
        ("integer linear algebra", c6_cokernels),
        ("saturation", c7_saturation),
        ("chart arithmetic", c8_chart_arithmetic),
        ("neatness", c9_neatness),
        ("membership", c10_membership),
        ("cli round-trips and exit codes", c11_cli),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
