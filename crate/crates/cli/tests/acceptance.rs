//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use lfcat::fuzz::{fuzz_lemmas, FuzzConfig};
use lfcat::gen::{
    self, random_connected_factor, random_decomposition, random_leaves, shuffled_copy,
};
use lfcat::io::{self, FunctorDoc};
use lfcat::{
    find_isomorphism, is_irreducible, parse_category, poset_reflection, prime_factorization,
    product, refine, verify_refinement, Decomposition, FinCat, Functor, ObjectId, ProductCat,
};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn rng(tag: u64, i: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(tag);
    r.set_stream(i);
    r
}

fn c2() -> Arc<FinCat> {
    Arc::new(gen::chain(2).unwrap())
}

fn iso(a: &Arc<FinCat>, b: &Arc<FinCat>) -> bool {
    find_isomorphism(a, b, &[]).unwrap().is_some()
}

fn lfcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfcat"))
        .args(args)
        .output()
        .unwrap()
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Multiset equality up to isomorphism.
fn same_multiset(a: &[Arc<FinCat>], b: &[Arc<FinCat>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(
        |x| match (0..b.len()).find(|&j| !used[j] && iso(x, &b[j])) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        },
    )
}

fn rebase(d: &Decomposition, base: &Arc<FinCat>, to_old: &Functor) -> Decomposition {
    Decomposition::new(
        base.clone(),
        d.product.clone(),
        d.iso.after(to_old).unwrap(),
    )
    .unwrap()
}

fn refinement_soundness() -> Verdict {
    let slowest = (0..200u64)
        .into_par_iter()
        .map(|i| -> Result<Duration, String> {
            let mut r = rng(0xA1, i);
            let k = r.gen_range(2..=3);
            let leaves = random_leaves(k, 12, &mut r).unwrap();
            let (base, to_base) = shuffled_copy(leaves.carrier(), "c", &mut r);
            let back = to_base.invert().unwrap();
            let da = rebase(
                &random_decomposition(&leaves, "X", &mut r).unwrap(),
                &base,
                &back,
            );
            let db = rebase(
                &random_decomposition(&leaves, "Y", &mut r).unwrap(),
                &base,
                &back,
            );
            let t = Instant::now();
            let res = refine(&base, &da, &db, None).map_err(|e| format!("instance {i}: {e}"))?;
            let rep = verify_refinement(&res, &da, &db);
            let took = t.elapsed();
            if let Some(c) = res.report.failures().chain(rep.failures()).next() {
                return Err(format!("instance {i}: {} ({:?})", c.name, c.witness));
            }
            Ok(took)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .max()
        .unwrap();
    if slowest > Duration::from_secs(5) {
        return Err(format!("slowest instance took {slowest:?}"));
    }
    Ok(format!("200 instances all-pass, slowest {slowest:.2?}"))
}

fn swap(p: &ProductCat) -> Functor {
    let c = p.carrier();
    Functor::new(
        c.clone(),
        c.clone(),
        c.objects()
            .map(|x| {
                let t = p.object_tuple(x);
                p.object_of(&[t[1], t[0]])
            })
            .collect(),
        c.morphisms()
            .map(|f| {
                let t = p.morphism_tuple(f);
                p.morphism_of(&[t[1], t[0]])
            })
            .collect(),
    )
    .unwrap()
}

fn swap_case() -> Verdict {
    let c = c2();
    let p = product(vec![("1".into(), c.clone()), ("2".into(), c.clone())]).unwrap();
    let base = p.carrier().clone();
    let da = Decomposition::new(base.clone(), p.clone(), Functor::identity(&base)).unwrap();
    let db = Decomposition::new(base.clone(), p.clone(), swap(&p)).unwrap();
    let r = refine(&base, &da, &db, None).unwrap();
    if !r.report.all_passed() {
        return Err("report has failures".into());
    }
    let z = &r.z;
    if !(z[0][0].is_terminal() && z[1][1].is_terminal()) {
        return Err("diagonal entries are not terminal".into());
    }
    if !(iso(&z[0][1], &c) && iso(&z[1][0], &c)) {
        return Err("off-diagonal entries are not C2".into());
    }
    // the same refinement through the command line
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    io::write_refinement_bundle(&input, &da, &db, &r).unwrap();
    let out = dir.path().join("out");
    let run = lfcat(&[
        "refine",
        "--base-cat",
        arg(&input.join("base.json")),
        "--psiA",
        arg(&input.join("psiA.json")),
        "--psiB",
        arg(&input.join("psiB.json")),
        "-o",
        arg(&out),
    ]);
    if run.status.code() != Some(0) {
        return Err(format!("cli refine exited {:?}", run.status.code()));
    }
    let verify = lfcat(&["verify-refinement", arg(&out)]);
    if verify.status.code() != Some(0) {
        return Err(format!(
            "cli verify-refinement exited {:?}",
            verify.status.code()
        ));
    }
    let z12 = Arc::new(
        parse_category(&io::read_text(&out.join("Z_1_2.json")).unwrap(), "Z_1_2").unwrap(),
    );
    if !iso(&z12, &c) {
        return Err("Z_1_2.json is not C2".into());
    }
    Ok("Z11, Z22 terminal; Z12 ≅ Z21 ≅ C2 (library and cli)".into())
}

struct Instance {
    base: Arc<FinCat>,
    expected: Vec<Arc<FinCat>>,
}

fn instance(i: u64) -> Instance {
    let mut r = rng(0xA3, i);
    let a = Arc::new(random_connected_factor(12, &mut r).unwrap());
    let b = Arc::new(random_connected_factor(12, &mut r).unwrap());
    let ab = product(vec![("A".into(), a.clone()), ("B".into(), b.clone())]).unwrap();
    let (base, _) = shuffled_copy(ab.carrier(), "t", &mut r);
    let mut expected = prime_factorization(&a, None).unwrap().factors;
    expected.extend(prime_factorization(&b, None).unwrap().factors);
    Instance { base, expected }
}

fn factorization_round_trip() -> Verdict {
    let runs = (0..100u64)
        .into_par_iter()
        .map(|i| -> Result<(Duration, usize), String> {
            let inst = instance(i);
            let t = Instant::now();
            let f =
                prime_factorization(&inst.base, None).map_err(|e| format!("instance {i}: {e}"))?;
            let took = t.elapsed();
            if !same_multiset(&f.factors, &inst.expected) {
                return Err(format!(
                    "instance {i}: {} factors, expected {}",
                    f.factors.len(),
                    inst.expected.len()
                ));
            }
            Ok((took, f.factors.len()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let slowest = runs.iter().map(|r| r.0).max().unwrap();
    let primes: usize = runs.iter().map(|r| r.1).sum();
    let beyond_two = runs.iter().filter(|r| r.1 > 2).count();
    if slowest > Duration::from_secs(10) {
        return Err(format!("slowest instance took {slowest:?}"));
    }
    Ok(format!(
        "100 products, {primes} primes matched, {beyond_two} with more than two, slowest {slowest:.2?}"
    ))
}

fn unique_factorization() -> Verdict {
    let outcomes = (0..100u64)
        .into_par_iter()
        .map(|i| -> Result<bool, String> {
            let inst = instance(i);
            let c = &inst.base;
            let last = ObjectId(c.num_objects() as u32 - 1);
            let f1 = prime_factorization(c, None).unwrap();
            let f2 = prime_factorization(c, Some(last)).unwrap();
            if f1.base_object == f2.base_object {
                return Ok(false);
            }
            let (da, db) = (&f1.decomposition, &f2.decomposition);
            let r = refine(c, da, db, None).map_err(|e| format!("instance {i}: {e}"))?;
            if !r.report.all_passed() {
                return Err(format!("instance {i}: refinement report has failures"));
            }
            let (n, m) = (r.z.len(), r.z.first().map_or(0, Vec::len));
            if n != m {
                return Err(format!("instance {i}: {n}×{m} grid"));
            }
            for row in 0..n {
                let hits: Vec<usize> = (0..m).filter(|&col| !r.z[row][col].is_terminal()).collect();
                let [col] = hits[..] else {
                    return Err(format!(
                        "instance {i}: row {row} has {} non-terminal entries",
                        hits.len()
                    ));
                };
                let in_col = (0..n).filter(|&k| !r.z[k][col].is_terminal()).count();
                if in_col != 1 {
                    return Err(format!(
                        "instance {i}: column {col} has {in_col} non-terminal entries"
                    ));
                }
                let z = &r.z[row][col];
                if !(iso(z, da.product.factor(row)) && iso(z, db.product.factor(col))) {
                    return Err(format!(
                        "instance {i}: Z[{row}][{col}] does not match its factors"
                    ));
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let checked = outcomes.iter().filter(|&&b| b).count();
    if checked == 0 {
        return Err("no instance had two distinct base objects".into());
    }
    Ok(format!(
        "{checked} grids, one non-terminal entry per row and column, 0 violations"
    ))
}

fn lemma_fuzz() -> Verdict {
    let cfg = FuzzConfig {
        seed: 0xA5,
        iterations: 100,
        max_factors: 3,
        max_factor_morphisms: 8,
        samples: 100,
    };
    let r = fuzz_lemmas(&cfg).map_err(|e| e.to_string())?;
    if let Some(c) = r.counterexamples.first() {
        return Err(format!(
            "{} counterexamples, first {c:?}",
            r.counterexamples.len()
        ));
    }
    if r.total_checks() < 10_000 || r.iterations != 100 {
        return Err(format!("only {} checks", r.total_checks()));
    }
    Ok(format!(
        "{} checks over {} isomorphisms, 0 counterexamples",
        r.total_checks(),
        r.iterations
    ))
}

const PARALLEL: &str = r#"{
  "objects": ["a", "b"],
  "morphisms": [
    {"name": "id_a", "dom": "a", "cod": "a"},
    {"name": "id_b", "dom": "b", "cod": "b"},
    {"name": "f", "dom": "a", "cod": "b"},
    {"name": "g", "dom": "a", "cod": "b"}
  ],
  "identities": {"a": "id_a", "b": "id_b"}
}"#;

fn structural() -> Verdict {
    if gen::chain(3).unwrap().num_morphisms() != 6 {
        return Err("chain(3) does not have 6 morphisms".into());
    }
    let c3 = Arc::new(gen::chain(3).unwrap());
    let p23 = product(vec![("1".into(), c2()), ("2".into(), c3)]).unwrap();
    if (p23.carrier().num_objects(), p23.carrier().num_morphisms()) != (6, 18) {
        return Err("C2×C3 is not 6/18".into());
    }
    let mut products = vec![p23];
    for i in 0..50 {
        let mut r = rng(0xA6, i);
        let k = r.gen_range(1..=3);
        products.push(random_leaves(k, 12, &mut r).unwrap());
    }
    let mut sections = 0;
    for p in &products {
        for s in p.carrier().objects() {
            for l in 0..p.arity() {
                let back = p
                    .projection(l)
                    .unwrap()
                    .after(&p.section(s, l).unwrap())
                    .unwrap();
                if back.to_raw() != Functor::identity(p.factor(l)).to_raw() {
                    return Err(format!(
                        "π∘Ξ ≠ id at {} along {l}",
                        p.carrier().object_name(s)
                    ));
                }
                sections += 1;
            }
        }
    }
    let parallel = Arc::new(parse_category(PARALLEL, "parallel").unwrap());
    let (refl, _) = poset_reflection(&parallel);
    if !iso(&refl, &c2()) {
        return Err("reflection of a parallel pair is not C2".into());
    }
    Ok(format!(
        "counts ok, π∘Ξ = id on {sections} sections, parallel pair reflects to C2"
    ))
}

const ZIGZAG: &str = r#"{
  "objects": ["a", "b", "c", "d"],
  "morphisms": [
    {"name": "id_a", "dom": "a", "cod": "a"},
    {"name": "id_b", "dom": "b", "cod": "b"},
    {"name": "id_c", "dom": "c", "cod": "c"},
    {"name": "id_d", "dom": "d", "cod": "d"},
    {"name": "ab", "dom": "a", "cod": "b"},
    {"name": "cb", "dom": "c", "cod": "b"},
    {"name": "cd", "dom": "c", "cod": "d"}
  ],
  "identities": {"a": "id_a", "b": "id_b", "c": "id_c", "d": "id_d"}
}"#;

const LOOP: &str = r#"{
  "objects": ["a", "b"],
  "morphisms": [
    {"name": "id_a", "dom": "a", "cod": "a"},
    {"name": "id_b", "dom": "b", "cod": "b"},
    {"name": "f", "dom": "a", "cod": "b"},
    {"name": "g", "dom": "b", "cod": "a"}
  ],
  "identities": {"a": "id_a", "b": "id_b"},
  "comp": [["g", "f", "id_a"], ["f", "g", "id_b"]]
}"#;

fn exit_two_with_error_line(out: &Output) -> bool {
    let line = String::from_utf8_lossy(&out.stderr);
    out.status.code() == Some(2)
        && serde_json::from_str::<serde_json::Value>(line.trim())
            .is_ok_and(|v| v.get("error").is_some())
}

fn negative_controls() -> Verdict {
    let zigzag = Arc::new(parse_category(ZIGZAG, "zigzag").unwrap());
    if !is_irreducible(&zigzag).unwrap() {
        return Err("zigzag reported reducible".into());
    }

    let dir = tempfile::tempdir().unwrap();
    let c = c2();
    let pr = product(vec![("1".into(), c.clone()), ("2".into(), c)]).unwrap();
    let base = pr.carrier().clone();
    let da = Decomposition::new(base.clone(), pr.clone(), Functor::identity(&base)).unwrap();
    let db = Decomposition::new(base.clone(), pr.clone(), swap(&pr)).unwrap();
    let r = refine(&base, &da, &db, None).unwrap();
    io::write_refinement_bundle(dir.path(), &da, &db, &r).unwrap();
    let psi = dir.path().join("psiA.json");
    let mut doc: FunctorDoc = serde_json::from_str(&io::read_text(&psi).unwrap()).unwrap();
    // send a non-identity morphism to an identity
    let victim = doc
        .mmap
        .keys()
        .find(|k| !k.contains("id_"))
        .unwrap()
        .clone();
    let id_img = doc
        .mmap
        .iter()
        .find(|(k, _)| k.matches("id_").count() == 2)
        .unwrap()
        .1
        .clone();
    doc.mmap.insert(victim, id_img);
    io::write_text(&psi, &doc.to_text()).unwrap();
    let out = dir.path().join("out");
    let refine_run = lfcat(&[
        "refine",
        "--base-cat",
        arg(&dir.path().join("base.json")),
        "--psiA",
        arg(&psi),
        "--psiB",
        arg(&dir.path().join("psiB.json")),
        "-o",
        arg(&out),
    ]);
    if !exit_two_with_error_line(&refine_run) {
        return Err(format!(
            "corrupted psiA: refine exited {:?}",
            refine_run.status.code()
        ));
    }
    let verify_run = lfcat(&["verify-refinement", arg(dir.path())]);
    if !exit_two_with_error_line(&verify_run) {
        return Err(format!(
            "corrupted psiA: verify-refinement exited {:?}",
            verify_run.status.code()
        ));
    }
    let second = dir.path().join("second");
    io::write_refinement_bundle(&second, &da, &db, &r).unwrap();
    let a1 = second.join("a_1.json");
    let text = io::read_text(&a1).unwrap();
    io::write_text(&a1, &text[..text.len() / 2]).unwrap();
    let truncated = lfcat(&["verify-refinement", arg(&second)]);
    if !exit_two_with_error_line(&truncated) {
        return Err(format!(
            "truncated a_1.json: exited {:?}",
            truncated.status.code()
        ));
    }

    let looped = dir.path().join("loop.json");
    io::write_text(&looped, LOOP).unwrap();
    let v = lfcat(&["validate", arg(&looped)]);
    let stdout = String::from_utf8_lossy(&v.stdout);
    if v.status.code() != Some(1)
        || !stdout.contains("admits the return")
        || !stdout.contains("`f`")
    {
        return Err(format!(
            "loop not reported: exit {:?}, {stdout}",
            v.status.code()
        ));
    }
    Ok("zigzag irreducible; corrupted functor exits 2; loop witness f/g reported".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("refinement soundness", refinement_soundness),
        ("swap case", swap_case),
        ("factorization round-trip", factorization_round_trip),
        ("unique factorization", unique_factorization),
        ("lemma fuzz", lemma_fuzz),
        ("structural checks", structural),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail}) [{secs:.1}s]", k + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
