//! Acceptance gate: criteria 1 through 10, one PASS/FAIL line each.

use std::collections::{BTreeSet, HashMap};
use std::error::Error;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use merlab::dsl::{load_workspace, Workspace};
use merlab_core::catalog::*;
use merlab_core::invariant::{density_report, invariant_profile, quotient_of};
use merlab_core::logic::*;
use merlab_core::mer::*;
use merlab_core::pair::{identity_sentence, CoupledSignature};
use merlab_core::reduct::*;
use merlab_core::{Budget, FiniteMetric, Mer, Rational};

type Outcome = Result<String, Box<dyn Error + Send + Sync>>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/workbench.mer")
}

fn workspace() -> Workspace {
    load_workspace(&fixture_path()).unwrap()
}

/// Per-entry scale: every sort at 3, except where a larger universe is
/// needed for models to exist or a smaller one keeps the run in budget.
fn acceptance_sizes(e: &CatalogEntry) -> Vec<usize> {
    match e.id {
        "ho-2" => vec![3, 2, 2],
        "cofinal" => vec![3, 2],
        "eqrel-size-2" => vec![4],
        _ => vec![3; e.vocab.num_sorts()],
    }
}

fn within(start: Instant, limit: u64) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > Duration::from_secs(limit) {
        return Err(format!("took {t:?}, over {limit}s"));
    }
    Ok(t)
}

fn coupled_identity(sig: &CoupledSignature, m: &FiniteStructure) -> BijectionFamily {
    BijectionFamily(
        sig.mask()
            .iter()
            .enumerate()
            .map(|(s, &c)| c.then(|| (0..m.size(s) as u32).collect()))
            .collect(),
    )
}

fn groupoid_correspondence() -> Outcome {
    let start = Instant::now();
    let b = Budget::unlimited();
    let mut pairs = 0usize;
    for id in IDS {
        let e = catalog_get(id)?;
        let spec = e.builtin();
        let sig = spec.sig().clone();
        let analysis = MerAnalysis::build(&spec, &e.theory, &Scale::new(acceptance_sizes(&e)), &b)?;
        let er = analysis.er_verdict().holds();
        let laws = analysis.groupoid_verdict(&b)?.holds();
        ensure!(er == laws, "{id}: equivalence {er} but groupoid laws {laws}");
        ensure!(er, "{id}: not an equivalence at its acceptance scale");
        for g in &analysis.groups {
            for (i, m) in g.group.models.iter().enumerate() {
                let id_m = coupled_identity(&sig, m);
                for (j, n) in g.group.models.iter().enumerate() {
                    let related = g.matrix.get(i, j);
                    ensure!(
                        is_morphism(&spec, m, n, &id_m)? == related,
                        "{id}: identity membership disagrees on [{m}] [{n}]"
                    );
                    pairs += 1;
                }
            }
        }
    }
    let t = within(start, 60)?;
    Ok(format!("{} entries, {pairs} pairs, {:.1}s", IDS.len(), t.as_secs_f64()))
}

fn iso_containment() -> Outcome {
    let ws = workspace();
    let b = Budget::unlimited();
    let mut checked = 0usize;
    for (name, (v, _)) in &ws.vocabs {
        let sig = CoupledSignature::all(v.clone());
        let spec = Mer::BySentence(SentenceMer::new(sig.clone(), identity_sentence(&sig))?);
        for sizes in size_vectors(&vec![3; v.num_sorts()]) {
            for m in enumerate_structures(v, &sizes, &b)? {
                let morphisms: BTreeSet<_> = groupoid_morphisms(&spec, &m, &m, &b)?.into_iter().collect();
                let isos: BTreeSet<_> = find_isomorphisms(&m, &m, &b)?.into_iter().collect();
                ensure!(morphisms == isos, "{name}: G(M, M) differs from Aut(M) on [{m}]");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} structures over {} vocabularies", ws.vocabs.len()))
}

fn swap_preservation() -> Outcome {
    let start = Instant::now();
    let v = bipartite_vocab();
    let g_rel = v.relation_id("G").unwrap();
    let family = PartitionedFormula::parse("G(x : y)", &v)?;
    let (phi, vars) = parse_open("G(x, y) & !G(x2, y)", &Language::single(v.clone()))?;
    let (mut swaps, mut witnesses) = (0usize, 0usize);
    for seed in 0..200 {
        let g = generate_extension_graph(&ExtensionGraphRequest { p: 6, q: 6, k: 2, seed })?;
        ensure!(satisfies_extension_axioms(&g, 2)?, "seed {seed}: not 2-extended");
        let before = nset_value(&g, &family);
        for a in 0..6u32 {
            for c in a + 1..6 {
                let h = swap_adjacency(&g, &[(a, c)])?;
                ensure!(nset_value(&h, &family) == before, "seed {seed}: swap {a}-{c} changed the 2-set");
                ensure!(swap_adjacency(&h, &[(a, c)])? == g, "seed {seed}: swap {a}-{c} is not an involution");
                swaps += 1;
            }
        }
        for t in all_tuples(&[6, 6, 6]) {
            let Some(w) = find_swap_witness(&g, &phi, &vars, &t)? else {
                continue;
            };
            let (c, d, was) = w.literal;
            ensure!(
                g.holds(g_rel, &[c, d]) == was && w.graph.holds(g_rel, &[c, d]) != was,
                "seed {seed}: witness for {t:?} does not flip its literal"
            );
            ensure!(nset_value(&w.graph, &family) == before, "seed {seed}: witness for {t:?} changed the 2-set");
            witnesses += 1;
        }
    }
    let t = within(start, 120)?;
    Ok(format!("200 graphs, {swaps} swaps, {witnesses} witnesses, {:.1}s", t.as_secs_f64()))
}

const TOWER_BODIES: [&str; 3] = [
    "[o:S_F] exists y:Q. (C_F(o, y) & U(y))",
    "[o:S_F] exists y:Q. (C_F(o, y) & forall z:Q. (C_F(o, z) -> U(z)))",
    "[o:S_F, y:Q] C_F(o, y) & forall o2:S_F. (C_F(o2, y) -> exists z:Q. (C_F(o2, z) & !U(z)))",
];

fn ids(keys: Vec<String>) -> Vec<usize> {
    let mut names = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let n = names.len();
            *names.entry(k).or_insert(n)
        })
        .collect()
}

fn flattening() -> Outcome {
    let v = Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"]), ("U", &["Q"])])?);
    let l1 = PartitionedFormula::parse("G(x : y)", &v)?;
    let sv = ShelahVocab::for_family(&l1, "")?;
    let lang = Language::single(sv.vocab.clone());
    let b = Budget::unlimited();
    let mut pairs = 0usize;
    for text in TOWER_BODIES {
        let body = text.split_once(']').unwrap().1.trim();
        let tower = FamilyTower::parse(&v, &["G(x : y)", text])?;
        let flat = flatten_2ydlept(&l1, &parse_formula(body, &lang)?)?;
        for sizes in size_vectors(&[3, 3]) {
            let models = enumerate_structures(&v, &sizes, &b)?;
            let tower_ids = ids(
                models
                    .iter()
                    .map(|m| Ok(tower.key(m)?.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("|")))
                    .collect::<merlab_core::Result<_>>()?,
            );
            let flat_ids = ids(
                models
                    .iter()
                    .map(|m| {
                        let (a, c) = flat_key(m, &l1, &flat);
                        format!("{a}|{c}")
                    })
                    .collect(),
            );
            for i in 0..models.len() {
                for j in 0..models.len() {
                    ensure!(
                        (tower_ids[i] == tower_ids[j]) == (flat_ids[i] == flat_ids[j]),
                        "{text}: disagree on [{}] [{}]",
                        models[i],
                        models[j]
                    );
                }
            }
            if sizes.iter().all(|&n| n <= 2) {
                for m in &models {
                    for n in &models {
                        let f = flat_key(m, &l1, &flat) == flat_key(n, &l1, &flat);
                        ensure!(tower_equivalent(m, n, &tower)? == f, "{text}: disagree on [{m}] [{n}]");
                    }
                }
            }
            pairs += models.len() * models.len();
        }
    }
    Ok(format!("3 towers, {pairs} pairs"))
}

fn invariant_soundness() -> Outcome {
    let b = Budget::unlimited();
    let (mut related, mut models) = (0usize, 0usize);
    for id in IDS {
        let e = catalog_get(id)?;
        let spec = e.builtin();
        let analysis = MerAnalysis::build(&spec, &e.theory, &Scale::new(acceptance_sizes(&e)), &b)?;
        let partition = quotient_of(&analysis, 1, &b)?;
        for g in &analysis.groups {
            let tuples = partition.tuples(&g.group.coupled);
            let profiles = g
                .group
                .models
                .iter()
                .map(|m| invariant_profile(m, &partition))
                .collect::<merlab_core::Result<Vec<_>>>()?;
            for (i, n) in g.group.models.iter().enumerate() {
                let r = density_report(&spec, &partition, n, 1, &b)?;
                ensure!(r.refines, "{id}: orbits of [{n}] do not refine its profile classes");
                models += 1;
                let Some(j) = (0..i).find(|&j| g.matrix.get(j, i)) else {
                    continue;
                };
                let m = &g.group.models[j];
                let (pm, pn) = (&profiles[j], &profiles[i]);
                ensure!(pm.model_class() == pn.model_class(), "{id}: [{m}] E [{n}] but model classes differ");
                let f = groupoid_morphisms(&spec, m, n, &b)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| format!("{id}: [{m}] E [{n}] without a morphism"))?;
                for (k, t) in tuples.iter().enumerate() {
                    let image = tuples.iter().position(|u| *u == t.map(&f)).unwrap();
                    ensure!(pm.labels[k] == pn.labels[image], "{id}: profiles of [{m}] [{n}] differ at {t:?}");
                }
                related += 1;
            }
        }
    }
    Ok(format!("{models} models, {related} related pairs"))
}

const PREFIX_TABLE: [(&str, &str); 10] = [
    ("forall x:V. (P(x) -> P'(x))", "Pi1"),
    (ADJ_SETS_SENTENCE, "Pi3"),
    ("true", "Pi0"),
    ("exists x:P. exists y:Q. G(x, y)", "Sigma1"),
    ("forall x:P. exists y:Q. G(x, y)", "Pi2"),
    ("exists y:Q. forall x:P. G'(x, y)", "Sigma2"),
    ("!(forall x:P. exists y:Q. G(x, y))", "Sigma2"),
    ("(forall y:Q. U(y)) & (forall x:P. forall y:Q. G(x, y))", "Pi1"),
    ("(exists y:Q. U(y)) -> (forall y:Q. U'(y))", "Pi1"),
    ("forall x:P. exists x2:P. forall y:Q. exists y2:Q. (G(x, y) <-> G'(x2, y2))", "Pi4"),
];

fn prefix_classifier() -> Outcome {
    let unary = Arc::new(Vocabulary::build(&["V"], &[("P", &["V"])])?);
    let bip = Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"]), ("U", &["Q"])])?);
    for (text, want) in PREFIX_TABLE {
        let v = if text.contains(":V") { &unary } else { &bip };
        let lang = CoupledSignature::all(v.clone()).pair_language();
        let got = classify_prefix(&parse_sentence(text, &lang)?).to_string();
        ensure!(got == want, "{text}: {got}, expected {want}");
    }
    Ok(format!("{} sentences", PREFIX_TABLE.len()))
}

/// The permutation of `B` induced by `f` on `A`, from the set coding.
fn lift(f: &[u32], n: usize) -> Vec<u32> {
    (0..(1usize << (n * n)) - 1)
        .map(|x| {
            let mask = x as u64 + 1;
            let image = (0..n * n)
                .filter(|i| mask >> i & 1 == 1)
                .fold(0u64, |acc, i| acc | 1 << (f[i / n] as usize * n + f[i % n] as usize));
            (image - 1) as u32
        })
        .collect()
}

fn interpretation() -> Outcome {
    let v = graph_vocab();
    let sig = CoupledSignature::all(v.clone());
    let specs = [
        Mer::BySentence(SentenceMer::new(sig.clone(), identity_sentence(&sig))?),
        Mer::reduct(sig, &["R(x, y) | R(y, x)"])?,
    ];
    let b = Budget::unlimited();
    let mut lifted = 0usize;
    for n in 0..=2 {
        let graphs = enumerate_structures(&v, &[n], &b)?;
        ensure!(graphs.len() == 1 << (n * n), "|A| = {n}: {} graphs", graphs.len());
        for spec in &specs {
            for m in &graphs {
                let big = expand_interpretation(m, spec)?;
                ensure!(big.sizes()[1] == (1 << (n * n)) - 1, "|A| = {n}: |B| = {}", big.sizes()[1]);
                ensure!(forget_interpretation(&big)? == *m, "round trip fails on [{m}]");
                for f in permutations(n) {
                    let image = m.permuted(&BijectionFamily(vec![Some(f.clone())]));
                    let up = BijectionFamily(vec![Some(f.clone()), Some(lift(&f, n))]);
                    ensure!(
                        big.permuted(&up) == expand_interpretation(&image, spec)?,
                        "lifting fails on [{m}] under {f:?}"
                    );
                    lifted += 1;
                }
            }
        }
    }
    Ok(format!("{lifted} lifted isomorphisms"))
}

fn leaves(base: usize) -> Vec<NSetValue> {
    (0..1u32 << base)
        .map(|mask| NSetValue::Tuples((0..base as u32).filter(|i| mask >> i & 1 == 1).map(|i| vec![i]).collect()))
        .collect()
}

fn depth_two(base: usize) -> Vec<NSetValue> {
    let below = leaves(base);
    (0..1u64 << below.len())
        .map(|mask| {
            NSetValue::family(2, below.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| v.clone()))
                .unwrap()
        })
        .collect()
}

fn cofinal_order() -> Outcome {
    let mut values = 0usize;
    for n in 1..=3 {
        let orders: [(&str, Box<dyn Fn(u32, u32) -> bool>); 2] =
            [("chain", Box::new(|a, b| a <= b)), ("antichain", Box::new(|a, b| a == b))];
        for (name, base) in &orders {
            for (depth, vals) in [(1, leaves(n)), (2, depth_two(n))] {
                let rows = vals
                    .iter()
                    .map(|a| vals.iter().map(|c| nset_leq(a, c, base.as_ref(), depth)).collect())
                    .collect::<merlab_core::Result<Vec<Vec<bool>>>>()?;
                for (a, row) in rows.iter().enumerate() {
                    ensure!(row[a], "{name} {n} depth {depth}: not reflexive at {}", vals[a]);
                    for (c, &le) in row.iter().enumerate() {
                        if le {
                            ensure!(
                                rows[c].iter().zip(row).all(|(&cd, &ad)| !cd || ad),
                                "{name} {n} depth {depth}: not transitive through {}",
                                vals[c]
                            );
                        }
                    }
                }
                values += vals.len();
            }
        }
    }
    let e = catalog_get("cofinal")?;
    let verdict = check_equivalence_relation(&e.spec, &e.theory, &Scale::new(acceptance_sizes(&e)), &Budget::unlimited())?;
    ensure!(verdict.holds(), "mutual domination is not an equivalence: {verdict:?}");
    Ok(format!("{values} values, cofinal MER holds at (3,2)"))
}

fn approx_reduct() -> Outcome {
    let b = Budget::unlimited();
    let e = catalog_get("approx-discrete")?;
    let reduct = Mer::reduct(CoupledSignature::all(e.vocab.clone()), &["P(x)"])?;
    let ws = workspace();
    let u3 = ws.vocabs["U3"].0.clone();
    let labels = ["P(x)", "!P(x) & Q(x)", "!P(x) & !Q(x)"];
    let sig3 = CoupledSignature::all(u3.clone());
    let approx3 = Mer::approx(sig3.clone(), &labels, FiniteMetric::discrete(3), Rational::from(1))?;
    let reduct3 = Mer::reduct(sig3, &labels)?;
    let mut pairs = 0usize;
    for (v, approx, reduct) in [(&e.vocab, &e.builtin(), &reduct), (&u3, &approx3, &reduct3)] {
        for n in 0..=3 {
            let models = enumerate_structures(v, &[n], &b)?;
            for m in &models {
                for k in &models {
                    ensure!(
                        approx.equivalent(m, k)? == reduct.equivalent(m, k)?,
                        "approx and reduct disagree on [{m}] [{k}]"
                    );
                    pairs += 1;
                }
            }
        }
    }

    let skew = &ws.mers["Skew"];
    let verdict = check_equivalence_relation(&skew.spec, &skew.theory, &Scale::uniform(&u3, 1), &b)?;
    let ErVerdict::Counterexample { kind, witnesses, .. } = verdict else {
        return Err("the skew metric spec passed".into());
    };
    ensure!(kind == ErFailure::Transitivity, "skew failure is {}", kind.name());
    ensure!(replay(&skew.spec, kind, &witnesses)?, "skew counterexample does not replay");

    let f = fixture_path();
    let f = f.to_str().unwrap();
    let (code, out) = run(&["check-er", f, "--mer", "Skew", "--max", "1"]);
    ensure!(code == 0, "check-er exited {code}");
    let report = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("skew.json");
    std::fs::write(&report, out)?;
    let (code, out) = run(&["check-er", f, "--mer", "Skew", "--replay", report.to_str().unwrap()]);
    let r: serde_json::Value = serde_json::from_str(&out)?;
    ensure!(code == 0 && r["confirmed"] == true, "replay through the CLI failed: {out}");
    Ok(format!("{pairs} pairs agree, transitivity counterexample replays"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_merlab")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn scale_flag(e: &CatalogEntry) -> String {
    e.vocab
        .sorts()
        .iter()
        .zip(acceptance_sizes(e))
        .map(|(s, n)| format!("{s}={n}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn determinism() -> Outcome {
    let f = fixture_path().display().to_string();
    let mut commands: Vec<Vec<String>> = Vec::new();
    for id in IDS {
        let e = catalog_get(id)?;
        commands.push(vec!["check-er".into(), "--mer".into(), id.into(), "--max".into(), scale_flag(&e)]);
    }
    let fixed: &[&[&str]] = &[
        &["groupoid", "--mer", "adj-sets", "--max", "3"],
        &["groupoid", "--mer", "ho-2", "--max", "P0=3,P1=2,P2=2"],
        &["classes", "--mer", "reduct-sym", "--sizes", "3"],
        &["invariants", "--mer", "adj-sets", "--max", "2", "--tuple-len", "1"],
        &["ydlept-test", "--mer", "adj-sets", "--max", "3", "--tuple-len", "2"],
        &["ydlept-test", "--mer", "identity", "--max", "2", "--tuple-len", "0"],
        &["swap-demo", "--sizes", "P=6,Q=6", "--k", "2", "--seed", "0", "--pairs", "0-1,2-3"],
        &["swap-demo", "--sizes", "P=6,Q=6", "--k", "2", "--seed", "17"],
        &["catalog", "list"],
    ];
    commands.extend(fixed.iter().map(|c| c.iter().map(|s| s.to_string()).collect()));
    let with_file: &[&[&str]] = &[
        &["check-er", "--mer", "AdjSets", "--max", "P=2,Q=2"],
        &["check-er", "--mer", "Skew", "--max", "1"],
        &["classify", "--mer", "Contain"],
        &["density", "--mer", "AdjSets", "--structure", "Cross", "--tuple-len", "2"],
        &["nset", "--structure", "Cross", "--formula", "G(x : y)"],
        &["shelahize", "--structure", "Cross", "--family", "G(x : y)"],
        &["interp", "--structure", "Edge", "--mer", "SymClosure"],
    ];
    for c in with_file {
        let mut v = vec![c[0].to_string(), f.clone()];
        v.extend(c[1..].iter().map(|s| s.to_string()));
        commands.push(v);
    }
    for c in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            let mut args = vec!["--threads", threads, "--format", "json"];
            args.extend(c.iter().map(String::as_str));
            let (code, out) = run(&args);
            ensure!(code == 0, "{} exited {code}", c.join(" "));
            outputs.push(out);
        }
        ensure!(outputs[0] == outputs[1], "{} differs between 1 and 8 threads", c.join(" "));
    }
    Ok(format!("{} commands byte-identical", commands.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("groupoid correspondence", groupoid_correspondence),
        ("iso containment", iso_containment),
        ("swap preservation", swap_preservation),
        ("flattening", flattening),
        ("invariant soundness and refinement", invariant_soundness),
        ("prefix classifier", prefix_classifier),
        ("interpretation", interpretation),
        ("cofinal order", cofinal_order),
        ("approx reduct", approx_reduct),
        ("determinism", determinism),
    ];
    let results: Vec<Result<String, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, check)| {
                s.spawn(move || match catch_unwind(AssertUnwindSafe(check)) {
                    Ok(Ok(detail)) => Ok(detail),
                    Ok(Err(e)) => Err(e.to_string()),
                    Err(_) => Err("panicked".to_string()),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        let line = match r {
            Ok(d) => format!("criterion {:>2} {name}: PASS ({d})", i + 1),
            Err(e) => {
                failed.push(i + 1);
                format!("criterion {:>2} {name}: FAIL ({e})", i + 1)
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    drop(out);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
