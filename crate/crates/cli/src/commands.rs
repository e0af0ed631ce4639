//! One function per subcommand, each producing a report value.

use std::path::Path;
use std::sync::Arc;

use merlab_core::catalog::{
    catalog_get, catalog_list, expand_interpretation, find_swap_witness, forget_interpretation,
    generate_extension_graph, graph_vocab, satisfies_extension_axioms, swap_adjacency,
    ExtensionGraphRequest, GENERATOR,
};
use merlab_core::invariant::{density_report, invariant_profile, quotient_of, ydlept_of, YdleptVerdict};
use merlab_core::logic::{all_tuples, parse_open, Language, Theory};
use merlab_core::mer::{
    classify_prefix, groupoid_morphisms, mer_classes, replay, ErFailure, ErVerdict, GroupoidVerdict,
    MerAnalysis, MerSpec, SentenceMer,
};
use merlab_core::pair::identity_sentence;
use merlab_core::reduct::{nset_value, shelahize, PartitionedFormula};
use merlab_core::{Budget, CoupledSignature, Error, FiniteStructure, Mer, Scale, Vocabulary};
use serde_json::{json, Map, Value};

use crate::dsl::{parse_structure, Workspace};
use crate::error::CliError;
use crate::report::{family_json, header, scale_json, sizes_json, structure_json, tuple_text};

type Out = Result<Value, CliError>;

/// A MER resolved from the workspace or the catalog.
pub struct Target {
    pub name: String,
    pub spec: Mer,
    pub theory: Theory,
    pub reference: Option<Scale>,
}

impl Target {
    pub fn vocab(&self) -> &Arc<Vocabulary> {
        self.theory.vocab()
    }
}

pub fn target(ws: &Workspace, name: &str) -> Result<Target, CliError> {
    if let Some(d) = ws.mers.get(name) {
        return Ok(Target {
            name: name.to_string(),
            spec: d.spec.clone(),
            theory: d.theory.clone(),
            reference: None,
        });
    }
    match catalog_get(name) {
        Ok(e) => Ok(Target {
            name: name.to_string(),
            spec: e.builtin(),
            theory: e.theory.clone(),
            reference: Some(e.reference.clone()),
        }),
        Err(_) => Err(CliError::Usage(format!(
            "no mer named `{name}` in the workspace or the catalog"
        ))),
    }
}

/// `3` or `P=3,Q=2`.
pub fn parse_assignments(text: &str) -> Result<Vec<(Option<String>, usize)>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (name, n) = match item.split_once('=') {
                Some((a, b)) => (Some(a.trim().trim_end_matches('\'').to_string()), b.trim()),
                None => (None, item.trim()),
            };
            let n = n
                .parse()
                .map_err(|_| CliError::Usage(format!("bad size `{item}`")))?;
            Ok((name, n))
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct ScaleArgs {
    pub max: Option<String>,
    pub decoupled_max: Option<String>,
}

pub fn scale_for(t: &Target, args: &ScaleArgs) -> Result<Scale, CliError> {
    let vocab = t.vocab();
    let mut max = t
        .reference
        .as_ref()
        .map_or_else(|| vec![2; vocab.num_sorts()], |s| s.max.clone());
    let sig = t.spec.sig();
    let mut apply = |text: &str, decoupled: bool| -> Result<(), CliError> {
        for (name, n) in parse_assignments(text)? {
            match name {
                None => {
                    for (s, m) in max.iter_mut().enumerate() {
                        if !decoupled || !sig.is_coupled(s) {
                            *m = n;
                        }
                    }
                }
                Some(name) => {
                    let s = vocab
                        .sort_id(&name)
                        .ok_or_else(|| CliError::Usage(format!("unknown sort `{name}`")))?;
                    if decoupled && sig.is_coupled(s) {
                        return Err(CliError::Usage(format!("sort `{name}` is coupled")));
                    }
                    max[s] = n;
                }
            }
        }
        Ok(())
    };
    if let Some(m) = &args.max {
        apply(m, false)?;
    }
    if let Some(m) = &args.decoupled_max {
        apply(m, true)?;
    }
    Ok(Scale::new(max))
}

fn exact_sizes(vocab: &Vocabulary, text: &str) -> Result<Vec<usize>, CliError> {
    let mut sizes = vec![None; vocab.num_sorts()];
    for (name, n) in parse_assignments(text)? {
        match name {
            None => sizes.iter_mut().for_each(|s| *s = Some(n)),
            Some(name) => {
                let s = vocab
                    .sort_id(&name)
                    .ok_or_else(|| CliError::Usage(format!("unknown sort `{name}`")))?;
                sizes[s] = Some(n);
            }
        }
    }
    sizes
        .into_iter()
        .enumerate()
        .map(|(s, n)| n.ok_or_else(|| CliError::Usage(format!("no size for sort `{}`", vocab.sort_name(s)))))
        .collect()
}

/// A workspace structure by name, or a literal over `vocab`.
pub fn structure(ws: &Workspace, text: &str, vocab: Option<&Arc<Vocabulary>>) -> Result<FiniteStructure, CliError> {
    if let Some((m, _)) = ws.structures.get(text) {
        return Ok(m.clone());
    }
    if !text.contains('=') {
        return Err(CliError::Usage(format!("no structure named `{text}`")));
    }
    let vocab = vocab.ok_or_else(|| CliError::Usage("a structure literal needs --mer or --vocab".into()))?;
    parse_structure(text, vocab)
}

pub fn vocab_named(ws: &Workspace, name: &str) -> Result<Arc<Vocabulary>, CliError> {
    if let Some((v, _)) = ws.vocabs.get(name) {
        return Ok(v.clone());
    }
    catalog_get(name)
        .map(|e| e.vocab)
        .map_err(|_| CliError::Usage(format!("no vocabulary named `{name}`")))
}

fn with_mer(cmd: &str, t: &Target) -> Map<String, Value> {
    let mut r = header(cmd);
    r.insert("mer".into(), json!(t.name));
    r.insert("spec".into(), json!(t.spec.resolved().kind()));
    r
}

fn refused(mut r: Map<String, Value>, e: Error) -> Out {
    match e {
        Error::NotEquivalence(msg) => {
            r.insert("verdict".into(), json!("not-an-equivalence"));
            r.insert("reason".into(), json!(msg));
            Ok(Value::Object(r))
        }
        other => Err(other.into()),
    }
}

fn er_json(v: &ErVerdict) -> (Value, Option<Value>) {
    match v {
        ErVerdict::HoldsAtScale(_) => (json!("holds"), None),
        ErVerdict::Counterexample {
            kind,
            witnesses,
            reason,
        } => {
            let mut c = Map::new();
            c.insert("kind".into(), json!(kind.name()));
            c.insert(
                "witnesses".into(),
                Value::Array(witnesses.iter().map(structure_json).collect()),
            );
            if let Some(r) = reason {
                c.insert("reason".into(), json!(r));
            }
            (json!("fails"), Some(Value::Object(c)))
        }
    }
}

pub fn check_er(t: &Target, scale: &Scale, budget: &Budget) -> Out {
    let analysis = MerAnalysis::build(&t.spec, &t.theory, scale, budget)?;
    let mut r = with_mer("check-er", t);
    r.insert("scale".into(), scale_json(t.vocab(), scale));
    r.insert("models".into(), json!(analysis.model_count()));
    let (verdict, ce) = er_json(&analysis.er_verdict());
    r.insert("verdict".into(), verdict);
    if let Some(ce) = ce {
        r.insert("counterexample".into(), ce);
    }
    Ok(Value::Object(r))
}

/// Re-checks the counterexample recorded in a `check-er` report.
pub fn check_er_replay(t: &Target, report: &Path) -> Out {
    let text = std::fs::read_to_string(report).map_err(|e| CliError::Io {
        path: report.display().to_string(),
        message: e.to_string(),
    })?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", report.display())))?;
    let ce = v
        .get("counterexample")
        .ok_or_else(|| CliError::Usage("the report has no counterexample".into()))?;
    let kind_name = ce.get("kind").and_then(Value::as_str).unwrap_or_default();
    let kind = ErFailure::parse(kind_name)
        .ok_or_else(|| CliError::Usage(format!("unknown failure kind `{kind_name}`")))?;
    let witnesses = ce
        .get("witnesses")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Usage("the counterexample has no witnesses".into()))?
        .iter()
        .map(|w| {
            let s = w.as_str().ok_or_else(|| CliError::Usage("witness is not a string".into()))?;
            parse_structure(s, t.vocab())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let confirmed = replay(&t.spec, kind, &witnesses)?;
    let mut r = with_mer("check-er", t);
    r.insert(
        "replay".into(),
        json!({
            "kind": kind.name(),
            "witnesses": witnesses.iter().map(structure_json).collect::<Vec<_>>(),
        }),
    );
    r.insert("confirmed".into(), json!(confirmed));
    Ok(Value::Object(r))
}

pub fn groupoid(
    t: &Target,
    scale: &Scale,
    pair: Option<(FiniteStructure, FiniteStructure)>,
    budget: &Budget,
) -> Out {
    let vocab = t.vocab().clone();
    let mut r = with_mer("groupoid", t);
    if let Some((m, n)) = pair {
        let morphisms = groupoid_morphisms(&t.spec, &m, &n, budget)?;
        r.insert("left".into(), structure_json(&m));
        r.insert("right".into(), structure_json(&n));
        r.insert("count".into(), json!(morphisms.len()));
        r.insert(
            "morphisms".into(),
            Value::Array(morphisms.iter().map(|f| family_json(&vocab, f)).collect()),
        );
        return Ok(Value::Object(r));
    }
    let analysis = MerAnalysis::build(&t.spec, &t.theory, scale, budget)?;
    r.insert("scale".into(), scale_json(&vocab, scale));
    r.insert("models".into(), json!(analysis.model_count()));
    let (er, _) = er_json(&analysis.er_verdict());
    r.insert("equivalence".into(), er);
    match analysis.groupoid_verdict(budget)? {
        GroupoidVerdict::LawsHoldAtScale(_) => {
            r.insert("verdict".into(), json!("laws-hold"));
        }
        GroupoidVerdict::Violation {
            law,
            models,
            morphisms,
        } => {
            r.insert("verdict".into(), json!("violation"));
            r.insert(
                "violation".into(),
                json!({
                    "law": law.name(),
                    "models": models.iter().map(structure_json).collect::<Vec<_>>(),
                    "morphisms": morphisms.iter().map(|f| family_json(&vocab, f)).collect::<Vec<_>>(),
                }),
            );
        }
        GroupoidVerdict::NotWellDefined { model, reason } => {
            r.insert("verdict".into(), json!("not-well-defined"));
            r.insert("model".into(), structure_json(&model));
            r.insert("reason".into(), json!(reason));
        }
    }
    Ok(Value::Object(r))
}

pub fn classes(t: &Target, sizes: Option<&str>, scale: &Scale, budget: &Budget) -> Out {
    let sizes = match sizes {
        Some(s) => exact_sizes(t.vocab(), s)?,
        None => scale.max.clone(),
    };
    let mut r = with_mer("classes", t);
    r.insert("sizes".into(), sizes_json(t.vocab(), &sizes));
    match mer_classes(&t.spec, &t.theory, &sizes, budget) {
        Ok(classes) => {
            r.insert("verdict".into(), json!("holds"));
            r.insert("count".into(), json!(classes.len()));
            r.insert(
                "classes".into(),
                Value::Array(
                    classes
                        .iter()
                        .map(|c| Value::Array(c.iter().map(structure_json).collect()))
                        .collect(),
                ),
            );
            Ok(Value::Object(r))
        }
        Err(e) => refused(r, e),
    }
}

pub fn classify(t: &Target) -> Out {
    let MerSpec::BySentence(s) = t.spec.resolved() else {
        return Err(CliError::Usage(format!(
            "mer `{}` is not given by a sentence",
            t.name
        )));
    };
    let p = classify_prefix(&s.sentence);
    let mut r = with_mer("classify", t);
    r.insert("sentence".into(), json!(s.sentence.render(t.vocab())));
    r.insert("prefix".into(), json!(p.to_string()));
    r.insert("symbol".into(), json!(p.symbol()));
    r.insert("level".into(), json!(p.level()));
    Ok(Value::Object(r))
}

pub fn nset(m: &FiniteStructure, formula: &str) -> Out {
    let pf = PartitionedFormula::parse(formula, m.vocab())?;
    let v = nset_value(m, &pf);
    let mut r = header("nset");
    r.insert("structure".into(), structure_json(m));
    r.insert("formula".into(), json!(pf.render()));
    r.insert("depth".into(), json!(v.depth()));
    r.insert("members".into(), json!(v.len()));
    r.insert("value".into(), json!(v.to_string()));
    Ok(Value::Object(r))
}

pub fn shelahize_cmd(m: &FiniteStructure, family: &str) -> Out {
    let pf = PartitionedFormula::parse(family, m.vocab())?;
    let s = shelahize(m, &pf)?;
    let mut r = header("shelahize");
    r.insert("structure".into(), structure_json(m));
    r.insert("family".into(), json!(pf.render()));
    r.insert("imaginaries".into(), json!(s.imaginary_count()));
    r.insert(
        "members".into(),
        Value::Array(
            s.members
                .iter()
                .map(|set| json!(set.iter().cloned().collect::<Vec<_>>()))
                .collect(),
        ),
    );
    r.insert("expanded".into(), structure_json(&s.expanded));
    Ok(Value::Object(r))
}

pub fn invariants(t: &Target, ws: &Workspace, scale: &Scale, tuple_len: usize, budget: &Budget) -> Out {
    let vocab = t.vocab().clone();
    let analysis = MerAnalysis::build(&t.spec, &t.theory, scale, budget)?;
    let mut r = with_mer("invariants", t);
    r.insert("scale".into(), scale_json(&vocab, scale));
    r.insert("tuple_len".into(), json!(tuple_len));
    let partition = match quotient_of(&analysis, tuple_len, budget) {
        Ok(p) => p,
        Err(e) => return refused(r, e),
    };
    r.insert("points".into(), json!(partition.points.len()));
    r.insert("classes".into(), json!(partition.class_count()));
    r.insert("by_len".into(), json!(partition.class_counts_by_len()));
    r.insert("merges".into(), json!(partition.merges.len()));
    r.insert(
        "partition".into(),
        Value::Array(
            partition
                .classes
                .iter()
                .map(|c| {
                    Value::Array(
                        c.iter()
                            .map(|&i| {
                                let p = &partition.points[i];
                                json!(format!("[{}] {}", p.model, tuple_text(&vocab, &p.tuple)))
                            })
                            .collect(),
                    )
                })
                .collect(),
        ),
    );
    let mut profiles = Map::new();
    for (name, (m, _)) in &ws.structures {
        if **m.vocab() != *vocab {
            continue;
        }
        if let Ok(p) = invariant_profile(m, &partition) {
            profiles.insert(name.clone(), json!(p.labels));
        }
    }
    r.insert("profiles".into(), Value::Object(profiles));
    Ok(Value::Object(r))
}

pub fn ydlept_test(t: &Target, scale: &Scale, tuple_len: usize, budget: &Budget) -> Out {
    let analysis = MerAnalysis::build(&t.spec, &t.theory, scale, budget)?;
    let mut r = with_mer("ydlept-test", t);
    r.insert("scale".into(), scale_json(t.vocab(), scale));
    r.insert("tuple_len".into(), json!(tuple_len));
    let partition = match quotient_of(&analysis, tuple_len, budget) {
        Ok(p) => p,
        Err(e) => return refused(r, e),
    };
    let verdict = match ydlept_of(&analysis, &partition)? {
        YdleptVerdict::DeterminedAtScale(_) => json!("determined"),
        YdleptVerdict::Counterexample { left, right } => json!({
            "counterexample": {"left": structure_json(&left), "right": structure_json(&right)}
        }),
    };
    r.insert("verdict".into(), verdict);
    Ok(Value::Object(r))
}

pub fn density(t: &Target, m: &FiniteStructure, scale: &Scale, tuple_len: usize, budget: &Budget) -> Out {
    let vocab = t.vocab().clone();
    let analysis = MerAnalysis::build(&t.spec, &t.theory, scale, budget)?;
    let mut r = with_mer("density", t);
    r.insert("scale".into(), scale_json(&vocab, scale));
    r.insert("structure".into(), structure_json(m));
    r.insert("tuple_len".into(), json!(tuple_len));
    let partition = match quotient_of(&analysis, tuple_len, budget) {
        Ok(p) => p,
        Err(e) => return refused(r, e),
    };
    let d = density_report(&t.spec, &partition, m, tuple_len, budget)?;
    r.insert(
        "tuples".into(),
        Value::Array(d.tuples.iter().map(|x| json!(tuple_text(&vocab, x))).collect()),
    );
    r.insert("orbits".into(), json!(d.orbits));
    r.insert("profile_classes".into(), json!(d.profile_classes));
    r.insert("refines".into(), json!(d.refines));
    r.insert("equal".into(), json!(d.equal));
    Ok(Value::Object(r))
}

pub struct SwapArgs {
    pub sizes: String,
    pub k: usize,
    pub seed: u64,
    pub formula: String,
    pub pairs: Option<String>,
}

fn parse_pairs(text: &str) -> Result<Vec<(u32, u32)>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (a, b) = item
                .split_once('-')
                .ok_or_else(|| CliError::Usage(format!("bad pair `{item}`, expected c-d")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| CliError::Usage(format!("bad pair `{item}`")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

pub fn swap_demo(args: &SwapArgs) -> Out {
    let vocab = merlab_core::catalog::bipartite_vocab();
    let sizes = exact_sizes(&vocab, &args.sizes)?;
    let req = ExtensionGraphRequest {
        p: sizes[0],
        q: sizes[1],
        k: args.k,
        seed: args.seed,
    };
    let g = generate_extension_graph(&req)?;
    let family = PartitionedFormula::parse("G(x : y)", &vocab)?;
    let before = nset_value(&g, &family);
    let mut r = header("swap-demo");
    r.insert("generator".into(), json!(GENERATOR));
    r.insert("seed".into(), json!(args.seed));
    r.insert("k".into(), json!(args.k));
    r.insert("sizes".into(), sizes_json(&vocab, &sizes));
    r.insert("graph".into(), structure_json(&g));
    r.insert("extension_axioms".into(), json!(satisfies_extension_axioms(&g, args.k)?));
    r.insert("adjacency_sets".into(), json!(before.to_string()));
    if let Some(text) = &args.pairs {
        let pairs = parse_pairs(text)?;
        let h = swap_adjacency(&g, &pairs)?;
        r.insert(
            "swap".into(),
            json!({
                "pairs": pairs.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
                "graph": structure_json(&h),
                "preserved": nset_value(&h, &family) == before,
            }),
        );
    }
    let (phi, vars) = parse_open(&args.formula, &Language::single(vocab.clone()))?;
    let dims: Vec<usize> = vars.iter().map(|v| g.size(v.sort)).collect();
    let mut first = Value::Null;
    let (mut found, mut violations) = (0usize, 0usize);
    for t in all_tuples(&dims) {
        let Some(w) = find_swap_witness(&g, &phi, &vars, &t)? else {
            continue;
        };
        found += 1;
        let (c, d, was) = w.literal;
        let rel = vocab.relation_id("G").expect("bipartite");
        let ok = g.holds(rel, &[c, d]) == was
            && w.graph.holds(rel, &[c, d]) != was
            && nset_value(&w.graph, &family) == before;
        if !ok {
            violations += 1;
        }
        if first.is_null() {
            first = json!({
                "tuple": t,
                "pair": [w.pair.0, w.pair.1],
                "literal": {"atom": [c, d], "was": was},
                "flipped": w.flipped.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
                "preserved": nset_value(&w.graph, &family) == before,
            });
        }
    }
    r.insert("formula".into(), json!(phi.render(&vocab)));
    r.insert(
        "variables".into(),
        json!(vars.iter().map(|v| format!("{}:{}", v.name, vocab.sort_name(v.sort))).collect::<Vec<_>>()),
    );
    r.insert("witnesses".into(), json!(found));
    r.insert("violations".into(), json!(violations));
    r.insert("first_witness".into(), first);
    Ok(Value::Object(r))
}

pub fn interp(m: &FiniteStructure, t: Option<&Target>) -> Out {
    let spec = match t {
        Some(t) => t.spec.clone(),
        None => {
            let sig = CoupledSignature::all(graph_vocab());
            MerSpec::BySentence(SentenceMer::new(sig.clone(), identity_sentence(&sig))?)
        }
    };
    if **m.vocab() != *graph_vocab() {
        return Err(CliError::Usage("interp needs a structure over A; R(A, A)".into()));
    }
    if **spec.sig().vocab() != *graph_vocab() {
        return Err(CliError::Usage("interp needs a mer over A; R(A, A)".into()));
    }
    let big = expand_interpretation(m, &spec)?;
    let n = m.sizes()[0];
    let d: Vec<u32> = big.tuples(2).into_iter().map(|t| t[0]).collect();
    let sets: Vec<Value> = d
        .iter()
        .map(|&x| {
            let mask = x as u64 + 1;
            json!((0..n * n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| json!([i / n, i % n]))
                .collect::<Vec<_>>())
        })
        .collect();
    let mut r = header("interp");
    r.insert("mer".into(), json!(t.map_or("identity", |t| t.name.as_str())));
    r.insert("structure".into(), structure_json(m));
    r.insert("A".into(), json!(n));
    r.insert("B".into(), json!(big.sizes()[1]));
    r.insert("total".into(), json!(n + big.sizes()[1]));
    r.insert("D".into(), json!(d));
    r.insert("D_sets".into(), Value::Array(sets));
    r.insert("round_trip".into(), json!(forget_interpretation(&big)? == *m));
    Ok(Value::Object(r))
}

fn vocab_json(v: &Vocabulary) -> Value {
    json!({
        "sorts": v.sorts(),
        "relations": v.relations().iter().map(|r| json!({
            "name": r.name,
            "profile": r.profile.iter().map(|&s| v.sort_name(s)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn catalog_list_cmd() -> Out {
    let mut r = header("catalog list");
    let mut entries = Vec::new();
    for id in catalog_list() {
        let e = catalog_get(id)?;
        entries.push(json!({
            "id": e.id,
            "kind": e.spec.kind(),
            "reference": scale_json(&e.vocab, &e.reference),
            "doc": e.doc,
        }));
    }
    r.insert("entries".into(), Value::Array(entries));
    Ok(Value::Object(r))
}

pub fn catalog_show(id: &str) -> Out {
    let e = catalog_get(id).map_err(|e| CliError::Usage(e.to_string()))?;
    let sig = e.spec.sig();
    let mut r = header("catalog show");
    r.insert("id".into(), json!(e.id));
    r.insert("doc".into(), json!(e.doc));
    r.insert("kind".into(), json!(e.spec.kind()));
    r.insert("vocab".into(), vocab_json(&e.vocab));
    r.insert(
        "coupled".into(),
        json!(sig.coupled_sorts().iter().map(|&s| e.vocab.sort_name(s)).collect::<Vec<_>>()),
    );
    r.insert(
        "theory".into(),
        Value::Array(
            e.theory
                .axioms()
                .iter()
                .map(|(n, f)| json!({"name": n, "sentence": f.render(&e.vocab)}))
                .collect(),
        ),
    );
    if let MerSpec::BySentence(s) = e.spec.resolved() {
        r.insert("sentence".into(), json!(s.sentence.render(&e.vocab)));
    }
    r.insert("reference".into(), scale_json(&e.vocab, &e.reference));
    Ok(Value::Object(r))
}
