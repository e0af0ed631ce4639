use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use merlab_core::catalog::{catalog_get, CatalogEntry, IDS};
use merlab_core::invariant::*;
use merlab_core::logic::*;
use merlab_core::mer::*;
use merlab_core::pair::{identity_sentence, CoupledSignature};
use merlab_core::{Budget, Mer};

fn small(e: &CatalogEntry) -> Scale {
    let n = if e.id == "eqrel-size-2" { 4 } else { 2 };
    Scale::uniform(&e.vocab, n)
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Smallest-label partition of `0..n` from a union-find parent array.
fn canonical(parent: &mut [usize]) -> Vec<usize> {
    fn root(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut names = HashMap::new();
    (0..parent.len())
        .map(|i| {
            let r = root(parent, i);
            let k = names.len();
            *names.entry(r).or_insert(k)
        })
        .collect()
}

/// Recomputes the quotient by testing every bijection on every model pair.
fn brute_quotient(spec: &Mer, partition: &TypePartition, b: &Budget) -> Vec<usize> {
    let sig = &partition.sig;
    let mut parent: Vec<usize> = (0..partition.points.len()).collect();
    let mut by_coupled: HashMap<Vec<usize>, Vec<&FiniteStructure>> = HashMap::new();
    for p in &partition.points {
        let list = by_coupled.entry(sig.coupled_sizes(p.model.sizes())).or_default();
        if !list.contains(&&p.model) {
            list.push(&p.model);
        }
    }
    for models in by_coupled.values() {
        for m in models {
            for n in models {
                for f in bijection_families(m.sizes(), &sig.coupled_sorts(), b).unwrap() {
                    if !is_morphism(spec, m, n, &f).unwrap() {
                        continue;
                    }
                    for t in partition.tuples(&sig.coupled_sizes(m.sizes())) {
                        let a = partition.point_of(m, t).unwrap();
                        let c = partition.point_of(n, &t.map(&f)).unwrap();
                        let (ra, rc) = (find(&mut parent, a), find(&mut parent, c));
                        parent[ra.max(rc)] = ra.min(rc);
                    }
                }
            }
        }
    }
    canonical(&mut parent)
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        x = p[x];
    }
    x
}

#[test]
fn quotient_matches_brute_force() {
    let b = Budget::unlimited();
    for (id, len) in [("identity", 2), ("trivial", 2), ("adj-sets", 1), ("reduct-sym", 2)] {
        let e = catalog_get(id).unwrap();
        let spec = e.builtin();
        let partition = groupoid_type_quotient(&spec, &e.theory, &small(&e), len, &b).unwrap();
        assert_eq!(canonical_labels(&partition.label), brute_quotient(&spec, &partition, &b), "{id}");
    }
}

fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut names = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let k = names.len();
            *names.entry(l).or_insert(k)
        })
        .collect()
}

#[test]
fn related_models_have_matching_profiles() {
    let b = Budget::unlimited();
    for id in IDS {
        let e = catalog_get(id).unwrap();
        let spec = e.builtin();
        let analysis = MerAnalysis::build(&spec, &e.theory, &small(&e), &b).unwrap();
        let partition = quotient_of(&analysis, 1, &b).unwrap();
        for g in &analysis.groups {
            let tuples = partition.tuples(&g.group.coupled);
            for (i, m) in g.group.models.iter().enumerate() {
                let pm = invariant_profile(m, &partition).unwrap();
                for (j, n) in g.group.models.iter().enumerate() {
                    if !g.matrix.get(i, j) {
                        continue;
                    }
                    let pn = invariant_profile(n, &partition).unwrap();
                    assert_eq!(pm.model_class(), pn.model_class(), "{id}");
                    let f = &groupoid_morphisms(&spec, m, n, &b).unwrap()[0];
                    for (k, t) in tuples.iter().enumerate() {
                        let image = tuples.iter().position(|u| *u == t.map(f)).unwrap();
                        assert_eq!(pm.labels[k], pn.labels[image], "{id}: [{m}] [{n}]");
                    }
                }
            }
        }
    }
}

#[test]
fn orbits_refine_profile_classes() {
    let b = Budget::unlimited();
    for id in ["identity", "trivial", "adj-sets", "ho-1"] {
        let e = catalog_get(id).unwrap();
        let spec = e.builtin();
        let partition = groupoid_type_quotient(&spec, &e.theory, &small(&e), 2, &b).unwrap();
        let mut seen = Vec::new();
        for p in &partition.points {
            if seen.contains(&&p.model) {
                continue;
            }
            seen.push(&p.model);
            for len in 0..=2 {
                let r = density_report(&spec, &partition, &p.model, len, &b).unwrap();
                assert!(r.refines, "{id} [{}] len {len}", p.model);
            }
        }
    }
}

#[test]
fn merges_persist_at_larger_scale() {
    let b = Budget::unlimited();
    for id in ["identity", "adj-sets"] {
        let e = catalog_get(id).unwrap();
        let spec = e.builtin();
        let two = groupoid_type_quotient(&spec, &e.theory, &Scale::uniform(&e.vocab, 2), 1, &b).unwrap();
        let three = groupoid_type_quotient(&spec, &e.theory, &Scale::uniform(&e.vocab, 3), 1, &b).unwrap();
        let lift: Vec<usize> = two
            .points
            .iter()
            .map(|p| three.label[three.point_of(&p.model, &p.tuple).unwrap()])
            .collect();
        for class in &two.classes {
            assert!(class.iter().all(|&p| lift[p] == lift[class[0]]), "{id}");
        }
    }
}

#[test]
fn isomorphic_copies_share_profiles_under_identity_mer() {
    let v = Arc::new(Vocabulary::build(&["V"], &[("E", &["V", "V"])]).unwrap());
    let sig = CoupledSignature::all(v.clone());
    let spec = Mer::BySentence(SentenceMer::new(sig.clone(), identity_sentence(&sig)).unwrap());
    let theory = Theory::empty(v.clone());
    let b = Budget::unlimited();
    let partition = groupoid_type_quotient(&spec, &theory, &Scale::uniform(&v, 3), 1, &b).unwrap();
    for m in enumerate_structures(&v, &[3], &b).unwrap() {
        let pm = invariant_profile(&m, &partition).unwrap();
        for f in permutations(3) {
            let family = BijectionFamily(vec![Some(f.clone())]);
            let n = m.permuted(&family);
            let pn = invariant_profile(&n, &partition).unwrap();
            assert_eq!(pm.model_class(), pn.model_class());
            let tuples = partition.tuples(&[3]);
            for (k, t) in tuples.iter().enumerate() {
                let image = tuples.iter().position(|u| *u == t.map(&family)).unwrap();
                assert_eq!(pm.labels[k], pn.labels[image]);
            }
        }
    }
}

#[test]
fn identity_needs_pair_types() {
    let b = Budget::unlimited();
    let e = catalog_get("identity").unwrap();
    let spec = e.builtin();
    let zero = ydlept_at_scale(&spec, &e.theory, &Scale::uniform(&e.vocab, 2), 0, &b).unwrap();
    assert!(matches!(zero, YdleptVerdict::Counterexample { .. }));
    let two = ydlept_at_scale(&spec, &e.theory, &Scale::uniform(&e.vocab, 3), 2, &b).unwrap();
    assert!(matches!(two, YdleptVerdict::DeterminedAtScale(_)));
}

#[test]
fn golden_adjacency_class_counts() {
    let b = Budget::unlimited();
    let e = catalog_get("adj-sets").unwrap();
    let partition = groupoid_type_quotient(&e.builtin(), &e.theory, &Scale::uniform(&e.vocab, 2), 1, &b).unwrap();
    let got = format!(
        "classes {}\nby_len {:?}\npoints {}\n",
        partition.class_count(),
        partition.class_counts_by_len(),
        partition.points.len()
    );
    assert_eq!(got, golden("adj_sets_2_2_len1.txt"));
}

#[test]
fn golden_adjacency_ydlept() {
    let b = Budget::unlimited();
    let e = catalog_get("adj-sets").unwrap();
    let verdict = ydlept_at_scale(&e.builtin(), &e.theory, &Scale::uniform(&e.vocab, 3), 2, &b).unwrap();
    let got = match verdict {
        YdleptVerdict::DeterminedAtScale(s) => format!("determined at {:?}\n", s.describe(&e.vocab)),
        YdleptVerdict::Counterexample { left, right } => format!("counterexample [{left}] [{right}]\n"),
    };
    assert_eq!(got, golden("adj_sets_3_3_len2_ydlept.txt"));
}

#[test]
fn quotient_refuses_non_equivalences() {
    let v = Arc::new(Vocabulary::build(&["V"], &[("P", &["V"])]).unwrap());
    let sig = CoupledSignature::all(v.clone());
    let spec = Mer::sentence(sig, "forall x:V. (P(x) -> P'(x))").unwrap();
    let r = groupoid_type_quotient(&spec, &Theory::empty(v.clone()), &Scale::uniform(&v, 1), 1, &Budget::unlimited());
    assert!(r.is_err());
}
