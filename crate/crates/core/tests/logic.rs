use std::collections::HashMap;
use std::sync::Arc;

use merlab_core::logic::*;
use merlab_core::Budget;
use proptest::prelude::*;

fn digraph() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::build(&["V"], &[("E", &["V", "V"]), ("P", &["V"])]).unwrap())
}

fn bipartite() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"])]).unwrap())
}

/// Naive recursive semantics over a name-indexed environment.
fn naive(phi: &Formula, m: &FiniteStructure, env: &mut HashMap<String, u32>) -> bool {
    match phi {
        Formula::Const(b) => *b,
        Formula::Atom { rel, args, .. } => {
            let t: Vec<u32> = args.iter().map(|v| env[&v.name]).collect();
            m.tuples(*rel).contains(&t)
        }
        Formula::Eq(a, b) => env[&a.name] == env[&b.name],
        Formula::Link { .. } => unreachable!(),
        Formula::Not(a) => !naive(a, m, env),
        Formula::And(a, b) => naive(a, m, env) && naive(b, m, env),
        Formula::Or(a, b) => naive(a, m, env) || naive(b, m, env),
        Formula::Implies(a, b) => !naive(a, m, env) || naive(b, m, env),
        Formula::Iff(a, b) => naive(a, m, env) == naive(b, m, env),
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            let saved = env.get(&v.name).copied();
            let universal = matches!(phi, Formula::Forall(..));
            let mut result = universal;
            for x in 0..m.size(v.sort) as u32 {
                env.insert(v.name.clone(), x);
                if naive(a, m, env) != universal {
                    result = !universal;
                    break;
                }
            }
            match saved {
                Some(x) => env.insert(v.name.clone(), x),
                None => env.remove(&v.name),
            };
            result
        }
    }
}

fn formula() -> impl Strategy<Value = Formula> {
    let var = prop::sample::select(vec!["x", "y", "z"]).prop_map(|n| Var::new(n, 0));
    let leaf = prop_oneof![
        any::<bool>().prop_map(Formula::Const),
        (var.clone(), var.clone()).prop_map(|(a, b)| Formula::atom(0, vec![a, b])),
        var.clone().prop_map(|a| Formula::atom(1, vec![a])),
        (var.clone(), var.clone()).prop_map(|(a, b)| Formula::Eq(a, b)),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            (var.clone(), inner.clone()).prop_map(|(v, a)| Formula::forall(v, a)),
            (var.clone(), inner.clone()).prop_map(|(v, a)| Formula::exists(v, a)),
        ]
    })
}

fn closed(phi: Formula) -> Formula {
    let free = phi.free_vars();
    Formula::forall_all(&free, phi)
}

fn structure() -> impl Strategy<Value = FiniteStructure> {
    (1usize..=3).prop_flat_map(|n| {
        (prop::collection::vec(any::<bool>(), n * n), prop::collection::vec(any::<bool>(), n)).prop_map(move |(e, p)| {
            let edges = (0..n * n).filter(|&i| e[i]).map(|i| vec![(i / n) as u32, (i % n) as u32]).collect();
            let ps = (0..n).filter(|&i| p[i]).map(|i| vec![i as u32]).collect();
            FiniteStructure::from_tuples(digraph(), vec![n], &[("E", edges), ("P", ps)]).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn compiled_evaluation_matches_naive(phi in formula(), m in structure()) {
        let phi = closed(phi);
        let c = Compiled::new(&phi, &[]).unwrap();
        prop_assert_eq!(c.holds_in(&m), naive(&phi, &m, &mut HashMap::new()));
    }

    #[test]
    fn render_parse_round_trip(phi in formula(), m in structure()) {
        let phi = closed(phi);
        let v = digraph();
        let text = phi.render(&v);
        let back = parse_sentence(&text, &Language::single(v)).unwrap();
        prop_assert_eq!(Compiled::new(&back, &[]).unwrap().holds_in(&m), naive(&phi, &m, &mut HashMap::new()));
        prop_assert_eq!(back.quantifier_rank(), phi.quantifier_rank());
    }

    #[test]
    fn permuting_preserves_truth(phi in formula(), m in structure(), seed in 0usize..6) {
        let phi = closed(phi);
        let perms = permutations(m.size(0));
        let f = BijectionFamily(vec![Some(perms[seed % perms.len()].clone())]);
        let c = Compiled::new(&phi, &[]).unwrap();
        prop_assert_eq!(c.holds_in(&m), c.holds_in(&m.permuted(&f)));
    }
}

#[test]
fn enumeration_counts() {
    let b = Budget::unlimited();
    let v = digraph();
    for n in 0..=3usize {
        let all = enumerate_structures(&v, &[n], &b).unwrap();
        assert_eq!(all.len(), 1 << (n * n + n));
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }
    let all = enumerate_structures(&bipartite(), &[2, 3], &b).unwrap();
    assert_eq!(all.len(), 64);
}

#[test]
fn isomorphisms_match_brute_force() {
    let b = Budget::unlimited();
    let v = bipartite();
    let models = enumerate_structures(&v, &[2, 2], &b).unwrap();
    let families = bijection_families(&[2, 2], &[0, 1], &b).unwrap();
    assert_eq!(families.len(), 4);
    for m in &models {
        for n in &models {
            let mut expected: Vec<BijectionFamily> = families.iter().filter(|f| &m.permuted(f) == n).cloned().collect();
            let mut found = find_isomorphisms(m, n, &b).unwrap();
            expected.sort_by_key(|f| format!("{f:?}"));
            found.sort_by_key(|f| format!("{f:?}"));
            assert_eq!(found, expected);
        }
    }
}

#[test]
fn theory_filter_matches_evaluation() {
    let v = digraph();
    let t = Theory::parse(v.clone(), &[("sym", "forall x. forall y. (E(x, y) -> E(y, x))")]).unwrap();
    let b = Budget::unlimited();
    let models = models_of(&t, &[3], &b).unwrap();
    // 3 loops, 3 unordered pairs, 3 unary bits.
    assert_eq!(models.len(), 1 << 9);
}

#[test]
fn parse_errors_carry_positions() {
    let lang = Language::single(digraph());
    match parse_sentence("forall x.\n  E(x,", &lang) {
        Err(merlab_core::Error::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_sentence("E(x, y)", &lang), Err(merlab_core::Error::NotClosed(_))));
    assert!(matches!(parse_sentence("forall x. F(x)", &lang), Err(merlab_core::Error::UnknownRelation(_))));
}
