//! Random bipartite graphs satisfying extension axioms, and the adjacency
//! swaps that preserve their adjacency-set families.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::eval::evaluate;
use crate::logic::formula::{Formula, Var};
use crate::logic::structure::FiniteStructure;
use crate::logic::vocab::{RelId, Vocabulary};

/// Name of the pseudo-random generator behind every seeded construction.
pub const GENERATOR: &str = "chacha8-v1";

const RESTARTS: usize = 64;
const STEPS: usize = 4096;

/// Sorts `P`, `Q` and the edge relation `G(P, Q)`.
pub fn bipartite_vocab() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"])]).expect("bipartite vocabulary"))
}

fn edge_relation(g: &FiniteStructure) -> Result<RelId> {
    let v = g.vocab();
    let rel = v
        .relation_id("G")
        .ok_or_else(|| Error::UnknownRelation("G".into()))?;
    let (p, q) = (v.sort_id("P"), v.sort_id("Q"));
    if p.is_none() || q.is_none() || v.relation(rel).profile != [p.unwrap_or(0), q.unwrap_or(0)] {
        return Err(Error::Validation(
            "expected a bipartite graph G(P, Q)".into(),
        ));
    }
    Ok(rel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtensionGraphRequest {
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub seed: u64,
}

/// Rows of P as bit masks over Q.
fn rows(g: &FiniteStructure, rel: RelId) -> Vec<u64> {
    let (p, q) = (g.sizes()[0], g.sizes()[1]);
    (0..p as u32)
        .map(|c| {
            (0..q as u32)
                .filter(|&d| g.holds(rel, &[c, d]))
                .fold(0u64, |acc, d| acc | 1 << d)
        })
        .collect()
}

fn transpose(rows: &[u64], width: usize) -> Vec<u64> {
    (0..width)
        .map(|d| {
            rows.iter()
                .enumerate()
                .filter(|(_, r)| *r >> d & 1 == 1)
                .fold(0u64, |acc, (c, _)| acc | 1 << c)
        })
        .collect()
}

/// Subsets of `0..n` of size `m` as masks, in colexicographic order.
fn subsets(n: usize, m: usize) -> Vec<u64> {
    (0u64..1 << n)
        .filter(|s| s.count_ones() as usize == m)
        .collect()
}

/// Unrealized `(S, A)` with `S` a set of `min(k, n)` parameters and `A ⊆ S`:
/// no witness row meets `S` in exactly `A`.
fn violations(witnesses: &[u64], params: usize, k: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for s in subsets(params, k.min(params)) {
        let mut seen = BTreeSet::new();
        for w in witnesses {
            seen.insert(w & s);
        }
        let mut a = 0u64;
        loop {
            if !seen.contains(&a) {
                out.push((s, a));
            }
            if a == s {
                break;
            }
            a = (a.wrapping_sub(s)) & s;
        }
    }
    out
}

/// Every set of at most `k` vertices on either side has, for each of its
/// subsets `A`, a vertex on the other side adjacent to exactly `A` in it.
pub fn satisfies_extension_axioms(g: &FiniteStructure, k: usize) -> Result<bool> {
    let rel = edge_relation(g)?;
    let r = rows(g, rel);
    let c = transpose(&r, g.sizes()[1]);
    Ok(violations(&r, g.sizes()[1], k).is_empty() && violations(&c, g.sizes()[0], k).is_empty())
}

fn check_request(req: &ExtensionGraphRequest) -> Result<()> {
    if req.p > 64 || req.q > 64 {
        return Err(Error::SizeBound("at most 64 vertices per side".into()));
    }
    for (params, witnesses, side) in [(req.q, req.p, "P"), (req.p, req.q, "Q")] {
        let need = 1u128 << req.k.min(params);
        if need > witnesses as u128 {
            return Err(Error::SizeBound(format!(
                "level-{} extension needs {need} vertices in {side}, found {witnesses}",
                req.k
            )));
        }
    }
    Ok(())
}

/// A bipartite graph satisfying the level-`k` extension axioms, found by a
/// seeded repair search; the same request always yields the same graph.
pub fn generate_extension_graph(req: &ExtensionGraphRequest) -> Result<FiniteStructure> {
    check_request(req)?;
    let (p, q) = (req.p, req.q);
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let full_q = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
    for _ in 0..RESTARTS {
        let mut r: Vec<u64> = (0..p).map(|_| rng.gen::<u64>() & full_q).collect();
        for _ in 0..STEPS {
            let c = transpose(&r, q);
            let pv = violations(&r, q, req.k);
            let qv = violations(&c, p, req.k);
            if pv.is_empty() && qv.is_empty() {
                return Ok(from_rows(&r, p, q));
            }
            let pick = rng.gen_range(0..pv.len() + qv.len());
            if pick < pv.len() {
                let (s, a) = pv[pick];
                let w = rng.gen_range(0..p);
                r[w] = (r[w] & !s) | a;
            } else {
                let (s, a) = qv[pick - pv.len()];
                let d = rng.gen_range(0..q);
                for (cc, row) in r.iter_mut().enumerate() {
                    if s >> cc & 1 == 1 {
                        if a >> cc & 1 == 1 {
                            *row |= 1 << d;
                        } else {
                            *row &= !(1 << d);
                        }
                    }
                }
            }
        }
    }
    Err(Error::SearchExhausted { seed: req.seed })
}

fn from_rows(r: &[u64], p: usize, q: usize) -> FiniteStructure {
    let edges: Vec<Vec<u32>> = (0..p)
        .flat_map(|c| {
            (0..q)
                .filter(move |&d| r[c] >> d & 1 == 1)
                .map(move |d| vec![c as u32, d as u32])
        })
        .collect();
    FiniteStructure::from_tuples(bipartite_vocab(), vec![p, q], &[("G", edges)]).expect("in range")
}

/// Exchanges the rows of `c` and `c'` for every pair.
pub fn swap_adjacency(g: &FiniteStructure, pairs: &[(u32, u32)]) -> Result<FiniteStructure> {
    let rel = edge_relation(g)?;
    let (p, q) = (g.sizes()[0] as u32, g.sizes()[1] as u32);
    let mut seen = BTreeSet::new();
    for &(a, b) in pairs {
        if a >= p || b >= p {
            return Err(Error::InvalidStructure(format!("({a}, {b}) is outside P")));
        }
        if !seen.insert(a) || !seen.insert(b) {
            return Err(Error::Validation(format!(
                "pair ({a}, {b}) overlaps another pair"
            )));
        }
    }
    let mut out = g.clone();
    let ext = out.extent_mut(rel);
    for &(a, b) in pairs {
        for d in 0..q {
            let (ia, ib) = (
                ext.index_of(&[a, d]).unwrap_or(0),
                ext.index_of(&[b, d]).unwrap_or(0),
            );
            let (x, y) = (ext.get(ia), ext.get(ib));
            ext.set(ia, y);
            ext.set(ib, x);
        }
    }
    Ok(out)
}

/// A swap making a satisfied literal fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapWitness {
    pub graph: FiniteStructure,
    pub pair: (u32, u32),
    /// The targeted atom `G(c, d)` and its truth value before the swap.
    pub literal: (u32, u32, bool),
    /// Atoms over the tuple's elements whose truth value changed.
    pub flipped: Vec<(u32, u32)>,
}

type Literal = (bool, Formula);

fn dnf(phi: &Formula, positive: bool) -> Result<Vec<Vec<Literal>>> {
    let both =
        |a: &Formula, b: &Formula, pa: bool, pb: bool, conj: bool| -> Result<Vec<Vec<Literal>>> {
            let (x, y) = (dnf(a, pa)?, dnf(b, pb)?);
            Ok(if conj {
                x.iter()
                    .flat_map(|u| y.iter().map(move |v| u.iter().chain(v).cloned().collect()))
                    .collect()
            } else {
                x.into_iter().chain(y).collect()
            })
        };
    match phi {
        Formula::Const(b) => Ok(if *b == positive { vec![vec![]] } else { vec![] }),
        Formula::Atom { .. } | Formula::Eq(..) | Formula::Link { .. } => {
            Ok(vec![vec![(positive, phi.clone())]])
        }
        Formula::Not(a) => dnf(a, !positive),
        Formula::And(a, b) => both(a, b, positive, positive, positive),
        Formula::Or(a, b) => both(a, b, positive, positive, !positive),
        Formula::Implies(a, b) => both(a, b, !positive, positive, !positive),
        Formula::Iff(a, b) => {
            let fwd = Formula::implies((**a).clone(), (**b).clone());
            let back = Formula::implies((**b).clone(), (**a).clone());
            dnf(&Formula::and(fwd, back), positive)
        }
        Formula::Forall(..) | Formula::Exists(..) => Err(Error::Validation(
            "swap witnesses need a quantifier-free formula".into(),
        )),
    }
}

/// Looks for a row swap with a partner outside the tuple that falsifies the
/// first relational literal of the first disjunct the tuple satisfies.
pub fn find_swap_witness(
    g: &FiniteStructure,
    phi: &Formula,
    vars: &[Var],
    tuple: &[u32],
) -> Result<Option<SwapWitness>> {
    let rel = edge_relation(g)?;
    if vars.len() != tuple.len() {
        return Err(Error::Validation(
            "tuple length differs from the variable list".into(),
        ));
    }
    let env: Vec<(Var, u32)> = vars.iter().cloned().zip(tuple.iter().copied()).collect();
    let value = |v: &Var| env.iter().find(|(w, _)| w == v).map(|(_, x)| *x);
    let (ps, qs) = (g.vocab().sort_id("P"), g.vocab().sort_id("Q"));
    let in_p: BTreeSet<u32> = env
        .iter()
        .filter(|(v, _)| Some(v.sort) == ps)
        .map(|(_, x)| *x)
        .collect();
    let in_q: BTreeSet<u32> = env
        .iter()
        .filter(|(v, _)| Some(v.sort) == qs)
        .map(|(_, x)| *x)
        .collect();
    for disjunct in dnf(phi, true)? {
        let mut target = None;
        let mut satisfied = true;
        for (pos, atom) in &disjunct {
            if evaluate(atom, g, &env)? != *pos {
                satisfied = false;
                break;
            }
            if let (None, Formula::Atom { rel: r, args, .. }) = (target, atom) {
                if *r == rel {
                    target = Some((
                        value(&args[0]).unwrap_or(0),
                        value(&args[1]).unwrap_or(0),
                        *pos,
                    ));
                }
            }
        }
        let Some((c, d, was)) = target.filter(|_| satisfied) else {
            continue;
        };
        let partner =
            (0..g.sizes()[0] as u32).find(|&x| !in_p.contains(&x) && g.holds(rel, &[x, d]) != was);
        let Some(partner) = partner else {
            return Ok(None);
        };
        let graph = swap_adjacency(g, &[(c, partner)])?;
        let flipped = in_q
            .iter()
            .filter(|&&b| g.holds(rel, &[c, b]) != graph.holds(rel, &[c, b]))
            .map(|&b| (c, b))
            .collect();
        return Ok(Some(SwapWitness {
            graph,
            pair: (c, partner),
            literal: (c, d, was),
            flipped,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::Language;
    use crate::logic::parse::parse_open;
    use crate::reduct::nset::{nset_value, PartitionedFormula};

    fn graph(p: usize, q: usize, edges: &[(u32, u32)]) -> FiniteStructure {
        let e = edges.iter().map(|&(a, b)| vec![a, b]).collect();
        FiniteStructure::from_tuples(bipartite_vocab(), vec![p, q], &[("G", e)]).unwrap()
    }

    #[test]
    fn level_one_generation() {
        let req = ExtensionGraphRequest {
            p: 4,
            q: 4,
            k: 1,
            seed: 0,
        };
        let g = generate_extension_graph(&req).unwrap();
        assert!(satisfies_extension_axioms(&g, 1).unwrap());
        assert_eq!(g, generate_extension_graph(&req).unwrap());
    }

    #[test]
    fn level_two_six_by_six() {
        for seed in 0..5 {
            let g = generate_extension_graph(&ExtensionGraphRequest {
                p: 6,
                q: 6,
                k: 2,
                seed,
            })
            .unwrap();
            assert!(satisfies_extension_axioms(&g, 2).unwrap());
        }
    }

    #[test]
    fn size_bound() {
        let err = generate_extension_graph(&ExtensionGraphRequest {
            p: 6,
            q: 3,
            k: 2,
            seed: 0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::SizeBound(_)));
    }

    #[test]
    fn swap_exchanges_rows() {
        let g = graph(2, 2, &[(0, 0), (0, 1), (1, 1)]);
        let h = swap_adjacency(&g, &[(0, 1)]).unwrap();
        assert_eq!(h, graph(2, 2, &[(1, 0), (1, 1), (0, 1)]));
        assert!(!h.holds(0, &[0, 0]));
        assert_eq!(swap_adjacency(&g, &[]).unwrap(), g);
        assert_eq!(swap_adjacency(&h, &[(0, 1)]).unwrap(), g);
        let pf = PartitionedFormula::parse("G(x : y)", &bipartite_vocab()).unwrap();
        assert_eq!(nset_value(&g, &pf), nset_value(&h, &pf));
        assert!(swap_adjacency(&g, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn witnesses() {
        let lang = Language::single(bipartite_vocab());
        let (phi, vars) = parse_open("G(x, y)", &lang).unwrap();
        let g = generate_extension_graph(&ExtensionGraphRequest {
            p: 6,
            q: 6,
            k: 2,
            seed: 1,
        })
        .unwrap();
        let (c, d) = (0..6u32)
            .flat_map(|c| (0..6u32).map(move |d| (c, d)))
            .find(|&(c, d)| g.holds(0, &[c, d]))
            .unwrap();
        let w = find_swap_witness(&g, &phi, &vars, &[c, d])
            .unwrap()
            .unwrap();
        assert!(!w.graph.holds(0, &[c, d]));
        assert_eq!(w.flipped, vec![(c, d)]);

        let full: Vec<(u32, u32)> = (0..3).flat_map(|c| (0..3).map(move |d| (c, d))).collect();
        let k = graph(3, 3, &full);
        assert_eq!(find_swap_witness(&k, &phi, &vars, &[0, 0]).unwrap(), None);
    }
}
