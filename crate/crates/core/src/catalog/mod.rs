//! Built-in theories, MERs, generators and constructions.

pub mod extension;
pub mod interp;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::theory::Theory;
use crate::logic::vocab::Vocabulary;
use crate::mer::engine::Scale;
use crate::mer::metric::FiniteMetric;
use crate::mer::spec::{MerSpec, SentenceMer};
use crate::pair::{identity_sentence, CoupledSignature};
use crate::{Mer, Rational};

pub use extension::{
    bipartite_vocab, find_swap_witness, generate_extension_graph, satisfies_extension_axioms,
    swap_adjacency, ExtensionGraphRequest, SwapWitness, GENERATOR,
};
pub use interp::{
    expand_interpretation, forget_interpretation, graph_vocab, interp_vocab, MAX_INTERP_SIZE,
};

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub vocab: Arc<Vocabulary>,
    pub theory: Theory,
    pub spec: Mer,
    pub doc: &'static str,
    /// Scale at which the spec is known to be an equivalence relation.
    pub reference: Scale,
}

impl CatalogEntry {
    /// The spec wrapped as a named builtin.
    pub fn builtin(&self) -> Mer {
        MerSpec::Builtin {
            id: self.id.to_string(),
            resolved: Box::new(self.spec.clone()),
        }
    }
}

pub const IDS: [&str; 10] = [
    "identity",
    "trivial",
    "reduct-sym",
    "adj-sets",
    "adj-sets-sentence",
    "ho-1",
    "ho-2",
    "cofinal",
    "eqrel-size-2",
    "approx-discrete",
];

pub const ADJ_SETS_SENTENCE: &str =
    "(forall x:P. exists x2:P. forall y:Q. (G(x, y) <-> G'(x2, y))) \
& (forall x2:P. exists x:P. forall y:Q. (G(x, y) <-> G'(x2, y)))";

fn vocab(sorts: &[&str], relations: &[(&str, &[&str])]) -> Arc<Vocabulary> {
    Arc::new(Vocabulary::build(sorts, relations).expect("catalog vocabulary"))
}

fn digraph() -> Arc<Vocabulary> {
    vocab(&["V"], &[("E", &["V", "V"])])
}

pub fn catalog_list() -> &'static [&'static str] {
    &IDS
}

pub fn catalog_get(id: &str) -> Result<CatalogEntry> {
    let entry = |id, vocab: Arc<Vocabulary>, theory, spec, doc, reference| CatalogEntry {
        id,
        vocab,
        theory,
        spec,
        doc,
        reference,
    };
    Ok(match id {
        "identity" => {
            let v = digraph();
            let sig = CoupledSignature::all(v.clone());
            let spec = MerSpec::BySentence(SentenceMer::new(sig.clone(), identity_sentence(&sig))?);
            entry(
                "identity",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "Identity MER on directed graphs: both copies agree on every relation.",
                Scale::uniform(&v, 3),
            )
        }
        "trivial" => {
            let v = digraph();
            let spec = Mer::sentence(CoupledSignature::all(v.clone()), "true")?;
            entry(
                "trivial",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "Trivial MER: every two graphs on a common universe are equivalent.",
                Scale::uniform(&v, 3),
            )
        }
        "reduct-sym" => {
            let v = digraph();
            let spec = Mer::reduct(CoupledSignature::all(v.clone()), &["E(x, y) | E(y, x)"])?;
            entry(
                "reduct-sym",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "Reduct MER: graphs are equivalent when their symmetric closures agree.",
                Scale::uniform(&v, 3),
            )
        }
        "adj-sets" => {
            let v = bipartite_vocab();
            let spec = Mer::tower(CoupledSignature::all(v.clone()), &["G(x : y)"])?;
            entry(
                "adj-sets",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "Bipartite graphs with the same set of adjacency sets of P-vertices.",
                Scale::uniform(&v, 2),
            )
        }
        "adj-sets-sentence" => {
            let v = bipartite_vocab();
            let spec = Mer::sentence(CoupledSignature::all(v.clone()), ADJ_SETS_SENTENCE)?;
            entry(
                "adj-sets-sentence",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "The adjacency-set MER written as a pair sentence.",
                Scale::uniform(&v, 2),
            )
        }
        "ho-1" => {
            let v = vocab(&["P0", "P1"], &[("G0", &["P0", "P1"])]);
            let spec = Mer::tower(
                CoupledSignature::new(v.clone(), &["P0"])?,
                &["[b:P1 ; a:P0] G0(a, b)"],
            )?;
            entry(
                "ho-1",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "Equal 1-blocks on P0; only P0 is coupled.",
                Scale::uniform(&v, 2),
            )
        }
        "ho-2" => {
            let v = vocab(
                &["P0", "P1", "P2"],
                &[("G0", &["P0", "P1"]), ("G1", &["P1", "P2"])],
            );
            let spec = Mer::tower(
                    CoupledSignature::new(v.clone(), &["P0"])?,
                    &[
                        "[b:P1 ; a:P0] G0(a, b)",
                        "[c:P2 ; s:S_F] exists b:P1. (G1(b, c) & forall a:P0. (C_F(s, a) <-> G0(a, b)))",
                    ],
                )?;
            entry(
                "ho-2",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "Equal 1-blocks and 2-blocks on P0; only P0 is coupled.",
                Scale::uniform(&v, 2),
            )
        }
        "cofinal" => {
            let v = vocab(
                &["P0", "P1"],
                &[("L", &["P0", "P0"]), ("G0", &["P0", "P1"])],
            );
            let theory = Theory::parse(
                v.clone(),
                &[
                    ("reflexive", "forall x:P0. L(x, x)"),
                    (
                        "antisymmetric",
                        "forall x:P0. forall y:P0. (L(x, y) & L(y, x) -> x = y)",
                    ),
                    (
                        "transitive",
                        "forall x:P0. forall y:P0. forall z:P0. (L(x, y) & L(y, z) -> L(x, z))",
                    ),
                ],
            )?;
            let spec = Mer::cofinal(
                CoupledSignature::new(v.clone(), &["P0"])?,
                "L(x, y)",
                "[b:P1 ; a:P0] G0(a, b)",
            )?;
            entry(
                "cofinal",
                v.clone(),
                theory,
                spec,
                "Mutual cofinality of the 1-block families under a partial order on P0.",
                Scale::uniform(&v, 2),
            )
        }
        "eqrel-size-2" => {
            let v = digraph();
            let theory = Theory::parse(
                    v.clone(),
                    &[
                        ("reflexive", "forall x. E(x, x)"),
                        ("symmetric", "forall x. forall y. (E(x, y) -> E(y, x))"),
                        ("transitive", "forall x. forall y. forall z. (E(x, y) & E(y, z) -> E(x, z))"),
                        ("at-least-2", "forall x. exists y. (y != x & E(x, y))"),
                        (
                            "at-most-2",
                            "forall x. forall y. forall z. (E(x, y) & E(x, z) & y != x & z != x -> y = z)",
                        ),
                    ],
                )?;
            let sig = CoupledSignature::all(v.clone());
            let spec = MerSpec::BySentence(SentenceMer::new(sig.clone(), identity_sentence(&sig))?);
            entry(
                "eqrel-size-2",
                v.clone(),
                theory,
                spec,
                "Equivalence relations with all classes of size 2, under the identity MER.",
                Scale::uniform(&v, 4),
            )
        }
        "approx-discrete" => {
            let v = vocab(&["V"], &[("P", &["V"])]);
            let spec = Mer::approx(
                CoupledSignature::all(v.clone()),
                &["P(x)", "!P(x)"],
                FiniteMetric::discrete(2),
                Rational::from(1),
            )?;
            entry(
                "approx-discrete",
                v.clone(),
                Theory::empty(v.clone()),
                spec,
                "Labels P / not P in the discrete metric with threshold 1.",
                Scale::uniform(&v, 3),
            )
        }
        _ => return Err(Error::UnknownEntry(id.to_string())),
    })
}
