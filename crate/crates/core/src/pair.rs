//! The pair language over double structures and the triple language over
//! structures joined by an explicit bijection.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::eval::Interpretation;
use crate::logic::formula::{Formula, Language, Side, Var};
use crate::logic::structure::{BijectionFamily, FiniteStructure};
use crate::logic::vocab::{RelId, SortId, Vocabulary};

/// A vocabulary with a chosen set of coupled sorts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoupledSignature {
    vocab: Arc<Vocabulary>,
    coupled: Vec<bool>,
}

impl CoupledSignature {
    /// Every sort coupled.
    pub fn all(vocab: Arc<Vocabulary>) -> Self {
        let coupled = vec![true; vocab.num_sorts()];
        CoupledSignature { vocab, coupled }
    }

    pub fn new(vocab: Arc<Vocabulary>, coupled: &[&str]) -> Result<Self> {
        let mut mask = vec![false; vocab.num_sorts()];
        for name in coupled {
            let s = vocab
                .sort_id(name)
                .ok_or_else(|| Error::UnknownSort(name.to_string()))?;
            mask[s] = true;
        }
        Ok(CoupledSignature {
            vocab,
            coupled: mask,
        })
    }

    pub fn from_mask(vocab: Arc<Vocabulary>, coupled: Vec<bool>) -> Result<Self> {
        if coupled.len() != vocab.num_sorts() {
            return Err(Error::Validation(
                "coupling mask length differs from sort count".into(),
            ));
        }
        Ok(CoupledSignature { vocab, coupled })
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn mask(&self) -> &[bool] {
        &self.coupled
    }

    pub fn is_coupled(&self, sort: SortId) -> bool {
        self.coupled[sort]
    }

    pub fn coupled_sorts(&self) -> Vec<SortId> {
        (0..self.coupled.len())
            .filter(|&s| self.coupled[s])
            .collect()
    }

    pub fn decoupled_sorts(&self) -> Vec<SortId> {
        (0..self.coupled.len())
            .filter(|&s| !self.coupled[s])
            .collect()
    }

    pub fn pair_language(&self) -> Language {
        Language::pair(self.vocab.clone(), self.coupled.clone())
    }

    pub fn triple_language(&self) -> Language {
        Language::triple(self.vocab.clone(), self.coupled.clone())
    }

    /// The coupled part of a size vector; decoupled entries are zeroed.
    pub fn coupled_sizes(&self, sizes: &[usize]) -> Vec<usize> {
        sizes
            .iter()
            .zip(&self.coupled)
            .map(|(&n, &c)| if c { n } else { 0 })
            .collect()
    }

    pub fn shares_coupled(&self, m: &FiniteStructure, n: &FiniteStructure) -> bool {
        self.coupled_sizes(m.sizes()) == self.coupled_sizes(n.sizes())
    }
}

/// Two structures read as one model of the pair language.
#[derive(Debug, Clone, Copy)]
pub struct DoubleStructure<'a> {
    pub left: &'a FiniteStructure,
    pub right: &'a FiniteStructure,
}

pub fn make_double<'a>(
    m: &'a FiniteStructure,
    n: &'a FiniteStructure,
    sig: &CoupledSignature,
) -> Result<DoubleStructure<'a>> {
    if m.vocab() != sig.vocab() || n.vocab() != sig.vocab() {
        return Err(Error::InvalidStructure(
            "structures over a different vocabulary".into(),
        ));
    }
    for s in sig.coupled_sorts() {
        if m.size(s) != n.size(s) {
            return Err(Error::CoupledMismatch(sig.vocab().sort_name(s).to_string()));
        }
    }
    Ok(DoubleStructure { left: m, right: n })
}

impl Interpretation for DoubleStructure<'_> {
    fn universe(&self, sort: SortId, side: Side) -> usize {
        match side {
            Side::Left => self.left.size(sort),
            Side::Right => self.right.size(sort),
        }
    }

    fn holds(&self, rel: RelId, side: Side, tuple: &[u32]) -> bool {
        match side {
            Side::Left => self.left.holds(rel, tuple),
            Side::Right => self.right.holds(rel, tuple),
        }
    }
}

/// Two structures joined by a bijection on every coupled sort.
#[derive(Debug, Clone)]
pub struct TripleStructure<'a> {
    pub left: &'a FiniteStructure,
    pub right: &'a FiniteStructure,
    pub link: BijectionFamily,
}

pub fn make_triple<'a>(
    m: &'a FiniteStructure,
    n: &'a FiniteStructure,
    link: BijectionFamily,
    sig: &CoupledSignature,
) -> Result<TripleStructure<'a>> {
    make_double(m, n, sig)?;
    if link.0.len() != sig.vocab().num_sorts() {
        return Err(Error::NotBijective(
            "link has the wrong number of sorts".into(),
        ));
    }
    for s in 0..link.0.len() {
        match (&link.0[s], sig.is_coupled(s)) {
            (Some(_), false) => {
                return Err(Error::NotBijective(format!(
                    "link on decoupled sort `{}`",
                    sig.vocab().sort_name(s)
                )))
            }
            (None, true) => {
                return Err(Error::NotBijective(format!(
                    "link missing on coupled sort `{}`",
                    sig.vocab().sort_name(s)
                )))
            }
            _ => {}
        }
    }
    link.validate(m.sizes())?;
    Ok(TripleStructure {
        left: m,
        right: n,
        link,
    })
}

impl Interpretation for TripleStructure<'_> {
    fn universe(&self, sort: SortId, side: Side) -> usize {
        match side {
            Side::Left => self.left.size(sort),
            Side::Right => self.right.size(sort),
        }
    }

    fn holds(&self, rel: RelId, side: Side, tuple: &[u32]) -> bool {
        match side {
            Side::Left => self.left.holds(rel, tuple),
            Side::Right => self.right.holds(rel, tuple),
        }
    }

    fn link(&self, sort: SortId, a: u32) -> Option<u32> {
        self.link.0[sort].as_ref().map(|p| p[a as usize])
    }
}

/// Primes every relation and every decoupled-sort variable of `phi`.
pub fn prime_translate(phi: &Formula, sig: &CoupledSignature) -> Formula {
    let var = |v: &Var| {
        let mut v = v.clone();
        if !sig.is_coupled(v.sort) {
            v.side = Side::Right;
        }
        v
    };
    match phi {
        Formula::Const(b) => Formula::Const(*b),
        Formula::Atom { rel, args, .. } => Formula::Atom {
            rel: *rel,
            side: Side::Right,
            args: args.iter().map(var).collect(),
        },
        Formula::Eq(a, b) => Formula::Eq(var(a), var(b)),
        Formula::Link { .. } => phi.clone(),
        Formula::Not(a) => Formula::not(prime_translate(a, sig)),
        Formula::And(a, b) => Formula::and(prime_translate(a, sig), prime_translate(b, sig)),
        Formula::Or(a, b) => Formula::or(prime_translate(a, sig), prime_translate(b, sig)),
        Formula::Implies(a, b) => {
            Formula::implies(prime_translate(a, sig), prime_translate(b, sig))
        }
        Formula::Iff(a, b) => Formula::iff(prime_translate(a, sig), prime_translate(b, sig)),
        Formula::Forall(v, body) => Formula::forall(var(v), prime_translate(body, sig)),
        Formula::Exists(v, body) => Formula::exists(var(v), prime_translate(body, sig)),
    }
}

/// `R^N = { f(t) : t ∈ R^M }`.
pub fn transport(m: &FiniteStructure, f: &BijectionFamily) -> Result<FiniteStructure> {
    f.validate(m.sizes())?;
    Ok(m.permuted(f))
}

/// Rewrites a pair formula into the triple language: every primed atom
/// reads its coupled arguments through the link, so that the result holds
/// in `(M, N, f)` iff the original holds in `(M, transport(N, f⁻¹))`.
pub fn relativize(psi: &Formula, sig: &CoupledSignature) -> Formula {
    let mut counter = 0usize;
    relativize_in(psi, sig, &mut counter)
}

fn relativize_in(psi: &Formula, sig: &CoupledSignature, counter: &mut usize) -> Formula {
    match psi {
        Formula::Atom {
            rel,
            side: Side::Right,
            args,
        } => {
            let mut links = Vec::new();
            let mut bound = Vec::new();
            let new_args = args
                .iter()
                .map(|v| {
                    if sig.is_coupled(v.sort) {
                        *counter += 1;
                        let w = Var {
                            name: format!("{}'{}", v.name, counter),
                            sort: v.sort,
                            side: Side::Right,
                        };
                        links.push(Formula::Link {
                            sort: v.sort,
                            left: v.clone(),
                            right: w.clone(),
                        });
                        bound.push(w.clone());
                        w
                    } else {
                        v.clone()
                    }
                })
                .collect();
            links.push(Formula::Atom {
                rel: *rel,
                side: Side::Right,
                args: new_args,
            });
            Formula::exists_all(&bound, Formula::conj(links))
        }
        Formula::Const(_) | Formula::Atom { .. } | Formula::Eq(..) | Formula::Link { .. } => {
            psi.clone()
        }
        Formula::Not(a) => Formula::not(relativize_in(a, sig, counter)),
        Formula::And(a, b) => Formula::and(
            relativize_in(a, sig, counter),
            relativize_in(b, sig, counter),
        ),
        Formula::Or(a, b) => Formula::or(
            relativize_in(a, sig, counter),
            relativize_in(b, sig, counter),
        ),
        Formula::Implies(a, b) => Formula::implies(
            relativize_in(a, sig, counter),
            relativize_in(b, sig, counter),
        ),
        Formula::Iff(a, b) => Formula::iff(
            relativize_in(a, sig, counter),
            relativize_in(b, sig, counter),
        ),
        Formula::Forall(v, body) => Formula::forall(v.clone(), relativize_in(body, sig, counter)),
        Formula::Exists(v, body) => Formula::exists(v.clone(), relativize_in(body, sig, counter)),
    }
}

/// The identity MER sentence: every relation agrees with its primed copy.
/// Only meaningful when every sort is coupled.
pub fn identity_sentence(sig: &CoupledSignature) -> Formula {
    let vocab = sig.vocab();
    let parts = vocab
        .relations()
        .iter()
        .enumerate()
        .map(|(r, decl)| {
            let vars: Vec<Var> = decl
                .profile
                .iter()
                .enumerate()
                .map(|(i, &s)| Var::new(format!("x{}", i + 1), s))
                .collect();
            let primed: Vec<Var> = vars
                .iter()
                .map(|v| {
                    let mut v = v.clone();
                    if !sig.is_coupled(v.sort) {
                        v.side = Side::Right;
                    }
                    v
                })
                .collect();
            Formula::forall_all(
                &vars,
                Formula::iff(
                    Formula::atom(r, vars.clone()),
                    Formula::Atom {
                        rel: r,
                        side: Side::Right,
                        args: primed,
                    },
                ),
            )
        })
        .collect();
    Formula::conj(parts)
}
