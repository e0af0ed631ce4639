//! The MER specification forms and their pairwise semantics.

use crate::error::{Error, Result};
use crate::logic::enumerate::all_tuples;
use crate::logic::eval::Compiled;
use crate::logic::formula::{Formula, Language, Var};
use crate::logic::parse::{parse_open, parse_sentence};
use crate::logic::structure::FiniteStructure;
use crate::mer::metric::FiniteMetric;
use crate::pair::{make_double, CoupledSignature, DoubleStructure};
use crate::reduct::cofinal::{CofinalKey, CofinalSpec, OrderSpec};
use crate::reduct::nset::{NSetValue, PartitionedFormula};
use crate::reduct::tower::FamilyTower;
use crate::scalar::Scalar;

/// A closed pair-language sentence.
#[derive(Debug, Clone)]
pub struct SentenceMer {
    pub sig: CoupledSignature,
    pub sentence: Formula,
    compiled: Compiled,
}

/// Equality of the extents of finitely many formulas on coupled sorts.
#[derive(Debug, Clone)]
pub struct ReductMer {
    pub sig: CoupledSignature,
    pub formulas: Vec<(Formula, Vec<Var>)>,
    compiled: Vec<Compiled>,
}

/// Agreement along a tower of definable families.
#[derive(Debug, Clone)]
pub struct TowerMer {
    pub sig: CoupledSignature,
    pub tower: FamilyTower,
}

/// Labels mapped to points of a finite metric space; structures are
/// equivalent when every coupled tuple gets labels closer than `eps`.
#[derive(Debug, Clone)]
pub struct ApproxMer<S: Scalar> {
    pub sig: CoupledSignature,
    pub labels: Vec<Formula>,
    pub vars: Vec<Var>,
    pub metric: FiniteMetric<S>,
    pub eps: S,
    compiled: Vec<Compiled>,
    close: Vec<Vec<bool>>,
}

/// Same base order and mutual domination of the family's values.
#[derive(Debug, Clone)]
pub struct CofinalMer {
    pub sig: CoupledSignature,
    pub spec: CofinalSpec,
}

#[derive(Debug, Clone)]
pub enum MerSpec<S: Scalar> {
    BySentence(SentenceMer),
    ByReduct(ReductMer),
    ByFamilyTower(TowerMer),
    ByApproxReduct(ApproxMer<S>),
    ByCofinalOrder(CofinalMer),
    Builtin {
        id: String,
        resolved: Box<MerSpec<S>>,
    },
}

/// What a spec needs to know about one structure to compare it with others.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prepared {
    Model,
    Bits(Vec<u64>),
    NSets(Vec<NSetValue>),
    Labels(Vec<u32>),
    Cofinal(CofinalKey),
}

fn check_coupled(sig: &CoupledSignature, vars: &[Var], what: &str) -> Result<()> {
    for v in vars {
        if !sig.is_coupled(v.sort) {
            return Err(Error::Validation(format!(
                "{what} uses `{}` on decoupled sort `{}`",
                v.name,
                sig.vocab().sort_name(v.sort)
            )));
        }
    }
    Ok(())
}

fn coupled_dims(m: &FiniteStructure, vars: &[Var]) -> Vec<usize> {
    vars.iter().map(|v| m.size(v.sort)).collect()
}

impl SentenceMer {
    pub fn new(sig: CoupledSignature, sentence: Formula) -> Result<Self> {
        if !sentence.is_closed() {
            let names: Vec<String> = sentence.free_vars().into_iter().map(|v| v.name).collect();
            return Err(Error::NotClosed(names.join(", ")));
        }
        sig.pair_language().validate(&sentence, &[])?;
        let compiled = Compiled::new(&sentence, &[])?;
        Ok(SentenceMer {
            sig,
            sentence,
            compiled,
        })
    }

    pub fn parse(sig: CoupledSignature, text: &str) -> Result<Self> {
        let sentence = parse_sentence(text, &sig.pair_language())?;
        Self::new(sig, sentence)
    }

    pub fn holds(&self, d: &DoubleStructure<'_>) -> bool {
        self.compiled.holds_in(d)
    }
}

impl ReductMer {
    pub fn new(sig: CoupledSignature, formulas: Vec<(Formula, Vec<Var>)>) -> Result<Self> {
        let lang = Language::single(sig.vocab().clone());
        let mut compiled = Vec::new();
        for (f, vars) in &formulas {
            lang.validate(f, vars)?;
            check_coupled(&sig, vars, "reduct formula")?;
            for v in f.free_vars() {
                if !vars.contains(&v) {
                    return Err(Error::Validation(format!(
                        "free variable `{}` not listed",
                        v.name
                    )));
                }
            }
            compiled.push(Compiled::new(f, vars)?);
        }
        Ok(ReductMer {
            sig,
            formulas,
            compiled,
        })
    }

    /// Each formula's free variables are taken in order of first use.
    pub fn parse(sig: CoupledSignature, texts: &[&str]) -> Result<Self> {
        let lang = Language::single(sig.vocab().clone());
        let formulas = texts
            .iter()
            .map(|t| parse_open(t, &lang))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sig, formulas)
    }

    fn key(&self, m: &FiniteStructure) -> Vec<u64> {
        let mut bits = Vec::new();
        let mut n = 0usize;
        for ((_, vars), c) in self.formulas.iter().zip(&self.compiled) {
            let mut env = c.env();
            for t in all_tuples(&coupled_dims(m, vars)) {
                env[..t.len()].copy_from_slice(&t);
                if n % 64 == 0 {
                    bits.push(0);
                }
                if c.eval(m, &mut env) {
                    *bits.last_mut().unwrap() |= 1 << (n % 64);
                }
                n += 1;
            }
        }
        bits
    }
}

impl TowerMer {
    /// Every level's member block must be on coupled sorts; imaginary sorts
    /// count as coupled.
    pub fn new(sig: CoupledSignature, tower: FamilyTower) -> Result<Self> {
        if tower.base() != sig.vocab() {
            return Err(Error::Validation(
                "tower is over a different vocabulary".into(),
            ));
        }
        let base_sorts = sig.vocab().num_sorts();
        for (i, level) in tower.levels().iter().enumerate() {
            for s in level.member_sorts() {
                if s < base_sorts && !sig.is_coupled(s) {
                    return Err(Error::Validation(format!(
                        "level {} has members on decoupled sort `{}`",
                        i + 1,
                        sig.vocab().sort_name(s)
                    )));
                }
            }
        }
        Ok(TowerMer { sig, tower })
    }

    pub fn parse(sig: CoupledSignature, levels: &[&str]) -> Result<Self> {
        let tower = FamilyTower::parse(sig.vocab(), levels)?;
        Self::new(sig, tower)
    }
}

impl<S: Scalar> ApproxMer<S> {
    pub fn new(
        sig: CoupledSignature,
        labels: Vec<Formula>,
        vars: Vec<Var>,
        metric: FiniteMetric<S>,
        eps: S,
    ) -> Result<Self> {
        if eps <= S::zero() {
            return Err(Error::InvalidMetric(format!(
                "threshold {} is not positive",
                eps.render()
            )));
        }
        if labels.len() != metric.len() {
            return Err(Error::InvalidMetric(format!(
                "{} labels but {} metric points",
                labels.len(),
                metric.len()
            )));
        }
        check_coupled(&sig, &vars, "label")?;
        let lang = Language::single(sig.vocab().clone());
        let compiled = labels
            .iter()
            .map(|f| {
                lang.validate(f, &vars)?;
                Compiled::new(f, &vars)
            })
            .collect::<Result<Vec<_>>>()?;
        let close = metric.closeness(&eps);
        Ok(ApproxMer {
            sig,
            labels,
            vars,
            metric,
            eps,
            compiled,
            close,
        })
    }

    /// Label variables are the union of the labels' free variables, in order
    /// of first use.
    pub fn parse(
        sig: CoupledSignature,
        labels: &[&str],
        metric: FiniteMetric<S>,
        eps: S,
    ) -> Result<Self> {
        let lang = Language::single(sig.vocab().clone());
        let mut formulas = Vec::new();
        let mut vars: Vec<Var> = Vec::new();
        for text in labels {
            let (f, free) = parse_open(text, &lang)?;
            for v in free {
                match vars.iter().find(|w| w.name == v.name) {
                    Some(w) if w.sort != v.sort => {
                        return Err(Error::SortMismatch(format!(
                            "label variable `{}` used at two sorts",
                            v.name
                        )))
                    }
                    Some(_) => {}
                    None => vars.push(v),
                }
            }
            formulas.push(f);
        }
        Self::new(sig, formulas, vars, metric, eps)
    }

    /// The label index of every coupled tuple, in lexicographic tuple order.
    pub fn labeling(&self, m: &FiniteStructure) -> Result<Vec<u32>> {
        let tuples = all_tuples(&coupled_dims(m, &self.vars));
        let mut out = Vec::with_capacity(tuples.len());
        for t in tuples {
            let mut found = None;
            for (i, c) in self.compiled.iter().enumerate() {
                if c.eval_at(m, &t) {
                    if found.is_some() {
                        return Err(Error::NotPartition(format!(
                            "tuple {t:?} satisfies two labels in {m}"
                        )));
                    }
                    found = Some(i as u32);
                }
            }
            out.push(found.ok_or_else(|| {
                Error::NotPartition(format!("tuple {t:?} satisfies no label in {m}"))
            })?);
        }
        Ok(out)
    }

    pub fn close(&self, a: u32, b: u32) -> bool {
        self.close[a as usize][b as usize]
    }
}

impl CofinalMer {
    pub fn new(
        sig: CoupledSignature,
        order: OrderSpec,
        family: PartitionedFormula,
    ) -> Result<Self> {
        if !sig.is_coupled(order.sort()) {
            return Err(Error::Validation(
                "the order must be on a coupled sort".into(),
            ));
        }
        let spec = CofinalSpec::new(order, family)?;
        Ok(CofinalMer { sig, spec })
    }

    pub fn parse(sig: CoupledSignature, order: &str, family: &str) -> Result<Self> {
        let o = OrderSpec::parse(order, sig.vocab())?;
        let f = PartitionedFormula::parse(family, sig.vocab())?;
        Self::new(sig, o, f)
    }
}

impl<S: Scalar> MerSpec<S> {
    pub fn sentence(sig: CoupledSignature, text: &str) -> Result<Self> {
        SentenceMer::parse(sig, text).map(MerSpec::BySentence)
    }

    pub fn reduct(sig: CoupledSignature, texts: &[&str]) -> Result<Self> {
        ReductMer::parse(sig, texts).map(MerSpec::ByReduct)
    }

    pub fn tower(sig: CoupledSignature, levels: &[&str]) -> Result<Self> {
        TowerMer::parse(sig, levels).map(MerSpec::ByFamilyTower)
    }

    pub fn approx(
        sig: CoupledSignature,
        labels: &[&str],
        metric: FiniteMetric<S>,
        eps: S,
    ) -> Result<Self> {
        ApproxMer::parse(sig, labels, metric, eps).map(MerSpec::ByApproxReduct)
    }

    pub fn cofinal(sig: CoupledSignature, order: &str, family: &str) -> Result<Self> {
        CofinalMer::parse(sig, order, family).map(MerSpec::ByCofinalOrder)
    }

    /// The spec with builtin indirections removed.
    pub fn resolved(&self) -> &MerSpec<S> {
        match self {
            MerSpec::Builtin { resolved, .. } => resolved.resolved(),
            other => other,
        }
    }

    pub fn sig(&self) -> &CoupledSignature {
        match self.resolved() {
            MerSpec::BySentence(s) => &s.sig,
            MerSpec::ByReduct(s) => &s.sig,
            MerSpec::ByFamilyTower(s) => &s.sig,
            MerSpec::ByApproxReduct(s) => &s.sig,
            MerSpec::ByCofinalOrder(s) => &s.sig,
            MerSpec::Builtin { .. } => unreachable!("resolved"),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MerSpec::BySentence(_) => "sentence",
            MerSpec::ByReduct(_) => "reduct",
            MerSpec::ByFamilyTower(_) => "family",
            MerSpec::ByApproxReduct(_) => "approx",
            MerSpec::ByCofinalOrder(_) => "cofinal",
            MerSpec::Builtin { .. } => "builtin",
        }
    }

    /// True when `related` is equality of prepared values.
    pub fn is_keyed(&self) -> bool {
        matches!(
            self.resolved(),
            MerSpec::ByReduct(_) | MerSpec::ByFamilyTower(_)
        )
    }

    /// Per-structure data; fails when the spec is not defined on `m`.
    pub fn prepare(&self, m: &FiniteStructure) -> Result<Prepared> {
        Ok(match self.resolved() {
            MerSpec::BySentence(_) => Prepared::Model,
            MerSpec::ByReduct(r) => Prepared::Bits(r.key(m)),
            MerSpec::ByFamilyTower(t) => Prepared::NSets(t.tower.key(m)?),
            MerSpec::ByApproxReduct(a) => Prepared::Labels(a.labeling(m)?),
            MerSpec::ByCofinalOrder(c) => Prepared::Cofinal(c.spec.key(m)?),
            MerSpec::Builtin { .. } => unreachable!("resolved"),
        })
    }

    /// The relation on prepared structures sharing coupled universes.
    pub fn related(
        &self,
        m: &FiniteStructure,
        pm: &Prepared,
        n: &FiniteStructure,
        pn: &Prepared,
    ) -> bool {
        match (self.resolved(), pm, pn) {
            (MerSpec::BySentence(s), _, _) => s.holds(&DoubleStructure { left: m, right: n }),
            (MerSpec::ByApproxReduct(a), Prepared::Labels(x), Prepared::Labels(y)) => {
                x.iter().zip(y).all(|(&i, &j)| a.close(i, j))
            }
            (MerSpec::ByCofinalOrder(_), Prepared::Cofinal(x), Prepared::Cofinal(y)) => {
                CofinalSpec::related(x, y)
            }
            (_, x, y) => x == y,
        }
    }

    /// Whether `m` and `n` are equivalent.
    pub fn equivalent(&self, m: &FiniteStructure, n: &FiniteStructure) -> Result<bool> {
        make_double(m, n, self.sig())?;
        let pm = self.prepare(m)?;
        let pn = self.prepare(n)?;
        Ok(self.related(m, &pm, n, &pn))
    }
}
