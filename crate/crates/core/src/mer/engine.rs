//! Exhaustive checking of MER specifications at a finite scale.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::spec::{MerSpec, Prepared};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::logic::enumerate::{models_of, size_vectors};
use crate::logic::iso::bijection_families;
use crate::logic::structure::{BijectionFamily, FiniteStructure};
use crate::logic::theory::Theory;
use crate::logic::vocab::Vocabulary;
use crate::pair::{transport, CoupledSignature};
use crate::reduct::cofinal::OrderMatrix;
use crate::scalar::Scalar;

/// Per-sort upper bounds on universe sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scale {
    pub max: Vec<usize>,
}

impl Scale {
    pub fn new(max: Vec<usize>) -> Self {
        Scale { max }
    }

    pub fn uniform(vocab: &Vocabulary, n: usize) -> Self {
        Scale {
            max: vec![n; vocab.num_sorts()],
        }
    }

    /// Named bounds over a default.
    pub fn named(vocab: &Vocabulary, bounds: &[(&str, usize)], default: usize) -> Result<Self> {
        let mut max = vec![default; vocab.num_sorts()];
        for (name, n) in bounds {
            let s = vocab
                .sort_id(name)
                .ok_or_else(|| Error::UnknownSort(name.to_string()))?;
            max[s] = *n;
        }
        Ok(Scale { max })
    }

    pub fn size_vectors(&self) -> Vec<Vec<usize>> {
        size_vectors(&self.max)
    }

    pub fn describe(&self, vocab: &Vocabulary) -> Vec<(String, usize)> {
        vocab
            .sorts()
            .iter()
            .cloned()
            .zip(self.max.iter().copied())
            .collect()
    }
}

/// Square bit matrix with row access.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn from_rows(n: usize, rows: Vec<Vec<u64>>) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut bits = Vec::with_capacity(n * words);
        for r in rows {
            debug_assert_eq!(r.len(), words);
            bits.extend(r);
        }
        BitMatrix { n, words, bits }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row(i)[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.row(i))
    }
}

pub fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let b = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + b)
        })
    })
}

fn first_one(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Models sharing one coupled size vector, in canonical order.
#[derive(Debug, Clone)]
pub struct ModelGroup {
    pub coupled: Vec<usize>,
    pub models: Vec<FiniteStructure>,
    index: HashMap<FiniteStructure, usize>,
}

impl ModelGroup {
    pub fn new(coupled: Vec<usize>, mut models: Vec<FiniteStructure>) -> Self {
        models.sort();
        let index = models
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        ModelGroup {
            coupled,
            models,
            index,
        }
    }

    pub fn index_of(&self, m: &FiniteStructure) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// All models of `theory` at `scale`, grouped by coupled sizes. Groups are
/// ordered by their coupled size vector.
pub fn model_groups(
    sig: &CoupledSignature,
    theory: &Theory,
    scale: &Scale,
    budget: &Budget,
) -> Result<Vec<ModelGroup>> {
    if theory.vocab() != sig.vocab() {
        return Err(Error::Validation(
            "theory and MER use different vocabularies".into(),
        ));
    }
    if scale.max.len() != sig.vocab().num_sorts() {
        return Err(Error::Validation("scale does not cover every sort".into()));
    }
    let mut groups: BTreeMap<Vec<usize>, Vec<FiniteStructure>> = BTreeMap::new();
    for sizes in scale.size_vectors() {
        let models = models_of(theory, &sizes, budget)?;
        groups
            .entry(sig.coupled_sizes(&sizes))
            .or_default()
            .extend(models);
    }
    Ok(groups
        .into_iter()
        .filter(|(_, models)| !models.is_empty())
        .map(|(coupled, models)| ModelGroup::new(coupled, models))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErFailure {
    Reflexivity,
    Symmetry,
    Transitivity,
    NotWellDefined,
}

impl ErFailure {
    pub fn name(self) -> &'static str {
        match self {
            ErFailure::Reflexivity => "reflexivity",
            ErFailure::Symmetry => "symmetry",
            ErFailure::Transitivity => "transitivity",
            ErFailure::NotWellDefined => "not-well-defined",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [
            ErFailure::Reflexivity,
            ErFailure::Symmetry,
            ErFailure::Transitivity,
            ErFailure::NotWellDefined,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ErVerdict {
    HoldsAtScale(Scale),
    Counterexample {
        kind: ErFailure,
        witnesses: Vec<FiniteStructure>,
        reason: Option<String>,
    },
}

impl ErVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ErVerdict::HoldsAtScale(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupoidLaw {
    Identity,
    Inverse,
    Composition,
}

impl GroupoidLaw {
    pub fn name(self) -> &'static str {
        match self {
            GroupoidLaw::Identity => "identity",
            GroupoidLaw::Inverse => "inverse",
            GroupoidLaw::Composition => "composition",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupoidVerdict {
    LawsHoldAtScale(Scale),
    Violation {
        law: GroupoidLaw,
        models: Vec<FiniteStructure>,
        morphisms: Vec<BijectionFamily>,
    },
    /// The spec is undefined on some model, so there is no groupoid.
    NotWellDefined {
        model: FiniteStructure,
        reason: String,
    },
}

impl GroupoidVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, GroupoidVerdict::LawsHoldAtScale(_))
    }
}

/// One group of models with the spec's relation materialized.
#[derive(Debug, Clone)]
pub struct GroupRelation {
    pub group: ModelGroup,
    pub matrix: BitMatrix,
}

/// Every model group at a scale with the relation materialized, or the
/// first model on which the spec is undefined.
#[derive(Debug, Clone)]
pub struct MerAnalysis {
    pub sig: CoupledSignature,
    pub scale: Scale,
    pub groups: Vec<GroupRelation>,
    pub ill_defined: Option<(FiniteStructure, String)>,
}

/// The relation on one list of models sharing coupled universes.
pub fn relation_matrix<S: Scalar>(
    spec: &MerSpec<S>,
    models: &[FiniteStructure],
    budget: &Budget,
) -> Result<std::result::Result<BitMatrix, (usize, Error)>> {
    let n = models.len();
    let prepared: Vec<Result<Prepared>> = models.par_iter().map(|m| spec.prepare(m)).collect();
    let mut ok = Vec::with_capacity(n);
    for (i, p) in prepared.into_iter().enumerate() {
        match p {
            Ok(p) => ok.push(p),
            Err(e @ Error::ResourceCeiling { .. }) => return Err(e),
            Err(e) => return Ok(Err((i, e))),
        }
    }
    let words = n.div_ceil(64).max(1);
    if spec.is_keyed() {
        budget.charge(n as u64)?;
        let mut classes: HashMap<&Prepared, Vec<usize>> = HashMap::new();
        for (i, p) in ok.iter().enumerate() {
            classes.entry(p).or_default().push(i);
        }
        let mut rows = vec![vec![0u64; words]; n];
        for members in classes.values() {
            let mut row = vec![0u64; words];
            for &j in members {
                row[j / 64] |= 1 << (j % 64);
            }
            for &i in members {
                rows[i].clone_from(&row);
            }
        }
        return Ok(Ok(BitMatrix::from_rows(n, rows)));
    }
    // Cofinal specs only relate structures carrying the same order.
    let mut buckets: HashMap<Option<&OrderMatrix>, Vec<usize>> = HashMap::new();
    for (i, p) in ok.iter().enumerate() {
        let key = match p {
            Prepared::Cofinal(k) => Some(&k.order),
            _ => None,
        };
        buckets.entry(key).or_default().push(i);
    }
    let pairs: u128 = buckets.values().map(|b| (b.len() as u128).pow(2)).sum();
    budget.reserve(pairs)?;
    budget.charge(pairs as u64)?;
    let bucket_of: Vec<&Vec<usize>> = {
        let mut v = vec![None; n];
        for b in buckets.values() {
            for &i in b {
                v[i] = Some(b);
            }
        }
        v.into_iter().map(|b| b.expect("every model is bucketed")).collect()
    };
    let rows: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0u64; words];
            for &j in bucket_of[i] {
                if spec.related(&models[i], &ok[i], &models[j], &ok[j]) {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    Ok(Ok(BitMatrix::from_rows(n, rows)))
}

impl MerAnalysis {
    pub fn build<S: Scalar>(
        spec: &MerSpec<S>,
        theory: &Theory,
        scale: &Scale,
        budget: &Budget,
    ) -> Result<Self> {
        let sig = spec.sig().clone();
        let groups = model_groups(&sig, theory, scale, budget)?;
        let mut out = Vec::with_capacity(groups.len());
        for group in groups {
            match relation_matrix(spec, &group.models, budget)? {
                Ok(matrix) => out.push(GroupRelation { group, matrix }),
                Err((i, e)) => {
                    return Ok(MerAnalysis {
                        sig,
                        scale: scale.clone(),
                        groups: out,
                        ill_defined: Some((group.models[i].clone(), e.to_string())),
                    })
                }
            }
        }
        Ok(MerAnalysis {
            sig,
            scale: scale.clone(),
            groups: out,
            ill_defined: None,
        })
    }

    pub fn model_count(&self) -> usize {
        self.groups.iter().map(|g| g.group.len()).sum()
    }

    pub fn er_verdict(&self) -> ErVerdict {
        if let Some((m, reason)) = &self.ill_defined {
            return ErVerdict::Counterexample {
                kind: ErFailure::NotWellDefined,
                witnesses: vec![m.clone()],
                reason: Some(reason.clone()),
            };
        }
        for kind in [
            ErFailure::Reflexivity,
            ErFailure::Symmetry,
            ErFailure::Transitivity,
        ] {
            for g in &self.groups {
                if let Some(idx) = first_failure(&g.matrix, kind) {
                    return ErVerdict::Counterexample {
                        kind,
                        witnesses: idx.into_iter().map(|i| g.group.models[i].clone()).collect(),
                        reason: None,
                    };
                }
            }
        }
        ErVerdict::HoldsAtScale(self.scale.clone())
    }

    pub fn groupoid_verdict(&self, budget: &Budget) -> Result<GroupoidVerdict> {
        if let Some((m, reason)) = &self.ill_defined {
            return Ok(GroupoidVerdict::NotWellDefined {
                model: m.clone(),
                reason: reason.clone(),
            });
        }
        let coupled = self.sig.coupled_sorts();
        for law in [
            GroupoidLaw::Identity,
            GroupoidLaw::Inverse,
            GroupoidLaw::Composition,
        ] {
            for g in &self.groups {
                let perms = bijection_families(&g.group.coupled, &coupled, budget)?;
                let act = action_table(&g.group, &perms, budget)?;
                if let Some(v) = law_violation(law, g, &perms, &act) {
                    return Ok(v);
                }
            }
        }
        Ok(GroupoidVerdict::LawsHoldAtScale(self.scale.clone()))
    }

    /// Classes of the group with exactly the given sizes, sorted by least
    /// member. Only meaningful when the relation is an equivalence there.
    pub fn classes_of(&self, sizes: &[usize]) -> Vec<Vec<FiniteStructure>> {
        let coupled = self.sig.coupled_sizes(sizes);
        let Some(g) = self.groups.iter().find(|g| g.group.coupled == coupled) else {
            return Vec::new();
        };
        let keep: Vec<usize> = (0..g.group.len())
            .filter(|&i| g.group.models[i].sizes() == sizes)
            .collect();
        let mut seen = vec![false; g.group.len()];
        let mut out = Vec::new();
        for &i in &keep {
            if seen[i] {
                continue;
            }
            let class: Vec<usize> = keep
                .iter()
                .copied()
                .filter(|&j| g.matrix.get(i, j))
                .collect();
            for &j in &class {
                seen[j] = true;
            }
            out.push(
                class
                    .into_iter()
                    .map(|j| g.group.models[j].clone())
                    .collect(),
            );
        }
        out
    }
}

/// Least failure of the given kind, lexicographic in model indices.
pub fn first_failure(e: &BitMatrix, kind: ErFailure) -> Option<Vec<usize>> {
    let n = e.len();
    match kind {
        ErFailure::Reflexivity => (0..n).find(|&i| !e.get(i, i)).map(|i| vec![i]),
        ErFailure::Symmetry => (0..n)
            .into_par_iter()
            .find_map_first(|i| e.ones(i).find(|&j| !e.get(j, i)).map(|j| vec![i, j])),
        ErFailure::Transitivity => (0..n).into_par_iter().find_map_first(|a| {
            let ra = e.row(a);
            e.ones(a).find_map(|b| {
                let diff: Vec<u64> = e.row(b).iter().zip(ra).map(|(x, y)| x & !y).collect();
                first_one(&diff).map(|c| vec![a, b, c])
            })
        }),
        ErFailure::NotWellDefined => None,
    }
}

/// `act[p][i]` is the index of `perms[p]` applied to model `i`.
pub fn action_table(
    group: &ModelGroup,
    perms: &[BijectionFamily],
    budget: &Budget,
) -> Result<Vec<Vec<u32>>> {
    budget.reserve((perms.len() as u128) * (group.len() as u128))?;
    budget.charge((perms.len() * group.len()) as u64)?;
    perms
        .par_iter()
        .map(|p| {
            group
                .models
                .iter()
                .map(|m| {
                    group
                        .index_of(&m.permuted(p))
                        .map(|i| i as u32)
                        .ok_or_else(|| {
                            Error::Validation(
                                "the theory is not closed under isomorphism at this scale".into(),
                            )
                        })
                })
                .collect()
        })
        .collect()
}

fn law_violation(
    law: GroupoidLaw,
    g: &GroupRelation,
    perms: &[BijectionFamily],
    act: &[Vec<u32>],
) -> Option<GroupoidVerdict> {
    let e = &g.matrix;
    let n = e.len();
    let model = |i: usize| g.group.models[i].clone();
    let id_perm = perms[0].clone();
    match law {
        GroupoidLaw::Identity => {
            (0..n)
                .find(|&i| !e.get(i, i))
                .map(|i| GroupoidVerdict::Violation {
                    law,
                    models: vec![model(i), model(i)],
                    morphisms: vec![id_perm.clone()],
                })
        }
        GroupoidLaw::Inverse => (0..n)
            .into_par_iter()
            .find_map_first(|m| {
                perms.iter().enumerate().find_map(|(p, f)| {
                    let fm = act[p][m] as usize;
                    e.ones(m)
                        .find_map(|x| {
                            let nn = act[p][x] as usize;
                            (!e.get(nn, fm)).then(|| (nn, f.clone()))
                        })
                        .map(|(nn, f)| (m, nn, f))
                })
            })
            .map(|(m, nn, f)| GroupoidVerdict::Violation {
                law,
                models: vec![model(m), model(nn)],
                morphisms: vec![f],
            }),
        GroupoidLaw::Composition => (0..n)
            .into_par_iter()
            .find_map_first(|m| {
                let words = e.words();
                perms.iter().enumerate().find_map(|(p, f)| {
                    let mut image = vec![0u64; words];
                    for z in e.ones(m) {
                        let t = act[p][z] as usize;
                        image[t / 64] |= 1 << (t % 64);
                    }
                    e.ones(m).find_map(|x| {
                        let nn = act[p][x] as usize;
                        let diff: Vec<u64> =
                            e.row(nn).iter().zip(&image).map(|(a, b)| a & !b).collect();
                        first_one(&diff).map(|k| (m, nn, k, f.clone()))
                    })
                })
            })
            .map(|(m, nn, k, f)| GroupoidVerdict::Violation {
                law,
                models: vec![model(m), model(nn), model(k)],
                morphisms: vec![f, id_perm.clone()],
            }),
    }
}

/// `G(M, N)`: coupled-sort bijections `f` with `M` equivalent to
/// `transport(N, f⁻¹)`, straight from the definition.
pub fn groupoid_morphisms<S: Scalar>(
    spec: &MerSpec<S>,
    m: &FiniteStructure,
    n: &FiniteStructure,
    budget: &Budget,
) -> Result<Vec<BijectionFamily>> {
    let sig = spec.sig();
    if !sig.shares_coupled(m, n) {
        return Ok(Vec::new());
    }
    let families = bijection_families(&sig.coupled_sizes(m.sizes()), &sig.coupled_sorts(), budget)?;
    budget.charge(families.len() as u64)?;
    let pm = spec.prepare(m)?;
    let mut out = Vec::new();
    for f in families {
        if morphism_with(spec, m, &pm, n, &f)? {
            out.push(f);
        }
    }
    Ok(out)
}

fn morphism_with<S: Scalar>(
    spec: &MerSpec<S>,
    m: &FiniteStructure,
    pm: &Prepared,
    n: &FiniteStructure,
    f: &BijectionFamily,
) -> Result<bool> {
    let moved = transport(n, &f.inverse())?;
    let pn = spec.prepare(&moved)?;
    Ok(spec.related(m, pm, &moved, &pn))
}

/// Whether `f` belongs to `G(M, N)`.
pub fn is_morphism<S: Scalar>(
    spec: &MerSpec<S>,
    m: &FiniteStructure,
    n: &FiniteStructure,
    f: &BijectionFamily,
) -> Result<bool> {
    if !spec.sig().shares_coupled(m, n) {
        return Ok(false);
    }
    f.validate(m.sizes())?;
    morphism_with(spec, m, &spec.prepare(m)?, n, f)
}

pub fn check_equivalence_relation<S: Scalar>(
    spec: &MerSpec<S>,
    theory: &Theory,
    scale: &Scale,
    budget: &Budget,
) -> Result<ErVerdict> {
    Ok(MerAnalysis::build(spec, theory, scale, budget)?.er_verdict())
}

pub fn check_groupoid_laws<S: Scalar>(
    spec: &MerSpec<S>,
    theory: &Theory,
    scale: &Scale,
    budget: &Budget,
) -> Result<GroupoidVerdict> {
    MerAnalysis::build(spec, theory, scale, budget)?.groupoid_verdict(budget)
}

/// The classes of models on exactly the given universe sizes; refuses with
/// the witness when the spec is not an equivalence relation there.
pub fn mer_classes<S: Scalar>(
    spec: &MerSpec<S>,
    theory: &Theory,
    sizes: &[usize],
    budget: &Budget,
) -> Result<Vec<Vec<FiniteStructure>>> {
    let models = models_of(theory, sizes, budget)?;
    match relation_matrix(spec, &models, budget)? {
        Err((i, e)) => Err(Error::NotEquivalence(format!(
            "undefined on {}: {e}",
            models[i]
        ))),
        Ok(matrix) => {
            for kind in [
                ErFailure::Reflexivity,
                ErFailure::Symmetry,
                ErFailure::Transitivity,
            ] {
                if let Some(w) = first_failure(&matrix, kind) {
                    let names: Vec<String> =
                        w.iter().map(|&i| format!("[{}]", models[i])).collect();
                    return Err(Error::NotEquivalence(format!(
                        "{} fails at {}",
                        kind.name(),
                        names.join(" ")
                    )));
                }
            }
            let scale = Scale::new(sizes.to_vec());
            let analysis = MerAnalysis {
                sig: spec.sig().clone(),
                scale,
                groups: vec![GroupRelation {
                    group: ModelGroup::new(spec.sig().coupled_sizes(sizes), models),
                    matrix,
                }],
                ill_defined: None,
            };
            Ok(analysis.classes_of(sizes))
        }
    }
}

/// Re-checks a reported counterexample against the spec's definition.
pub fn replay<S: Scalar>(
    spec: &MerSpec<S>,
    kind: ErFailure,
    witnesses: &[FiniteStructure],
) -> Result<bool> {
    let eq = |a: &FiniteStructure, b: &FiniteStructure| spec.equivalent(a, b);
    Ok(match (kind, witnesses) {
        (ErFailure::Reflexivity, [m]) => !eq(m, m)?,
        (ErFailure::Symmetry, [m, n]) => eq(m, n)? && !eq(n, m)?,
        (ErFailure::Transitivity, [m, n, k]) => eq(m, n)? && eq(n, k)? && !eq(m, k)?,
        (ErFailure::NotWellDefined, [m]) => spec.prepare(m).is_err(),
        _ => {
            return Err(Error::Validation(format!(
                "wrong number of witnesses for {}",
                kind.name()
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mer::metric::FiniteMetric;
    use crate::{Mer, Rational};

    fn unary() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::build(&["V"], &[("P", &["V"])]).unwrap())
    }

    fn bipartite() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"])]).unwrap())
    }

    const ADJ: &str = "(forall x:P. exists x2:P. forall y:Q. (G(x, y) <-> G'(x2, y))) \
        & (forall x2:P. exists x:P. forall y:Q. (G(x, y) <-> G'(x2, y)))";

    fn adj_sig(v: &Arc<Vocabulary>) -> CoupledSignature {
        CoupledSignature::all(v.clone())
    }

    #[test]
    fn containment_fails_symmetry_at_size_one() {
        let v = unary();
        let spec = Mer::sentence(
            CoupledSignature::all(v.clone()),
            "forall x. (P(x) -> P'(x))",
        )
        .unwrap();
        let verdict = check_equivalence_relation(
            &spec,
            &Theory::empty(v.clone()),
            &Scale::uniform(&v, 1),
            &Budget::unlimited(),
        )
        .unwrap();
        let ErVerdict::Counterexample {
            kind, witnesses, ..
        } = verdict
        else {
            panic!()
        };
        assert_eq!(kind, ErFailure::Symmetry);
        assert_eq!(witnesses[0].to_string(), "V=1; P={}");
        assert_eq!(witnesses[1].to_string(), "V=1; P={(0)}");
        assert!(replay(&spec, kind, &witnesses).unwrap());
        let g = check_groupoid_laws(
            &spec,
            &Theory::empty(v.clone()),
            &Scale::uniform(&v, 1),
            &Budget::unlimited(),
        )
        .unwrap();
        let GroupoidVerdict::Violation { law, models, .. } = g else {
            panic!()
        };
        assert_eq!(law, GroupoidLaw::Inverse);
        assert_eq!(models, witnesses);
    }

    #[test]
    fn true_and_identity_hold() {
        let v = bipartite();
        let t = Theory::empty(v.clone());
        let scale = Scale::uniform(&v, 2);
        let b = Budget::unlimited();
        let top = Mer::sentence(CoupledSignature::all(v.clone()), "true").unwrap();
        assert!(check_equivalence_relation(&top, &t, &scale, &b)
            .unwrap()
            .holds());
        let id = Mer::sentence(
            CoupledSignature::all(v.clone()),
            "forall x:P. forall y:Q. (G(x, y) <-> G'(x, y))",
        )
        .unwrap();
        assert!(check_equivalence_relation(&id, &t, &scale, &b)
            .unwrap()
            .holds());
        assert!(check_groupoid_laws(&id, &t, &scale, &b).unwrap().holds());
    }

    #[test]
    fn adjacency_sets() {
        let v = bipartite();
        let spec = Mer::sentence(adj_sig(&v), ADJ).unwrap();
        let t = Theory::empty(v.clone());
        let b = Budget::unlimited();
        let scale = Scale::uniform(&v, 2);
        let verdict = check_equivalence_relation(&spec, &t, &scale, &b).unwrap();
        assert!(verdict.holds(), "{verdict:?}");
        assert!(check_groupoid_laws(&spec, &t, &scale, &b).unwrap().holds());
        let classes = mer_classes(&spec, &t, &[2, 2], &b).unwrap();
        assert_eq!(classes.len(), 10);
        assert_eq!(classes.iter().map(Vec::len).sum::<usize>(), 16);

        let m = FiniteStructure::from_tuples(
            v.clone(),
            vec![2, 2],
            &[("G", vec![vec![0, 0], vec![1, 0], vec![1, 1]])],
        )
        .unwrap();
        let g = groupoid_morphisms(&spec, &m, &m, &b).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|f| f.0[1].as_deref() == Some(&[0, 1][..])));
    }

    #[test]
    fn trivial_morphisms() {
        let v = unary();
        let spec = Mer::sentence(CoupledSignature::all(v.clone()), "true").unwrap();
        let m = FiniteStructure::empty(v.clone(), vec![3]).unwrap();
        assert_eq!(
            groupoid_morphisms(&spec, &m, &m, &Budget::unlimited())
                .unwrap()
                .len(),
            6
        );
        let classes = mer_classes(&spec, &Theory::empty(v), &[2], &Budget::unlimited()).unwrap();
        assert_eq!(classes.len(), 1);
    }

    #[test]
    fn identity_unary_classes() {
        let v = unary();
        let spec = Mer::sentence(
            CoupledSignature::all(v.clone()),
            "forall x. (P(x) <-> P'(x))",
        )
        .unwrap();
        let classes = mer_classes(&spec, &Theory::empty(v), &[1], &Budget::unlimited()).unwrap();
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn approx_near_threshold_breaks_transitivity() {
        let v = Arc::new(
            Vocabulary::build(&["V"], &[("A", &["V"]), ("B", &["V"]), ("C", &["V"])]).unwrap(),
        );
        let sig = CoupledSignature::all(v.clone());
        let r = |n, d| Rational::new(n, d);
        let metric = FiniteMetric::line(&[r(0, 1), r(3, 5), r(6, 5)]).unwrap();
        let labels = [
            "A(x) & !B(x) & !C(x)",
            "B(x) & !A(x) & !C(x)",
            "C(x) & !A(x) & !B(x)",
        ];
        let theory = Theory::parse(v.clone(), &[("one-label", "forall x. ((A(x) & !B(x) & !C(x)) | (B(x) & !A(x) & !C(x)) | (C(x) & !A(x) & !B(x)))")]).unwrap();
        let spec = Mer::approx(sig, &labels, metric, r(1, 1)).unwrap();
        let verdict = check_equivalence_relation(
            &spec,
            &theory,
            &Scale::uniform(&v, 1),
            &Budget::unlimited(),
        )
        .unwrap();
        let ErVerdict::Counterexample {
            kind, witnesses, ..
        } = verdict
        else {
            panic!()
        };
        assert_eq!(kind, ErFailure::Transitivity);
        assert!(replay(&spec, kind, &witnesses).unwrap());
    }

    #[test]
    fn approx_without_theory_is_not_well_defined() {
        let v = Arc::new(Vocabulary::build(&["V"], &[("A", &["V"]), ("B", &["V"])]).unwrap());
        let spec = Mer::approx(
            CoupledSignature::all(v.clone()),
            &["A(x)", "B(x)"],
            FiniteMetric::discrete(2),
            Rational::from(1),
        )
        .unwrap();
        let verdict = check_equivalence_relation(
            &spec,
            &Theory::empty(v.clone()),
            &Scale::uniform(&v, 1),
            &Budget::unlimited(),
        )
        .unwrap();
        let ErVerdict::Counterexample {
            kind, witnesses, ..
        } = verdict
        else {
            panic!()
        };
        assert_eq!(kind, ErFailure::NotWellDefined);
        assert!(replay(&spec, kind, &witnesses).unwrap());
    }

    #[test]
    fn budget_ceiling() {
        let v = bipartite();
        let spec = Mer::sentence(adj_sig(&v), ADJ).unwrap();
        let err = check_equivalence_relation(
            &spec,
            &Theory::empty(v.clone()),
            &Scale::uniform(&v, 3),
            &Budget::new(1000),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ResourceCeiling { .. }));
    }

    #[test]
    fn float_and_rational_agree() {
        let v = unary();
        let labels = ["P(x)", "!P(x)"];
        let sig = CoupledSignature::all(v.clone());
        let q = Mer::approx(
            sig.clone(),
            &labels,
            FiniteMetric::discrete(2),
            Rational::from(1),
        )
        .unwrap();
        let f = crate::FloatMer::approx(sig, &labels, FiniteMetric::discrete(2), 1.0).unwrap();
        let t = Theory::empty(v.clone());
        let scale = Scale::uniform(&v, 2);
        let b = Budget::unlimited();
        assert_eq!(
            check_equivalence_relation(&q, &t, &scale, &b).unwrap(),
            check_equivalence_relation(&f, &t, &scale, &b).unwrap()
        );
    }
}
