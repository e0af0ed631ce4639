//! Finite type spaces, their quotient by the groupoid of a MER, and the
//! invariant profiles it induces.

use std::collections::{BTreeMap, HashMap};

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::logic::enumerate::all_tuples;
use crate::logic::iso::bijection_families;
use crate::logic::structure::{BijectionFamily, FiniteStructure};
use crate::logic::theory::Theory;
use crate::logic::vocab::SortId;
use crate::mer::engine::{action_table, groupoid_morphisms, ErVerdict, MerAnalysis, Scale};
use crate::mer::spec::MerSpec;
use crate::pair::CoupledSignature;
use crate::scalar::Scalar;

/// A tuple of coupled-sort elements together with its sorts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoupledTuple {
    pub sorts: Vec<SortId>,
    pub values: Vec<u32>,
}

impl CoupledTuple {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: &BijectionFamily) -> CoupledTuple {
        CoupledTuple {
            sorts: self.sorts.clone(),
            values: self
                .sorts
                .iter()
                .zip(&self.values)
                .map(|(&s, &v)| f.map(s, v))
                .collect(),
        }
    }
}

/// All coupled tuples of length at most `max_len`: shorter first, then by
/// sort sequence, then lexicographically.
pub fn coupled_tuples(
    sig: &CoupledSignature,
    coupled_sizes: &[usize],
    max_len: usize,
) -> Vec<CoupledTuple> {
    let coupled = sig.coupled_sorts();
    let mut out = Vec::new();
    for len in 0..=max_len {
        for pick in all_tuples(&vec![coupled.len(); len]) {
            let sorts: Vec<SortId> = pick.iter().map(|&i| coupled[i as usize]).collect();
            let dims: Vec<usize> = sorts.iter().map(|&s| coupled_sizes[s]).collect();
            for values in all_tuples(&dims) {
                out.push(CoupledTuple {
                    sorts: sorts.clone(),
                    values,
                });
            }
        }
    }
    out
}

/// Canonical representative of an isomorphism class of pointed structures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypePoint {
    pub len: usize,
    pub model: FiniteStructure,
    pub tuple: CoupledTuple,
}

/// One union performed while closing the type space under the groupoid.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub source: FiniteStructure,
    pub target: FiniteStructure,
    pub morphism: BijectionFamily,
}

struct Canon {
    model: FiniteStructure,
    to_canon: BijectionFamily,
}

fn canonical_form(m: &FiniteStructure, perms: &[BijectionFamily]) -> Canon {
    let mut best = Canon {
        model: m.clone(),
        to_canon: perms[0].clone(),
    };
    for p in &perms[1..] {
        let image = m.permuted(p);
        if image < best.model {
            best = Canon {
                model: image,
                to_canon: p.clone(),
            };
        }
    }
    best
}

/// Type points of every model at a scale, with the point of each model's
/// tuples.
struct PointTable {
    points: Vec<TypePoint>,
    ids: HashMap<FiniteStructure, Vec<usize>>,
    tuples: BTreeMap<Vec<usize>, Vec<CoupledTuple>>,
}

fn point_table(
    sig: &CoupledSignature,
    models: &[&FiniteStructure],
    max_len: usize,
    budget: &Budget,
) -> Result<PointTable> {
    let all_sorts: Vec<SortId> = (0..sig.vocab().num_sorts()).collect();
    let mut perms_by_size: BTreeMap<Vec<usize>, Vec<BijectionFamily>> = BTreeMap::new();
    let mut tuples: BTreeMap<Vec<usize>, Vec<CoupledTuple>> = BTreeMap::new();
    for m in models {
        if !perms_by_size.contains_key(m.sizes()) {
            perms_by_size.insert(
                m.sizes().to_vec(),
                bijection_families(m.sizes(), &all_sorts, budget)?,
            );
        }
        let c = sig.coupled_sizes(m.sizes());
        if !tuples.contains_key(&c) {
            let list = coupled_tuples(sig, &c, max_len);
            tuples.insert(c, list);
        }
    }
    let work: u64 = models
        .iter()
        .map(|m| perms_by_size[m.sizes()].len() as u64)
        .sum();
    budget.charge(work)?;
    let canons: Vec<Canon> = models
        .par_iter()
        .map(|m| canonical_form(m, &perms_by_size[m.sizes()]))
        .collect();

    // Orbit representatives of tuples under the automorphisms of each
    // canonical model.
    let mut reps: HashMap<&FiniteStructure, Vec<CoupledTuple>> = HashMap::new();
    for c in &canons {
        if reps.contains_key(&c.model) {
            continue;
        }
        let auts: Vec<&BijectionFamily> = perms_by_size[c.model.sizes()]
            .iter()
            .filter(|p| c.model.permuted(p) == c.model)
            .collect();
        let list = &tuples[&sig.coupled_sizes(c.model.sizes())];
        budget.charge((auts.len() * list.len()) as u64)?;
        let r = list
            .iter()
            .map(|t| {
                auts.iter()
                    .map(|a| t.map(a))
                    .min()
                    .unwrap_or_else(|| t.clone())
            })
            .collect();
        reps.insert(&c.model, r);
    }
    let mut points: Vec<TypePoint> = reps
        .iter()
        .flat_map(|(m, r)| {
            r.iter().map(|t| TypePoint {
                len: t.len(),
                model: (*m).clone(),
                tuple: t.clone(),
            })
        })
        .collect();
    points.sort();
    points.dedup();
    let index: HashMap<&TypePoint, usize> =
        points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let positions: BTreeMap<Vec<usize>, HashMap<&CoupledTuple, usize>> = tuples
        .iter()
        .map(|(k, list)| {
            (
                k.clone(),
                list.iter().enumerate().map(|(i, t)| (t, i)).collect(),
            )
        })
        .collect();

    let mut ids = HashMap::with_capacity(models.len());
    for (m, c) in models.iter().zip(&canons) {
        let key = sig.coupled_sizes(m.sizes());
        let list = &tuples[&key];
        let rep = &reps[&c.model];
        let row = list
            .iter()
            .map(|t| {
                let moved = t.map(&c.to_canon);
                let point = TypePoint {
                    len: t.len(),
                    model: c.model.clone(),
                    tuple: rep[positions[&key][&moved]].clone(),
                };
                index[&point]
            })
            .collect();
        ids.insert((*m).clone(), row);
    }
    Ok(PointTable {
        points,
        ids,
        tuples,
    })
}

/// Canonical representatives of all pointed models at a scale, with tuples
/// over coupled sorts of length at most `max_len`.
pub fn type_space(
    sig: &CoupledSignature,
    theory: &Theory,
    scale: &Scale,
    max_len: usize,
    budget: &Budget,
) -> Result<Vec<TypePoint>> {
    let groups = crate::mer::engine::model_groups(sig, theory, scale, budget)?;
    let models: Vec<&FiniteStructure> = groups.iter().flat_map(|g| g.models.iter()).collect();
    Ok(point_table(sig, &models, max_len, budget)?.points)
}

/// The type space modulo the closure of the groupoid action.
#[derive(Debug, Clone)]
pub struct TypePartition {
    pub sig: CoupledSignature,
    pub scale: Scale,
    pub max_len: usize,
    pub points: Vec<TypePoint>,
    /// Class label of each point; labels are ordered by least member.
    pub label: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub merges: Vec<Merge>,
    ids: HashMap<FiniteStructure, Vec<usize>>,
    tuples: BTreeMap<Vec<usize>, Vec<CoupledTuple>>,
}

impl TypePartition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Class counts per tuple length.
    pub fn class_counts_by_len(&self) -> Vec<usize> {
        let mut out = vec![0; self.max_len + 1];
        for c in &self.classes {
            out[self.points[c[0]].len] += 1;
        }
        out
    }

    /// The tuples a profile on these coupled sizes ranges over.
    pub fn tuples(&self, coupled_sizes: &[usize]) -> &[CoupledTuple] {
        self.tuples
            .get(coupled_sizes)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn point_of(&self, m: &FiniteStructure, tuple: &CoupledTuple) -> Option<usize> {
        let list = self.tuples.get(&self.sig.coupled_sizes(m.sizes()))?;
        let pos = list.iter().position(|t| t == tuple)?;
        Some(self.ids.get(m)?[pos])
    }
}

/// Closes the type space under `tp(M, a) ~ tp(N, f(a))` for `f` in `G(M, N)`.
pub fn groupoid_type_quotient<S: Scalar>(
    spec: &MerSpec<S>,
    theory: &Theory,
    scale: &Scale,
    max_len: usize,
    budget: &Budget,
) -> Result<TypePartition> {
    let analysis = MerAnalysis::build(spec, theory, scale, budget)?;
    quotient_of(&analysis, max_len, budget)
}

fn refuse(analysis: &MerAnalysis) -> Result<()> {
    match analysis.er_verdict() {
        ErVerdict::HoldsAtScale(_) => Ok(()),
        ErVerdict::Counterexample {
            kind, witnesses, ..
        } => {
            let names: Vec<String> = witnesses.iter().map(|m| format!("[{m}]")).collect();
            Err(Error::NotEquivalence(format!(
                "{} fails at {}",
                kind.name(),
                names.join(" ")
            )))
        }
    }
}

pub fn quotient_of(
    analysis: &MerAnalysis,
    max_len: usize,
    budget: &Budget,
) -> Result<TypePartition> {
    refuse(analysis)?;
    let sig = &analysis.sig;
    let models: Vec<&FiniteStructure> = analysis
        .groups
        .iter()
        .flat_map(|g| g.group.models.iter())
        .collect();
    let table = point_table(sig, &models, max_len, budget)?;
    let mut uf = UnionFind::<usize>::new(table.points.len());
    let mut merges = Vec::new();
    for g in &analysis.groups {
        let perms = bijection_families(&g.group.coupled, &sig.coupled_sorts(), budget)?;
        let act = action_table(&g.group, &perms, budget)?;
        let list = &table.tuples[&g.group.coupled];
        let pos: HashMap<&CoupledTuple, usize> =
            list.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let tmap: Vec<Vec<usize>> = perms
            .iter()
            .map(|f| list.iter().map(|t| pos[&t.map(f)]).collect())
            .collect();
        for (mi, m) in g.group.models.iter().enumerate() {
            let from = &table.ids[m];
            for (p, f) in perms.iter().enumerate() {
                for n0 in g.matrix.ones(mi) {
                    let ni = act[p][n0] as usize;
                    let n = &g.group.models[ni];
                    let to = &table.ids[n];
                    budget.charge(list.len() as u64)?;
                    for (t, &a) in from.iter().enumerate() {
                        let b = to[tmap[p][t]];
                        if uf.union(a, b) {
                            merges.push(Merge {
                                a,
                                b,
                                source: m.clone(),
                                target: n.clone(),
                                morphism: f.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    let roots = uf.into_labeling();
    let mut label = vec![usize::MAX; roots.len()];
    let mut root_label: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, r) in roots.iter().enumerate() {
        let l = *root_label.entry(*r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        label[i] = l;
        classes[l].push(i);
    }
    Ok(TypePartition {
        sig: sig.clone(),
        scale: analysis.scale.clone(),
        max_len,
        points: table.points,
        label,
        classes,
        merges,
        ids: table.ids,
        tuples: table.tuples,
    })
}

/// The class label of every tuple of a structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvariantProfile {
    pub coupled: Vec<usize>,
    /// Aligned with `TypePartition::tuples(coupled)`; the first entry is the
    /// class of the model itself.
    pub labels: Vec<usize>,
}

impl InvariantProfile {
    pub fn model_class(&self) -> usize {
        self.labels[0]
    }
}

pub fn invariant_profile(
    m: &FiniteStructure,
    partition: &TypePartition,
) -> Result<InvariantProfile> {
    let ids = partition.ids.get(m).ok_or_else(|| {
        Error::SizeBound(format!(
            "structure [{m}] is not a model at the partition's scale"
        ))
    })?;
    Ok(InvariantProfile {
        coupled: partition.sig.coupled_sizes(m.sizes()),
        labels: ids.iter().map(|&p| partition.label[p]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum YdleptVerdict {
    DeterminedAtScale(Scale),
    Counterexample {
        left: FiniteStructure,
        right: FiniteStructure,
    },
}

pub fn ydlept_at_scale<S: Scalar>(
    spec: &MerSpec<S>,
    theory: &Theory,
    scale: &Scale,
    max_len: usize,
    budget: &Budget,
) -> Result<YdleptVerdict> {
    let analysis = MerAnalysis::build(spec, theory, scale, budget)?;
    let partition = quotient_of(&analysis, max_len, budget)?;
    ydlept_of(&analysis, &partition)
}

/// Least pair on shared coupled universes with equal profiles that the MER
/// does not relate.
pub fn ydlept_of(analysis: &MerAnalysis, partition: &TypePartition) -> Result<YdleptVerdict> {
    for g in &analysis.groups {
        let profiles = g
            .group
            .models
            .iter()
            .map(|m| invariant_profile(m, partition))
            .collect::<Result<Vec<_>>>()?;
        let mut buckets: HashMap<&InvariantProfile, Vec<usize>> = HashMap::new();
        for (i, p) in profiles.iter().enumerate() {
            buckets.entry(p).or_default().push(i);
        }
        let mut best: Option<(usize, usize)> = None;
        for members in buckets.values() {
            for &i in members {
                if let Some(&j) = members.iter().find(|&&j| !g.matrix.get(i, j)) {
                    best = Some(best.map_or((i, j), |b| b.min((i, j))));
                    break;
                }
            }
        }
        if let Some((i, j)) = best {
            return Ok(YdleptVerdict::Counterexample {
                left: g.group.models[i].clone(),
                right: g.group.models[j].clone(),
            });
        }
    }
    Ok(YdleptVerdict::DeterminedAtScale(analysis.scale.clone()))
}

/// Orbits of `G(M, M)` on tuples of one length against the partition of
/// those tuples by profile class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityReport {
    pub tuples: Vec<CoupledTuple>,
    pub orbits: Vec<Vec<usize>>,
    pub profile_classes: Vec<Vec<usize>>,
    pub refines: bool,
    pub equal: bool,
}

fn blocks(keys: &[usize]) -> Vec<Vec<usize>> {
    let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &k) in keys.iter().enumerate() {
        by.entry(k).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = by.into_values().collect();
    out.sort();
    out
}

pub fn density_report<S: Scalar>(
    spec: &MerSpec<S>,
    partition: &TypePartition,
    m: &FiniteStructure,
    tuple_len: usize,
    budget: &Budget,
) -> Result<DensityReport> {
    let profile = invariant_profile(m, partition)?;
    let all = partition.tuples(&profile.coupled);
    let picked: Vec<usize> = (0..all.len())
        .filter(|&i| all[i].len() == tuple_len)
        .collect();
    let tuples: Vec<CoupledTuple> = picked.iter().map(|&i| all[i].clone()).collect();
    let pos: HashMap<&CoupledTuple, usize> =
        tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut uf = UnionFind::<usize>::new(tuples.len());
    for f in groupoid_morphisms(spec, m, m, budget)? {
        for (i, t) in tuples.iter().enumerate() {
            uf.union(i, pos[&t.map(&f)]);
        }
    }
    let orbits = blocks(&uf.into_labeling());
    let labels: Vec<usize> = picked.iter().map(|&i| profile.labels[i]).collect();
    let profile_classes = blocks(&labels);
    let refines = orbits
        .iter()
        .all(|o| o.iter().all(|&i| labels[i] == labels[o[0]]));
    let equal = orbits == profile_classes;
    Ok(DensityReport {
        tuples,
        orbits,
        profile_classes,
        refines,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::logic::vocab::Vocabulary;
    use crate::Mer;

    fn count(points: &[TypePoint], sizes: &[usize], len: usize) -> usize {
        points
            .iter()
            .filter(|p| p.len == len && p.model.sizes() == sizes)
            .count()
    }

    fn space(v: &Arc<Vocabulary>, n: usize, len: usize) -> Vec<TypePoint> {
        let sig = CoupledSignature::all(v.clone());
        type_space(
            &sig,
            &Theory::empty(v.clone()),
            &Scale::uniform(v, n),
            len,
            &Budget::unlimited(),
        )
        .unwrap()
    }

    #[test]
    fn type_space_counts() {
        let eq = Arc::new(Vocabulary::build(&["V"], &[]).unwrap());
        assert_eq!(count(&space(&eq, 2, 1), &[2], 1), 1);
        assert_eq!(count(&space(&eq, 2, 2), &[2], 2), 2);
        let p = Arc::new(Vocabulary::build(&["V"], &[("P", &["V"])]).unwrap());
        assert_eq!(count(&space(&p, 1, 0), &[1], 0), 2);
        let r = Arc::new(Vocabulary::build(&["V"], &[("R", &["V", "V"])]).unwrap());
        assert_eq!(count(&space(&r, 2, 0), &[2], 0), 10);
    }

    #[test]
    fn identity_and_trivial_quotients() {
        let v = Arc::new(Vocabulary::build(&["V"], &[("P", &["V"])]).unwrap());
        let sig = CoupledSignature::all(v.clone());
        let t = Theory::empty(v.clone());
        let scale = Scale::uniform(&v, 3);
        let b = Budget::unlimited();
        let id = Mer::sentence(sig.clone(), "forall x. (P(x) <-> P'(x))").unwrap();
        let q = groupoid_type_quotient(&id, &t, &scale, 1, &b).unwrap();
        assert_eq!(q.class_count(), q.points.len());
        assert!(q.merges.is_empty());

        let top = Mer::sentence(sig, "true").unwrap();
        let q = groupoid_type_quotient(&top, &t, &scale, 1, &b).unwrap();
        assert_eq!(q.class_counts_by_len(), vec![4, 3]);
        let a = FiniteStructure::from_tuples(v.clone(), vec![2], &[("P", vec![vec![0]])]).unwrap();
        let c = FiniteStructure::empty(v.clone(), vec![2]).unwrap();
        assert_eq!(
            invariant_profile(&a, &q).unwrap(),
            invariant_profile(&c, &q).unwrap()
        );
        assert_eq!(
            ydlept_at_scale(&top, &t, &scale, 1, &b).unwrap(),
            YdleptVerdict::DeterminedAtScale(scale)
        );
    }

    #[test]
    fn identity_density_matches_automorphisms() {
        let v = Arc::new(Vocabulary::build(&["V"], &[("P", &["V"])]).unwrap());
        let sig = CoupledSignature::all(v.clone());
        let id = Mer::sentence(sig, "forall x. (P(x) <-> P'(x))").unwrap();
        let b = Budget::unlimited();
        let q = groupoid_type_quotient(
            &id,
            &Theory::empty(v.clone()),
            &Scale::uniform(&v, 3),
            2,
            &b,
        )
        .unwrap();
        let m = FiniteStructure::from_tuples(v.clone(), vec![3], &[("P", vec![vec![0]])]).unwrap();
        let r = density_report(&id, &q, &m, 1, &b).unwrap();
        assert_eq!(r.orbits, vec![vec![0], vec![1, 2]]);
        assert!(r.refines && r.equal);
    }

    #[test]
    fn refuses_non_equivalence() {
        let v = Arc::new(Vocabulary::build(&["V"], &[("P", &["V"])]).unwrap());
        let spec = Mer::sentence(
            CoupledSignature::all(v.clone()),
            "forall x. (P(x) -> P'(x))",
        )
        .unwrap();
        let err = groupoid_type_quotient(
            &spec,
            &Theory::empty(v.clone()),
            &Scale::uniform(&v, 1),
            1,
            &Budget::unlimited(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotEquivalence(_)));
    }
}
