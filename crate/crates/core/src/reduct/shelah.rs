//! Expansion by an imaginary sort naming the members of a definable family.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::nset::{nset_value, NSetValue, PartitionedFormula};
use crate::error::{Error, Result};
use crate::logic::structure::{Extent, FiniteStructure};
use crate::logic::vocab::{RelId, SortId, Vocabulary};

/// The expanded vocabulary: base plus sort `S_F<suffix>` and relation
/// `C_F<suffix>(S_F<suffix>, member sorts...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShelahVocab {
    pub vocab: Arc<Vocabulary>,
    pub sort: SortId,
    pub rel: RelId,
}

impl ShelahVocab {
    pub fn new(base: &Vocabulary, member_sorts: &[SortId], suffix: &str) -> Result<Self> {
        let mut v = base.clone();
        let sort_name = format!("S_F{suffix}");
        let sort = v.add_sort(&sort_name)?;
        let mut profile: Vec<&str> = vec![&sort_name];
        let names: Vec<String> = member_sorts
            .iter()
            .map(|&s| base.sort_name(s).to_string())
            .collect();
        profile.extend(names.iter().map(String::as_str));
        let rel = v.add_relation(&format!("C_F{suffix}"), &profile)?;
        Ok(ShelahVocab {
            vocab: Arc::new(v),
            sort,
            rel,
        })
    }

    pub fn for_family(pf: &PartitionedFormula, suffix: &str) -> Result<Self> {
        Self::new(pf.vocab(), &pf.member_sorts(), suffix)
    }
}

#[derive(Debug, Clone)]
pub struct ShelahizedStructure {
    pub expanded: FiniteStructure,
    pub sort: SortId,
    pub rel: RelId,
    /// Member set of each imaginary element, in canonical order.
    pub members: Vec<BTreeSet<Vec<u32>>>,
}

impl ShelahizedStructure {
    pub fn imaginary_count(&self) -> usize {
        self.members.len()
    }
}

/// Shelahization with the default names `S_F` and `C_F`.
pub fn shelahize(m: &FiniteStructure, family: &PartitionedFormula) -> Result<ShelahizedStructure> {
    let sv = ShelahVocab::for_family(family, "")?;
    shelahize_with(m, family, &sv)
}

/// Adds one imaginary element per distinct member set of `family`, ordered
/// by the canonical order on sets, with `C_F` relating each to its members.
pub fn shelahize_with(
    m: &FiniteStructure,
    family: &PartitionedFormula,
    sv: &ShelahVocab,
) -> Result<ShelahizedStructure> {
    if family.depth() != 2 {
        return Err(Error::Validation(format!(
            "Shelahization needs a 2-block family, got {} blocks",
            family.depth()
        )));
    }
    let NSetValue::Family { members, .. } = nset_value(m, family) else {
        unreachable!("two blocks give a family")
    };
    let sets: Vec<BTreeSet<Vec<u32>>> = members
        .into_iter()
        .map(|v| match v {
            NSetValue::Tuples(t) => t,
            NSetValue::Family { .. } => unreachable!("members of a 2-set are tuple sets"),
        })
        .collect();
    let mut sizes = m.sizes().to_vec();
    sizes.push(sets.len());
    let mut extents = m.extents().to_vec();
    let mut dims = vec![sets.len()];
    dims.extend(family.member_sorts().iter().map(|&s| m.size(s)));
    let mut c = Extent::empty(dims);
    let mut tuple = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        for t in set {
            tuple.clear();
            tuple.push(i as u32);
            tuple.extend_from_slice(t);
            let idx = c.index_of(&tuple).expect("member in range");
            c.set(idx, true);
        }
    }
    extents.push(c);
    Ok(ShelahizedStructure {
        expanded: FiniteStructure::from_parts(sv.vocab.clone(), sizes, extents),
        sort: sv.sort,
        rel: sv.rel,
        members: sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval::evaluate;
    use crate::logic::formula::Language;
    use crate::logic::parse::parse_sentence;

    fn digraph() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::build(&["V"], &[("R", &["V", "V"])]).unwrap())
    }

    #[test]
    fn whole_universe() {
        let v = digraph();
        let pf = PartitionedFormula::parse("[x ; y] x = x & y = y", &v).unwrap();
        let m = FiniteStructure::empty(v, vec![3]).unwrap();
        assert_eq!(shelahize(&m, &pf).unwrap().imaginary_count(), 1);
    }

    #[test]
    fn rows() {
        let v = digraph();
        let pf = PartitionedFormula::parse("R(x : y)", &v).unwrap();
        let m = FiniteStructure::from_tuples(
            v.clone(),
            vec![3],
            &[("R", vec![vec![0, 1], vec![0, 2], vec![1, 2]])],
        )
        .unwrap();
        let sh = shelahize(&m, &pf).unwrap();
        assert_eq!(sh.imaginary_count(), 3);
        assert_eq!(sh.members[0], BTreeSet::new());
        // injective onto the family
        let distinct: BTreeSet<_> = sh.members.iter().collect();
        assert_eq!(distinct.len(), 3);
        // conservativity
        let base = Language::single(v);
        let exp = Language::single(sh.expanded.vocab().clone());
        for text in [
            "forall x. exists y. R(x, y)",
            "exists x. forall y. !R(y, x)",
            "exists x. R(x, x)",
        ] {
            let a = evaluate(&parse_sentence(text, &base).unwrap(), &m, &[]).unwrap();
            let b = evaluate(&parse_sentence(text, &exp).unwrap(), &sh.expanded, &[]).unwrap();
            assert_eq!(a, b, "{text}");
        }
    }

    #[test]
    fn empty_parameters() {
        let v = Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"])]).unwrap());
        let pf = PartitionedFormula::parse("G(x : y)", &v).unwrap();
        let m = FiniteStructure::empty(v.clone(), vec![0, 2]).unwrap();
        assert_eq!(shelahize(&m, &pf).unwrap().imaginary_count(), 0);
        let n = FiniteStructure::empty(v, vec![2, 0]).unwrap();
        assert_eq!(shelahize(&n, &pf).unwrap().imaginary_count(), 1);
    }
}
