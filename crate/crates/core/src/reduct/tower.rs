//! Towers of definable families over iterated Shelahizations.

use std::sync::Arc;

use super::nset::{nset_value, NSetValue, PartitionedFormula};
use super::shelah::{shelahize_with, ShelahVocab};
use crate::error::{Error, Result};
use crate::logic::structure::FiniteStructure;
use crate::logic::vocab::Vocabulary;

/// Level `i + 1` is a partitioned formula over the Shelahization of level
/// `i`. Imaginary sorts are named `S_F`, `S_F2`, `S_F3`, ... with membership
/// relations `C_F`, `C_F2`, ...
#[derive(Debug, Clone)]
pub struct FamilyTower {
    levels: Vec<PartitionedFormula>,
    /// `expansions[i]` is the vocabulary after Shelahizing level `i`.
    expansions: Vec<ShelahVocab>,
}

pub fn level_suffix(level: usize) -> String {
    if level == 0 {
        String::new()
    } else {
        (level + 1).to_string()
    }
}

impl FamilyTower {
    pub fn new(levels: Vec<PartitionedFormula>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Validation("a tower needs at least one level".into()));
        }
        let mut expansions: Vec<ShelahVocab> = Vec::new();
        for (i, pf) in levels.iter().enumerate() {
            let expected = match expansions.last() {
                None => levels[0].vocab().clone(),
                Some(sv) => sv.vocab.clone(),
            };
            if **pf.vocab() != *expected {
                return Err(Error::Validation(format!(
                    "level {} is over the wrong vocabulary",
                    i + 1
                )));
            }
            if i + 1 < levels.len() {
                if pf.depth() != 2 {
                    return Err(Error::Validation(format!(
                        "level {} must have exactly two blocks to be Shelahized",
                        i + 1
                    )));
                }
                expansions.push(ShelahVocab::for_family(pf, &level_suffix(i))?);
            }
        }
        Ok(FamilyTower { levels, expansions })
    }

    /// Parses each level over the expansion produced by the previous one.
    pub fn parse(base: &Arc<Vocabulary>, texts: &[&str]) -> Result<Self> {
        let mut levels = Vec::new();
        let mut vocab = base.clone();
        for (i, text) in texts.iter().enumerate() {
            let pf = PartitionedFormula::parse(text, &vocab)?;
            if i + 1 < texts.len() {
                if pf.depth() != 2 {
                    return Err(Error::Validation(format!(
                        "level {} must have exactly two blocks to be Shelahized",
                        i + 1
                    )));
                }
                vocab = ShelahVocab::for_family(&pf, &level_suffix(i))?.vocab;
            }
            levels.push(pf);
        }
        Self::new(levels)
    }

    pub fn base(&self) -> &Arc<Vocabulary> {
        self.levels[0].vocab()
    }

    pub fn levels(&self) -> &[PartitionedFormula] {
        &self.levels
    }

    pub fn expansion(&self, level: usize) -> &ShelahVocab {
        &self.expansions[level]
    }

    /// The per-level values along the canonical expansions of `m`. Two
    /// structures are tower-equivalent iff their keys are equal.
    pub fn key(&self, m: &FiniteStructure) -> Result<Vec<NSetValue>> {
        let mut out = Vec::with_capacity(self.levels.len());
        let mut cur = m.clone();
        for (i, pf) in self.levels.iter().enumerate() {
            out.push(nset_value(&cur, pf));
            if i + 1 < self.levels.len() {
                cur = shelahize_with(&cur, pf, &self.expansions[i])?.expanded;
            }
        }
        Ok(out)
    }
}

/// Level-1 values agree and the expansions, whose imaginary elements are
/// aligned by their member sets, agree on the remaining levels.
pub fn tower_equivalent(
    m: &FiniteStructure,
    n: &FiniteStructure,
    tower: &FamilyTower,
) -> Result<bool> {
    Ok(tower.key(m)? == tower.key(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bip() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"])]).unwrap())
    }

    #[test]
    fn adjacency_rows() {
        let v = bip();
        let t = FamilyTower::parse(&v, &["G(x : y)"]).unwrap();
        let m = FiniteStructure::from_tuples(
            v.clone(),
            vec![2, 2],
            &[("G", vec![vec![0, 0], vec![1, 1]])],
        )
        .unwrap();
        let n = FiniteStructure::from_tuples(
            v.clone(),
            vec![2, 2],
            &[("G", vec![vec![0, 1], vec![1, 0]])],
        )
        .unwrap();
        let k = FiniteStructure::from_tuples(v, vec![2, 2], &[("G", vec![vec![0, 1], vec![1, 1]])])
            .unwrap();
        assert!(tower_equivalent(&m, &m, &t).unwrap());
        assert!(tower_equivalent(&m, &n, &t).unwrap());
        assert!(!tower_equivalent(&m, &k, &t).unwrap());
    }

    #[test]
    fn two_levels() {
        let v = Arc::new(
            Vocabulary::build(
                &["P0", "P1", "P2"],
                &[("Gam0", &["P0", "P1"]), ("Gam1", &["P1", "P2"])],
            )
            .unwrap(),
        );
        let t = FamilyTower::parse(
            &v,
            &[
                "[b ; a] Gam0(a, b)",
                "[c ; o] exists b:P1. (Gam1(b, c) & forall a:P0. (C_F(o, a) <-> Gam0(a, b)))",
            ],
        )
        .unwrap();
        assert_eq!(t.expansion(0).vocab.sort_name(t.expansion(0).sort), "S_F");
        let m =
            FiniteStructure::from_tuples(v.clone(), vec![2, 1, 1], &[("Gam0", vec![vec![0, 0]])])
                .unwrap();
        assert_eq!(t.key(&m).unwrap().len(), 2);
        assert!(FamilyTower::parse(&v, &["[a ; b ; c] Gam0(a, b) & Gam1(b, c)", "true"]).is_err());
    }
}
