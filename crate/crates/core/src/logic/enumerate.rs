//! Canonical enumeration of finite structures.
//!
//! On fixed universes a structure is identified with the binary number whose
//! bits are its tuple memberships: relations in declaration order, tuples in
//! lexicographic order, the first tuple of the first relation being bit 0.
//! Structures are produced in increasing numeric order.

use std::sync::Arc;

use rayon::prelude::*;

use super::structure::{Extent, FiniteStructure};
use super::theory::Theory;
use super::vocab::Vocabulary;
use crate::budget::Budget;
use crate::error::{Error, Result};

/// All structures over one vocabulary on fixed universe sizes.
#[derive(Debug, Clone)]
pub struct StructureSpace {
    vocab: Arc<Vocabulary>,
    sizes: Vec<usize>,
    dims: Vec<Vec<usize>>,
    bits: usize,
}

impl StructureSpace {
    pub fn new(vocab: Arc<Vocabulary>, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != vocab.num_sorts() {
            return Err(Error::InvalidStructure(format!(
                "expected {} universe sizes, got {}",
                vocab.num_sorts(),
                sizes.len()
            )));
        }
        let dims: Vec<Vec<usize>> = vocab
            .relations()
            .iter()
            .map(|r| r.profile.iter().map(|&s| sizes[s]).collect())
            .collect();
        let bits = dims.iter().map(|d| d.iter().product::<usize>()).sum();
        Ok(StructureSpace {
            vocab,
            sizes,
            dims,
            bits,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Total number of tuple bits.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Number of structures, or `None` if it does not fit in 64 bits.
    pub fn count(&self) -> Option<u64> {
        (self.bits < 64).then(|| 1u64 << self.bits)
    }

    pub fn get(&self, index: u64) -> FiniteStructure {
        let mut extents = Vec::with_capacity(self.dims.len());
        let mut offset = 0;
        for d in &self.dims {
            let mut e = Extent::empty(d.clone());
            for i in 0..e.space() {
                if (index >> (offset + i)) & 1 == 1 {
                    e.set(i, true);
                }
            }
            offset += e.space();
            extents.push(e);
        }
        FiniteStructure::from_parts(self.vocab.clone(), self.sizes.clone(), extents)
    }

    pub fn index_of(&self, m: &FiniteStructure) -> Option<u64> {
        if m.sizes() != self.sizes.as_slice() || self.bits >= 64 {
            return None;
        }
        let mut index = 0u64;
        let mut offset = 0;
        for e in m.extents() {
            for i in e.ones() {
                index |= 1 << (offset + i);
            }
            offset += e.space();
        }
        Some(index)
    }

    fn checked_count(&self, budget: &Budget) -> Result<u64> {
        let count = self.count().ok_or(Error::ResourceCeiling {
            limit: budget.limit(),
        })?;
        budget.reserve(u128::from(count))?;
        budget.charge(count)?;
        Ok(count)
    }

    /// Every structure in canonical order.
    pub fn all(&self, budget: &Budget) -> Result<Vec<FiniteStructure>> {
        let count = self.checked_count(budget)?;
        Ok((0..count).into_par_iter().map(|i| self.get(i)).collect())
    }

    /// Structures satisfying `keep`, in canonical order.
    pub fn filtered<F>(&self, budget: &Budget, keep: F) -> Result<Vec<FiniteStructure>>
    where
        F: Fn(&FiniteStructure) -> bool + Sync,
    {
        let count = self.checked_count(budget)?;
        Ok((0..count)
            .into_par_iter()
            .filter_map(|i| {
                let m = self.get(i);
                keep(&m).then_some(m)
            })
            .collect())
    }
}

/// Every structure on the given universe sizes, in canonical order.
pub fn enumerate_structures(
    vocab: &Arc<Vocabulary>,
    sizes: &[usize],
    budget: &Budget,
) -> Result<Vec<FiniteStructure>> {
    StructureSpace::new(vocab.clone(), sizes.to_vec())?.all(budget)
}

/// The models of `theory` on the given universe sizes, in canonical order.
pub fn models_of(
    theory: &Theory,
    sizes: &[usize],
    budget: &Budget,
) -> Result<Vec<FiniteStructure>> {
    StructureSpace::new(theory.vocab().clone(), sizes.to_vec())?
        .filtered(budget, |m| theory.satisfied_by(m))
}

/// All size vectors bounded componentwise by `maxes`, lexicographic.
pub fn size_vectors(maxes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &m in maxes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=m).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

/// Every tuple in `dims[0] × dims[1] × ...`, lexicographic.
pub fn all_tuples(dims: &[usize]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..d as u32).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(rels: &[(&str, &[&str])]) -> Arc<Vocabulary> {
        Arc::new(Vocabulary::build(&["V"], rels).unwrap())
    }

    #[test]
    fn counts() {
        let b = Budget::default();
        assert_eq!(
            enumerate_structures(&vocab(&[("P", &["V"])]), &[2], &b)
                .unwrap()
                .len(),
            4
        );
        let r = vocab(&[("R", &["V", "V"])]);
        assert_eq!(enumerate_structures(&r, &[2], &b).unwrap().len(), 16);
        let t = Theory::parse(r, &[("irrefl", "forall x. !R(x,x)")]).unwrap();
        assert_eq!(models_of(&t, &[3], &b).unwrap().len(), 64);
        assert_eq!(models_of(&t, &[2], &b).unwrap().len(), 4);
    }

    #[test]
    fn models_small() {
        let b = Budget::default();
        let p = vocab(&[("P", &["V"])]);
        assert_eq!(
            models_of(&Theory::empty(p.clone()), &[1], &b)
                .unwrap()
                .len(),
            2
        );
        let t = Theory::parse(p, &[("all", "forall x. P(x)")]).unwrap();
        assert_eq!(models_of(&t, &[2], &b).unwrap().len(), 1);
    }

    #[test]
    fn order_and_index() {
        let b = Budget::default();
        let r = vocab(&[("P", &["V"]), ("R", &["V", "V"])]);
        let space = StructureSpace::new(r.clone(), vec![2]).unwrap();
        let all = space.all(&b).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for (i, m) in all.iter().enumerate() {
            assert_eq!(space.index_of(m), Some(i as u64));
        }
        // bit 0 is P(0)
        assert!(all[1].holds(0, &[0]));
        assert!(all[4].holds(1, &[0, 0]));
    }

    #[test]
    fn ceiling() {
        let r = vocab(&[("R", &["V", "V"])]);
        let b = Budget::new(100);
        assert!(matches!(
            enumerate_structures(&r, &[3], &b),
            Err(Error::ResourceCeiling { .. })
        ));
        assert!(matches!(
            enumerate_structures(&r, &[9], &Budget::unlimited()),
            Err(Error::ResourceCeiling { .. })
        ));
    }

    #[test]
    fn sizes() {
        assert_eq!(size_vectors(&[1, 2]).len(), 6);
        assert_eq!(size_vectors(&[1, 2])[1], vec![0, 1]);
        assert_eq!(size_vectors(&[]), vec![Vec::<usize>::new()]);
    }
}
