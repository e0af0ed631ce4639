//! Isomorphism search and permutation utilities.

use super::structure::{BijectionFamily, FiniteStructure};
use super::vocab::SortId;
use crate::budget::Budget;
use crate::error::{Error, Result};

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<u32>> {
    let mut cur: Vec<u32> = (0..n as u32).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Every family permuting exactly the sorts listed in `sorts` (others left
/// as `None`), ordered lexicographically with earlier sorts most significant.
pub fn bijection_families(
    sizes: &[usize],
    sorts: &[SortId],
    budget: &Budget,
) -> Result<Vec<BijectionFamily>> {
    let total: u128 = sorts.iter().map(|&s| factorial(sizes[s])).product();
    budget.reserve(total)?;
    let mut out = vec![BijectionFamily(vec![None; sizes.len()])];
    for &s in sorts {
        let perms = permutations(sizes[s]);
        out = out
            .into_iter()
            .flat_map(|f| {
                perms.iter().map(move |p| {
                    let mut g = f.clone();
                    g.0[s] = Some(p.clone());
                    g
                })
            })
            .collect();
    }
    Ok(out)
}

struct Search<'a> {
    m: &'a FiniteStructure,
    n: &'a FiniteStructure,
    /// Element order: (sort, index).
    order: Vec<(SortId, u32)>,
    /// For each step, the (relation, tuple index) pairs whose last element is
    /// assigned at that step.
    checks: Vec<Vec<(usize, usize)>>,
    budget: &'a Budget,
}

impl<'a> Search<'a> {
    fn new(m: &'a FiniteStructure, n: &'a FiniteStructure, budget: &'a Budget) -> Self {
        let sizes = m.sizes();
        let mut order = Vec::new();
        let mut pos = Vec::new();
        for (s, &k) in sizes.iter().enumerate() {
            pos.push((0..k).map(|i| order.len() + i).collect::<Vec<_>>());
            order.extend((0..k as u32).map(|i| (s, i)));
        }
        let mut checks = vec![Vec::new(); order.len()];
        for (r, decl) in m.vocab().relations().iter().enumerate() {
            let e = m.extent(r);
            for idx in 0..e.space() {
                let t = e.decode(idx);
                let last = t
                    .iter()
                    .zip(&decl.profile)
                    .map(|(&v, &s)| pos[s][v as usize])
                    .max()
                    .unwrap();
                checks[last].push((r, idx));
            }
        }
        Search {
            m,
            n,
            order,
            checks,
            budget,
        }
    }

    fn run(&self) -> Result<Vec<BijectionFamily>> {
        let sizes = self.m.sizes();
        let mut image: Vec<Vec<u32>> = sizes.iter().map(|&k| vec![0; k]).collect();
        let mut used: Vec<Vec<bool>> = sizes.iter().map(|&k| vec![false; k]).collect();
        let mut out = Vec::new();
        self.step(0, &mut image, &mut used, &mut out)?;
        Ok(out)
    }

    fn consistent(&self, step: usize, image: &[Vec<u32>]) -> bool {
        let vocab = self.m.vocab();
        let mut buf = Vec::new();
        for &(r, idx) in &self.checks[step] {
            let e = self.m.extent(r);
            buf.clear();
            buf.extend(
                e.decode(idx)
                    .iter()
                    .zip(&vocab.relation(r).profile)
                    .map(|(&v, &s)| image[s][v as usize]),
            );
            if e.get(idx) != self.n.holds(r, &buf) {
                return false;
            }
        }
        true
    }

    fn step(
        &self,
        k: usize,
        image: &mut Vec<Vec<u32>>,
        used: &mut Vec<Vec<bool>>,
        out: &mut Vec<BijectionFamily>,
    ) -> Result<()> {
        if k == self.order.len() {
            out.push(BijectionFamily(image.iter().cloned().map(Some).collect()));
            return Ok(());
        }
        let (s, v) = self.order[k];
        for w in 0..used[s].len() {
            if used[s][w] {
                continue;
            }
            self.budget.charge(1)?;
            image[s][v as usize] = w as u32;
            if self.consistent(k, image) {
                used[s][w] = true;
                self.step(k + 1, image, used, out)?;
                used[s][w] = false;
            }
        }
        Ok(())
    }
}

/// Every isomorphism `M → N`, as families mapping each sort, in
/// lexicographic order of images.
pub fn find_isomorphisms(
    m: &FiniteStructure,
    n: &FiniteStructure,
    budget: &Budget,
) -> Result<Vec<BijectionFamily>> {
    if m.vocab() != n.vocab() {
        return Err(Error::InvalidStructure(
            "structures over different vocabularies".into(),
        ));
    }
    if m.sizes() != n.sizes() {
        return Ok(Vec::new());
    }
    Search::new(m, n, budget).run()
}

pub fn automorphisms(m: &FiniteStructure, budget: &Budget) -> Result<Vec<BijectionFamily>> {
    find_isomorphisms(m, m, budget)
}

pub fn are_isomorphic(m: &FiniteStructure, n: &FiniteStructure, budget: &Budget) -> Result<bool> {
    Ok(!find_isomorphisms(m, n, budget)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::vocab::Vocabulary;
    use std::sync::Arc;

    fn one(rels: &[(&str, &[&str])]) -> Arc<Vocabulary> {
        Arc::new(Vocabulary::build(&["V"], rels).unwrap())
    }

    #[test]
    fn perms() {
        assert_eq!(permutations(0), vec![Vec::<u32>::new()]);
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], vec![0, 2, 1]);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn pure_equality() {
        let v = one(&[]);
        let m = FiniteStructure::empty(v, vec![3]).unwrap();
        assert_eq!(automorphisms(&m, &Budget::default()).unwrap().len(), 6);
    }

    #[test]
    fn forced() {
        let v = one(&[("P", &["V"])]);
        let m = FiniteStructure::from_tuples(v.clone(), vec![2], &[("P", vec![vec![0]])]).unwrap();
        let n = FiniteStructure::from_tuples(v, vec![2], &[("P", vec![vec![1]])]).unwrap();
        let isos = find_isomorphisms(&m, &n, &Budget::default()).unwrap();
        assert_eq!(isos, vec![BijectionFamily(vec![Some(vec![1, 0])])]);
        assert_eq!(m.permuted(&isos[0]), n);
    }

    #[test]
    fn size_mismatch() {
        let v = one(&[]);
        let m = FiniteStructure::empty(v.clone(), vec![2]).unwrap();
        let n = FiniteStructure::empty(v, vec![3]).unwrap();
        assert!(find_isomorphisms(&m, &n, &Budget::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn cycle_matches_brute_force() {
        let v = one(&[("R", &["V", "V"])]);
        let m = FiniteStructure::from_tuples(
            v,
            vec![3],
            &[("R", vec![vec![0, 1], vec![1, 2], vec![2, 0]])],
        )
        .unwrap();
        let fast = automorphisms(&m, &Budget::default()).unwrap();
        let brute: Vec<BijectionFamily> = permutations(3)
            .into_iter()
            .map(|p| BijectionFamily(vec![Some(p)]))
            .filter(|f| m.permuted(f) == m)
            .collect();
        assert_eq!(fast, brute);
        assert_eq!(fast.len(), 3);
    }

    #[test]
    fn families() {
        let f = bijection_families(&[2, 3, 2], &[0, 2], &Budget::default()).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|g| g.0[1].is_none()));
    }
}
