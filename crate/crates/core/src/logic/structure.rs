use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::vocab::{RelId, SortId, Vocabulary};
use crate::error::{Error, Result};

/// Dense bitset over the tuple space of one relation. Tuples are indexed in
/// lexicographic order (first component most significant).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Extent {
    dims: Vec<usize>,
    len: usize,
    bits: Vec<u64>,
}

impl Extent {
    pub fn empty(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        Extent {
            dims,
            len,
            bits: vec![0; len.div_ceil(64)],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of tuples in the ambient tuple space.
    pub fn space(&self) -> usize {
        self.len
    }

    pub fn index_of(&self, tuple: &[u32]) -> Option<usize> {
        if tuple.len() != self.dims.len() {
            return None;
        }
        let mut idx = 0usize;
        for (&v, &d) in tuple.iter().zip(&self.dims) {
            if v as usize >= d {
                return None;
            }
            idx = idx * d + v as usize;
        }
        Some(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = (idx % d) as u32;
            idx /= d;
        }
        out
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        if value {
            self.bits[idx / 64] |= 1 << (idx % 64);
        } else {
            self.bits[idx / 64] &= !(1 << (idx % 64));
        }
    }

    pub fn contains(&self, tuple: &[u32]) -> bool {
        self.index_of(tuple).is_some_and(|i| self.get(i))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        self.ones().map(move |i| self.decode(i))
    }

    fn cmp_numeric(&self, other: &Self) -> Ordering {
        self.bits.iter().rev().cmp(other.bits.iter().rev())
    }
}

/// A universe element tagged with its sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    pub sort: SortId,
    pub index: u32,
}

/// One optional permutation per sort; `None` leaves that sort untouched.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BijectionFamily(pub Vec<Option<Vec<u32>>>);

impl BijectionFamily {
    pub fn identity(sizes: &[usize]) -> Self {
        BijectionFamily(
            sizes
                .iter()
                .map(|&n| Some((0..n as u32).collect()))
                .collect(),
        )
    }

    pub fn map(&self, sort: SortId, v: u32) -> u32 {
        match &self.0[sort] {
            Some(p) => p[v as usize],
            None => v,
        }
    }

    pub fn map_elem(&self, e: Elem) -> Elem {
        Elem {
            sort: e.sort,
            index: self.map(e.sort, e.index),
        }
    }

    pub fn inverse(&self) -> Self {
        BijectionFamily(
            self.0
                .iter()
                .map(|p| {
                    p.as_ref().map(|p| {
                        let mut inv = vec![0u32; p.len()];
                        for (i, &j) in p.iter().enumerate() {
                            inv[j as usize] = i as u32;
                        }
                        inv
                    })
                })
                .collect(),
        )
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &Self) -> Self {
        BijectionFamily(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(a.iter().map(|&x| b[x as usize]).collect()),
                    (Some(a), None) => Some(a.clone()),
                    (None, Some(b)) => Some(b.clone()),
                    (None, None) => None,
                })
                .collect(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|p| p.iter().enumerate().all(|(i, &j)| i as u32 == j))
    }

    /// Checks every present map is a permutation of `0..sizes[s]`.
    pub fn validate(&self, sizes: &[usize]) -> Result<()> {
        if self.0.len() != sizes.len() {
            return Err(Error::NotBijective(
                "family length differs from sort count".into(),
            ));
        }
        for (s, p) in self.0.iter().enumerate() {
            if let Some(p) = p {
                let mut seen = vec![false; sizes[s]];
                if p.len() != sizes[s] {
                    return Err(Error::NotBijective(format!("sort {s}: wrong length")));
                }
                for &j in p {
                    let j = j as usize;
                    if j >= sizes[s] || seen[j] {
                        return Err(Error::NotBijective(format!("sort {s}: not a permutation")));
                    }
                    seen[j] = true;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for BijectionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|p| match p {
                Some(p) => format!("{p:?}"),
                None => "id".to_string(),
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A finite structure: per-sort universes `0..k` and per-relation extents.
///
/// Structures on the same universes are totally ordered by the binary
/// counter over their tuple bits: relations in declaration order, tuples in
/// lexicographic order, with the first tuple of the first relation as the
/// least significant bit. Different universe sizes order lexicographically
/// by size vector first.
#[derive(Debug, Clone)]
pub struct FiniteStructure {
    vocab: Arc<Vocabulary>,
    sizes: Vec<usize>,
    extents: Vec<Extent>,
}

impl FiniteStructure {
    pub fn empty(vocab: Arc<Vocabulary>, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != vocab.num_sorts() {
            return Err(Error::InvalidStructure(format!(
                "expected {} universe sizes, got {}",
                vocab.num_sorts(),
                sizes.len()
            )));
        }
        let extents = vocab
            .relations()
            .iter()
            .map(|r| Extent::empty(r.profile.iter().map(|&s| sizes[s]).collect()))
            .collect();
        Ok(FiniteStructure {
            vocab,
            sizes,
            extents,
        })
    }

    /// Builds a structure from named relations and their tuples.
    pub fn from_tuples(
        vocab: Arc<Vocabulary>,
        sizes: Vec<usize>,
        relations: &[(&str, Vec<Vec<u32>>)],
    ) -> Result<Self> {
        let mut m = Self::empty(vocab, sizes)?;
        for (name, tuples) in relations {
            let rel = m
                .vocab
                .relation_id(name)
                .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
            for t in tuples {
                m.insert(rel, t)?;
            }
        }
        Ok(m)
    }

    pub(crate) fn from_parts(
        vocab: Arc<Vocabulary>,
        sizes: Vec<usize>,
        extents: Vec<Extent>,
    ) -> Self {
        FiniteStructure {
            vocab,
            sizes,
            extents,
        }
    }

    pub fn insert(&mut self, rel: RelId, tuple: &[u32]) -> Result<()> {
        let ext = &mut self.extents[rel];
        let idx = ext.index_of(tuple).ok_or_else(|| {
            Error::InvalidStructure(format!(
                "tuple {tuple:?} outside the universes of `{}`",
                self.vocab.relation(rel).name
            ))
        })?;
        ext.set(idx, true);
        Ok(())
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, sort: SortId) -> usize {
        self.sizes[sort]
    }

    pub fn extent(&self, rel: RelId) -> &Extent {
        &self.extents[rel]
    }

    pub fn extents(&self) -> &[Extent] {
        &self.extents
    }

    pub(crate) fn extent_mut(&mut self, rel: RelId) -> &mut Extent {
        &mut self.extents[rel]
    }

    pub fn holds(&self, rel: RelId, tuple: &[u32]) -> bool {
        self.extents[rel].contains(tuple)
    }

    pub fn tuples(&self, rel: RelId) -> Vec<Vec<u32>> {
        self.extents[rel].tuples().collect()
    }

    /// All elements of the given sorts, sort by sort.
    pub fn elements(&self, sorts: &[SortId]) -> Vec<Elem> {
        sorts
            .iter()
            .flat_map(|&s| (0..self.sizes[s] as u32).map(move |i| Elem { sort: s, index: i }))
            .collect()
    }

    /// Image under `f`: `R^N = { f(t) : t ∈ R^M }`. `f` must be valid for
    /// this structure's universes.
    pub fn permuted(&self, f: &BijectionFamily) -> Self {
        let mut out =
            FiniteStructure::empty(self.vocab.clone(), self.sizes.clone()).expect("same sizes");
        for (rel, decl) in self.vocab.relations().iter().enumerate() {
            let src = &self.extents[rel];
            let dst = &mut out.extents[rel];
            let mut image = vec![0u32; decl.profile.len()];
            for idx in src.ones() {
                let t = src.decode(idx);
                for (k, (&v, &s)) in t.iter().zip(&decl.profile).enumerate() {
                    image[k] = f.map(s, v);
                }
                let j = dst.index_of(&image).expect("bijection stays in range");
                dst.set(j, true);
            }
        }
        out
    }

    /// Checks the invariants: size vector matches, extents match profiles.
    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() != self.vocab.num_sorts()
            || self.extents.len() != self.vocab.num_relations()
        {
            return Err(Error::InvalidStructure(
                "shape does not match vocabulary".into(),
            ));
        }
        for (r, decl) in self.vocab.relations().iter().enumerate() {
            let dims: Vec<usize> = decl.profile.iter().map(|&s| self.sizes[s]).collect();
            if self.extents[r].dims() != dims.as_slice() {
                return Err(Error::InvalidStructure(format!(
                    "extent of `{}` has wrong dimensions",
                    decl.name
                )));
            }
        }
        Ok(())
    }
}

impl PartialEq for FiniteStructure {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes
            && self.extents == other.extents
            && (Arc::ptr_eq(&self.vocab, &other.vocab) || self.vocab == other.vocab)
    }
}

impl Eq for FiniteStructure {}

impl Hash for FiniteStructure {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sizes.hash(state);
        self.extents.hash(state);
    }
}

impl Ord for FiniteStructure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sizes.cmp(&other.sizes).then_with(|| {
            for (a, b) in self.extents.iter().zip(&other.extents).rev() {
                match a.cmp_numeric(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for FiniteStructure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self
            .vocab
            .sorts()
            .iter()
            .zip(&self.sizes)
            .map(|(s, n)| format!("{s}={n}"))
            .collect();
        write!(f, "{}", sizes.join(","))?;
        for (r, decl) in self.vocab.relations().iter().enumerate() {
            let tuples: Vec<String> = self.extents[r]
                .tuples()
                .map(|t| {
                    let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                    format!("({})", parts.join(","))
                })
                .collect();
            write!(f, "; {}={{{}}}", decl.name, tuples.join(","))?;
        }
        Ok(())
    }
}
