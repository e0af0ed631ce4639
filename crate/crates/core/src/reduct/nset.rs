//! Partitioned formulas and the hereditary sets they define.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::enumerate::all_tuples;
use crate::logic::eval::Compiled;
use crate::logic::formula::{Formula, Language, Var};
use crate::logic::parse::parse_blocks;
use crate::logic::structure::{BijectionFamily, FiniteStructure};
use crate::logic::vocab::{SortId, Vocabulary};

/// A formula whose free variables are split into ordered blocks. The first
/// block is the outermost parameter; the last block holds the members of
/// the innermost sets.
#[derive(Debug, Clone)]
pub struct PartitionedFormula {
    vocab: Arc<Vocabulary>,
    formula: Formula,
    blocks: Vec<Vec<Var>>,
    compiled: Compiled,
}

impl PartitionedFormula {
    pub fn new(vocab: Arc<Vocabulary>, formula: Formula, blocks: Vec<Vec<Var>>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::Validation("variable blocks must be nonempty".into()));
        }
        let flat: Vec<Var> = blocks.iter().flatten().cloned().collect();
        for (i, v) in flat.iter().enumerate() {
            if flat[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::Validation(format!(
                    "variable `{}` appears in two blocks",
                    v.name
                )));
            }
        }
        for v in formula.free_vars() {
            if !flat.contains(&v) {
                return Err(Error::Validation(format!(
                    "free variable `{}` is in no block",
                    v.name
                )));
            }
        }
        Language::single(vocab.clone()).validate(&formula, &flat)?;
        let compiled = Compiled::new(&formula, &flat)?;
        Ok(PartitionedFormula {
            vocab,
            formula,
            blocks,
            compiled,
        })
    }

    /// Parses `[a ; b] φ` or a lone atom `R(a : b)`.
    pub fn parse(text: &str, vocab: &Arc<Vocabulary>) -> Result<Self> {
        let (f, blocks) = parse_blocks(text, &Language::single(vocab.clone()))?;
        Self::new(vocab.clone(), f, blocks)
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn blocks(&self) -> &[Vec<Var>] {
        &self.blocks
    }

    pub fn compiled(&self) -> &Compiled {
        &self.compiled
    }

    /// Depth of the value: number of blocks.
    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sorts(&self, i: usize) -> Vec<SortId> {
        self.blocks[i].iter().map(|v| v.sort).collect()
    }

    pub fn member_sorts(&self) -> Vec<SortId> {
        self.block_sorts(self.blocks.len() - 1)
    }

    pub fn render(&self) -> String {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|v| format!("{}:{}", v.name, self.vocab.sort_name(v.sort)))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .collect();
        format!(
            "[{}] {}",
            blocks.join(" ; "),
            self.formula.render(&self.vocab)
        )
    }
}

/// A canonical hereditary set. Depth 1 is a set of tuples; depth `k + 1` is
/// a set of depth-`k` values. Sets are kept sorted and duplicate-free, so
/// equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NSetValue {
    Tuples(BTreeSet<Vec<u32>>),
    Family {
        depth: usize,
        members: BTreeSet<NSetValue>,
    },
}

impl NSetValue {
    pub fn depth(&self) -> usize {
        match self {
            NSetValue::Tuples(_) => 1,
            NSetValue::Family { depth, .. } => *depth,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            NSetValue::Tuples(t) => t.len(),
            NSetValue::Family { members, .. } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a family, checking all members have depth `depth - 1`.
    pub fn family(depth: usize, members: impl IntoIterator<Item = NSetValue>) -> Result<Self> {
        let members: BTreeSet<NSetValue> = members.into_iter().collect();
        if depth < 2 || members.iter().any(|m| m.depth() + 1 != depth) {
            return Err(Error::DepthMismatch(
                depth,
                members.iter().map(|m| m.depth() + 1).next().unwrap_or(0),
            ));
        }
        Ok(NSetValue::Family { depth, members })
    }

    /// Image under a map on member tuples.
    pub fn map_tuples(&self, f: &dyn Fn(&[u32]) -> Vec<u32>) -> NSetValue {
        match self {
            NSetValue::Tuples(t) => NSetValue::Tuples(t.iter().map(|x| f(x)).collect()),
            NSetValue::Family { depth, members } => NSetValue::Family {
                depth: *depth,
                members: members.iter().map(|m| m.map_tuples(f)).collect(),
            },
        }
    }

    /// Image under a bijection family, members having the given sorts.
    pub fn image(&self, member_sorts: &[SortId], f: &BijectionFamily) -> NSetValue {
        self.map_tuples(&|t: &[u32]| {
            t.iter()
                .zip(member_sorts)
                .map(|(&v, &s)| f.map(s, v))
                .collect()
        })
    }
}

impl fmt::Display for NSetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NSetValue::Tuples(t) => {
                let items: Vec<String> = t
                    .iter()
                    .map(|x| {
                        if x.len() == 1 {
                            x[0].to_string()
                        } else {
                            let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                            format!("({})", parts.join(","))
                        }
                    })
                    .collect();
                write!(f, "{{{}}}", items.join(","))
            }
            NSetValue::Family { members, .. } => {
                let items: Vec<String> = members.iter().map(|m| m.to_string()).collect();
                write!(f, "{{{}}}", items.join(","))
            }
        }
    }
}

/// The value of `pf` in `m`: for each assignment to the first block, the
/// value of the remaining blocks; the last block yields a set of tuples.
pub fn nset_value(m: &FiniteStructure, pf: &PartitionedFormula) -> NSetValue {
    let ranges: Vec<Vec<Vec<u32>>> = (0..pf.depth())
        .map(|i| {
            all_tuples(
                &pf.block_sorts(i)
                    .iter()
                    .map(|&s| m.size(s))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let mut env = pf.compiled.env();
    value_from(m, pf, &ranges, 0, 0, &mut env)
}

fn value_from(
    m: &FiniteStructure,
    pf: &PartitionedFormula,
    ranges: &[Vec<Vec<u32>>],
    level: usize,
    offset: usize,
    env: &mut [u32],
) -> NSetValue {
    let width = pf.blocks[level].len();
    if level + 1 == ranges.len() {
        let mut out = BTreeSet::new();
        for t in &ranges[level] {
            env[offset..offset + width].copy_from_slice(t);
            if pf.compiled.eval(m, env) {
                out.insert(t.clone());
            }
        }
        return NSetValue::Tuples(out);
    }
    let mut members = BTreeSet::new();
    for t in &ranges[level] {
        env[offset..offset + width].copy_from_slice(t);
        members.insert(value_from(m, pf, ranges, level + 1, offset + width, env));
    }
    NSetValue::Family {
        depth: ranges.len() - level,
        members,
    }
}

pub fn nset_equal(a: &NSetValue, b: &NSetValue) -> Result<bool> {
    if a.depth() != b.depth() {
        return Err(Error::DepthMismatch(a.depth(), b.depth()));
    }
    Ok(a == b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bip() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::build(&["P", "Q"], &[("G", &["P", "Q"])]).unwrap())
    }

    fn set(items: &[&[u32]]) -> NSetValue {
        NSetValue::Tuples(items.iter().map(|t| t.to_vec()).collect())
    }

    #[test]
    fn rows_collapse() {
        let v = bip();
        let pf = PartitionedFormula::parse("G(x : y)", &v).unwrap();
        let m = FiniteStructure::from_tuples(
            v.clone(),
            vec![2, 1],
            &[("G", vec![vec![0, 0], vec![1, 0]])],
        )
        .unwrap();
        assert_eq!(
            nset_value(&m, &pf),
            NSetValue::family(2, [set(&[&[0]])]).unwrap()
        );
        let n = FiniteStructure::from_tuples(v, vec![2, 1], &[("G", vec![vec![0, 0]])]).unwrap();
        let expected = NSetValue::family(2, [set(&[&[0]]), set(&[])]).unwrap();
        assert_eq!(nset_value(&n, &pf), expected);
        assert!(!nset_equal(&nset_value(&m, &pf), &expected).unwrap());
        assert_eq!(expected.to_string(), "{{},{0}}");
    }

    #[test]
    fn depth_mismatch() {
        let a = set(&[&[0]]);
        let b = NSetValue::family(2, [a.clone()]).unwrap();
        assert!(matches!(
            nset_equal(&a, &b),
            Err(Error::DepthMismatch(1, 2))
        ));
        assert!(nset_equal(&b, &b).unwrap());
    }

    #[test]
    fn block_validation() {
        let v = bip();
        assert!(PartitionedFormula::parse("[x:P ; y:Q] G(x, z)", &v).is_err());
        let pf = PartitionedFormula::parse("[x:P ; y:Q] G(x, y)", &v).unwrap();
        assert_eq!(pf.render(), "[x:P ; y:Q] G(x, y)");
        assert_eq!(pf.member_sorts(), vec![1]);
    }
}
