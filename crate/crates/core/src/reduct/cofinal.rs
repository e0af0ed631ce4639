//! The cofinal order on hereditary sets and the mutual-domination MER.

use std::sync::Arc;

use super::nset::{nset_value, NSetValue, PartitionedFormula};
use crate::error::{Error, Result};
use crate::logic::eval::Compiled;
use crate::logic::formula::{Formula, Language, Var};
use crate::logic::parse::parse_open;
use crate::logic::structure::FiniteStructure;
use crate::logic::vocab::{SortId, Vocabulary};

/// `a ≤_k b` iff every member of `a` is below some member of `b`; at the
/// bottom, tuples compare componentwise under `base`.
pub fn nset_leq(
    a: &NSetValue,
    b: &NSetValue,
    base: &dyn Fn(u32, u32) -> bool,
    k: usize,
) -> Result<bool> {
    if a.depth() != k || b.depth() != k {
        return Err(Error::DepthMismatch(a.depth(), b.depth()));
    }
    Ok(leq(a, b, base))
}

fn leq(a: &NSetValue, b: &NSetValue, base: &dyn Fn(u32, u32) -> bool) -> bool {
    match (a, b) {
        (NSetValue::Tuples(a), NSetValue::Tuples(b)) => a.iter().all(|u| {
            b.iter()
                .any(|v| u.len() == v.len() && u.iter().zip(v).all(|(&x, &y)| base(x, y)))
        }),
        (NSetValue::Family { members: a, .. }, NSetValue::Family { members: b, .. }) => {
            a.iter().all(|u| b.iter().any(|v| leq(u, v, base)))
        }
        _ => false,
    }
}

/// A binary formula read as a partial order on one sort.
#[derive(Debug, Clone)]
pub struct OrderSpec {
    formula: Formula,
    sort: SortId,
    compiled: Compiled,
}

impl OrderSpec {
    pub fn new(vocab: &Arc<Vocabulary>, formula: Formula, x: Var, y: Var) -> Result<Self> {
        if x.sort != y.sort {
            return Err(Error::SortMismatch("order variables differ in sort".into()));
        }
        Language::single(vocab.clone()).validate(&formula, &[x.clone(), y.clone()])?;
        let compiled = Compiled::new(&formula, &[x.clone(), y])?;
        Ok(OrderSpec {
            formula,
            sort: x.sort,
            compiled,
        })
    }

    /// Parses a formula in two free variables, in order of first use.
    pub fn parse(text: &str, vocab: &Arc<Vocabulary>) -> Result<Self> {
        let (f, free) = parse_open(text, &Language::single(vocab.clone()))?;
        if free.len() != 2 {
            return Err(Error::Validation(format!(
                "an order needs exactly two free variables, found {}",
                free.len()
            )));
        }
        Self::new(vocab, f, free[0].clone(), free[1].clone())
    }

    pub fn sort(&self) -> SortId {
        self.sort
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    /// The order as a dense matrix on `m`, after checking it is reflexive,
    /// antisymmetric and transitive there.
    pub fn matrix(&self, m: &FiniteStructure) -> Result<OrderMatrix> {
        let n = m.size(self.sort);
        let mut rel = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                rel[a * n + b] = self.compiled.eval_at(m, &[a as u32, b as u32]);
            }
        }
        let o = OrderMatrix { n, rel };
        o.check()?;
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderMatrix {
    n: usize,
    rel: Vec<bool>,
}

impl OrderMatrix {
    pub fn from_fn(n: usize, f: impl Fn(u32, u32) -> bool) -> Self {
        let rel = (0..n * n)
            .map(|i| f((i / n) as u32, (i % n) as u32))
            .collect();
        OrderMatrix { n, rel }
    }

    pub fn leq(&self, a: u32, b: u32) -> bool {
        self.rel[a as usize * self.n + b as usize]
    }

    pub fn check(&self) -> Result<()> {
        let n = self.n as u32;
        for a in 0..n {
            if !self.leq(a, a) {
                return Err(Error::NotPartialOrder(format!("not reflexive at {a}")));
            }
            for b in 0..n {
                if a != b && self.leq(a, b) && self.leq(b, a) {
                    return Err(Error::NotPartialOrder(format!(
                        "not antisymmetric at {a}, {b}"
                    )));
                }
                for c in 0..n {
                    if self.leq(a, b) && self.leq(b, c) && !self.leq(a, c) {
                        return Err(Error::NotPartialOrder(format!(
                            "not transitive at {a}, {b}, {c}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-structure data deciding the cofinal MER.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CofinalKey {
    pub order: OrderMatrix,
    pub value: NSetValue,
}

#[derive(Debug, Clone)]
pub struct CofinalSpec {
    pub order: OrderSpec,
    pub family: PartitionedFormula,
}

impl CofinalSpec {
    /// The family's members must be single elements of the order's sort.
    pub fn new(order: OrderSpec, family: PartitionedFormula) -> Result<Self> {
        if family.member_sorts() != [order.sort()] {
            return Err(Error::Validation(
                "the family's member block must be one variable of the order's sort".into(),
            ));
        }
        Ok(CofinalSpec { order, family })
    }

    pub fn key(&self, m: &FiniteStructure) -> Result<CofinalKey> {
        Ok(CofinalKey {
            order: self.order.matrix(m)?,
            value: nset_value(m, &self.family),
        })
    }

    /// Same order, and each value dominates the other.
    pub fn related(a: &CofinalKey, b: &CofinalKey) -> bool {
        a.order == b.order && {
            let base = |x: u32, y: u32| a.order.leq(x, y);
            leq(&a.value, &b.value, &base) && leq(&b.value, &a.value, &base)
        }
    }

    pub fn equivalent(&self, m: &FiniteStructure, n: &FiniteStructure) -> Result<bool> {
        Ok(Self::related(&self.key(m)?, &self.key(n)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn t(items: &[u32]) -> NSetValue {
        NSetValue::Tuples(items.iter().map(|&x| vec![x]).collect())
    }

    #[test]
    fn chain() {
        let lt = |a: u32, b: u32| a <= b;
        assert!(nset_leq(&t(&[0]), &t(&[1]), &lt, 1).unwrap());
        assert!(!nset_leq(&t(&[1]), &t(&[0]), &lt, 1).unwrap());
        let a = NSetValue::family(2, [t(&[2])]).unwrap();
        let b = NSetValue::family(2, [t(&[1]), t(&[2])]).unwrap();
        assert!(nset_leq(&a, &b, &lt, 2).unwrap() && nset_leq(&b, &a, &lt, 2).unwrap());
        assert!(nset_leq(&a, &t(&[1]), &lt, 2).is_err());
    }

    #[test]
    fn antichain_incomparable() {
        let eq = |a: u32, b: u32| a == b;
        let a = NSetValue::family(2, [t(&[0])]).unwrap();
        let b = NSetValue::family(2, [t(&[1])]).unwrap();
        assert!(!nset_leq(&a, &b, &eq, 2).unwrap() && !nset_leq(&b, &a, &eq, 2).unwrap());
        let empty = NSetValue::Family {
            depth: 2,
            members: BTreeSet::new(),
        };
        assert!(nset_leq(&empty, &a, &eq, 2).unwrap());
    }

    #[test]
    fn order_check() {
        assert!(OrderMatrix::from_fn(3, |a, b| a <= b).check().is_ok());
        assert!(OrderMatrix::from_fn(2, |_, _| true).check().is_err());
        assert!(OrderMatrix::from_fn(2, |a, b| a < b).check().is_err());
    }
}
