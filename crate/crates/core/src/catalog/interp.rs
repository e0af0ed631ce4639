//! The finite set-theoretic expansion of a graph and its forgetful inverse.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::structure::FiniteStructure;
use crate::logic::vocab::Vocabulary;
use crate::mer::spec::MerSpec;
use crate::scalar::Scalar;

/// Largest universe `A` accepted by `expand_interpretation`.
pub const MAX_INTERP_SIZE: usize = 3;

/// One sort `A` with a binary relation `R`.
pub fn graph_vocab() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::build(&["A"], &[("R", &["A", "A"])]).expect("graph vocabulary"))
}

/// `A`, `R` together with sets `B` of pairs, membership `In(a, a', b)` and a
/// distinguished subset `D` of `B`.
pub fn interp_vocab() -> Arc<Vocabulary> {
    Arc::new(
        Vocabulary::build(
            &["A", "B"],
            &[("R", &["A", "A"]), ("In", &["A", "A", "B"]), ("D", &["B"])],
        )
        .expect("interpretation vocabulary"),
    )
}

fn graph_with(n: usize, mask: u64) -> FiniteStructure {
    let edges = (0..n * n)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| vec![(i / n) as u32, (i % n) as u32])
        .collect();
    FiniteStructure::from_tuples(graph_vocab(), vec![n], &[("R", edges)]).expect("in range")
}

/// `B` is every nonempty set of pairs from `A`, element `b` coding the set
/// with bit mask `b + 1`; `D` holds the sets whose graph the spec relates to
/// `m`.
pub fn expand_interpretation<S: Scalar>(
    m: &FiniteStructure,
    spec: &MerSpec<S>,
) -> Result<FiniteStructure> {
    if **m.vocab() != *graph_vocab() {
        return Err(Error::Validation(
            "expected a structure over A; R(A, A)".into(),
        ));
    }
    let n = m.sizes()[0];
    if n > MAX_INTERP_SIZE {
        return Err(Error::SizeBound(format!(
            "|A| = {n} exceeds {MAX_INTERP_SIZE}"
        )));
    }
    let b = (1usize << (n * n)) - 1;
    let v = interp_vocab();
    let mut out = FiniteStructure::empty(v.clone(), vec![n, b])?;
    let (r, member, d) = (0, 1, 2);
    for t in m.tuples(0) {
        out.insert(r, &t)?;
    }
    for x in 0..b {
        let mask = x as u64 + 1;
        for i in 0..n * n {
            if mask >> i & 1 == 1 {
                out.insert(member, &[(i / n) as u32, (i % n) as u32, x as u32])?;
            }
        }
        if spec.equivalent(&graph_with(n, mask), m)? {
            out.insert(d, &[x as u32])?;
        }
    }
    Ok(out)
}

fn extension(nn: &FiniteStructure, n: usize, x: u32) -> u64 {
    (0..n * n)
        .filter(|&i| nn.holds(1, &[(i / n) as u32, (i % n) as u32, x]))
        .fold(0, |acc, i| acc | 1 << i)
}

/// Checks extensionality, singletons and binary unions, then keeps `A, R`.
pub fn forget_interpretation(nn: &FiniteStructure) -> Result<FiniteStructure> {
    if **nn.vocab() != *interp_vocab() {
        return Err(Error::Validation(
            "expected a structure over the interpretation vocabulary".into(),
        ));
    }
    let (n, b) = (nn.sizes()[0], nn.sizes()[1]);
    if n > 8 {
        return Err(Error::SizeBound(format!("|A| = {n} is too large")));
    }
    let exts: Vec<u64> = (0..b as u32).map(|x| extension(nn, n, x)).collect();
    let set: HashSet<u64> = exts.iter().copied().collect();
    if set.len() != exts.len() {
        return Err(Error::Validation(
            "two elements of B have the same members".into(),
        ));
    }
    for i in 0..n * n {
        if !set.contains(&(1 << i)) {
            return Err(Error::Validation(format!(
                "missing the singleton of ({}, {})",
                i / n,
                i % n
            )));
        }
    }
    for &x in &exts {
        for &y in &exts {
            if !set.contains(&(x | y)) {
                return Err(Error::Validation(
                    "B is not closed under binary unions".into(),
                ));
            }
        }
    }
    let mut out = FiniteStructure::empty(graph_vocab(), vec![n])?;
    for t in nn.tuples(0) {
        out.insert(0, &t)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_get;
    use crate::mer::spec::SentenceMer;
    use crate::pair::{identity_sentence, CoupledSignature};
    use crate::Mer;

    fn identity() -> Mer {
        let sig = CoupledSignature::all(graph_vocab());
        MerSpec::BySentence(SentenceMer::new(sig.clone(), identity_sentence(&sig)).unwrap())
    }

    #[test]
    fn sizes_and_round_trip() {
        let id = identity();
        let one = graph_with(1, 1);
        let e = expand_interpretation(&one, &id).unwrap();
        assert_eq!(e.sizes(), &[1, 1]);
        let two = graph_with(2, 0b0110);
        let e = expand_interpretation(&two, &id).unwrap();
        assert_eq!(e.sizes(), &[2, 15]);
        assert_eq!(e.tuples(2), vec![vec![5]]);
        assert_eq!(forget_interpretation(&e).unwrap(), two);
        let empty = expand_interpretation(&graph_with(2, 0), &id).unwrap();
        assert!(empty.tuples(2).is_empty());
        assert!(expand_interpretation(
            &FiniteStructure::empty(graph_vocab(), vec![4]).unwrap(),
            &id
        )
        .is_err());
        let _ = catalog_get("identity").unwrap();
    }

    #[test]
    fn missing_singleton() {
        let mut e = expand_interpretation(&graph_with(1, 0), &identity()).unwrap();
        e = {
            let mut bad = FiniteStructure::empty(interp_vocab(), e.sizes().to_vec()).unwrap();
            for t in e.tuples(0) {
                bad.insert(0, &t).unwrap();
            }
            bad
        };
        assert!(matches!(
            forget_interpretation(&e),
            Err(Error::Validation(_))
        ));
    }
}
