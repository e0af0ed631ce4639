//! Quantifier-prefix classes of pair sentences.

use std::fmt;

use crate::logic::formula::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrefixClass {
    Sigma(usize),
    Pi(usize),
}

impl PrefixClass {
    pub fn level(self) -> usize {
        match self {
            PrefixClass::Sigma(n) | PrefixClass::Pi(n) => n,
        }
    }

    pub fn symbol(self) -> String {
        let sub: String = self
            .level()
            .to_string()
            .chars()
            .map(|c| char::from_u32('₀' as u32 + c.to_digit(10).unwrap_or(0)).unwrap_or(c))
            .collect();
        match self {
            PrefixClass::Sigma(_) => format!("Σ{sub}"),
            PrefixClass::Pi(_) => format!("Π{sub}"),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        if let Some(n) = text.strip_prefix("Sigma") {
            n.parse().ok().map(PrefixClass::Sigma)
        } else {
            text.strip_prefix("Pi")
                .and_then(|n| n.parse().ok())
                .map(PrefixClass::Pi)
        }
    }
}

impl fmt::Display for PrefixClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrefixClass::Sigma(n) => write!(f, "Sigma{n}"),
            PrefixClass::Pi(n) => write!(f, "Pi{n}"),
        }
    }
}

/// Least `(s, p)` with the formula prenexable to a Σ_s and a Π_p form.
/// Implications and biconditionals are expanded, negations pushed to atoms,
/// and quantifiers pulled out so that like blocks of the two sides of a
/// connective merge.
fn levels(phi: &Formula) -> (usize, usize) {
    match phi {
        Formula::Const(_) | Formula::Atom { .. } | Formula::Eq(..) | Formula::Link { .. } => (0, 0),
        Formula::Not(a) => {
            let (s, p) = levels(a);
            (p, s)
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (sa, pa) = levels(a);
            let (sb, pb) = levels(b);
            (sa.max(sb), pa.max(pb))
        }
        Formula::Implies(a, b) => {
            let (sa, pa) = levels(a);
            let (sb, pb) = levels(b);
            (pa.max(sb), sa.max(pb))
        }
        Formula::Iff(a, b) => {
            let (sa, pa) = levels(a);
            let (sb, pb) = levels(b);
            let n = sa.max(pa).max(sb).max(pb);
            (n, n)
        }
        Formula::Forall(_, a) => {
            let p = levels(a).1.max(1);
            (p + 1, p)
        }
        Formula::Exists(_, a) => {
            let s = levels(a).0.max(1);
            (s, s + 1)
        }
    }
}

pub fn classify_prefix(sentence: &Formula) -> PrefixClass {
    let (s, p) = levels(sentence);
    if p <= s {
        PrefixClass::Pi(p)
    } else {
        PrefixClass::Sigma(s)
    }
}
