use std::sync::Arc;

use super::eval::Compiled;
use super::formula::{Formula, Language};
use super::parse::parse_sentence;
use super::structure::FiniteStructure;
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

/// A named list of closed axioms over one vocabulary.
#[derive(Debug, Clone)]
pub struct Theory {
    vocab: Arc<Vocabulary>,
    axioms: Vec<(String, Formula)>,
    compiled: Vec<Compiled>,
}

impl Theory {
    pub fn empty(vocab: Arc<Vocabulary>) -> Self {
        Theory {
            vocab,
            axioms: Vec::new(),
            compiled: Vec::new(),
        }
    }

    /// Parses `(name, text)` axioms.
    pub fn parse(vocab: Arc<Vocabulary>, axioms: &[(&str, &str)]) -> Result<Self> {
        let mut t = Theory::empty(vocab);
        for (name, text) in axioms {
            let lang = Language::single(t.vocab.clone());
            let f = parse_sentence(text, &lang)?;
            t.add(name, f)?;
        }
        Ok(t)
    }

    pub fn add(&mut self, name: &str, sentence: Formula) -> Result<()> {
        if !sentence.is_closed() {
            return Err(Error::NotClosed(name.to_string()));
        }
        Language::single(self.vocab.clone()).validate(&sentence, &[])?;
        if self.axioms.iter().any(|(n, _)| n == name) {
            return Err(Error::Duplicate(name.to_string()));
        }
        self.compiled.push(Compiled::new(&sentence, &[])?);
        self.axioms.push((name.to_string(), sentence));
        Ok(())
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn axioms(&self) -> &[(String, Formula)] {
        &self.axioms
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn satisfied_by(&self, m: &FiniteStructure) -> bool {
        self.compiled.iter().all(|c| c.holds_in(m))
    }
}
