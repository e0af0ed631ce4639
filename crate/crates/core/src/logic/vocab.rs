use std::fmt;

use crate::error::{Error, Result};

pub type SortId = usize;
pub type RelId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationDecl {
    pub name: String,
    pub profile: Vec<SortId>,
}

/// A multi-sorted relational signature.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vocabulary {
    sorts: Vec<String>,
    relations: Vec<RelationDecl>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from sort names and `(relation, profile)` pairs.
    pub fn build(sorts: &[&str], relations: &[(&str, &[&str])]) -> Result<Self> {
        let mut v = Vocabulary::new();
        for s in sorts {
            v.add_sort(s)?;
        }
        for (name, profile) in relations {
            v.add_relation(name, profile)?;
        }
        Ok(v)
    }

    pub fn add_sort(&mut self, name: &str) -> Result<SortId> {
        if self.sort_id(name).is_some() || name.is_empty() {
            return Err(Error::Duplicate(name.to_string()));
        }
        self.sorts.push(name.to_string());
        Ok(self.sorts.len() - 1)
    }

    pub fn add_relation(&mut self, name: &str, profile: &[&str]) -> Result<RelId> {
        if self.relation_id(name).is_some() || name.is_empty() {
            return Err(Error::Duplicate(name.to_string()));
        }
        if profile.is_empty() {
            return Err(Error::SortMismatch(format!(
                "relation `{name}` needs a nonempty sort profile"
            )));
        }
        let profile = profile
            .iter()
            .map(|s| {
                self.sort_id(s)
                    .ok_or_else(|| Error::UnknownSort(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.relations.push(RelationDecl {
            name: name.to_string(),
            profile,
        });
        Ok(self.relations.len() - 1)
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sorts.iter().position(|s| s == name)
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sorts[id]
    }

    pub fn relation(&self, id: RelId) -> &RelationDecl {
        &self.relations[id]
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn num_sorts(&self) -> usize {
        self.sorts.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{ ")?;
        for s in &self.sorts {
            write!(f, "sort {s}; ")?;
        }
        for r in &self.relations {
            let names: Vec<&str> = r.profile.iter().map(|&s| self.sort_name(s)).collect();
            write!(f, "rel {}({}); ", r.name, names.join(","))?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_declarations() {
        let mut v = Vocabulary::new();
        v.add_sort("V").unwrap();
        assert!(matches!(v.add_sort("V"), Err(Error::Duplicate(_))));
        assert!(matches!(
            v.add_relation("E", &["W"]),
            Err(Error::UnknownSort(_))
        ));
        v.add_relation("E", &["V", "V"]).unwrap();
        assert!(matches!(
            v.add_relation("E", &["V"]),
            Err(Error::Duplicate(_))
        ));
        assert!(v.add_relation("Z", &[]).is_err());
        assert_eq!(v.to_string(), "{ sort V; rel E(V,V); }");
    }
}
