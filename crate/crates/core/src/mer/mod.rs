//! MER specifications and their exhaustive checks.

pub mod engine;
pub mod metric;
pub mod prefix;
pub mod spec;

pub use engine::{
    action_table, check_equivalence_relation, check_groupoid_laws, first_failure,
    groupoid_morphisms, is_morphism, mer_classes, model_groups, relation_matrix, replay, BitMatrix, ErFailure,
    ErVerdict, GroupRelation, GroupoidLaw, GroupoidVerdict, MerAnalysis, ModelGroup, Scale,
};
pub use metric::FiniteMetric;
pub use prefix::{classify_prefix, PrefixClass};
pub use spec::{ApproxMer, CofinalMer, MerSpec, Prepared, ReductMer, SentenceMer, TowerMer};
