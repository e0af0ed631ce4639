pub mod enumerate;
pub mod eval;
pub mod formula;
pub mod iso;
pub mod parse;
pub mod structure;
pub mod theory;
pub mod vocab;

pub use enumerate::{all_tuples, enumerate_structures, models_of, size_vectors, StructureSpace};
pub use eval::{evaluate, Compiled, Interpretation};
pub use formula::{Formula, Language, Mode, Side, Var};
pub use iso::{are_isomorphic, automorphisms, bijection_families, find_isomorphisms, permutations};
pub use parse::{parse_blocks, parse_formula, parse_open, parse_sentence};
pub use structure::{BijectionFamily, Elem, Extent, FiniteStructure};
pub use theory::Theory;
pub use vocab::{RelId, RelationDecl, SortId, Vocabulary};
