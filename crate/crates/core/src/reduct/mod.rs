pub mod cofinal;
pub mod flatten;
pub mod nset;
pub mod shelah;
pub mod tower;

pub use cofinal::{nset_leq, CofinalSpec, OrderMatrix, OrderSpec};
pub use flatten::{flat_key, flatten_2ydlept};
pub use nset::{nset_equal, nset_value, NSetValue, PartitionedFormula};
pub use shelah::{shelahize, shelahize_with, ShelahVocab, ShelahizedStructure};
pub use tower::{tower_equivalent, FamilyTower};
