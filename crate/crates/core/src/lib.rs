//! Finite-model workbench for model equivalence relations.

pub mod budget;
pub mod catalog;
pub mod error;
pub mod invariant;
pub mod logic;
pub mod mer;
pub mod pair;
pub mod reduct;
pub mod scalar;

pub use budget::{Budget, DEFAULT_BUDGET};
pub use error::{Error, Result};
pub use logic::structure::{BijectionFamily, FiniteStructure};
pub use logic::theory::Theory;
pub use logic::vocab::Vocabulary;
pub use mer::{ErVerdict, FiniteMetric, GroupoidVerdict, MerSpec, PrefixClass, Scale};
pub use pair::CoupledSignature;
pub use scalar::Scalar;

pub type Rational = num_rational::Ratio<i64>;
pub type RationalMetric = FiniteMetric<Rational>;
pub type Mer = MerSpec<Rational>;
pub type FloatMer = MerSpec<f64>;
