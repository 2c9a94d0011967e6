//! Coarse homology of finite truncations of coarse spaces.
//!
//! The pipeline runs space → coarsening family → nerves → homology rel
//! frontier → direct-limit profile. Around it sit checkers for the
//! structural facts the theory predicts: Mayer-Vietoris and pair sequences
//! are exact, close maps induce equal maps, coarse homotopies behave.
//!
//! Geometry is `f64` throughout. Chain-level work is generic over a
//! coefficient [`Field`]; the aliases below fix the two shipped fields.

pub mod coarse_space;
pub mod coarsening;
pub mod error;
pub mod field;
pub mod homology;
pub mod linalg;
pub mod nerve;
pub mod report;
pub mod spaces;
pub mod theory;

pub use error::{CoarseError, Result};
pub use field::{Field, FieldKind, Rational, F2};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type HomologyF2 = homology::HomologyGroup<F2>;
pub type HomologyQ = homology::HomologyGroup<Rational>;
pub type InducedMapF2 = homology::InducedMap<F2>;
pub type InducedMapQ = homology::InducedMap<Rational>;
pub type ProfileF2 = theory::CoarseHomologyProfile<F2>;
pub type ProfileQ = theory::CoarseHomologyProfile<Rational>;
pub type MatrixF2 = linalg::Matrix<F2>;
pub type MatrixQ = linalg::Matrix<Rational>;
