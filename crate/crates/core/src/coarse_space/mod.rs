//! Finite models of coarse spaces and the entourage calculus.
//!
//! A [`TruncatedCoarseSpace`] is a finite point set whose generator
//! entourages are indexed by a scale. The declared frontier marks where an
//! infinite space was cut off; every boundedness or properness judgment
//! treats a set that touches the frontier as unbounded.

mod constructions;
mod entourage;
mod io;
mod maps;
mod space;

pub use constructions::{
    disjoint_union, is_coarsely_excisive, product, quotient, Decomposition, DisjointUnion,
    ExcisionReport, Product, Quotient,
};
pub use entourage::{compose_entourages, compose_exact, entourage_section, invert_entourage, Entourage};
pub use io::SpaceDescription;
pub use maps::{
    are_close, is_bounded, scale_ladder, validate_coarse_map, BoundedReport, CloseReport,
    CoarseMapReport, PointMap, ProperFailure, ScaleWitness,
};
pub use space::{Gauge, Geometry, PointSet, Structure, TruncatedCoarseSpace};

/// Note attached to every report that judges boundedness on a truncation.
pub const FRONTIER_CONVENTION: &str =
    "sets touching the truncation frontier are treated as unbounded at the scale cap";
