//! Binding constraints for nominal anaphors.
//!
//! Given an annotated discourse, the engine computes the binding lists each
//! node carries, applies the four binding principles to every anaphor, and
//! optionally filters the result by the reverse principles and checks a
//! proposed resolution for transitive coreference violations.

pub mod bdp;
pub mod io;
pub mod model;
pub mod obliqueness;
pub mod principles;
pub mod reverse;
pub mod transitivity;

pub use model::*;
