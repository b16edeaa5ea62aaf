//! Exact homological algebra for finite dimensional algebras over prime fields.
//!
//! The crate builds bound quiver algebras `KQ/I` from a small textual
//! presentation language, constructs replicated algebras, and computes the
//! homological data (projective resolutions, Ext groups, Nakayama functors,
//! Auslander-Reiten translates, dominant dimensions) needed to decide whether
//! an algebra is twisted fractionally Calabi-Yau.
//!
//! The main entry points are:
//!
//! * [`presentation::parse`] / [`presentation::build_algebra`] to go from DSL
//!   text to a [`algebra::BasedAlgebra`],
//! * [`algebra::replicate`] for the replicated algebras `A^(m)`,
//! * [`homdim::profile`] for homological dimension profiles,
//! * [`classify::classify`] for the Calabi-Yau certificate,
//! * [`fixtures`] for the built-in example algebras.

pub mod algebra;
pub mod classify;
pub mod complexes;
pub mod decompose;
pub mod error;
pub mod fixtures;
pub mod fp;
pub mod homdim;
pub mod matrix;
pub mod module;
pub mod presentation;
pub mod radical;
pub mod report;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
