//! Exact log-canonical thresholds of plane curve germs.
//!
//! The input is purely combinatorial: the constellation of infinitely
//! near points of a log resolution (a rooted proximity forest) together
//! with the branches, each given by the maximal point its strict
//! transform passes through. From this the crate computes multiplicity
//! and valuation vectors, per-branch invariants, the dual graph with its
//! vertex weight, and the log-canonical threshold in exact rational
//! arithmetic by several independent methods which are reconciled on
//! every run. Non-reduced curves and products of simple complete ideals
//! are handled through curvette duplication.

pub mod constellation;
pub mod dualgraph;
pub mod error;
pub mod gen;
pub mod invariants;
pub mod lct;
pub mod verify;

pub use constellation::{
    Branch, Constellation, CurveSpec, IntVector, MinimalityReport, PointId, PointRecord,
};
pub use error::{Error, Result};
pub use lct::{lct, lct_complete_ideal, lct_nonreduced, reconcile, LctReport, Rat};
