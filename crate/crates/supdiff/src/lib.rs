//! Exact convex-analysis engine for finite suprema of polyhedral convex
//! functions over the rationals.
//!
//! Everything is computed in exact rational arithmetic: polyhedra carry dual
//! H/V representations convertible on demand, convex functions live in a
//! max-affine normal form closed under conjugation, and the set identities
//! relating epsilon-subdifferentials, recession cones and normal cones are
//! decided exactly (set equality, zero tolerance).

pub mod convexfn;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod optimality;
pub mod polyhedra;
pub mod supcalc;

pub use error::{Error, Result};
