//! Fractal cut-locus constructions.
//!
//! The library builds a branching tree of straight segments in `R^n`, the
//! convex C¹ hulls whose inward cut locus is that tree, the self-similar set
//! of tree endpoints, smoothing profiles for the hull seams and Randers
//! metrics whose geodesics agree with the flat ones. Each construction comes
//! with numerical checks of its defining properties.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boxcount;
pub mod bumps;
pub mod cutlocus;
pub mod error;
pub mod export;
pub mod geometry;
pub mod hull;
pub mod params;
pub mod quadrature;
pub mod randers;
pub mod selfsim;
pub mod sequences;
pub mod smoothing;
pub mod suite;
pub mod tree;
pub mod zeta;

pub use error::{Error, Result};
pub use params::ConstructionParams;
