//! Exact construction, certification and bounding of δ-additive sets:
//! families of unit vectors in a finite-dimensional normed space whose
//! pairwise sums all have norm at most δ.
//!
//! All geometry is carried out over arbitrary-precision rationals.

pub mod arith;
pub mod error;
pub mod lp;
pub mod norms;
pub mod duality;
pub mod constructions;
pub mod bounds;
pub mod search;
pub mod cli;

pub use error::{Error, Result};
