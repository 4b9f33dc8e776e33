//! Exact certification of hyperplane equipartition bounds.
//!
//! The algebraic side works in truncated GF(2) polynomial rings
//! ([`gf2poly`]), builds representation polynomials from constraint blocks
//! ([`repbuild`]) and runs the full-monomial test ([`certify`]). The
//! concrete side checks and searches arrangements for point-cloud masses
//! ([`equipart`]).

pub mod bounds;
pub mod certify;
pub mod equipart;
mod error;
pub mod files;
pub mod gf2poly;
pub mod repbuild;

pub use error::{Error, Result};
