//! Orbits of integral 2x2x2 cubes under a Borel-type group, their counting
//! functions and the associated multiple Dirichlet series.

pub mod cli;
pub mod congruence;
pub mod cube;
pub mod error;
pub mod identities;
pub mod orbits;
pub mod ppart;
pub mod quadring;
pub mod wmds;

pub use error::{Error, Result};
