//! Spectral laboratory for the norm-discontinuity (ill-posedness) mechanism
//! of the compressible and incompressible Navier-Stokes equations in the
//! critical Besov spaces `B^{d/p-1}_{p,inf}`.
//!
//! The whole space is approximated by a periodic box; see [`field`].

pub mod error;
pub mod expansion;
pub mod experiment;
pub mod field;
pub mod initial_data;
pub mod littlewood_paley;
pub mod semigroups;

pub use error::{Error, Result};
