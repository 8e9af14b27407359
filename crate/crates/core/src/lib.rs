//! Rescaled Pólya urns, their diffusion limit and the k-allele Wright–Fisher
//! diffusion with parent-independent mutation.
//!
//! Colours and simplex coordinates are 0-based throughout the library.

pub mod boundary;
pub mod converge;
pub mod error;
pub mod export;
pub mod polys;
pub mod quadrature;
pub mod rng;
pub mod scaling;
pub mod simplex;
pub mod stats;
pub mod urn;
pub mod wf;

pub use error::{Error, Result};
pub use simplex::{SimplexPoint, TPoint};
