//! Forward and inverse conductivity computations on hypercubic lattice
//! graphs.
//!
//! The crate models resistor networks on the integer box `{1, ..., n}^d`
//! with one layer of boundary nodes attached to its faces.  It provides
//!
//! * [`lattice`]: graph construction, diagonal slice sets, corner
//!   reflections;
//! * [`forward`]: weighted Laplacians, Dirichlet solves and the dense
//!   boundary response (Dirichlet-to-Neumann) matrix;
//! * [`operators`]: boundary response blocks, interface operators on
//!   subgraphs, kernel and quotient bases;
//! * [`reconstruction`]: layer-by-layer recovery of the edge conductivities
//!   from the boundary response matrix, merged over all corners;
//! * [`verification`]: error reports against ground truth, a property
//!   suite of numerical invariants, and an error growth study;
//! * [`io`]: JSON and CSV artifacts used by the command line tool.
//!
//! Every runnable example under `examples/` exercises one capability end to
//! end; start with `cargo run --example roundtrip`.

pub mod error;
pub mod forward;
pub mod io;
pub mod lattice;
pub mod numerics;
pub mod operators;
pub mod reconstruction;
pub mod verification;

pub use error::{Error, Result};
