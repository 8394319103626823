//! Potentials, capacities, monotone quantities and cone-rigidity diagnostics
//! on weighted graphs and radial model cones.
//!
//! Graph spaces come from [`space::build_lattice`], [`space::build_cone`] and
//! [`space::build_cylinder`]; the radial backend [`space::RadialSpace`] gives
//! closed-form references for every estimator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cone;
pub mod error;
pub mod field;
pub mod flow;
pub mod green;
pub mod linalg;
pub mod monotone;
pub mod pipeline;
pub mod potential;
pub mod space;

pub use error::{Error, Result};
pub use field::Field;
pub use space::{GraphSpace, RadialField, RadialSpace, Space};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
