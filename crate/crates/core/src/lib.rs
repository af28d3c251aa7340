//! Mean curvature flow of Killing graphs in rotationally symmetric warped
//! products `P x_rho R`: model geometry, radial CMC graphs, barriers and
//! estimate constants, a polar finite-difference flow solver and the
//! ball-exhaustion scheme.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod barriers;
pub mod cli;
pub mod cmc;
pub mod error;
pub mod exhaustion;
pub mod flow;
pub mod geometry;
pub mod interp;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{make_model, ModelGeometry, ModelSpec};
pub use profile::{ProfileSpec, TableProfile};
