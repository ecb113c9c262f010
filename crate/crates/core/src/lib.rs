//! Numerical laboratory for isotropic Sobolev stochastic flows.
//!
//! The crate builds the isotropic Sobolev covariances on the sphere `S^d` and
//! on `R^d`, reduces the two-point motion to a one-dimensional distance
//! diffusion, classifies the boundary at zero separation (coalescence,
//! splitting with hitting, splitting without hitting), evaluates top Lyapunov
//! exponents in the smooth regime and checks all of it by Monte-Carlo:
//! distance-diffusion paths, a spectral discrete-Kraichnan pair advection on
//! a periodic box and the exactly solvable one-dimensional sign flow with its
//! Wiener-chaos expansion.

// NaN-rejecting guards are written `!(x > 0.0)` on purpose; tabulated
// constants keep all published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod coeffs;
pub mod distance_sim;
pub mod error;
pub mod euclid_cov;
pub mod feller;
pub mod params;
pub mod signflow;
pub mod specfun;
pub mod sphere_cov;
pub mod stability;
pub mod stats;
pub mod stream;
pub mod torus_field;

pub use coeffs::{CoefficientPair, Geometry};
pub use error::{FlowError, Result};
pub use euclid_cov::EuclidParams;
pub use feller::{BoundaryClass, RegimeLabel, ScaleSpeedReport};
pub use params::FlowParams;
pub use sphere_cov::SphereParams;
