//! Compositional data analysis on the sphere quotient `S^d / Γ`.
//!
//! Compositions (points of the simplex) are identified with first-orthant unit
//! vectors, and the first orthant is a fundamental domain for the group `Γ` of
//! coordinate sign flips. On top of that geometry the crate provides
//!
//! - spread-out kernel density estimation with an ISE goodness-of-fit test
//!   ([`density`]),
//! - zonal spherical kernels and the compositional reproducing kernels `ω_m`
//!   ([`harmonics`]),
//! - minimal-norm interpolation and ridge regression in the span of `ω_m`
//!   ([`representer`]),
//! - the compositional exponential family ([`expfam`]),
//! - seeded Monte Carlo and quadrature utilities ([`montecarlo`]).

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod expfam;
pub mod geometry;
pub mod harmonics;
pub mod montecarlo;
pub mod representer;

/// Library version, echoed into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use geometry::{
    contract_l1, fold, gamma_average, inflate, orbit, spread_out, Composition, OnSphere, OrbitData,
    SignPattern, SpherePoint, MAX_DIM,
};
pub use harmonics::{
    eigenspace_dim, gamma_average_kernel, gegenbauer, gegenbauer_normalized, gram, omega_eval,
    projective_kernel, sphere_volume, zonal_eval, CompositionalKernel, GramMatrix, ZonalKernel,
};
pub use montecarlo::{McEstimate, RngStream};
