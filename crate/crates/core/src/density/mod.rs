//! Kernel density estimation on `S^d` and on the compositional domain, the
//! integrated squared error, and an ISE goodness-of-fit test.

mod gof;
mod ise;
mod kde;
mod profile;

pub use gof::{gof_test, GofResult, GofTest, NullModel, DEFAULT_REFERENCE_SIZE, MIN_NULL_REPLICATES};
pub use ise::{compositional_ise, ise, ise_to_uniform, OverlapTable, MIN_ISE_SAMPLES};
pub use kde::{
    induced_density, pullback_density, spherical_kde, spread_kde, CompositionalKde, SphericalKde,
};
pub use profile::{b_d, default_bandwidth, lambda_d, normalizing_constant, SmoothingKernel};
