//! Seeded randomness and integration: uniform sphere sampling, Monte Carlo
//! integrals with standard errors, and 1-D quadrature.

mod quadrature;
mod rng;

pub use quadrature::{gauss_legendre, quad_1d, quad_breaks, MAX_SUBINTERVALS};
pub use rng::RngStream;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{fold, SpherePoint};
use crate::harmonics::sphere_volume;

/// A Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Draws one uniform point on `S^d` from normal variates.
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> SpherePoint {
    let mut buf = vec![0.0; d + 1];
    loop {
        let mut sq = 0.0;
        for v in buf.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v = g;
            sq += g * g;
        }
        if sq > 1e-300 {
            let norm = sq.sqrt();
            return SpherePoint::from_unit_unchecked(buf.iter().map(|v| v / norm).collect());
        }
    }
}

/// `n` independent uniform points on `S^d`.
pub fn uniform_sphere(d: usize, n: usize, stream: RngStream) -> Vec<SpherePoint> {
    let mut rng = stream.rng();
    (0..n).map(|_| sample_sphere(d, &mut rng)).collect()
}

/// `n` independent uniform points on the first orthant `S^d_{≥0}`.
pub fn uniform_orthant(d: usize, n: usize, stream: RngStream) -> Vec<SpherePoint> {
    let mut rng = stream.rng();
    (0..n).map(|_| fold(&sample_sphere(d, &mut rng))).collect()
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn integral_from_values(values: Vec<f64>, volume: f64) -> Result<McEstimate> {
    if values.is_empty() {
        return Err(Error::Empty("Monte Carlo sample"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("integrand returned {v}")));
    }
    let (mean, se) = mean_and_se(&values);
    Ok(McEstimate { value: volume * mean, std_error: volume * se, n: values.len() })
}

/// `∫_{S^d} f` as `vol(S^d)` times the sample mean of `f` at uniform points.
pub fn mc_integral_sphere<F>(f: F, d: usize, n: usize, stream: RngStream) -> Result<McEstimate>
where
    F: FnMut(&SpherePoint) -> f64,
{
    let volume = sphere_volume(d)?;
    let values = uniform_sphere(d, n, stream).iter().map(f).collect();
    integral_from_values(values, volume)
}

/// `∫_{S^d_{≥0}} f` with uniform first-orthant points.
pub fn mc_integral_orthant<F>(f: F, d: usize, n: usize, stream: RngStream) -> Result<McEstimate>
where
    F: FnMut(&SpherePoint) -> f64,
{
    let volume = sphere_volume(d)? / (1u64 << (d + 1)) as f64;
    let values = uniform_orthant(d, n, stream).iter().map(f).collect();
    integral_from_values(values, volume)
}
