//! ISE goodness-of-fit test for compositional data, calibrated by simulation
//! under the null.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expfam::ExpFamilyModel;
use crate::geometry::{fold, inflate, Composition, SpherePoint};
use crate::harmonics::area;
use crate::montecarlo::{uniform_orthant, RngStream};

use super::ise::OverlapTable;
use super::kde::orbit_kernel_sum;
use super::profile::{normalizing_constant, SmoothingKernel};

/// Smallest number of null replicates accepted.
pub const MIN_NULL_REPLICATES: usize = 99;

/// Default size of the fixed null sample used for the cross term against a
/// non-uniform null.
pub const DEFAULT_REFERENCE_SIZE: usize = 4000;

/// Null hypothesis: a density on the compositional domain that can be sampled.
#[derive(Clone, Debug)]
pub enum NullModel {
    Uniform,
    ExpFamily(ExpFamilyModel),
}

impl NullModel {
    /// `n` first-orthant points from the null.
    pub fn sample(&self, d: usize, n: usize, stream: RngStream) -> Result<Vec<SpherePoint>> {
        match self {
            NullModel::Uniform => Ok(uniform_orthant(d, n, stream)),
            NullModel::ExpFamily(model) => {
                if model.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d + 1, got: model.dim() + 1 });
                }
                model.sample_sphere(n, stream)
            }
        }
    }
}

/// Outcome of the test.
#[derive(Clone, Debug, PartialEq)]
pub struct GofResult {
    /// Observed `∫_{S^d} (f̂ - p̃_0)²`.
    pub statistic: f64,
    /// `(1 + #{simulated ≥ observed}) / (n_sim + 1)`.
    pub p_value: f64,
    pub n_sim: usize,
    /// Observed statistic standardized by the simulated null mean and sd.
    pub z_score: f64,
    pub null_mean: f64,
    pub null_sd: f64,
}

/// A test prepared for one `(null, K, d, h)`: the overlap table and, for a
/// non-uniform null, a fixed reference sample are built once and reused for
/// every statistic.
///
/// The statistic expands as `∫f̂² - 2∫f̂ p̃_0 + ∫p̃_0²`. The first term is
/// computed exactly from the overlap table; against the uniform null the other
/// two are `1/vol(S^d)` each, otherwise they are averages over the reference
/// sample. Observed and simulated statistics share the reference sample, so the
/// p-value is exact for the statistic as computed.
#[derive(Clone, Debug)]
pub struct GofTest {
    dim: usize,
    bandwidth: f64,
    kernel: SmoothingKernel,
    norm_const: f64,
    table: OverlapTable,
    null: NullModel,
    reference: Vec<SpherePoint>,
    null_offset: f64,
}

impl GofTest {
    pub fn new(null: NullModel, kernel: SmoothingKernel, d: usize, h: f64, stream: RngStream) -> Result<Self> {
        Self::with_reference_size(null, kernel, d, h, DEFAULT_REFERENCE_SIZE, stream)
    }

    pub fn with_reference_size(
        null: NullModel,
        kernel: SmoothingKernel,
        d: usize,
        h: f64,
        reference_size: usize,
        stream: RngStream,
    ) -> Result<Self> {
        let norm_const = normalizing_constant(&kernel, d, h)?;
        let table = OverlapTable::new(&kernel, d, h)?;
        let (reference, null_offset) = match &null {
            NullModel::Uniform => (Vec::new(), 0.0),
            NullModel::ExpFamily(model) => {
                if reference_size == 0 {
                    return Err(Error::InvalidParameter("reference sample must be non-empty".into()));
                }
                let reference = null.sample(d, reference_size, stream.child(0))?;
                let group = (1u64 << (d + 1)) as f64;
                let mean_density = reference
                    .iter()
                    .map(|z| model.density(z))
                    .collect::<Result<Vec<f64>>>()?
                    .iter()
                    .sum::<f64>()
                    / reference_size as f64;
                (reference, mean_density / group)
            }
        };
        Ok(Self { dim: d, bandwidth: h, kernel, norm_const, table, null, reference, null_offset })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn null(&self) -> &NullModel {
        &self.null
    }

    /// The ISE statistic for a sample of sphere points (folded internally).
    pub fn statistic(&self, points: &[SpherePoint]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::Empty("goodness-of-fit sample"));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, got: p.dim() + 1 });
        }
        let data: Vec<SpherePoint> = points.iter().map(fold).collect();
        let square = self.table.squared_norm(&data, self.norm_const);
        let rest = match &self.null {
            NullModel::Uniform => -1.0 / area(self.dim),
            NullModel::ExpFamily(_) => {
                let h2 = self.bandwidth * self.bandwidth;
                let mut cross = 0.0;
                for z in &self.reference {
                    for x in &data {
                        cross += orbit_kernel_sum(&self.kernel, h2, z.coords(), x.coords());
                    }
                }
                let group = (1u64 << (self.dim + 1)) as f64;
                let denom = data.len() as f64 * self.reference.len() as f64 * group;
                -2.0 * self.norm_const * cross / denom + self.null_offset
            }
        };
        Ok(square + rest)
    }

    /// Runs the test. Replicate `r` draws its null sample from
    /// `stream.child(r + 1)`, so results do not depend on the thread count.
    pub fn run(&self, points: &[SpherePoint], n_sim: usize, stream: RngStream) -> Result<GofResult> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "goodness-of-fit needs at least 2 observations, got {n}"
            )));
        }
        if n_sim < MIN_NULL_REPLICATES {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_NULL_REPLICATES} null replicates, got {n_sim}"
            )));
        }
        let observed = self.statistic(points)?;
        let sims = (0..n_sim)
            .into_par_iter()
            .map(|r| {
                let sample = self.null.sample(self.dim, n, stream.child(r as u64 + 1))?;
                self.statistic(&sample)
            })
            .collect::<Result<Vec<f64>>>()?;
        let exceed = sims.iter().filter(|s| **s >= observed).count();
        let (mean, se) = crate::montecarlo::mean_and_se(&sims);
        let sd = se * (n_sim as f64).sqrt();
        Ok(GofResult {
            statistic: observed,
            p_value: (1 + exceed) as f64 / (n_sim + 1) as f64,
            n_sim,
            z_score: (observed - mean) / sd,
            null_mean: mean,
            null_sd: sd,
        })
    }
}

/// One-shot goodness-of-fit test of compositional data against a null.
pub fn gof_test(
    data: &[Composition],
    null: NullModel,
    kernel: SmoothingKernel,
    h: f64,
    n_sim: usize,
    seed: u64,
) -> Result<GofResult> {
    let first = data.first().ok_or(Error::Empty("goodness-of-fit sample"))?;
    let d = first.dim();
    let stream = RngStream::new(seed, 0);
    let test = GofTest::new(null, kernel, d, h, stream)?;
    let points: Vec<SpherePoint> = data.iter().map(inflate).collect();
    test.run(&points, n_sim, stream)
}
