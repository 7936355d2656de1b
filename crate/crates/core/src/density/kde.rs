use crate::error::{Error, Result};
use crate::geometry::{fold, inflate, orbit, Composition, SpherePoint, ZERO_TOL};

use super::profile::{normalizing_constant, SmoothingKernel};

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    Ok(())
}

/// Weighted kernel density estimate on `S^d`:
/// `f̂(z) = (c_h / W) Σ_i w_i K((1 - z·x_i) / h²)`.
#[derive(Clone, Debug)]
pub struct SphericalKde {
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
    total_weight: f64,
    bandwidth: f64,
    kernel: SmoothingKernel,
    norm_const: f64,
}

impl SphericalKde {
    pub fn new(
        points: Vec<SpherePoint>,
        weights: Vec<f64>,
        kernel: SmoothingKernel,
        h: f64,
    ) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("density sample"))?;
        let d = first.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d + 1, got: p.dim() + 1 });
        }
        if weights.len() != points.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!("weights must be non-negative, got {w}")));
        }
        let total_weight: f64 = weights.iter().sum();
        if !(total_weight > 0.0) {
            return Err(Error::InvalidParameter("total weight must be positive".into()));
        }
        check_bandwidth(h)?;
        let norm_const = normalizing_constant(&kernel, d, h)?;
        Ok(Self { points, weights, total_weight, bandwidth: h, kernel, norm_const })
    }

    /// Equal weights.
    pub fn unweighted(points: Vec<SpherePoint>, kernel: SmoothingKernel, h: f64) -> Result<Self> {
        let weights = vec![1.0; points.len()];
        Self::new(points, weights, kernel, h)
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }
    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }
    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, z: &SpherePoint) -> Result<f64> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim() + 1, got: z.dim() + 1 });
        }
        let h2 = self.bandwidth * self.bandwidth;
        let sum: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * self.kernel.eval((1.0 - z.dot(x)) / h2))
            .sum();
        Ok(self.norm_const * sum / self.total_weight)
    }
}

/// `Σ_γ K((1 - z·γx) / h²)` over all `2^{d+1}` sign patterns.
///
/// Depends on `z` and `x` only through `|z_k x_k|`, so it is exactly invariant
/// under sign flips of either argument.
pub(crate) fn orbit_kernel_sum(kernel: &SmoothingKernel, h2: f64, z: &[f64], x: &[f64]) -> f64 {
    let u: Vec<f64> = z.iter().zip(x).map(|(a, b)| (a * b).abs()).collect();
    if kernel.is_exponential() {
        // Σ_s exp(-(1 - Σ s_k u_k)/h²) = e^{-1/h²} Π_k 2 cosh(u_k / h²)
        let mut log = -1.0 / h2;
        for uk in &u {
            let a = uk / h2;
            log += a + (-2.0 * a).exp().ln_1p();
        }
        return log.exp();
    }
    fn rec(kernel: &SmoothingKernel, h2: f64, u: &[f64], k: usize, acc: f64) -> f64 {
        if k == u.len() {
            return kernel.eval((1.0 - acc) / h2);
        }
        rec(kernel, h2, u, k + 1, acc + u[k]) + rec(kernel, h2, u, k + 1, acc - u[k])
    }
    rec(kernel, h2, &u, 0, 0.0)
}

/// Spread-out kernel density estimate of compositional data on `S^d`:
///
/// ```text
/// f̂(z) = c_h / (n 2^{d+1}) Σ_i Σ_γ K((1 - z·γ(x_i)) / h²)
/// ```
///
/// with `x_i` the inflated data. The estimate is invariant under sign flips,
/// and it is what [`SphericalKde`] gives on the full weighted orbit multiset.
#[derive(Clone, Debug)]
pub struct CompositionalKde {
    data: Vec<SpherePoint>,
    bandwidth: f64,
    kernel: SmoothingKernel,
    norm_const: f64,
}

impl CompositionalKde {
    /// Builds the estimate from first-orthant (or any) sphere points; points
    /// are folded.
    pub fn from_sphere(points: &[SpherePoint], kernel: SmoothingKernel, h: f64) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("density sample"))?;
        let d = first.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d + 1, got: p.dim() + 1 });
        }
        check_bandwidth(h)?;
        let norm_const = normalizing_constant(&kernel, d, h)?;
        Ok(Self { data: points.iter().map(fold).collect(), bandwidth: h, kernel, norm_const })
    }

    pub fn dim(&self) -> usize {
        self.data[0].dim()
    }
    pub fn len(&self) -> usize {
        self.data.len()
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }
    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }
    /// Inflated data points.
    pub fn data(&self) -> &[SpherePoint] {
        &self.data
    }

    fn group_order(&self) -> f64 {
        (1u64 << (self.dim() + 1)) as f64
    }

    pub(crate) fn eval_slice(&self, z: &[f64]) -> f64 {
        let h2 = self.bandwidth * self.bandwidth;
        let sum: f64 =
            self.data.iter().map(|x| orbit_kernel_sum(&self.kernel, h2, z, x.coords())).sum();
        self.norm_const * sum / (self.data.len() as f64 * self.group_order())
    }

    /// The spherical estimate `f̂^Γ(z)` at any point of `S^d`.
    pub fn eval(&self, z: &SpherePoint) -> Result<f64> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim() + 1, got: z.dim() + 1 });
        }
        Ok(self.eval_slice(z.coords()))
    }

    /// The density on the compositional domain `S^d_{≥0}`: the sum of the
    /// spherical estimate over the orbit of `z`, with multiplicities. By sign
    /// invariance this is `2^{d+1} f̂^Γ(z)`.
    pub fn pullback(&self, z: &SpherePoint) -> Result<f64> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim() + 1, got: z.dim() + 1 });
        }
        if z.coords().iter().any(|v| *v < -ZERO_TOL) {
            return Err(Error::Domain("pullback density needs a first-orthant point".into()));
        }
        Ok(self.group_order() * self.eval_slice(z.coords()))
    }

    /// Pull-back density at a composition (inflated first).
    pub fn density_at(&self, x: &Composition) -> Result<f64> {
        self.pullback(&inflate(x))
    }

    /// The explicit spread-out estimate: every distinct orbit point of every
    /// datum, weighted by its stabilizer order.
    pub fn to_spherical(&self) -> Result<SphericalKde> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for x in &self.data {
            let o = orbit(x);
            for p in o.distinct_points.iter() {
                points.push(p.clone());
                weights.push(o.multiplicity() as f64);
            }
        }
        SphericalKde::new(points, weights, self.kernel.clone(), self.bandwidth)
    }
}

/// Spread-out KDE of compositions.
pub fn spread_kde(data: &[Composition], kernel: SmoothingKernel, h: f64) -> Result<CompositionalKde> {
    if data.is_empty() {
        return Err(Error::Empty("density sample"));
    }
    let points: Vec<SpherePoint> = data.iter().map(inflate).collect();
    CompositionalKde::from_sphere(&points, kernel, h)
}

/// Spherical KDE of a weighted sample.
pub fn spherical_kde(
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
    kernel: SmoothingKernel,
    h: f64,
) -> Result<SphericalKde> {
    SphericalKde::new(points, weights, kernel, h)
}

/// The pull-back of a pull-back estimate; see [`CompositionalKde::pullback`].
pub fn pullback_density(est: &CompositionalKde, z: &SpherePoint) -> Result<f64> {
    est.pullback(z)
}

/// The density on `S^d` induced by a density `p` on the compositional domain:
/// `p̃(z) = |Γ_z| / |Γ| · p(fold(z))`.
pub fn induced_density<P>(p: P, z: &SpherePoint) -> f64
where
    P: Fn(&SpherePoint) -> f64,
{
    let zeros = z.coords().iter().filter(|v| v.abs() <= ZERO_TOL).count();
    let ratio = (1u64 << zeros) as f64 / (1u64 << z.coords().len()) as f64;
    ratio * p(&fold(z))
}
