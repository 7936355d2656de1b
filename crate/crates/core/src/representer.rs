//! Kernel expansions in the span of `ω_m`, minimal-norm interpolation, ridge
//! regression, and the search for a degree at which given points have
//! linearly independent kernel sections.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{fold, OnSphere, SpherePoint};
use crate::harmonics::{gram, CompositionalKernel, GramMatrix};

/// Folded points closer than this are treated as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-10;

/// `f(t) = Σ_i c_i ω_m(x_i, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelExpansion {
    kernel: CompositionalKernel,
    centers: Vec<SpherePoint>,
    coefficients: Vec<f64>,
}

impl KernelExpansion {
    /// Centers are folded into the first orthant.
    pub fn new(d: usize, m: usize, centers: Vec<SpherePoint>, coefficients: Vec<f64>) -> Result<Self> {
        let kernel = CompositionalKernel::new(d, m)?;
        if centers.len() != coefficients.len() {
            return Err(Error::InvalidParameter(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coefficients.len()
            )));
        }
        if let Some(c) = centers.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d + 1, got: c.dim() + 1 });
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient {c}")));
        }
        Ok(Self { kernel, centers: centers.iter().map(fold).collect(), coefficients })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }
    pub fn degree(&self) -> usize {
        self.kernel.max_degree()
    }
    pub fn kernel(&self) -> &CompositionalKernel {
        &self.kernel
    }
    pub fn centers(&self) -> &[SpherePoint] {
        &self.centers
    }
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Value at a sphere point or composition (compositions are inflated,
    /// sphere points folded).
    pub fn evaluate<P: OnSphere + ?Sized>(&self, t: &P) -> Result<f64> {
        let z = fold(&t.to_sphere());
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim() + 1, got: z.dim() + 1 });
        }
        Ok(self
            .centers
            .iter()
            .zip(&self.coefficients)
            .map(|(x, c)| c * self.kernel.eval_folded(x.coords(), z.coords()))
            .sum())
    }

    /// `cᵀ G c`, the squared norm in the reproducing kernel Hilbert space.
    pub fn norm_squared(&self) -> Result<f64> {
        if self.centers.is_empty() {
            return Ok(0.0);
        }
        let g = gram(&self.centers, self.degree())?;
        let c = DVector::from_column_slice(&self.coefficients);
        Ok(c.dot(&(&g.entries * &c)))
    }
}

/// Evaluates an expansion; see [`KernelExpansion::evaluate`].
pub fn evaluate<P: OnSphere + ?Sized>(expansion: &KernelExpansion, t: &P) -> Result<f64> {
    expansion.evaluate(t)
}

/// A fitted expansion with diagnostics.
#[derive(Clone, Debug)]
pub struct FitReport {
    pub expansion: KernelExpansion,
    /// `f(x_i) - y_i`.
    pub residuals: Vec<f64>,
    pub gram_min_eigenvalue: f64,
    pub degree_used: usize,
}

fn check_points(points: &[SpherePoint]) -> Result<usize> {
    let first = points.first().ok_or(Error::Empty("need at least one point"))?;
    let d = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d + 1, got: p.dim() + 1 });
    }
    Ok(d)
}

fn check_distinct(points: &[SpherePoint]) -> Result<()> {
    let folded: Vec<SpherePoint> = points.iter().map(fold).collect();
    for i in 0..folded.len() {
        for j in i + 1..folded.len() {
            let dist: f64 = folded[i]
                .coords()
                .iter()
                .zip(folded[j].coords())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist <= DUPLICATE_TOL {
                return Err(Error::Duplicate(format!(
                    "points {i} and {j} coincide in the compositional domain"
                )));
            }
        }
    }
    Ok(())
}

/// The smallest `m ≤ m_max` for which the Gram matrix of `ω_m` on `points` is
/// positive definite (relative minimum eigenvalue above
/// [`crate::harmonics::INDEPENDENCE_RTOL`]).
///
/// Tries `m = 0`, then `1, 2, 4, 8, …` (capped at `m_max`), then bisects
/// between the last failure and the first success; the Gram matrix only grows
/// with `m`, so the first success bounds the answer.
pub fn min_independent_degree(points: &[SpherePoint], m_max: usize) -> Result<usize> {
    check_points(points)?;
    if m_max < 1 {
        return Err(Error::InvalidParameter("m_max must be at least 1".into()));
    }
    check_distinct(points)?;
    let independent = |m: usize| -> Result<bool> { Ok(gram(points, m)?.is_positive_definite()) };
    if independent(0)? {
        return Ok(0);
    }
    let mut lo = 0;
    let mut m = 1;
    let hi = loop {
        if independent(m)? {
            break m;
        }
        if m >= m_max {
            return Err(Error::NoIndependentDegree { m_max });
        }
        lo = m;
        m = (2 * m).min(m_max);
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if independent(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Solves the symmetric system `a c = y`: Cholesky, falling back to an SVD
/// least-squares solve, then iterative refinement; errors if the residual
/// stays above `1e-8 (1 + ‖y‖∞)`.
fn solve_symmetric(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let mut c = match a.clone().cholesky() {
        Some(ch) => ch.solve(y),
        None => a
            .clone()
            .svd(true, true)
            .solve(y, f64::EPSILON * a.nrows() as f64 * a.norm())
            .map_err(|e| Error::Singular(e.to_string()))?,
    };
    let tol = 1e-8 * (1.0 + y.amax());
    let svd = a.clone().svd(true, true);
    for _ in 0..3 {
        let r = y - a * &c;
        if r.amax() < tol {
            return Ok(c);
        }
        let dc = svd
            .solve(&r, f64::EPSILON * a.nrows() as f64 * a.norm())
            .map_err(|e| Error::Singular(e.to_string()))?;
        c += dc;
    }
    let r = (y - a * &c).amax();
    if r < tol {
        Ok(c)
    } else {
        Err(Error::Singular(format!(
            "linear solve residual {r:e} exceeds {tol:e}; the system is too ill-conditioned"
        )))
    }
}

fn residuals(expansion: &KernelExpansion, g: &GramMatrix, y: &[f64]) -> Vec<f64> {
    let c = DVector::from_column_slice(expansion.coefficients());
    let fitted = &g.entries * c;
    fitted.iter().zip(y).map(|(f, y)| f - y).collect()
}

fn check_response(points: &[SpherePoint], y: &[f64]) -> Result<()> {
    if y.len() != points.len() {
        return Err(Error::InvalidParameter(format!(
            "{} responses for {} points",
            y.len(),
            points.len()
        )));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("response {v}")));
    }
    Ok(())
}

/// Minimal-norm interpolant of `(points, y)` in the span of `ω_m`, with
/// diagnostics.
pub fn fit_interpolant(points: &[SpherePoint], y: &[f64], m: usize) -> Result<FitReport> {
    let d = check_points(points)?;
    check_response(points, y)?;
    check_distinct(points)?;
    let g = gram(points, m)?;
    let min_eig = g.min_eigenvalue();
    if !g.is_positive_definite() {
        return Err(Error::Singular(format!(
            "Gram matrix at degree {m} is singular (min eigenvalue {min_eig:e}); \
             use min_independent_degree to choose m"
        )));
    }
    let yv = DVector::from_column_slice(y);
    let c = solve_symmetric(&g.entries, &yv)?;
    let expansion = KernelExpansion::new(d, m, points.to_vec(), c.iter().copied().collect())?;
    let res = residuals(&expansion, &g, y);
    let r = max_abs(&res);
    if r >= 1e-8 * (1.0 + max_abs(y)) {
        return Err(Error::Singular(format!("interpolation residual {r:e} too large")));
    }
    Ok(FitReport { expansion, residuals: res, gram_min_eigenvalue: min_eig, degree_used: m })
}

/// Minimal-norm interpolant: coefficients solve `G c = y`.
pub fn interpolate(points: &[SpherePoint], y: &[f64], m: usize) -> Result<KernelExpansion> {
    Ok(fit_interpolant(points, y, m)?.expansion)
}

/// Ridge fit with diagnostics.
pub fn fit_ridge(points: &[SpherePoint], y: &[f64], m: usize, mu: f64) -> Result<FitReport> {
    let d = check_points(points)?;
    check_response(points, y)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ridge parameter must be positive, got {mu}; use interpolation for mu = 0"
        )));
    }
    let g = gram(points, m)?;
    let n = points.len();
    let a = &g.entries + DMatrix::identity(n, n) * mu;
    let yv = DVector::from_column_slice(y);
    let c = solve_symmetric(&a, &yv)?;
    let expansion = KernelExpansion::new(d, m, points.to_vec(), c.iter().copied().collect())?;
    let res = residuals(&expansion, &g, y);
    Ok(FitReport { expansion, residuals: res, gram_min_eigenvalue: g.min_eigenvalue(), degree_used: m })
}

/// Minimizer of `Σ (f(x_i) - y_i)² + μ ‖f‖²`: coefficients solve `(μI + G) c = y`.
pub fn ridge(points: &[SpherePoint], y: &[f64], m: usize, mu: f64) -> Result<KernelExpansion> {
    Ok(fit_ridge(points, y, m, mu)?.expansion)
}
