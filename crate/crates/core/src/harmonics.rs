//! Zonal spherical kernels, their sign-flip averages, and the degree-`m`
//! compositional reproducing kernel.
//!
//! The zonal kernel of the degree-`i` Laplacian eigenspace on `S^d` is
//! evaluated through the addition theorem,
//!
//! ```text
//! k_i(x, t) = a_i / vol(S^d) · C_i^λ(x·t) / C_i^λ(1),   λ = (d - 1) / 2,
//! ```
//!
//! which for `d = 1` degenerates to `cos(iθ) / π`. The compositional kernel
//! `ω_m` sums the sign-flip averages of the even-degree kernels `k_0 … k_{2m}`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{fold, SpherePoint};

/// Minimum eigenvalue, relative to the largest, for a Gram matrix to count as
/// positive definite.
pub const INDEPENDENCE_RTOL: f64 = 1e-10;

/// Surface area of `S^k` for any `k ≥ 0` (`vol(S^0) = 2`).
pub(crate) fn area(k: usize) -> f64 {
    use std::f64::consts::PI;
    let mut v = if k.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut j = if k.is_multiple_of(2) { 0 } else { 1 };
    while j < k {
        j += 2;
        v *= 2.0 * PI / (j - 1) as f64;
    }
    v
}

/// Surface area of the unit sphere `S^d`, `2 π^{(d+1)/2} / Γ((d+1)/2)`.
pub fn sphere_volume(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    Ok(area(d))
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Dimension of the degree-`i` spherical harmonics on `S^d`:
/// `C(d+i, d) - C(d+i-2, d)`.
pub fn eigenspace_dim(d: usize, i: usize) -> u128 {
    let (d, i) = (d as i64, i as i64);
    binomial(d + i, d) - binomial(d + i - 2, d)
}

fn check_argument(t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("Gegenbauer argument {t} outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Gegenbauer polynomial `C_n^λ(t)` by the three-term recurrence.
pub fn gegenbauer(n: usize, lambda: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "order must be positive, got {lambda}; use gegenbauer_normalized for λ = 0"
        )));
    }
    let t = check_argument(t)?;
    if n == 0 {
        return Ok(1.0);
    }
    let (mut c0, mut c1) = (1.0, 2.0 * lambda * t);
    for k in 2..=n {
        let kf = k as f64;
        let c2 = (2.0 * t * (kf + lambda - 1.0) * c1 - (kf + 2.0 * lambda - 2.0) * c0) / kf;
        c0 = c1;
        c1 = c2;
    }
    Ok(c1)
}

/// Fills `out[n] = C_n^λ(t) / C_n^λ(1)` for `n < out.len()`. At `λ = 0` this is
/// the Chebyshev polynomial `T_n(t)`, the limit of the normalized family.
fn normalized_sequence(lambda: f64, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = t;
    for n in 2..out.len() {
        let nf = n as f64;
        out[n] = (2.0 * t * (nf + lambda - 1.0) * out[n - 1] - (nf - 1.0) * out[n - 2])
            / (nf + 2.0 * lambda - 1.0);
    }
}

/// `C_n^λ(t) / C_n^λ(1)` for `λ ≥ 0`.
pub fn gegenbauer_normalized(n: usize, lambda: f64, t: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("order must be non-negative, got {lambda}")));
    }
    let t = check_argument(t)?;
    let mut buf = vec![0.0; n + 1];
    normalized_sequence(lambda, t, &mut buf);
    Ok(buf[n])
}

fn check_pair(x: &SpherePoint, y: &SpherePoint, dim: usize) -> Result<()> {
    for p in [x, y] {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim + 1, got: p.dim() + 1 });
        }
    }
    Ok(())
}

/// Averages `f(Σ_k s_k u_k)` over all sign vectors `s`. With `even = true` the
/// first sign is pinned to `+1`, which is exact when `f` is even.
fn sign_sum_average<F: FnMut(f64) -> f64>(u: &[f64], even: bool, mut f: F) -> f64 {
    fn rec<F: FnMut(f64) -> f64>(u: &[f64], k: usize, acc: f64, f: &mut F) -> f64 {
        if k == u.len() {
            return f(acc);
        }
        rec(u, k + 1, acc + u[k], f) + rec(u, k + 1, acc - u[k], f)
    }
    if even {
        rec(u, 1, u[0], &mut f) / (1u64 << (u.len() - 1)) as f64
    } else {
        rec(u, 0, 0.0, &mut f) / (1u64 << u.len()) as f64
    }
}

/// Reproducing kernel of the degree-`i` eigenspace `H_i ⊂ L²(S^d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZonalKernel {
    dim: usize,
    degree: usize,
    eigdim: u128,
    order: f64,
    peak: f64,
}

impl ZonalKernel {
    pub fn new(d: usize, i: usize) -> Result<Self> {
        let vol = sphere_volume(d)?;
        let eigdim = eigenspace_dim(d, i);
        Ok(Self {
            dim: d,
            degree: i,
            eigdim,
            order: (d as f64 - 1.0) / 2.0,
            peak: eigdim as f64 / vol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn eigdim(&self) -> u128 {
        self.eigdim
    }
    pub fn gegenbauer_order(&self) -> f64 {
        self.order
    }

    /// `a_i / vol(S^d)`, the diagonal value and the global bound.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// The kernel as a function of `t = x·y`.
    pub fn eval_dot(&self, t: f64) -> f64 {
        let mut buf = vec![0.0; self.degree + 1];
        normalized_sequence(self.order, t.clamp(-1.0, 1.0), &mut buf);
        self.peak * buf[self.degree]
    }

    pub fn eval(&self, x: &SpherePoint, t: &SpherePoint) -> Result<f64> {
        check_pair(x, t, self.dim)?;
        Ok(self.eval_dot(x.dot(t)))
    }
}

pub fn zonal_eval(kernel: &ZonalKernel, x: &SpherePoint, t: &SpherePoint) -> Result<f64> {
    kernel.eval(x, t)
}

/// `(1/|Γ|) Σ_γ k_i(γx, y)`: the reproducing kernel of the sign-flip invariant
/// part of `H_i`.
pub fn gamma_average_kernel(kernel: &ZonalKernel, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    check_pair(x, y, kernel.dim)?;
    let u: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| a * b).collect();
    let mut buf = vec![0.0; kernel.degree + 1];
    Ok(sign_sum_average(&u, false, |t| {
        normalized_sequence(kernel.order, t.clamp(-1.0, 1.0), &mut buf);
        kernel.peak * buf[kernel.degree]
    }))
}

/// `[k_i(x, y) + k_i(-x, y)] / 2`, the kernel of the antipodally invariant part.
pub fn projective_kernel(kernel: &ZonalKernel, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    check_pair(x, y, kernel.dim)?;
    let t = x.dot(y);
    Ok(0.5 * (kernel.eval_dot(t) + kernel.eval_dot(-t)))
}

/// The degree-`m` compositional reproducing kernel
/// `ω_m = Σ_{i=0..m} w_{2i}` on `S^d / Γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionalKernel {
    dim: usize,
    max_degree: usize,
    order: f64,
    /// `a_{2i} / vol(S^d)` for `i = 0..=m`.
    weights: Vec<f64>,
}

impl CompositionalKernel {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        let vol = sphere_volume(d)?;
        let weights = (0..=m).map(|i| eigenspace_dim(d, 2 * i) as f64 / vol).collect();
        Ok(Self { dim: d, max_degree: m, order: (d as f64 - 1.0) / 2.0, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The even-degree zonal kernels `k_0, k_2, …, k_{2m}` that make up `ω_m`.
    pub fn components(&self) -> Vec<ZonalKernel> {
        (0..=self.max_degree)
            .map(|i| ZonalKernel::new(self.dim, 2 * i).expect("dimension validated"))
            .collect()
    }

    /// Upper bound `Σ a_{2i} / vol(S^d)` on `ω_m(x, x)`.
    pub fn diagonal_bound(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_i k_{2i}(t)` for `t = x·y`, before sign averaging.
    fn zonal_sum(&self, t: f64, buf: &mut [f64]) -> f64 {
        normalized_sequence(self.order, t.clamp(-1.0, 1.0), buf);
        self.weights.iter().enumerate().map(|(i, w)| w * buf[2 * i]).sum()
    }

    /// Evaluation for first-orthant coordinate slices of matching length.
    pub(crate) fn eval_folded(&self, x: &[f64], y: &[f64]) -> f64 {
        let u: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
        let mut buf = vec![0.0; 2 * self.max_degree + 1];
        // Every component has even degree, so the average can pin one sign.
        sign_sum_average(&u, true, |t| self.zonal_sum(t, &mut buf))
    }

    pub fn eval(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        check_pair(x, y, self.dim)?;
        Ok(self.eval_folded(fold(x).coords(), fold(y).coords()))
    }
}

pub fn omega_eval(kernel: &CompositionalKernel, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    kernel.eval(x, y)
}

/// A kernel Gram matrix `G_ij = ω_m(x_i, x_j)`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub centers: Vec<SpherePoint>,
    pub degree: usize,
}

impl GramMatrix {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> =
            SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `λ_min / λ_max`.
    pub fn relative_min_eigenvalue(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0] / ev[ev.len() - 1]
    }

    /// Positive definite under the scale-free threshold [`INDEPENDENCE_RTOL`].
    pub fn is_positive_definite(&self) -> bool {
        self.relative_min_eigenvalue() > INDEPENDENCE_RTOL
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Assembles the Gram matrix of `ω_m` over `points`.
pub fn gram(points: &[SpherePoint], m: usize) -> Result<GramMatrix> {
    let first = points.first().ok_or(Error::Empty("Gram matrix needs at least one point"))?;
    let kernel = CompositionalKernel::new(first.dim(), m)?;
    for p in points {
        if p.dim() != kernel.dim {
            return Err(Error::DimensionMismatch { expected: kernel.dim + 1, got: p.dim() + 1 });
        }
    }
    let folded: Vec<SpherePoint> = points.iter().map(fold).collect();
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| kernel.eval_folded(folded[i].coords(), folded[j].coords()))
                .collect()
        })
        .collect();
    let mut entries = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            entries[(i, i + off)] = *v;
            entries[(i + off, i)] = *v;
        }
    }
    Ok(GramMatrix { entries, centers: points.to_vec(), degree: m })
}
