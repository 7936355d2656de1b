//! Integrated squared error: Monte Carlo estimates for arbitrary densities,
//! and an exact pairwise form for spread-out estimates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::harmonics::area;
use crate::montecarlo::{mc_integral_orthant, mc_integral_sphere, quad_breaks, McEstimate, RngStream};

use super::kde::CompositionalKde;
use super::profile::SmoothingKernel;

/// Smallest Monte Carlo sample accepted for an ISE estimate.
pub const MIN_ISE_SAMPLES: usize = 1000;

fn check_samples(n_mc: usize) -> Result<()> {
    if n_mc < MIN_ISE_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "ISE needs at least {MIN_ISE_SAMPLES} Monte Carlo samples, got {n_mc}"
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of `∫_{S^d} (f - g)²`.
pub fn ise<F, G>(f: F, g: G, d: usize, n_mc: usize, stream: RngStream) -> Result<McEstimate>
where
    F: Fn(&SpherePoint) -> f64,
    G: Fn(&SpherePoint) -> f64,
{
    check_samples(n_mc)?;
    mc_integral_sphere(|z| (f(z) - g(z)).powi(2), d, n_mc, stream)
}

/// Monte Carlo estimate of `∫_{S^d_{≥0}} (p̂ - p)²` for densities on the
/// compositional domain. For a spread-out estimate and an induced density this
/// is `2^{d+1}` times the spherical ISE.
pub fn compositional_ise<F, G>(p_hat: F, p: G, d: usize, n_mc: usize, stream: RngStream) -> Result<McEstimate>
where
    F: Fn(&SpherePoint) -> f64,
    G: Fn(&SpherePoint) -> f64,
{
    check_samples(n_mc)?;
    mc_integral_orthant(|z| (p_hat(z) - p(z)).powi(2), d, n_mc, stream)
}

const OVERLAP_RTOL: f64 = 1e-10;

/// The overlap `L(a·b) = ∫_{S^d} K((1 - z·a)/h²) K((1 - z·b)/h²) dz` of two
/// kernel bumps, tabulated once per `(K, d, h)`.
///
/// Nodes are uniform in `u = sin(α/2) = √((1 - a·b)/2)`, in which `L` is smooth
/// across the whole range, and lookups use Catmull–Rom interpolation.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    dim: usize,
    bandwidth: f64,
    inv_step: f64,
    values: Vec<f64>,
}

impl OverlapTable {
    pub fn new(kernel: &SmoothingKernel, d: usize, h: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain("sphere dimension must be at least 1".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
        }
        let nodes = ((96.0 / h.min(1.0)).ceil() as usize).max(128);
        let step = 1.0 / nodes as f64;
        let values = (0..=nodes)
            .into_par_iter()
            .map(|i| {
                let u = (i as f64 * step).min(1.0);
                overlap_exact(kernel, d, h, 2.0 * u.asin())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { dim: d, bandwidth: h, inv_step: nodes as f64, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Interpolated `L(t)` for `t = a·b`.
    #[inline]
    pub fn eval_dot(&self, t: f64) -> f64 {
        let u = (0.5 * (1.0 - t)).max(0.0).sqrt().min(1.0);
        let p = u * self.inv_step;
        let last = self.values.len() - 1;
        let i = (p as usize).min(last - 1);
        let s = p - i as f64;
        let v = &self.values;
        let p1 = v[i];
        let p2 = v[i + 1];
        // L is even in u at u = 0; extrapolate linearly past u = 1.
        let p0 = if i == 0 { v[1] } else { v[i - 1] };
        let p3 = if i + 2 <= last { v[i + 2] } else { 2.0 * v[last] - v[last - 1] };
        let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
        let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
        let c = 0.5 * (p2 - p0);
        ((a * s + b) * s + c) * s + p1
    }

    /// `Σ_γ L(γx·y)` over all sign patterns.
    pub(crate) fn orbit_sum(&self, x: &[f64], y: &[f64]) -> f64 {
        fn rec(t: &OverlapTable, x: &[f64], y: &[f64], k: usize, acc: f64) -> f64 {
            if k == x.len() {
                return t.eval_dot(acc);
            }
            let u = x[k] * y[k];
            rec(t, x, y, k + 1, acc + u) + rec(t, x, y, k + 1, acc - u)
        }
        rec(self, x, y, 0, 0.0)
    }

    /// `∫_{S^d} f̂²` for the spread-out estimate on `data` (first-orthant
    /// points) with normalizing constant `norm_const`:
    /// `c_h² / (n² |Γ|) Σ_{i,j} Σ_γ L(γx_i·x_j)`.
    pub fn squared_norm(&self, data: &[SpherePoint], norm_const: f64) -> f64 {
        let n = data.len();
        let mut diag = 0.0;
        let mut off = 0.0;
        for i in 0..n {
            let xi = data[i].coords();
            diag += self.orbit_sum(xi, xi);
            for xj in &data[i + 1..] {
                off += self.orbit_sum(xi, xj.coords());
            }
        }
        let group = (1u64 << (self.dim + 1)) as f64;
        norm_const * norm_const * (diag + 2.0 * off) / (n as f64 * n as f64 * group)
    }
}

/// `L(α)` by nested adaptive quadrature in polar coordinates about `a`, with
/// `b` at polar angle `α`.
pub(crate) fn overlap_exact(kernel: &SmoothingKernel, d: usize, h: f64, alpha: f64) -> Result<f64> {
    use std::f64::consts::PI;
    let h2 = h * h;
    let hav = |x: f64| {
        let s = (0.5 * x).sin();
        2.0 * s * s
    };
    // polar extent of one bump
    let reach = match kernel.support() {
        Some(s) if h * (0.5 * s).sqrt() < 1.0 => 2.0 * (h * (0.5 * s).sqrt()).asin(),
        Some(_) => PI,
        None => PI,
    };
    if d == 1 {
        let f = |th: f64| kernel.eval(hav(th) / h2) * kernel.eval(hav(th - alpha) / h2);
        let mut breaks = vec![0.0, alpha, PI, alpha + PI, 2.0 * PI];
        for c in [0.0, alpha, 2.0 * PI, alpha + 2.0 * PI] {
            for s in [-1.0, 1.0] {
                for w in [h, reach] {
                    breaks.push(c + s * w);
                }
            }
        }
        let breaks = clean_breaks(breaks, 0.0, 2.0 * PI);
        return quad_breaks(f, &breaks, OVERLAP_RTOL);
    }
    let pd = (d - 1) as i32;
    let qd = (d - 2) as i32;
    let sin_a = alpha.sin();
    let inner = |th: f64| -> Result<f64> {
        let ka = kernel.eval(hav(th) / h2);
        if ka == 0.0 {
            return Ok(0.0);
        }
        let base = hav(th - alpha);
        let spread = th.sin() * sin_a;
        let g = |phi: f64| {
            let k = kernel.eval((base + spread * hav(phi)) / h2);
            if k == 0.0 {
                0.0
            } else {
                k * phi.sin().powi(qd)
            }
        };
        let mut breaks = vec![0.0, PI];
        if spread > 0.0 {
            // the bump around b has angular width about h / √spread in φ
            let w = h / spread.sqrt();
            let mut t = w;
            while t < PI && breaks.len() < 40 {
                breaks.push(t);
                t *= 2.0;
            }
            if let Some(s) = kernel.support() {
                let x = (s * h2 - base) / spread;
                if x > 0.0 && x < 2.0 {
                    breaks.push(2.0 * (0.5 * x).sqrt().asin());
                }
            }
        }
        let breaks = clean_breaks(breaks, 0.0, PI);
        Ok(ka * th.sin().powi(pd) * quad_breaks(g, &breaks, OVERLAP_RTOL)?)
    };
    let mut err = None;
    let outer = |th: f64| match inner(th) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let mut breaks = vec![0.0, alpha, PI, reach];
    for s in [-1.0, 1.0] {
        breaks.push(alpha + s * reach);
        let mut w = h;
        while w < PI {
            breaks.push(w);
            breaks.push(alpha + s * w);
            w *= 2.0;
        }
    }
    let breaks = clean_breaks(breaks, 0.0, PI);
    let v = quad_breaks(outer, &breaks, OVERLAP_RTOL)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(area(d - 2) * v)
}

fn clean_breaks(mut b: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    b.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    b.push(lo);
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    b
}

/// Exact `∫_{S^d} (f̂ - 1/vol(S^d))²` for a spread-out estimate against the
/// uniform density, using a prepared overlap table.
pub fn ise_to_uniform(kde: &CompositionalKde, table: &OverlapTable) -> Result<f64> {
    if table.dim != kde.dim() || table.bandwidth != kde.bandwidth() {
        return Err(Error::InvalidParameter(
            "overlap table was built for a different dimension or bandwidth".into(),
        ));
    }
    Ok(table.squared_norm(kde.data(), kde.norm_const()) - 1.0 / area(kde.dim()))
}
