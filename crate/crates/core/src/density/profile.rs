use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::area;
use crate::montecarlo::{quad_1d, quad_breaks};

const QUAD_RTOL: f64 = 1e-9;

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Exponential,
    Compact,
    Indicator,
    Custom(ProfileFn),
}

/// A radial smoothing profile `K: [0, ∞) → [0, ∞)`, applied to
/// `(1 - z·x) / h²`.
#[derive(Clone)]
pub struct SmoothingKernel {
    name: String,
    shape: Shape,
    /// `K(r) = 0` for `r > support`.
    support: Option<f64>,
}

impl fmt::Debug for SmoothingKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothingKernel")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

impl PartialEq for SmoothingKernel {
    fn eq(&self, other: &Self) -> bool {
        match (&self.shape, &other.shape) {
            (Shape::Custom(a), Shape::Custom(b)) => Arc::ptr_eq(a, b),
            (Shape::Custom(_), _) | (_, Shape::Custom(_)) => false,
            _ => self.name == other.name,
        }
    }
}

impl Default for SmoothingKernel {
    fn default() -> Self {
        Self::exponential()
    }
}

impl SmoothingKernel {
    /// `K(r) = e^{-r}`; with it the spherical KDE is a von Mises–Fisher mixture.
    pub fn exponential() -> Self {
        Self { name: "exponential".into(), shape: Shape::Exponential, support: None }
    }

    /// `K(r) = (1 - r)` on `[0, 1]`, zero beyond.
    pub fn compact() -> Self {
        Self { name: "compact".into(), shape: Shape::Compact, support: Some(1.0) }
    }

    /// `K(r) = 1` on `[0, 1]`, zero beyond.
    pub fn indicator() -> Self {
        Self { name: "indicator".into(), shape: Shape::Indicator, support: Some(1.0) }
    }

    /// A user-supplied profile, which must be continuous and non-negative.
    /// `support` bounds the set where it is non-zero, if finite.
    pub fn custom<F>(name: &str, profile: F, support: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), shape: Shape::Custom(Arc::new(profile)), support }
    }

    /// Looks up a built-in profile by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "exponential" | "exp" => Ok(Self::exponential()),
            "compact" => Ok(Self::compact()),
            "indicator" => Ok(Self::indicator()),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel profile '{other}' (expected exponential, compact or indicator)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub(crate) fn is_exponential(&self) -> bool {
        matches!(self.shape, Shape::Exponential)
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match &self.shape {
            Shape::Exponential => (-r).exp(),
            Shape::Compact => {
                if r <= 1.0 {
                    1.0 - r
                } else {
                    0.0
                }
            }
            Shape::Indicator => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Custom(f) => f(r),
        }
    }

    /// `∫_0^∞ K(r)^j r^p dr`.
    fn radial_moment(&self, power: u32, p: f64) -> Result<f64> {
        let g = |r: f64| {
            let k = self.eval(r);
            if k == 0.0 {
                0.0
            } else {
                k.powi(power as i32) * r.powf(p)
            }
        };
        let res = match self.support {
            Some(s) => quad_1d(g, 0.0, s, QUAD_RTOL),
            None => quad_1d(g, 0.0, f64::INFINITY, QUAD_RTOL),
        };
        match res {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            Ok(v) => Err(Error::Divergent(format!(
                "profile '{}' has radial moment {v} (power {power}, exponent {p}); \
                 it must be finite and positive",
                self.name
            ))),
            Err(e) => Err(Error::Divergent(format!(
                "radial integral of profile '{}' (power {power}, exponent {p}) does not converge; \
                 the profile is not admissible in this dimension ({e})",
                self.name
            ))),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 1 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    Ok(())
}

/// `2^{d/2-1} vol(S^{d-1}) ∫_0^∞ K(r)^j r^{d/2-1} dr`, the small-bandwidth
/// scale of the normalizing constant (`j = 1`) and of the ISE variance (`j = 2`).
pub fn lambda_d(kernel: &SmoothingKernel, d: usize, power: u32) -> Result<f64> {
    check_dim(d)?;
    if !(power == 1 || power == 2) {
        return Err(Error::InvalidParameter(format!("power must be 1 or 2, got {power}")));
    }
    let half = d as f64 / 2.0;
    let moment = kernel.radial_moment(power, half - 1.0)?;
    Ok(2f64.powf(half - 1.0) * area(d - 1) * moment)
}

/// `∫ K(r) r^{d/2} dr / ∫ K(r) r^{d/2-1} dr`, the bias constant.
pub fn b_d(kernel: &SmoothingKernel, d: usize) -> Result<f64> {
    check_dim(d)?;
    let half = d as f64 / 2.0;
    Ok(kernel.radial_moment(1, half)? / kernel.radial_moment(1, half - 1.0)?)
}

/// `c_h` such that `z ↦ c_h K((1 - z·x) / h²)` integrates to one over `S^d`.
pub fn normalizing_constant(kernel: &SmoothingKernel, d: usize, h: f64) -> Result<f64> {
    check_dim(d)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    let h2 = h * h;
    let pd = (d - 1) as i32;
    // Integrate over the polar angle θ: 1 - cos θ = 2 sin²(θ/2).
    let integrand = |theta: f64| {
        let s = (0.5 * theta).sin();
        let k = kernel.eval(2.0 * s * s / h2);
        if k == 0.0 {
            0.0
        } else {
            k * theta.sin().powi(pd)
        }
    };
    let pi = std::f64::consts::PI;
    let mut breaks = vec![0.0];
    let mut edge = pi;
    if let Some(s) = kernel.support {
        let arg = h * (0.5 * s).sqrt();
        if arg < 1.0 {
            edge = 2.0 * arg.asin();
        }
    }
    // The mass sits within a few bandwidths of the pole.
    let mut t = h;
    while t < edge && breaks.len() < 64 {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.push(edge);
    if edge < pi {
        breaks.push(pi);
    }
    let integral = quad_breaks(integrand, &breaks, QUAD_RTOL)?;
    let inv = area(d - 1) * integral;
    if !(inv > 0.0 && inv.is_finite()) {
        return Err(Error::NonFinite(format!("normalizing integral is {inv}")));
    }
    Ok(1.0 / inv)
}

/// The rate-optimal bandwidth scale `n^{-1/(d+4)}`.
pub fn default_bandwidth(n: usize, d: usize) -> f64 {
    (n.max(1) as f64).powf(-1.0 / (d as f64 + 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lambda_examples() {
        let k = SmoothingKernel::exponential();
        assert!((lambda_d(&k, 2, 1).unwrap() - 2.0 * PI).abs() < 1e-8);
        assert!((lambda_d(&k, 2, 2).unwrap() - PI).abs() < 1e-8);
        assert!((lambda_d(&k, 4, 1).unwrap() - 4.0 * PI * PI).abs() < 1e-7);
        assert!(lambda_d(&k, 2, 3).is_err());
    }

    #[test]
    fn b_examples() {
        let k = SmoothingKernel::exponential();
        assert!((b_d(&k, 2).unwrap() - 1.0).abs() < 1e-8);
        assert!((b_d(&k, 4).unwrap() - 2.0).abs() < 1e-8);
        assert!((b_d(&SmoothingKernel::indicator(), 2).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn heavy_tail_is_rejected() {
        let k = SmoothingKernel::custom("cauchy", |r| 1.0 / (1.0 + r), None);
        assert!(matches!(lambda_d(&k, 2, 1), Err(Error::Divergent(_))));
    }

    #[test]
    fn normalizing_examples() {
        let k = SmoothingKernel::indicator();
        let c = normalizing_constant(&k, 2, 2f64.sqrt()).unwrap();
        assert!((1.0 / c - 4.0 * PI).abs() < 1e-9);
        assert!(normalizing_constant(&k, 2, 0.0).is_err());
        // d = 2 exponential has the closed form 2π h² (1 - e^{-2/h²}).
        let h = 0.3;
        let c = normalizing_constant(&SmoothingKernel::exponential(), 2, h).unwrap();
        let exact = 2.0 * PI * h * h * (1.0 - (-2.0 / (h * h)).exp());
        assert!((1.0 / c - exact).abs() < 1e-9 * exact);
        // circle: ∫ e^{-(1-cos θ)/h²} dθ = 2π e^{-κ} I_0(κ); check positivity and scale.
        let c1 = normalizing_constant(&SmoothingKernel::exponential(), 1, 0.1).unwrap();
        let approx = 1.0 / (0.1 * (2.0 * PI).sqrt());
        assert!((c1 / approx - 1.0).abs() < 0.01);
    }

    #[test]
    fn by_name_lookup() {
        assert_eq!(SmoothingKernel::by_name("compact").unwrap().name(), "compact");
        assert!(SmoothingKernel::by_name("gauss").is_err());
    }
}
