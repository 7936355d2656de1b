//! The compositional exponential family
//!
//! ```text
//! p(x; θ) = exp(s_m(x; θ) - g(θ)),   s_m(x; θ) = Σ_α θ_α Π_i (x_i²)^{α_i},
//! ```
//!
//! on `S^d_{≥0}`, with `α` running over the multi-indices of total degree `m`.

mod fit;
mod io;
mod model;

pub use fit::{fit_mle, MleFit};
pub use io::{parse_theta_file, write_model, ThetaFile};
pub use model::{log_partition, sample, ExpFamilyModel, MIN_ACCEPTANCE, MIN_LOG_PARTITION_SAMPLES};

use crate::error::{Error, Result};
use crate::geometry::{inflate, Composition, SpherePoint, MAX_DIM};
use crate::representer::KernelExpansion;

/// All multi-indices of total degree `m` over `d + 1` variables, in
/// descending lexicographic order (`(m,0,…,0)` first, `(0,…,0,m)` last).
pub fn basis(d: usize, m: usize) -> Vec<Vec<u32>> {
    fn rec(rest: usize, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(rest as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=rest).rev() {
            cur.push(a as u32);
            rec(rest - a, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, d + 1, &mut Vec::with_capacity(d + 1), &mut out);
    out
}

/// Natural parameter: coefficients of a degree-`m` homogeneous polynomial in
/// the squared coordinates, stored in [`basis`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaPoly {
    dim: usize,
    degree: usize,
    basis: Vec<Vec<u32>>,
    coeffs: Vec<f64>,
}

impl ThetaPoly {
    pub fn zeros(d: usize, m: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::Domain(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        let basis = basis(d, m);
        let coeffs = vec![0.0; basis.len()];
        Ok(Self { dim: d, degree: m, basis, coeffs })
    }

    /// Coefficients in [`basis`] order.
    pub fn from_coefficients(d: usize, m: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut t = Self::zeros(d, m)?;
        if coeffs.len() != t.coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients for d = {d}, m = {m}, got {}",
                t.coeffs.len(),
                coeffs.len()
            )));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient {c}")));
        }
        t.coeffs = coeffs;
        Ok(t)
    }

    /// Sparse construction; unlisted multi-indices get coefficient zero.
    pub fn from_terms<'a, I>(d: usize, m: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [u32], f64)>,
    {
        let mut t = Self::zeros(d, m)?;
        for (alpha, c) in terms {
            t.set(alpha, c)?;
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(α, θ_α)` pairs in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.basis.iter().map(Vec::as_slice).zip(self.coeffs.iter().copied())
    }

    fn index_of(&self, alpha: &[u32]) -> Result<usize> {
        if alpha.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, got: alpha.len() });
        }
        let total: u32 = alpha.iter().sum();
        if total as usize != self.degree {
            return Err(Error::InvalidParameter(format!(
                "multi-index {alpha:?} has degree {total}, expected {}",
                self.degree
            )));
        }
        Ok(self.basis.iter().position(|b| b == alpha).expect("complete basis"))
    }

    pub fn coefficient(&self, alpha: &[u32]) -> Result<f64> {
        Ok(self.coeffs[self.index_of(alpha)?])
    }

    pub fn set(&mut self, alpha: &[u32], value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("coefficient {value}")));
        }
        let i = self.index_of(alpha)?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Coefficients of `(Σ_i x_i²)^m`, the multinomial coefficients. On the
    /// sphere this polynomial is the constant 1.
    pub fn gauge_direction(&self) -> Vec<f64> {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        let mf = fact(self.degree as u32);
        self.basis.iter().map(|a| mf / a.iter().map(|k| fact(*k)).product::<f64>()).collect()
    }

    /// Sufficient statistics `T_α(x) = Π_i (x_i²)^{α_i}`.
    pub fn statistics(&self, x: &[f64]) -> Vec<f64> {
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        self.basis
            .iter()
            .map(|a| a.iter().zip(&sq).map(|(k, y)| y.powi(*k as i32)).product())
            .collect()
    }

    /// `s_m(x; θ)` for raw coordinates; depends on squares only.
    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        self.statistics(x).iter().zip(&self.coeffs).map(|(t, c)| t * c).sum()
    }

    pub fn eval(&self, x: &SpherePoint) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, got: x.dim() + 1 });
        }
        Ok(self.eval_slice(x.coords()))
    }
}

/// Empirical kernel mean `Σ_i ω_m(x_i, ·) / n`.
pub fn kernel_mean(data: &[Composition], m: usize) -> Result<KernelExpansion> {
    let first = data.first().ok_or(Error::Empty("kernel mean needs data"))?;
    let d = first.dim();
    let n = data.len();
    let centers = data.iter().map(inflate).collect();
    KernelExpansion::new(d, m, centers, vec![1.0 / n as f64; n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_order_and_counts() {
        assert_eq!(basis(2, 1), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(
            basis(2, 2),
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(basis(3, 2).len(), 10);
        assert_eq!(basis(2, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn gauge_is_constant_on_sphere() {
        let t = ThetaPoly::zeros(2, 3).unwrap();
        let e = ThetaPoly::from_coefficients(2, 3, t.gauge_direction()).unwrap();
        let x = SpherePoint::normalize(vec![0.3, -0.2, 0.9]).unwrap();
        assert!((e.eval(&x).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn term_validation() {
        let mut t = ThetaPoly::zeros(2, 2).unwrap();
        assert!(t.set(&[1, 0, 0], 1.0).is_err());
        assert!(t.set(&[1, 1], 1.0).is_err());
        t.set(&[0, 1, 1], 2.5).unwrap();
        assert_eq!(t.coefficient(&[0, 1, 1]).unwrap(), 2.5);
        assert_eq!(t.coefficients()[4], 2.5);
    }

    #[test]
    fn kernel_mean_cases() {
        let x = Composition::new(vec![0.2, 0.3, 0.5]).unwrap();
        let one = kernel_mean(std::slice::from_ref(&x), 2).unwrap();
        assert_eq!(one.coefficients(), &[1.0]);
        let two = kernel_mean(&[x.clone(), x.clone()], 2).unwrap();
        let t = Composition::new(vec![0.6, 0.1, 0.3]).unwrap();
        assert!((one.evaluate(&t).unwrap() - two.evaluate(&t).unwrap()).abs() < 1e-15);
        assert!(kernel_mean(&[], 2).is_err());
    }
}
