use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{fold, inflate, Composition};
use crate::montecarlo::{uniform_orthant, RngStream};

use super::model::{ExpFamilyModel, MIN_LOG_PARTITION_SAMPLES};
use super::ThetaPoly;

/// Substream of the importance sample used by the fit.
const FIT_STREAM: u64 = 0x6669_7400;

/// Result of [`fit_mle`].
#[derive(Clone, Debug)]
pub struct MleFit {
    pub model: ExpFamilyModel,
    pub iterations: usize,
    /// `‖mean_data T - E_θ T‖∞` at the returned parameter.
    pub gradient_norm: f64,
}

/// Self-normalized importance-sampling view of `E_θ[T]` from a fixed uniform
/// sample.
struct ImportanceSample {
    stats: Vec<DVector<f64>>,
}

struct Moments {
    /// `log mean_j exp(θ·T_j)`
    log_mean_exp: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl ImportanceSample {
    fn objective(&self, theta: &DVector<f64>, data_mean: &DVector<f64>) -> f64 {
        let s: Vec<f64> = self.stats.iter().map(|t| t.dot(theta)).collect();
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = s.iter().map(|v| (v - max).exp()).sum();
        data_mean.dot(theta) - (max + (total / s.len() as f64).ln())
    }

    fn moments(&self, theta: &DVector<f64>) -> Moments {
        let p = theta.len();
        let s: Vec<f64> = self.stats.iter().map(|t| t.dot(theta)).collect();
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = s.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut mean = DVector::zeros(p);
        for (t, wj) in self.stats.iter().zip(&w) {
            mean.axpy(*wj / total, t, 1.0);
        }
        let mut cov = DMatrix::zeros(p, p);
        for (t, wj) in self.stats.iter().zip(&w) {
            let c = t - &mean;
            cov.ger(*wj / total, &c, &c, 1.0);
        }
        Moments { log_mean_exp: max + (total / s.len() as f64).ln(), mean, cov }
    }
}

/// Maximum-likelihood fit of a degree-`m` model to compositional data.
///
/// Maximizes `mean_i s_m(x_i; θ) - g(θ)` by damped Newton steps. `g` and its
/// derivatives `E_θ[T]`, `Cov_θ[T]` are estimated by self-normalized importance
/// sampling from one fixed uniform sample of size `n_mc` (keyed by `seed`), so
/// the objective is deterministic and exactly concave. The direction of
/// `(Σx_i²)^m`, which only shifts `g`, is projected out of `θ`. The returned
/// model's log-partition is re-estimated independently with `n_mc` samples.
pub fn fit_mle(
    data: &[Composition],
    m: usize,
    n_mc: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<MleFit> {
    let first = data.first().ok_or(Error::Empty("fit needs data"))?;
    let d = first.dim();
    if let Some(x) = data.iter().find(|x| x.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d + 1, got: x.dim() + 1 });
    }
    if n_mc < MIN_LOG_PARTITION_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "fit needs at least {MIN_LOG_PARTITION_SAMPLES} Monte Carlo samples, got {n_mc}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let template = ThetaPoly::zeros(d, m)?;
    let p = template.len();

    let points: Vec<_> = data.iter().map(inflate).collect();
    let spread = points.iter().any(|x| {
        x.coords().iter().zip(points[0].coords()).any(|(a, b)| (a - b).abs() > 1e-12)
    });
    if !spread {
        return Err(Error::Degenerate(
            "all observations coincide; the likelihood has no maximizer".into(),
        ));
    }

    // Sorting makes the data mean independent of the input order.
    let mut rows: Vec<Vec<f64>> = points.iter().map(|x| template.statistics(x.coords())).collect();
    rows.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut data_mean = DVector::zeros(p);
    for r in &rows {
        data_mean += DVector::from_column_slice(r);
    }
    data_mean /= rows.len() as f64;

    let sample = ImportanceSample {
        stats: uniform_orthant(d, n_mc, RngStream::new(seed, FIT_STREAM))
            .iter()
            .map(|z| DVector::from_vec(template.statistics(fold(z).coords())))
            .collect(),
    };

    let gauge = DVector::from_vec(template.gauge_direction()).normalize();
    let gauge_proj = &gauge * gauge.transpose();
    let mut theta = DVector::zeros(p);
    let mut iterations = 0;
    loop {
        let mo = sample.moments(&theta);
        let grad = &data_mean - &mo.mean;
        let gnorm = grad.amax();
        if !gnorm.is_finite() || !mo.log_mean_exp.is_finite() {
            return Err(Error::NonFinite("likelihood became non-finite".into()));
        }
        if gnorm < tol {
            let theta = ThetaPoly::from_coefficients(d, m, theta.iter().copied().collect())?;
            let model = ExpFamilyModel::new(theta, n_mc, seed)?;
            return Ok(MleFit { model, iterations, gradient_norm: gnorm });
        }
        if iterations >= max_iter {
            return Err(Error::Optimization(format!(
                "no convergence after {max_iter} iterations (gradient {gnorm:e}); \
                 the data may sit on a face of the simplex where the MLE diverges"
            )));
        }
        iterations += 1;
        let h = &mo.cov + &gauge_proj;
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                let shift = 1e-10 * h.diagonal().amax().max(1e-300);
                (h + DMatrix::identity(p, p) * shift)
                    .cholesky()
                    .ok_or_else(|| Error::Optimization("Hessian is not positive definite".into()))?
                    .solve(&grad)
            }
        };
        let f0 = sample.objective(&theta, &data_mean);
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut next;
        loop {
            next = &theta + &step * t;
            let f1 = sample.objective(&next, &data_mean);
            if f1.is_finite() && f1 >= f0 + 1e-4 * t * slope {
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                // No measurable ascent left; accept the current point.
                break;
            }
        }
        let c = gauge.dot(&next);
        theta = next - &gauge * c;
    }
}
