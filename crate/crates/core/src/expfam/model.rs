use crate::error::{Error, Result};
use crate::geometry::{contract_l1, fold, Composition, OnSphere, SpherePoint};
use crate::harmonics::sphere_volume;
use crate::montecarlo::{sample_sphere, McEstimate, RngStream};

use super::ThetaPoly;

/// Smallest Monte Carlo sample accepted for the log-partition estimate.
pub const MIN_LOG_PARTITION_SAMPLES: usize = 10_000;

/// Rejection sampling is refused below this expected acceptance rate.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Substream that keys the log-partition sample of a model seed.
const LOG_PARTITION_STREAM: u64 = 0x6c6f_6750;

/// Grid points used to bracket the range of `s_m` over the simplex.
const ENVELOPE_GRID_POINTS: usize = 40_000;

/// The envelope sits this fraction of the observed range above the observed
/// maximum.
const ENVELOPE_MARGIN: f64 = 0.2;

fn log_orthant_volume(d: usize) -> Result<f64> {
    Ok(sphere_volume(d)?.ln() - ((d + 1) as f64) * std::f64::consts::LN_2)
}

/// `g(θ) = log ∫_{S^d_{≥0}} exp(s_m) = log[(1/2^{d+1}) ∫_{S^d} exp(s_m)]` by
/// uniform sampling, with log-sum-exp stabilization and a delta-method
/// standard error.
pub fn log_partition(theta: &ThetaPoly, n_mc: usize, stream: RngStream) -> Result<McEstimate> {
    if n_mc < MIN_LOG_PARTITION_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "log-partition needs at least {MIN_LOG_PARTITION_SAMPLES} samples, got {n_mc}"
        )));
    }
    let d = theta.dim();
    let mut rng = stream.rng();
    let s: Vec<f64> = (0..n_mc).map(|_| theta.eval_slice(sample_sphere(d, &mut rng).coords())).collect();
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonFinite(format!("exponent maximum is {max}")));
    }
    let w: Vec<f64> = s.iter().map(|v| (v - max).exp()).collect();
    let (mean, se) = crate::montecarlo::mean_and_se(&w);
    let value = log_orthant_volume(d)? + max + mean.ln();
    if !value.is_finite() {
        return Err(Error::NonFinite(format!(
            "log-partition overflowed (largest exponent {max})"
        )));
    }
    Ok(McEstimate { value, std_error: se / mean, n: n_mc })
}

/// A member of the family with its estimated log-partition.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpFamilyModel {
    pub theta: ThetaPoly,
    pub log_partition: f64,
    pub log_partition_se: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl ExpFamilyModel {
    /// Estimates `g(θ)` with `n_mc` samples drawn from a stream keyed by `seed`.
    pub fn new(theta: ThetaPoly, n_mc: usize, seed: u64) -> Result<Self> {
        let g = log_partition(&theta, n_mc, RngStream::new(seed, LOG_PARTITION_STREAM))?;
        Ok(Self {
            theta,
            log_partition: g.value,
            log_partition_se: g.std_error,
            mc_samples: n_mc,
            seed,
        })
    }

    /// Reassembles a model from stored parts.
    pub fn from_parts(theta: ThetaPoly, log_partition: f64, log_partition_se: f64, mc_samples: usize, seed: u64) -> Self {
        Self { theta, log_partition, log_partition_se, mc_samples, seed }
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// `s_m(x) - g(θ)`; compositions are inflated first. Sphere points need
    /// not be folded since `s_m` depends on squared coordinates only.
    pub fn log_density<P: OnSphere + ?Sized>(&self, x: &P) -> Result<f64> {
        Ok(self.theta.eval(&x.to_sphere())? - self.log_partition)
    }

    pub fn density<P: OnSphere + ?Sized>(&self, x: &P) -> Result<f64> {
        Ok(self.log_density(x)?.exp())
    }

    /// `(min, max)` of `s_m` over a simplex grid in the squared coordinates,
    /// the maximum polished by local pairwise mass transfers.
    pub fn exponent_range(&self) -> (f64, f64) {
        let d = self.dim();
        let parts = d + 1;
        let mut r = 1usize;
        while r < 400 && binom(r + 1 + d, d) <= ENVELOPE_GRID_POINTS {
            r += 1;
        }
        let eval_y = |y: &[f64]| {
            let x: Vec<f64> = y.iter().map(|v| v.max(0.0).sqrt()).collect();
            self.theta.eval_slice(&x)
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut best = vec![0.0; parts];
        let mut counts = vec![0usize; parts];
        counts[0] = r;
        loop {
            let y: Vec<f64> = counts.iter().map(|c| *c as f64 / r as f64).collect();
            let v = eval_y(&y);
            lo = lo.min(v);
            if v > hi {
                hi = v;
                best = y;
            }
            if !next_composition(&mut counts) {
                break;
            }
        }
        let mut step = 1.0 / r as f64;
        while step > 1e-12 {
            let mut improved = false;
            for i in 0..parts {
                for j in 0..parts {
                    if i == j || best[i] <= 0.0 {
                        continue;
                    }
                    let delta = step.min(best[i]);
                    let mut y = best.clone();
                    y[i] -= delta;
                    y[j] += delta;
                    let v = eval_y(&y);
                    if v > hi {
                        hi = v;
                        best = y;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (lo, hi)
    }

    /// Upper bound for `s_m` used by the rejection sampler:
    /// observed maximum plus a margin of 20% of the observed range.
    pub fn envelope(&self) -> f64 {
        let (lo, hi) = self.exponent_range();
        hi + ENVELOPE_MARGIN * (hi - lo)
    }

    /// Expected acceptance rate of uniform-proposal rejection sampling.
    pub fn acceptance_rate(&self) -> Result<f64> {
        Ok((self.log_partition - log_orthant_volume(self.dim())? - self.envelope()).exp())
    }

    /// `n` independent first-orthant sphere points from the model.
    pub fn sample_sphere(&self, n: usize, stream: RngStream) -> Result<Vec<SpherePoint>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let bound = self.envelope();
        let rate = (self.log_partition - log_orthant_volume(self.dim())? - bound).exp();
        if !(rate >= MIN_ACCEPTANCE) {
            return Err(Error::Sampling(format!(
                "expected acceptance rate {rate:e} is below {MIN_ACCEPTANCE:e}; \
                 reparameterize or shrink the natural parameter"
            )));
        }
        let max_proposals = (100.0 * n as f64 / rate) as usize + 10_000;
        let d = self.dim();
        let mut rng = stream.rng();
        let mut out = Vec::with_capacity(n);
        let mut proposals = 0usize;
        while out.len() < n {
            if proposals >= max_proposals {
                return Err(Error::Sampling(format!(
                    "only {} of {n} points accepted after {proposals} proposals",
                    out.len()
                )));
            }
            proposals += 1;
            let z = fold(&sample_sphere(d, &mut rng));
            let s = self.theta.eval_slice(z.coords());
            if s > bound + 1e-9 {
                return Err(Error::Sampling(format!(
                    "exponent {s} exceeds the envelope {bound}; the sampler would be biased"
                )));
            }
            let u: f64 = rand::Rng::random(&mut rng);
            if u < (s - bound).exp() {
                out.push(z);
            }
        }
        Ok(out)
    }

    /// `n` independent compositions from the model.
    pub fn sample(&self, n: usize, stream: RngStream) -> Result<Vec<Composition>> {
        self.sample_sphere(n, stream)?.iter().map(contract_l1).collect()
    }
}

/// Draws from a model; see [`ExpFamilyModel::sample`].
pub fn sample(model: &ExpFamilyModel, n: usize, seed: u64) -> Result<Vec<Composition>> {
    model.sample(n, RngStream::new(seed, 0))
}

fn binom(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    let mut acc: usize = 1;
    for j in 0..k {
        acc = acc.saturating_mul(n - j) / (j + 1);
    }
    acc
}

/// Steps through the weak compositions of `counts.iter().sum()` in
/// descending lexicographic order.
fn next_composition(counts: &mut [usize]) -> bool {
    let n = counts.len();
    // rightmost non-zero entry before the last slot
    let Some(i) = (0..n - 1).rev().find(|&i| counts[i] > 0) else {
        return false;
    };
    counts[i] -= 1;
    let tail: usize = counts[i + 1..].iter().sum::<usize>() + 1;
    for c in counts[i + 1..].iter_mut() {
        *c = 0;
    }
    counts[i + 1] = tail;
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_model() {
        let m = ExpFamilyModel::new(ThetaPoly::zeros(2, 2).unwrap(), 10_000, 1).unwrap();
        assert!((m.log_partition - (PI / 2.0).ln()).abs() < 1e-14);
        let x = Composition::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!((m.log_density(&x).unwrap() - (2.0 / PI).ln()).abs() < 1e-14);
        assert!((m.acceptance_rate().unwrap() - 1.0).abs() < 1e-12);
        assert!(m.sample(0, RngStream::new(1, 1)).unwrap().is_empty());
        assert_eq!(m.sample(10, RngStream::new(1, 1)).unwrap().len(), 10);
    }

    #[test]
    fn lattice_enumeration() {
        let mut c = vec![2, 0, 0];
        let mut all = vec![c.clone()];
        while next_composition(&mut c) {
            all.push(c.clone());
        }
        assert_eq!(
            all,
            vec![vec![2, 0, 0], vec![1, 1, 0], vec![1, 0, 1], vec![0, 2, 0], vec![0, 1, 1], vec![0, 0, 2]]
        );
        assert_eq!(binom(5, 2), 10);
    }

    #[test]
    fn too_few_samples() {
        let t = ThetaPoly::zeros(2, 1).unwrap();
        assert!(log_partition(&t, 100, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn peaked_model_is_refused() {
        let t = ThetaPoly::from_terms(2, 1, [(&[1u32, 0, 0][..], 60.0)]).unwrap();
        let m = ExpFamilyModel::new(t, 10_000, 3).unwrap();
        assert!(matches!(m.sample(5, RngStream::new(1, 0)), Err(Error::Sampling(_))));
    }
}
