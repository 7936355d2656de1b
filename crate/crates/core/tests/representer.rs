use approx::assert_abs_diff_eq;
use coda_core::montecarlo::uniform_orthant;
use coda_core::representer::{
    evaluate, fit_interpolant, fit_ridge, interpolate, min_independent_degree, ridge, KernelExpansion,
};
use coda_core::{gram, inflate, Composition, Error, RngStream, SignPattern, SpherePoint};
use proptest::prelude::*;
use rand::Rng;

fn comp(v: &[f64]) -> SpherePoint {
    inflate(&Composition::new(v.to_vec()).unwrap())
}

fn five() -> Vec<SpherePoint> {
    vec![
        comp(&[0.2, 0.3, 0.5]),
        comp(&[0.7, 0.1, 0.2]),
        comp(&[0.1, 0.8, 0.1]),
        comp(&[0.4, 0.4, 0.2]),
        comp(&[0.05, 0.15, 0.8]),
    ]
}

/// `Σ (f(x_i) - y_i)² + μ ‖f‖²`.
fn ridge_objective(f: &KernelExpansion, points: &[SpherePoint], y: &[f64], mu: f64) -> f64 {
    let fit: f64 = points.iter().zip(y).map(|(p, y)| (f.evaluate(p).unwrap() - y).powi(2)).sum();
    fit + mu * f.norm_squared().unwrap()
}

fn add(a: &KernelExpansion, b: &KernelExpansion) -> KernelExpansion {
    let mut centers = a.centers().to_vec();
    centers.extend_from_slice(b.centers());
    let mut coeffs = a.coefficients().to_vec();
    coeffs.extend_from_slice(b.coefficients());
    KernelExpansion::new(a.dim(), a.degree(), centers, coeffs).unwrap()
}

#[test]
fn degree_search_examples() {
    assert_eq!(min_independent_degree(&five()[..1], 4).unwrap(), 0);
    let m = min_independent_degree(&five()[..2], 10).unwrap();
    assert!(m <= 10 && gram(&five()[..2], m).unwrap().is_positive_definite());
    let dup = vec![five()[0].clone(), five()[1].clone(), five()[0].clone()];
    assert!(matches!(min_independent_degree(&dup, 10), Err(Error::Duplicate(_))));
    // sign-flipped copies are the same composition
    let flipped = SignPattern::from_mask(3, 0b101).unwrap().apply(&five()[2]).unwrap();
    assert!(min_independent_degree(&[five()[2].clone(), flipped], 10).is_err());
}

#[test]
fn degree_search_returns_the_smallest_degree() {
    for seed in 0..10 {
        let pts = uniform_orthant(2, 6, RngStream::new(seed, 0));
        let m = min_independent_degree(&pts, 12).unwrap();
        assert!(gram(&pts, m).unwrap().is_positive_definite());
        if m > 0 {
            assert!(!gram(&pts, m - 1).unwrap().is_positive_definite());
        }
    }
}

#[test]
fn too_small_a_degree_cap_is_reported() {
    let pts = uniform_orthant(2, 10, RngStream::new(3, 0));
    assert!(matches!(min_independent_degree(&pts, 1), Err(Error::NoIndependentDegree { m_max: 1 })));
}

#[test]
fn interpolation_examples() {
    let x = five()[0].clone();
    let single = interpolate(std::slice::from_ref(&x), &[1.0], 3).unwrap();
    let g = gram(std::slice::from_ref(&x), 3).unwrap();
    assert_abs_diff_eq!(single.coefficients()[0], 1.0 / g.entries[(0, 0)], epsilon = 1e-15);
    let zero = interpolate(&five(), &[0.0; 5], 6).unwrap();
    assert!(zero.coefficients().iter().all(|c| *c == 0.0));
    let y = [0.3, -1.2, 2.5, 0.0, 0.7];
    let m = min_independent_degree(&five(), 12).unwrap();
    let report = fit_interpolant(&five(), &y, m).unwrap();
    assert_eq!(report.degree_used, m);
    for (p, v) in five().iter().zip(y) {
        assert!((evaluate(&report.expansion, p).unwrap() - v).abs() < 1e-8);
    }
    assert!(interpolate(&five(), &y, 0).is_err());
}

#[test]
fn interpolant_has_minimal_norm() {
    let pts = five();
    let y = [0.3, -1.2, 2.5, 0.0, 0.7];
    let m = 6;
    let f0 = interpolate(&pts, &y, m).unwrap();
    let mut rng = RngStream::new(21, 0).rng();
    for _ in 0..20 {
        // g = (sections at fresh centers) - (their interpolant), so g vanishes on the data
        let extra = uniform_orthant(2, 3, RngStream::new(rng.random(), 1));
        let b: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = KernelExpansion::new(2, m, extra, b).unwrap();
        let hv: Vec<f64> = pts.iter().map(|p| h.evaluate(p).unwrap()).collect();
        let hi = interpolate(&pts, &hv, m).unwrap();
        let neg = KernelExpansion::new(2, m, hi.centers().to_vec(), hi.coefficients().iter().map(|c| -c).collect())
            .unwrap();
        let g = add(&h, &neg);
        for p in &pts {
            assert!(g.evaluate(p).unwrap().abs() < 1e-8);
        }
        let lhs = add(&f0, &g).norm_squared().unwrap();
        let rhs = f0.norm_squared().unwrap() + g.norm_squared().unwrap();
        assert!((lhs - rhs).abs() < 1e-8 * (1.0 + rhs), "{lhs} vs {rhs}");
    }
}

#[test]
fn ridge_limits() {
    let pts = five();
    let y = [0.3, -1.2, 2.5, 0.0, 0.7];
    let m = 6;
    let interp = interpolate(&pts, &y, m).unwrap();
    let small = ridge(&pts, &y, m, 1e-10).unwrap();
    for (a, b) in small.coefficients().iter().zip(interp.coefficients()) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    let large = ridge(&pts, &y, m, 1e12).unwrap();
    let norm: f64 = large.coefficients().iter().map(|c| c * c).sum::<f64>().sqrt();
    assert!(norm < 1e-6);
    assert!(ridge(&pts, &y, m, 0.0).is_err());
    assert!(ridge(&pts, &y, m, -1.0).is_err());
}

#[test]
fn ridge_minimizes_its_objective() {
    let pts = uniform_orthant(2, 8, RngStream::new(22, 0));
    let y: Vec<f64> = pts.iter().map(|p| p.coords()[0] - 2.0 * p.coords()[2].powi(2)).collect();
    let mu = 0.05;
    let report = fit_ridge(&pts, &y, 3, mu).unwrap();
    let best = ridge_objective(&report.expansion, &pts, &y, mu);
    let mut rng = RngStream::new(22, 1).rng();
    for _ in 0..100 {
        let scale = 10f64.powf(rng.random_range(-4.0..1.0));
        let c: Vec<f64> = (0..pts.len()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let g = KernelExpansion::new(2, 3, pts.clone(), c).unwrap();
        let e = ridge_objective(&add(&report.expansion, &g), &pts, &y, mu);
        assert!(e >= best - 1e-12 * best);
    }
}

#[test]
fn empty_expansion_is_zero() {
    let e = KernelExpansion::new(2, 3, vec![], vec![]).unwrap();
    assert_eq!(e.evaluate(&five()[0]).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn expansion_is_sign_invariant(seed in 0u64..500, mask in 0u32..8) {
        let pts = uniform_orthant(2, 4, RngStream::new(seed, 0));
        let t = coda_core::montecarlo::uniform_sphere(2, 1, RngStream::new(seed, 1)).remove(0);
        let e = KernelExpansion::new(2, 4, pts, vec![1.0, -0.5, 2.0, 0.25]).unwrap();
        let g = SignPattern::from_mask(3, mask).unwrap();
        prop_assert_eq!(e.evaluate(&g.apply(&t).unwrap()).unwrap(), e.evaluate(&t).unwrap());
    }

    #[test]
    fn ridge_system_is_solved(seed in 0u64..200, mu in 1e-6f64..10.0) {
        let pts = uniform_orthant(3, 6, RngStream::new(seed, 2));
        let y: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let r = fit_ridge(&pts, &y, 2, mu).unwrap();
        // (μI + G)c = y  ⇔  f(x_i) - y_i = -μ c_i
        for (res, c) in r.residuals.iter().zip(r.expansion.coefficients()) {
            prop_assert!((res + mu * c).abs() < 1e-8);
        }
    }
}
