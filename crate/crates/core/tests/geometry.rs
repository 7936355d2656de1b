mod support;

use approx::assert_abs_diff_eq;
use coda_core::geometry::ZERO_TOL;
use coda_core::{
    contract_l1, fold, gamma_average, inflate, orbit, spread_out, Composition, SignPattern, SpherePoint,
};
use proptest::prelude::*;
use support::oracles::brute_force_orbit;

/// Raw coordinates for `S^d`, d in 1..=6, with some coordinates forced to zero.
fn raw_point() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=7).prop_flat_map(|parts| {
        prop::collection::vec(
            prop_oneof![4 => -1.0f64..1.0, 1 => Just(0.0)],
            parts,
        )
        .prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
    })
}

fn composition_from(raw: &[f64]) -> Composition {
    let abs: Vec<f64> = raw.iter().map(|v| v.abs()).collect();
    let s: f64 = abs.iter().sum();
    Composition::new(abs.iter().map(|v| v / s).collect()).unwrap()
}

proptest! {
    #[test]
    fn inflate_then_contract_is_identity(raw in raw_point()) {
        let x = composition_from(&raw);
        let back = contract_l1(&inflate(&x)).unwrap();
        for (a, b) in back.coords().iter().zip(x.coords()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn contract_then_inflate_is_identity(raw in raw_point()) {
        let z = fold(&SpherePoint::normalize(raw).unwrap());
        let back = inflate(&contract_l1(&z).unwrap());
        for (a, b) in back.coords().iter().zip(z.coords()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn fold_is_constant_on_orbits(raw in raw_point()) {
        let z = SpherePoint::normalize(raw).unwrap();
        let f = fold(&z);
        prop_assert_eq!(fold(&f), f.clone());
        for g in SignPattern::all(z.coords().len()) {
            prop_assert_eq!(fold(&g.apply(&z).unwrap()), f.clone());
        }
    }

    #[test]
    fn orbit_matches_brute_force(raw in raw_point()) {
        let z = SpherePoint::normalize(raw).unwrap();
        let o = orbit(&z);
        let (images, fixed) = brute_force_orbit(z.coords());
        prop_assert_eq!(o.stabilizer_order, fixed);
        prop_assert_eq!(o.distinct_points.len(), images.len());
        for p in &o.distinct_points {
            prop_assert!(images.iter().any(|q| q.iter().zip(p.coords()).all(|(a, b)| a == b)));
        }
        prop_assert_eq!(o.weighted_count(), 1usize << z.coords().len());
    }

    #[test]
    fn sign_patterns_form_a_group(parts in 2usize..=6, a in 0u32..64, b in 0u32..64, c in 0u32..64) {
        let m = (1u32 << parts) - 1;
        let g = SignPattern::from_mask(parts, a & m).unwrap();
        let h = SignPattern::from_mask(parts, b & m).unwrap();
        let k = SignPattern::from_mask(parts, c & m).unwrap();
        prop_assert_eq!(g.compose(&h).compose(&k), g.compose(&h.compose(&k)));
        prop_assert_eq!(g.compose(&g), SignPattern::identity(parts));
        let prod: Vec<i8> = g.signs().iter().zip(h.signs()).map(|(x, y)| x * y).collect();
        prop_assert_eq!(g.compose(&h).signs(), prod);
    }
}

#[test]
fn inflation_examples() {
    let z = inflate(&Composition::new(vec![0.3, 0.3, 0.4]).unwrap());
    let norm = 0.34f64.sqrt();
    for (a, b) in z.coords().iter().zip([0.3 / norm, 0.3 / norm, 0.4 / norm]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
    }
    assert_abs_diff_eq!(z.coords()[0], 0.514496, epsilon = 1e-6);
    let v = inflate(&Composition::new(vec![1.0, 0.0, 0.0]).unwrap());
    assert_eq!(v.coords(), &[1.0, 0.0, 0.0]);
}

#[test]
fn contraction_examples() {
    let c = contract_l1(&SpherePoint::new(vec![0.6, 0.8, 0.0]).unwrap()).unwrap();
    assert_abs_diff_eq!(c.coords()[0], 3.0 / 7.0, epsilon = 1e-15);
    assert_abs_diff_eq!(c.coords()[1], 4.0 / 7.0, epsilon = 1e-15);
    assert!(contract_l1(&SpherePoint::new(vec![-0.6, 0.8, 0.0]).unwrap()).is_err());
}

#[test]
fn orbit_sizes_by_zero_count() {
    let r = 0.5f64.sqrt();
    let cases: [(Vec<f64>, usize, usize); 3] = [
        (vec![1.0, 0.0, 0.0], 2, 4),
        (vec![r, r, 0.0], 4, 2),
        (vec![0.6, 0.0, 0.8], 4, 2),
    ];
    for (c, n, stab) in cases {
        let o = orbit(&SpherePoint::new(c).unwrap());
        assert_eq!((o.distinct_points.len(), o.stabilizer_order), (n, stab));
    }
    let s = spread_out(&Composition::new(vec![0.5, 0.5, 0.0]).unwrap());
    assert_eq!((s.distinct_points.len(), s.multiplicity(), s.weighted_count()), (4, 2, 8));
    let t = spread_out(&Composition::new(vec![1.0 / 3.0; 3]).unwrap());
    assert_eq!((t.distinct_points.len(), t.multiplicity()), (8, 1));
}

#[test]
fn tiny_coordinates_count_as_zero() {
    let z = SpherePoint::normalize(vec![1.0, 0.5 * ZERO_TOL, 0.0]).unwrap();
    assert_eq!(orbit(&z).stabilizer_order, 4);
}

#[test]
fn composition_validation() {
    assert!(Composition::new(vec![0.5, 0.5, 0.1]).is_err());
    assert!(Composition::new(vec![0.5, -0.1, 0.6]).is_err());
    assert!(Composition::new(vec![1.0]).is_err());
    let c = Composition::new(vec![0.2, 0.3, 0.5 + 5e-7]).unwrap();
    assert_abs_diff_eq!(c.coords().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
}

#[test]
fn odd_monomials_average_to_zero() {
    let z = [0.3, -0.7, 0.1, 0.64];
    let odd = |x: &[f64]| x[0] * x[1].powi(2) * x[3].powi(4);
    assert_eq!(gamma_average(&z, odd), 0.0);
}
