//! The four equivalent compositional domains and the coordinate sign-flip group.
//!
//! A composition lives on the closed simplex; inflation maps it onto the first
//! orthant of the unit sphere and contraction maps it back. The group of
//! coordinate reflections acts on the whole sphere, and the first orthant is a
//! strict fundamental domain for that action, so folding (componentwise absolute
//! value) is the quotient map.

use crate::error::{Error, Result};

/// Largest supported dimension `d` (the sphere `S^d` sits in `d + 1` coordinates).
pub const MAX_DIM: usize = 24;

/// Coordinates with absolute value at or below this count as zero when
/// computing stabilizers.
pub const ZERO_TOL: f64 = 1e-12;

/// Sum deviation tolerated (and corrected) when building a [`Composition`].
pub const SUM_TOL: f64 = 1e-6;

const UNIT_TOL: f64 = 1e-12;

fn check_dim(parts: usize) -> Result<usize> {
    if parts < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 coordinates, got {parts}"
        )));
    }
    let d = parts - 1;
    if d > MAX_DIM {
        return Err(Error::Domain(format!(
            "dimension {d} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    Ok(d)
}

/// A point of the closed simplex: non-negative parts summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition(Vec<f64>);

impl Composition {
    /// Validates and renormalizes. Sums within [`SUM_TOL`] of one are divided
    /// through by the sum; anything further off is rejected.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        if let Some((i, v)) = coords
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidComposition(format!(
                "coordinate {i} is {v}; parts must be finite and non-negative"
            )));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidComposition(format!(
                "parts sum to {sum}, not 1 (tolerance {SUM_TOL})"
            )));
        }
        if sum == 1.0 {
            return Ok(Self(coords));
        }
        Ok(Self(coords.into_iter().map(|v| v / sum).collect()))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Sphere dimension `d`; the composition has `d + 1` parts.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A unit vector in `d + 1` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    /// Accepts `coords` only if its squared norm is within 1e-12 of one.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sphere point has non-finite coordinates".into()));
        }
        let sq: f64 = coords.iter().map(|v| v * v).sum();
        if (sq - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!(
                "squared norm {sq} is not 1 within {UNIT_TOL}"
            )));
        }
        Ok(Self(coords))
    }

    /// Scales a nonzero vector onto the sphere.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let norm = coords.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self(coords.into_iter().map(|v| v / norm).collect()))
    }

    pub(crate) fn from_unit_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn is_first_orthant(&self) -> bool {
        self.0.iter().all(|v| *v >= -ZERO_TOL)
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|v| v.abs() <= ZERO_TOL).count()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Anything that has a canonical place on the sphere: compositions are
/// inflated, sphere points pass through.
pub trait OnSphere {
    fn to_sphere(&self) -> SpherePoint;
}

impl OnSphere for Composition {
    fn to_sphere(&self) -> SpherePoint {
        inflate(self)
    }
}

impl OnSphere for SpherePoint {
    fn to_sphere(&self) -> SpherePoint {
        self.clone()
    }
}

/// An element of the reflection group: one sign per coordinate, stored as a
/// bit mask where a set bit means "negate".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    parts: usize,
    mask: u32,
}

impl SignPattern {
    pub fn identity(parts: usize) -> Self {
        Self { parts, mask: 0 }
    }

    pub fn from_mask(parts: usize, mask: u32) -> Result<Self> {
        check_dim(parts)?;
        if parts < 32 && mask >> parts != 0 {
            return Err(Error::Domain(format!(
                "mask {mask:#x} has bits beyond {parts} coordinates"
            )));
        }
        Ok(Self { parts, mask })
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        check_dim(signs.len())?;
        let mut mask = 0u32;
        for (i, s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => mask |= 1 << i,
                _ => return Err(Error::Domain(format!("sign {s} is not +1 or -1"))),
            }
        }
        Ok(Self { parts: signs.len(), mask })
    }

    /// All `2^{d+1}` patterns for `d + 1` coordinates.
    pub fn all(parts: usize) -> impl Iterator<Item = SignPattern> {
        (0..(1u32 << parts)).map(move |mask| SignPattern { parts, mask })
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.parts)
            .map(|i| if self.mask >> i & 1 == 1 { -1 } else { 1 })
            .collect()
    }

    /// Group product; componentwise multiplication of signs.
    pub fn compose(&self, other: &SignPattern) -> SignPattern {
        debug_assert_eq!(self.parts, other.parts);
        SignPattern { parts: self.parts, mask: self.mask ^ other.mask }
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| if self.mask >> i & 1 == 1 { -v } else { *v })
            .collect()
    }

    pub fn apply(&self, z: &SpherePoint) -> Result<SpherePoint> {
        if z.0.len() != self.parts {
            return Err(Error::DimensionMismatch { expected: self.parts, got: z.0.len() });
        }
        Ok(SpherePoint(self.apply_slice(&z.0)))
    }
}

/// The orbit of a sphere point under the sign-flip group.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitData {
    /// First-orthant representative (the folded point).
    pub representative: SpherePoint,
    /// Distinct images, each standing for `stabilizer_order` copies.
    pub distinct_points: Vec<SpherePoint>,
    pub stabilizer_order: usize,
}

impl OrbitData {
    /// Multiplicity carried by each distinct point.
    pub fn multiplicity(&self) -> usize {
        self.stabilizer_order
    }

    /// Always `2^{d+1}`.
    pub fn weighted_count(&self) -> usize {
        self.distinct_points.len() * self.stabilizer_order
    }

    pub fn group_order(&self) -> usize {
        1 << self.representative.0.len()
    }
}

/// Divides a composition by its Euclidean norm.
pub fn inflate(v: &Composition) -> SpherePoint {
    let norm = v.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    SpherePoint(v.0.iter().map(|x| x / norm).collect())
}

/// Divides a first-orthant sphere point by its ℓ1 norm.
pub fn contract_l1(s: &SpherePoint) -> Result<Composition> {
    if let Some((i, v)) = s.0.iter().enumerate().find(|(_, v)| **v < 0.0) {
        if *v < -ZERO_TOL {
            return Err(Error::Domain(format!(
                "coordinate {i} is negative ({v}); contraction needs a first-orthant point"
            )));
        }
    }
    let clean: Vec<f64> = s.0.iter().map(|v| v.max(0.0)).collect();
    let l1: f64 = clean.iter().sum();
    Ok(Composition(clean.into_iter().map(|v| v / l1).collect()))
}

/// The quotient map: componentwise absolute value.
pub fn fold(z: &SpherePoint) -> SpherePoint {
    SpherePoint(z.0.iter().map(|v| v.abs()).collect())
}

/// Enumerates the distinct sign-flipped images of `z`. Coordinates within
/// [`ZERO_TOL`] of zero are left unflipped and contribute a factor of two to the
/// stabilizer.
pub fn orbit(z: &SpherePoint) -> OrbitData {
    let rep = fold(z);
    let free: Vec<usize> = (0..z.0.len()).filter(|&i| z.0[i].abs() > ZERO_TOL).collect();
    let zeros = z.0.len() - free.len();
    let mut distinct = Vec::with_capacity(1 << free.len());
    for mask in 0..(1u32 << free.len()) {
        let mut c = rep.0.clone();
        for (bit, &i) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                c[i] = -c[i];
            }
        }
        distinct.push(SpherePoint(c));
    }
    OrbitData { representative: rep, distinct_points: distinct, stabilizer_order: 1 << zeros }
}

/// The spread-out multiset of a composition: the orbit of its inflation, each
/// distinct point weighted by its stabilizer order.
pub fn spread_out(x: &Composition) -> OrbitData {
    orbit(&inflate(x))
}

/// Average of `f` over all sign-flipped copies of `z`.
///
/// The sum is a balanced tree over the coordinates, so terms that cancel in
/// exact arithmetic (odd functions of any one coordinate) cancel exactly in
/// floating point too.
pub fn gamma_average<F>(z: &[f64], mut f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    fn rec<F: FnMut(&[f64]) -> f64>(buf: &mut [f64], k: usize, f: &mut F) -> f64 {
        if k == buf.len() {
            return f(buf);
        }
        let a = rec(buf, k + 1, f);
        buf[k] = -buf[k];
        let b = rec(buf, k + 1, f);
        buf[k] = -buf[k];
        a + b
    }
    let mut buf = z.to_vec();
    let total = rec(&mut buf, 0, &mut f);
    total / (1u64 << z.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(v: &[f64]) -> SpherePoint {
        SpherePoint::normalize(v.to_vec()).unwrap()
    }

    #[test]
    fn inflate_examples() {
        let c = Composition::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(inflate(&c).coords(), &[1.0, 0.0, 0.0]);
        let third = 1.0 / 3.0;
        let c = Composition::new(vec![third; 3]).unwrap();
        for v in inflate(&c).coords() {
            assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        let c = Composition::new(vec![0.3, 0.3, 0.4]).unwrap();
        let s = inflate(&c);
        let expect = [0.514496, 0.514496, 0.685994];
        for (a, b) in s.coords().iter().zip(expect) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn contract_examples() {
        let s = sp(&[0.6, 0.8, 0.0]);
        let c = contract_l1(&s).unwrap();
        let expect = [3.0 / 7.0, 4.0 / 7.0, 0.0];
        for (a, b) in c.coords().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = sp(&[1.0, 1.0, 1.0]);
        for v in contract_l1(&s).unwrap().coords() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(matches!(contract_l1(&sp(&[0.6, -0.8, 0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn composition_validation() {
        assert!(Composition::new(vec![0.5, 0.5, 0.1]).is_err());
        assert!(Composition::new(vec![0.5, 0.6, -0.1]).is_err());
        assert!(Composition::new(vec![1.0]).is_err());
        let c = Composition::new(vec![0.2, 0.3, 0.5 + 5e-7]).unwrap();
        assert!((c.coords().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Composition::new(vec![1.0 / 26.0; 26]).is_err());
    }

    #[test]
    fn fold_examples() {
        let r = 1.0 / 3f64.sqrt();
        let z = SpherePoint::new(vec![-r, r, -r]).unwrap();
        assert_eq!(fold(&z).coords(), &[r, r, r]);
        let z = SpherePoint::new(vec![0.0, -1.0, 0.0]).unwrap();
        assert_eq!(fold(&z).coords(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn orbit_examples() {
        let o = orbit(&SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap());
        assert_eq!(o.distinct_points.len(), 2);
        assert_eq!(o.stabilizer_order, 4);
        let o = orbit(&sp(&[0.2, 0.5, 0.7]));
        assert_eq!((o.distinct_points.len(), o.stabilizer_order), (8, 1));
        let o = orbit(&sp(&[1.0, 1.0, 0.0]));
        assert_eq!((o.distinct_points.len(), o.stabilizer_order), (4, 2));
    }

    #[test]
    fn spread_out_examples() {
        let third = 1.0 / 3.0;
        let o = spread_out(&Composition::new(vec![third; 3]).unwrap());
        assert_eq!((o.distinct_points.len(), o.multiplicity()), (8, 1));
        let o = spread_out(&Composition::new(vec![0.5, 0.5, 0.0]).unwrap());
        assert_eq!((o.distinct_points.len(), o.multiplicity(), o.weighted_count()), (4, 2, 8));
        let o = spread_out(&Composition::new(vec![1.0, 0.0, 0.0]).unwrap());
        assert_eq!((o.distinct_points.len(), o.multiplicity()), (2, 4));
    }

    #[test]
    fn sign_patterns_form_group() {
        let all: Vec<_> = SignPattern::all(3).collect();
        assert_eq!(all.len(), 8);
        let a = SignPattern::from_signs(&[1, -1, -1]).unwrap();
        let b = SignPattern::from_signs(&[-1, -1, 1]).unwrap();
        assert_eq!(a.compose(&b).signs(), vec![-1, 1, -1]);
        assert_eq!(a.compose(&a), SignPattern::identity(3));
        assert!(SignPattern::from_signs(&[1, 0, 1]).is_err());
    }

    #[test]
    fn gamma_average_cancels_exactly() {
        let z = std::hint::black_box([0.3, -0.7, 0.1, 0.64]);
        let odd = gamma_average(&z, |x| x[0].powi(2) * x[1].powi(3) * x[3]);
        assert_eq!(odd, 0.0);
        let mono = |x: &[f64]| x[0].powi(2) * x[1].powi(4);
        assert_eq!(gamma_average(&z, mono), mono(&z));
    }
}
