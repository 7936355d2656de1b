//! Reference computations that share no code with the library: explicit
//! harmonic polynomial bases, brute-force orbits, counting formulas and a
//! product quadrature on `S²`.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// All exponent vectors of total degree `deg` in `vars` variables.
pub fn monomials(vars: usize, deg: u32) -> Vec<Vec<u32>> {
    if vars == 1 {
        return vec![vec![deg]];
    }
    let mut out = Vec::new();
    for a in 0..=deg {
        for mut rest in monomials(vars - 1, deg - a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// Number of multi-indices of total degree `deg` in `vars` variables,
/// `binom(deg + vars - 1, vars - 1)`, by the multiplicative formula.
pub fn stars_and_bars(vars: usize, deg: usize) -> u128 {
    let k = (vars - 1) as u128;
    let n = (deg + vars - 1) as u128;
    (1..=k).fold(1u128, |acc, j| acc * (n - k + j) / j)
}

/// `Γ(twice / 2)` for a positive integer `twice`.
fn gamma_half(twice: u32) -> f64 {
    let (mut v, mut x) = if twice.is_multiple_of(2) { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while 2.0 * x < twice as f64 {
        v *= x;
        x += 1.0;
    }
    v
}

/// `∫_{S^{n-1}} Π x_i^{a_i} dσ`: zero unless every exponent is even, otherwise
/// `2 Π Γ((a_i+1)/2) / Γ((Σa_i + n)/2)`.
pub fn sphere_moment(a: &[u32]) -> f64 {
    if a.iter().any(|k| k % 2 == 1) {
        return 0.0;
    }
    let num: f64 = a.iter().map(|k| gamma_half(k + 1)).product();
    let total: u32 = a.iter().sum::<u32>() + a.len() as u32;
    2.0 * num / gamma_half(total)
}

/// `vol(S^{n-1})` from the moment formula.
pub fn sphere_area(vars: usize) -> f64 {
    sphere_moment(&vec![0; vars])
}

fn monomial_value(a: &[u32], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(k, v)| v.powi(*k as i32)).product()
}

/// An orthonormal (in `L²(S^{vars-1})`) basis of the homogeneous harmonic
/// polynomials of one degree, found as the null space of the Laplacian acting
/// on monomial coefficients.
pub struct HarmonicBasis {
    pub monomials: Vec<Vec<u32>>,
    /// One coefficient vector (over `monomials`) per basis function.
    pub functions: Vec<Vec<f64>>,
}

impl HarmonicBasis {
    pub fn new(vars: usize, deg: u32) -> Self {
        let mons = monomials(vars, deg);
        let cols = mons.len();
        let kernel: Vec<DVector<f64>> = if deg < 2 {
            (0..cols).map(|j| DVector::from_fn(cols, |i, _| if i == j { 1.0 } else { 0.0 })).collect()
        } else {
            let lower = monomials(vars, deg - 2);
            let mut lap = DMatrix::<f64>::zeros(lower.len(), cols);
            for (j, a) in mons.iter().enumerate() {
                for v in 0..vars {
                    if a[v] >= 2 {
                        let mut b = a.clone();
                        b[v] -= 2;
                        let row = lower.iter().position(|m| *m == b).unwrap();
                        lap[(row, j)] += f64::from(a[v] * (a[v] - 1));
                    }
                }
            }
            let normal = lap.transpose() * &lap;
            let eig = normal.symmetric_eigen();
            let scale = eig.eigenvalues.amax().max(1.0);
            (0..cols)
                .filter(|&k| eig.eigenvalues[k].abs() < 1e-9 * scale)
                .map(|k| eig.eigenvectors.column(k).into_owned())
                .collect()
        };
        // Gram matrix of the null-space vectors under the sphere inner product.
        let p = kernel.len();
        let mut gram = DMatrix::<f64>::zeros(p, p);
        for r in 0..p {
            for s in 0..p {
                let mut acc = 0.0;
                for (i, a) in mons.iter().enumerate() {
                    for (j, b) in mons.iter().enumerate() {
                        let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        acc += kernel[r][i] * kernel[s][j] * sphere_moment(&sum);
                    }
                }
                gram[(r, s)] = acc;
            }
        }
        // Y = V L^{-T} with gram = L Lᵀ has identity Gram matrix.
        let chol = gram.cholesky().expect("harmonic Gram matrix is positive definite");
        let l_inv = chol.l().try_inverse().unwrap();
        let functions = (0..p)
            .map(|q| {
                (0..cols)
                    .map(|i| (0..p).map(|r| kernel[r][i] * l_inv[(q, r)]).sum())
                    .collect()
            })
            .collect();
        Self { monomials: mons, functions }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    /// Values of every basis function at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mono: Vec<f64> = self.monomials.iter().map(|a| monomial_value(a, x)).collect();
        self.functions.iter().map(|c| c.iter().zip(&mono).map(|(u, v)| u * v).sum()).collect()
    }

    /// `Σ_j Y_j(x) Y_j(t)`.
    pub fn addition_sum(&self, x: &[f64], t: &[f64]) -> f64 {
        self.eval(x).iter().zip(self.eval(t)).map(|(a, b)| a * b).sum()
    }

    /// `Σ_j c_j Y_j(x)`.
    pub fn combination(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        self.eval(x).iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }
}

/// Applies every sign pattern to `z`, returning the distinct images and the
/// number of patterns that leave `z` unchanged.
pub fn brute_force_orbit(z: &[f64]) -> (Vec<Vec<f64>>, usize) {
    let n = z.len();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut fixed = 0;
    for mask in 0u32..(1 << n) {
        let img: Vec<f64> = z
            .iter()
            .enumerate()
            .map(|(k, v)| if mask >> k & 1 == 1 { -v } else { *v })
            .collect();
        if img.iter().zip(z).all(|(a, b)| a == b) {
            fixed += 1;
        }
        if !images.iter().any(|p| p.iter().zip(&img).all(|(a, b)| a == b)) {
            images.push(img);
        }
    }
    (images, fixed)
}

/// Average of `f` over all sign flips of `x`, by explicit enumeration.
pub fn sign_flip_average<F: Fn(&[f64]) -> f64>(x: &[f64], f: F) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for mask in 0u32..(1 << n) {
        let img: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(k, v)| if mask >> k & 1 == 1 { -v } else { *v })
            .collect();
        acc += f(&img);
    }
    acc / f64::from(1u32 << n)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    // (P_n(x), P_n'(x)) by the three-term recurrence
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
    };
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Product rule on `S²`: Gauss–Legendre in `cos θ` times the trapezoid rule in
/// `φ`. Exact for polynomials of degree below `min(2 n_theta, n_phi)`.
pub fn sphere_product_rule(n_theta: usize, n_phi: usize) -> Vec<([f64; 3], f64)> {
    let (nodes, weights) = legendre_nodes(n_theta);
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (c, w) in nodes.iter().zip(&weights) {
        let s = (1.0 - c * c).sqrt();
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            out.push(([s * phi.cos(), s * phi.sin(), *c], w * dphi));
        }
    }
    out
}

/// Sample skewness `m3 / m2^{3/2}`.
pub fn skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}
