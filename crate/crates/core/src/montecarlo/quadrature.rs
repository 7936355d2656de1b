//! One-dimensional adaptive quadrature (globally adaptive Gauss–Kronrod 7/15)
//! and Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Subinterval budget before giving up.
pub const MAX_SUBINTERVALS: usize = 4000;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Returns (integral, error estimate, integral of |f|).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err, resabs)
}

/// Adaptive integration of `f` over the finite intervals delimited by the
/// sorted `breaks`, to relative accuracy `rel_tol`.
pub fn quad_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    if breaks.len() < 2 {
        return Err(Error::InvalidParameter("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(Error::InvalidParameter(format!("bad interval [{a}, {b}]")));
        }
        if a == b {
            continue;
        }
        let (v, e, abs) = gk15(&mut f, a, b);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
        }
        total += v;
        total_err += e;
        total_abs += abs;
        heap.push(Segment { a, b, value: v, error: e });
    }
    let mut count = heap.len();
    loop {
        let tol = (rel_tol * total.abs()).max(4.0 * f64::EPSILON * total_abs);
        if total_err <= tol || heap.is_empty() {
            return Ok(total);
        }
        if count >= MAX_SUBINTERVALS {
            return Err(Error::Quadrature(format!(
                "subdivision budget exhausted; value {total:e}, error estimate {total_err:e}"
            )));
        }
        let seg = heap.pop().expect("heap non-empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::Quadrature(format!(
                "interval collapsed near {mid:e}; integrand may be singular"
            )));
        }
        let (v1, e1, a1) = gk15(&mut f, seg.a, mid);
        let (v2, e2, a2) = gk15(&mut f, mid, seg.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::NonFinite(format!("integrand near {mid:e}")));
        }
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        total_abs += a1 + a2;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        count += 1;
        // Re-sum occasionally so the running error does not drift.
        if count % 256 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Adaptive integral of `f` over `[a, b]`; `b` may be `f64::INFINITY`, in which
/// case the substitution `r = a + u / (1 - u)` maps the range onto `[0, 1)`.
pub fn quad_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {rel_tol}")));
    }
    if b == f64::INFINITY {
        if !a.is_finite() {
            return Err(Error::InvalidParameter("lower limit must be finite".into()));
        }
        let g = move |u: f64| {
            let one_minus = 1.0 - u;
            let r = a + u / one_minus;
            f(r) / (one_minus * one_minus)
        };
        return quad_breaks(g, &[0.0, 0.5, 0.9, 0.99, 1.0], rel_tol);
    }
    quad_breaks(f, &[a, b], rel_tol)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
