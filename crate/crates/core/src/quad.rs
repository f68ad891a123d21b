//! Numerical quadrature: fixed Gauss-Legendre rules, adaptive Gauss-Kronrod
//! and double-exponential (tanh-sinh) rules for endpoint singularities.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// An n-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 1.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }
}

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

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 7/15-point Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    for _ in 0..5000 {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, pv, pe) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated rounding before judging
    let total: f64 = parts.iter().map(|p| p.2).sum();
    let err: f64 = parts.iter().map(|p| p.3).sum();
    if err <= abs_tol.max(rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::Quadrature { tol: abs_tol.max(rel_tol * total.abs()), err })
    }
}

/// Adaptive integration over `[a, inf)` through the map `x = a + u/(1-u)`.
pub fn adaptive_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    adaptive(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - u;
            let v = f(a + u / w) / (w * w);
            if v.is_finite() { v } else { 0.0 }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Tanh-sinh integration over `[a, b]` for integrands singular at the ends.
///
/// The integrand receives `(x, x - a, b - x)` so that factors such as
/// `(x - a)^p` can be formed from the accurately known distances.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    tanh_sinh_abs(f, a, b, tol, 0.0)
}

/// [`tanh_sinh`] that also accepts successive estimates differing by at most
/// `abs_tol`, for integrands that may vanish identically.
pub fn tanh_sinh_abs<F: FnMut(f64, f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let h2 = 0.5 * (b - a);
    let tmax = 6.5;
    let mut eval = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let ch = s.cosh();
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        // 1 - |tanh s| = e^{-|s|}/cosh s, formed without cancellation
        let (x, da, db) = if t < 0.0 {
            let da = h2 * (s.exp() / ch);
            (a + da, da, 2.0 * h2 - da)
        } else {
            let db = h2 / (s.exp() * ch);
            (b - db, 2.0 * h2 - db, db)
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let v = f(x, da, db) * w;
        if v.is_finite() { v } else { 0.0 }
    };
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1.0;
    while k * h <= tmax {
        sum += eval(k * h) + eval(-k * h);
        k += 1.0;
    }
    let mut prev = sum * h;
    let mut last_diff = f64::INFINITY;
    for level in 0..12 {
        h *= 0.5;
        let mut k = 1.0;
        while k * h <= tmax {
            sum += eval(k * h) + eval(-k * h);
            k += 2.0;
        }
        let cur = sum * h;
        let diff = (cur - prev).abs();
        if level >= 2 && (diff <= tol * cur.abs().max(1e-300) || diff * h2.abs() <= abs_tol) {
            return Ok(cur * h2);
        }
        prev = cur;
        last_diff = diff;
    }
    Err(Error::Quadrature { tol, err: last_diff * h2.abs() })
}

/// Fixed-level tanh-sinh rule on `[-1, 1]`: nodes as distances from the
/// nearer endpoint plus weights. Used where exact reproducibility of a
/// discretization (and hence exact bilinearity) matters more than adaptivity.
#[derive(Debug, Clone)]
pub struct TanhSinhRule {
    /// `(t >= 0 flag, distance from endpoint in units of half-width, weight)`
    pts: Vec<(bool, f64, f64)>,
}

impl TanhSinhRule {
    pub fn new(step: f64, tmax: f64) -> Self {
        let mut pts = Vec::new();
        let mut k: i64 = -((tmax / step).floor() as i64);
        while (k as f64) * step <= tmax {
            let t = k as f64 * step;
            let s = 0.5 * PI * t.sinh();
            let ch = s.cosh();
            let w = 0.5 * PI * t.cosh() / (ch * ch) * step;
            let dist = if t < 0.0 { s.exp() / ch } else { 1.0 / (s.exp() * ch) };
            if dist > 0.0 && w > 0.0 {
                pts.push((t >= 0.0, dist, w));
            }
            k += 1;
        }
        TanhSinhRule { pts }
    }

    /// Integrates over `[a, b]`; `f` receives `(x, x - a, b - x)`.
    pub fn integrate<F: FnMut(f64, f64, f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h2 = 0.5 * (b - a);
        let mut s = 0.0;
        for &(right, dist, w) in &self.pts {
            let (x, da, db) = if right {
                let db = h2 * dist;
                (b - db, 2.0 * h2 - db, db)
            } else {
                let da = h2 * dist;
                (a + da, da, 2.0 * h2 - da)
            };
            let v = f(x, da, db);
            if v.is_finite() {
                s += w * v;
            }
        }
        s * h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomials_exact() {
        let r = GaussLegendre::new(5);
        let v = r.integrate(0.0, 2.0, |x| x.powi(9) + x * x);
        assert!((v - (2f64.powi(10) / 10.0 + 8.0 / 3.0)).abs() < 1e-11);
    }

    #[test]
    fn adaptive_smooth_and_infinite() {
        let v = adaptive(|x| x.sin(), 0.0, PI, 1e-14, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = adaptive_to_inf(|x| (-x * x).exp(), 0.0, 1e-14, 1e-12).unwrap();
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // int_0^1 x^{-0.7} (1-x)^{-0.4} dx = B(0.3, 0.6)
        let v = tanh_sinh(|_, a, b| a.powf(-0.7) * b.powf(-0.4), 0.0, 1.0, 1e-13).unwrap();
        let beta = crate::special::gamma(0.3) * crate::special::gamma(0.6) / crate::special::gamma(0.9);
        assert!(((v - beta) / beta).abs() < 1e-11);
        let r = TanhSinhRule::new(1.0 / 64.0, 6.5);
        let w = r.integrate(0.0, 1.0, |_, a, b| a.powf(-0.7) * b.powf(-0.4));
        assert!(((w - beta) / beta).abs() < 1e-11);
    }
}
