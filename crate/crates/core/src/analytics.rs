//! Second-order theory of the tempered processes and noises, and the
//! empirical estimators used to check it.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Error, Result};
use crate::fft::{fft_in_place, next_pow2};
use crate::process::TemperedParams;
use crate::quad::{adaptive, adaptive_to_inf, tanh_sinh, tanh_sinh_abs, GaussLegendre};
use crate::special::{bessel_k_scaled, gamma, gamma_p_diff, sin_pi};
use num_complex::Complex64;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `C^2_{d,l,|t|}`, with the convention `C^2 = 0` at `t = 0`.
pub fn ct_squared(p: &TemperedParams, t: f64) -> f64 {
    let (d, l) = (p.d, p.lambda);
    let z = l * t.abs();
    if z == 0.0 {
        return 0.0;
    }
    let nu = 0.5 + d;
    let s = sin_pi(nu);
    if z < 1.0 && s.abs() > 1e-2 {
        return ct_squared_series(d, z, s);
    }
    let lead = 2.0 * gamma(1.0 + 2.0 * d) * (2.0 * z).powf(-1.0 - 2.0 * d);
    let ks = bessel_k_scaled(nu, z).unwrap_or(0.0);
    let bes = 2.0 * gamma(1.0 + d) / SQRT_PI * (-nu * (2.0 * z).ln() - z).exp() * ks;
    lead - bes
}

// Both display terms blow up like z^{-1-2d}; the leading terms of the
// I_{-nu} series cancel the first term exactly, so sum what remains.
fn ct_squared_series(d: f64, z: f64, sin_nu: f64) -> f64 {
    let nu = 0.5 + d;
    let x = 0.5 * z;
    let x2 = x * x;
    let mut s1 = 0.0;
    let mut term = x.powf(2.0 - nu) / gamma(2.0 - nu);
    let mut k = 1.0;
    while k < 200.0 {
        s1 += term;
        if term.abs() <= 1e-17 * s1.abs() {
            break;
        }
        term *= x2 / ((k + 1.0) * (k + 1.0 - nu));
        k += 1.0;
    }
    let mut s2 = 0.0;
    let mut term = x.powf(nu) / gamma(1.0 + nu);
    let mut k = 0.0;
    while k < 200.0 {
        s2 += term;
        if term.abs() <= 1e-17 * s2.abs() {
            break;
        }
        term *= x2 / ((k + 1.0) * (k + 1.0 + nu));
        k += 1.0;
    }
    let pref = 2.0 * gamma(1.0 + d) / SQRT_PI * (2.0 * z).powf(-nu) * PI / (2.0 * sin_nu);
    -pref * (s1 - s2)
}

/// `Var S^I(t) = EL2 |t|^{1+2d} C^2 / Gamma(1+d)^2`.
pub fn var_tflp1(p: &TemperedParams, t: f64, el2: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let g = gamma(1.0 + p.d);
    el2 * t.abs().powf(1.0 + 2.0 * p.d) * ct_squared(p, t) / (g * g)
}

/// Covariance of the TFLP `S^I`.
pub fn cov_tflp1(p: &TemperedParams, s: f64, t: f64, el2: f64) -> f64 {
    0.5 * (var_tflp1(p, t, el2) + var_tflp1(p, s, el2) - var_tflp1(p, t - s, el2))
}

/// Large-scale limit of `Var S^I(t)`.
pub fn var_limit_tflp1(p: &TemperedParams, el2: f64) -> f64 {
    let g = gamma(1.0 + p.d);
    2.0 * el2 * gamma(1.0 + 2.0 * p.d) / (g * g * (2.0 * p.lambda).powf(1.0 + 2.0 * p.d))
}

// V_inf - Var S^I(tau): decays like e^{-l tau}; D(0) = V_inf.
fn var_deficit_tflp1(p: &TemperedParams, tau: f64, el2: f64) -> f64 {
    let tau = tau.abs();
    if tau == 0.0 {
        return var_limit_tflp1(p, el2);
    }
    let (d, l) = (p.d, p.lambda);
    let nu = 0.5 + d;
    let z = l * tau;
    let g = gamma(1.0 + d);
    let ks = bessel_k_scaled(nu, z).unwrap_or(0.0);
    el2 / (g * g) * 2.0 * g / SQRT_PI * (nu * (tau / (2.0 * l)).ln() - z).exp() * ks
}

/// Autocovariance of the TFLN `X^I(t) = S^I(t+1) - S^I(t)`.
pub fn acvf_tfln1(p: &TemperedParams, h: f64, el2: f64) -> f64 {
    let h = h.abs();
    if h < 2.0 {
        // moderate lags: structure-function form, no tail cancellation issue
        return 0.5 * (var_tflp1(p, h + 1.0, el2) + var_tflp1(p, h - 1.0, el2) - 2.0 * var_tflp1(p, h, el2));
    }
    -0.5 * (var_deficit_tflp1(p, h + 1.0, el2) + var_deficit_tflp1(p, h - 1.0, el2)
        - 2.0 * var_deficit_tflp1(p, h, el2))
}

/// Large-lag form `C e^{-l h} h^d` with `C = -l^2 / (Gamma(d+1) (2l)^{d+1})`
/// (normalized to `EL2 = 1`).
pub fn acvf_tfln1_asymptotic(p: &TemperedParams, h: f64) -> f64 {
    let (d, l) = (p.d, p.lambda);
    let c = -l * l / (gamma(d + 1.0) * (2.0 * l).powf(d + 1.0));
    c * (-l * h).exp() * h.powf(d)
}

/// Spectral density display for the TFLN, normalized to `EL2 = 1`.
pub fn spec_density_tfln1(p: &TemperedParams, omega: f64) -> f64 {
    let (d, l) = (p.d, p.lambda);
    (1.0 - omega.cos()) / (2.0 * PI * (l * l + omega * omega).powf(d + 1.0))
}

/// Spectral density display for the TFLN II, normalized to `EL2 = 1`.
pub fn spec_density_tfln2(p: &TemperedParams, omega: f64) -> f64 {
    let (d, l) = (p.d, p.lambda);
    (sinc_half_sq(omega) / (l * l + omega * omega).powf(d)) / (2.0 * PI)
}

// (1 - cos w) / w^2 without cancellation
fn sinc_half_sq(w: f64) -> f64 {
    let h = 0.5 * w;
    if h.abs() < 1e-4 {
        return 0.5 * (1.0 - h * h / 3.0);
    }
    let s = h.sin() / h;
    0.5 * s * s
}

/// Correlation density `phi(r)` of the TFLP II derivative for `d > 0`:
/// `Cov(S^II(t), S^II(s)) = int_0^t int_0^s phi(u - v) dv du`.
fn phi_tflp2(p: &TemperedParams, r: f64, el2: f64) -> f64 {
    let (d, l) = (p.d, p.lambda);
    let nu = d - 0.5;
    let pref = el2 * (2.0 * l).powf(-nu) / (gamma(d) * SQRT_PI);
    let r = r.abs();
    if r == 0.0 {
        return if nu > 0.0 { pref * gamma(nu) * 2f64.powf(nu - 1.0) * l.powf(-nu) } else { f64::INFINITY };
    }
    let z = l * r;
    match bessel_k_scaled(nu.abs(), z) {
        Ok(ks) => pref * (nu * r.ln() - z).exp() * ks,
        Err(_) => 0.0,
    }
}

fn regime_positive(p: &TemperedParams) -> Result<()> {
    if p.d > 0.0 {
        Ok(())
    } else {
        Err(Error::Regime { d: p.d, what: "the TFLP II covariance (d > 0)" })
    }
}

// Psi(x) = int_0^x (x - r) phi(r) dr; Var S^II(x) = 2 Psi(|x|).
fn psi_tflp2(p: &TemperedParams, x: f64, el2: f64) -> Result<f64> {
    let x = x.abs();
    if x == 0.0 {
        return Ok(0.0);
    }
    let near = x.min(2.0 / p.lambda);
    let mut v = tanh_sinh(|r, _, db| db * phi_tflp2(p, r, el2) + (x - near) * phi_tflp2(p, r, el2), 0.0, near, 1e-12)?;
    if x > near {
        v += adaptive(|r| (x - r) * phi_tflp2(p, r, el2), near, x, 1e-300, 1e-12)?;
    }
    Ok(v)
}

/// Covariance of the TFLP `S^II`, `d > 0`.
pub fn cov_tflp2(p: &TemperedParams, s: f64, t: f64, el2: f64) -> Result<f64> {
    p.validate()?;
    regime_positive(p)?;
    if s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    Ok(psi_tflp2(p, t, el2)? + psi_tflp2(p, s, el2)? - psi_tflp2(p, t - s, el2)?)
}

/// Autocovariance of the TFLN II `X^II(t) = S^II(t+1) - S^II(t)`.
///
/// For `d > 0` this is `int_{-1}^{1} (1 - |s|) phi(h + s) ds`; for `d <= 0`
/// the product of the noise kernels is integrated directly.
pub fn acvf_tfln2(p: &TemperedParams, h: f64, el2: f64) -> Result<f64> {
    p.validate()?;
    let h = h.abs();
    if p.d > 0.0 {
        // integrate over r = h + s; phi may be singular at r = 0
        let mut cuts = alloc::vec![h - 1.0, h, h + 1.0];
        if h < 1.0 {
            cuts.insert(1, 0.0);
        }
        cuts.dedup();
        let mut v = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            v += tanh_sinh_abs(
                |r, da, db| {
                    let rr = if a == 0.0 { da } else if b == 0.0 { db } else { r };
                    (1.0 - (r - h).abs()) * phi_tflp2(p, rr, el2)
                },
                a,
                b,
                1e-12,
                1e-300,
            )?;
        }
        return Ok(v);
    }
    noise2_kernel_product(p, h, el2)
}

// int_a^b K for 0 <= a <= b, accurate when both are far out in the tail
fn k_integral(p: &TemperedParams, a: f64, b: f64) -> f64 {
    let (d, l) = (p.d, p.lambda);
    let (a, b) = (a.max(0.0), b.max(0.0));
    if b <= a {
        return 0.0;
    }
    l.powf(-d - 1.0) * gamma(d + 1.0) * gamma_p_diff(d + 1.0, l * a, l * b)
}

// g^II(t+1, y) - g^II(t, y)
fn noise2_kernel(p: &TemperedParams, t: f64, y: f64) -> f64 {
    p.k(t + 1.0 - y) - p.k(t - y) + p.lambda * k_integral(p, t - y, t + 1.0 - y)
}

fn noise2_kernel_product(p: &TemperedParams, h: f64, el2: f64) -> Result<f64> {
    let f = |y: f64| noise2_kernel(p, 0.0, y) * noise2_kernel(p, h, y);
    let mut cuts = alloc::vec![-1.0, 0.0, 1.0, h, h + 1.0];
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut v = 0.0;
    for w in cuts.windows(2) {
        v += tanh_sinh_abs(|y, _, _| f(y), w[0], w[1], 1e-11, 1e-16)?;
    }
    v += adaptive_to_inf(|u| f(-1.0 - u), 0.0, 1e-16, 1e-11)?;
    let g = gamma(1.0 + p.d);
    Ok(el2 * v / (g * g))
}

/// TFLN II autocovariance by numerical inversion of the spectral density:
/// `gamma(h) = (2 EL2 / pi) int_0^inf cos(w h) (1 - cos w) / (w^2 (l^2 + w^2)^d) dw`.
///
/// The oscillatory tail beyond a multiple of `2 pi` is summed by two
/// integrations by parts per frequency component.
pub fn acvf_tfln2_fourier(p: &TemperedParams, h: f64, el2: f64) -> Result<f64> {
    p.validate()?;
    let (d, l) = (p.d, p.lambda);
    let h = h.abs();
    let g = |w: f64| (l * l + w * w).powf(-d);
    let f = |w: f64| (h * w).cos() * sinc_half_sq(w) * g(w);
    let rule = GaussLegendre::new(20);
    let chunk = PI / (h + 1.0);
    let big_w = 2.0 * PI * 400.0;
    let n = (big_w / chunk).ceil() as usize;
    let step = big_w / n as f64;
    let mut body = 0.0;
    for k in 0..n {
        body += rule.integrate(k as f64 * step, (k + 1) as f64 * step, f);
    }
    // tail: cos(hw)(1 - cos w) = cos(hw) - cos((h+1)w)/2 - cos((h-1)w)/2
    let gw = |w: f64| g(w) / (w * w);
    let gw_d = |w: f64| gw(w) * (-2.0 / w - 2.0 * d * w / (l * l + w * w));
    let mut tail = 0.0;
    for (c, a) in [(1.0, h), (-0.5, h + 1.0), (-0.5, (h - 1.0).abs())] {
        if a < 1e-12 {
            tail += c * adaptive_to_inf(gw, big_w, 1e-300, 1e-12)?;
        } else {
            tail += c * (-(a * big_w).sin() * gw(big_w) / a - (a * big_w).cos() * gw_d(big_w) / (a * a));
        }
    }
    Ok(2.0 * el2 / PI * (body + tail))
}

/// Two-sided envelope `C1 b(h) <= gamma^II(h) <= C2 b(h)` with
/// `b(h) = e^{-l h} h^{d-1}` (normalized to `EL2 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tfln2Band {
    pub c1: f64,
    pub c2: f64,
    /// Largest lag used in calibration.
    pub calib_max: f64,
}

impl Tfln2Band {
    /// Calibrates on lags `[calib_max / 4, calib_max]`, `calib_max = max(4, 10 / l)`,
    /// together with the limiting ratio as `h -> inf`.
    pub fn calibrate(p: &TemperedParams) -> Result<Self> {
        p.validate()?;
        let (d, l) = (p.d, p.lambda);
        let calib_max = (10.0 / l).max(4.0);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=16 {
            let h = calib_max * (0.25 + 0.75 * i as f64 / 16.0);
            let r = acvf_tfln2(p, h, 1.0)? * (l * h).exp() * h.powf(1.0 - d);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        // phi(r) ~ (2l)^{-d} r^{d-1} e^{-l r} / Gamma(d), smoothed by the triangle
        let limit = (2.0 * l).powf(-d) / gamma(d) * 2.0 * (l.cosh() - 1.0) / (l * l);
        if d != 0.0 && limit.is_finite() {
            lo = lo.min(limit);
            hi = hi.max(limit);
        }
        Ok(Tfln2Band { c1: lo, c2: hi, calib_max })
    }

    pub fn at(&self, p: &TemperedParams, h: f64) -> (f64, f64) {
        let b = (-p.lambda * h).exp() * h.powf(p.d - 1.0);
        (self.c1 * b, self.c2 * b)
    }
}

/// `(lower, upper)` envelope of `gamma^II(h)`; see [`Tfln2Band`].
pub fn acvf_tfln2_asymptotic_band(p: &TemperedParams, h: f64) -> Result<(f64, f64)> {
    Ok(Tfln2Band::calibrate(p)?.at(p, h))
}

/// Biased sample autocovariance (mean removed, `1/N`) at lags `0..=max_lag`.
pub fn empirical_acvf(samples: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = samples.len();
    if n <= max_lag {
        return Err(Error::Length(format!("{} samples cannot support lag {}", n, max_lag)));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = samples.iter().map(|v| v - mean).collect();
    Ok((0..=max_lag)
        .map(|k| x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect())
}

/// Welch periodogram: Hann window, half-overlapping segments, each segment
/// demeaned. Normalized so that white noise of variance `s^2` has level
/// `s^2 / (2 pi)`. Returns `(omega_k, power)` for `omega_k = 2 pi k / L`,
/// `k = 0..=L/2`.
pub fn periodogram(samples: &[f64], segment_length: usize) -> Result<Vec<(f64, f64)>> {
    let n = samples.len();
    let m = segment_length;
    if m < 2 || next_pow2(m) != m {
        return Err(Error::Length(format!("segment length {} is not a power of two >= 2", m)));
    }
    if m > n {
        return Err(Error::Length(format!("segment length {} exceeds series length {}", m, n)));
    }
    let win: Vec<f64> = (0..m).map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / m as f64).cos()).collect();
    let u: f64 = win.iter().map(|w| w * w).sum();
    let half = m / 2;
    let mut acc = alloc::vec![0.0; half + 1];
    let mut count = 0usize;
    let mut start = 0;
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); m];
    while start + m <= n {
        let seg = &samples[start..start + m];
        let mean = seg.iter().sum::<f64>() / m as f64;
        for (b, (x, w)) in buf.iter_mut().zip(seg.iter().zip(&win)) {
            *b = Complex64::new((x - mean) * w, 0.0);
        }
        fft_in_place(&mut buf, false);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += half;
    }
    let scale = 1.0 / (2.0 * PI * u * count as f64);
    Ok(acc.iter().enumerate().map(|(k, a)| (2.0 * PI * k as f64 / m as f64, a * scale)).collect())
}

/// Least-squares fit of `log|gamma(h)| = log c - l h + delta log h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiLrdFit {
    pub lambda_hat: f64,
    pub delta_hat: f64,
    /// Signed amplitude: negative when every input value is negative.
    pub c_hat: f64,
    pub fit_range: [f64; 2],
    pub residual_rms: f64,
    /// The inputs changed sign; the fit used `|gamma|`.
    pub mixed_sign: bool,
}

pub fn fit_semi_lrd(acvf: &[(f64, f64)]) -> Result<SemiLrdFit> {
    for &(h, g) in acvf {
        if !(h > 0.0) || !h.is_finite() || !(g.abs() > 0.0) || !g.is_finite() {
            return Err(param(format!("semi-LRD fit needs h > 0 and nonzero finite gamma, got ({}, {})", h, g)));
        }
    }
    let mut hs: Vec<f64> = acvf.iter().map(|p| p.0).collect();
    hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    hs.dedup();
    if hs.len() < 3 {
        return Err(Error::DegenerateFit("fewer than three distinct lags"));
    }
    let n = acvf.len();
    let a = nalgebra::DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => -acvf[i].0,
        _ => acvf[i].0.ln(),
    });
    let b = nalgebra::DVector::from_fn(n, |i, _| acvf[i].1.abs().ln());
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(Error::DegenerateFit("design matrix is rank-deficient"));
    }
    let x = svd.solve(&b, 1e-14 * smax).map_err(|_| Error::DegenerateFit("least-squares solve failed"))?;
    let r = &a * &x - &b;
    let neg = acvf.iter().filter(|p| p.1 < 0.0).count();
    let sign = if neg == n { -1.0 } else { 1.0 };
    Ok(SemiLrdFit {
        lambda_hat: x[1],
        delta_hat: x[2],
        c_hat: sign * x[0].exp(),
        fit_range: [hs[0], hs[hs.len() - 1]],
        residual_rms: (r.norm_squared() / n as f64).sqrt(),
        mixed_sign: neg != 0 && neg != n,
    })
}

/// Mean `|x(t + m dx) - x(t)|^q` over the path.
pub fn structure_function(values: &[f64], lag: usize, q: f64) -> Result<f64> {
    if lag == 0 || lag >= values.len() {
        return Err(Error::Length(format!("lag {} outside 1..{}", lag, values.len())));
    }
    let n = values.len() - lag;
    Ok(values[lag..].iter().zip(values).map(|(a, b)| (a - b).abs().powf(q)).sum::<f64>() / n as f64)
}

/// Local regularity estimate from the supremum structure function.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderFit {
    /// Slope of `log F(tau)` against `log tau`.
    pub zeta: f64,
    /// `(tau, F(tau))` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

impl HolderFit {
    /// Estimated Hölder exponent `zeta / 2`.
    pub fn exponent(&self) -> f64 {
        0.5 * self.zeta
    }
}

/// Fits `F(tau) ~ tau^zeta` where `F(tau)` is the block average of
/// `max_t |x(t + tau) - x(t)|^2` over blocks of `16 * max(lags)` samples.
///
/// The mean-square structure function of a Lévy-driven path scales with
/// exponent `1 + 2d` whatever the path regularity; the supremum is governed
/// by the largest jump response and scales with `2d`.
pub fn holder_exponent(values: &[f64], dx: f64, lags: &[usize]) -> Result<HolderFit> {
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if lags.len() < 2 || lags.contains(&0) {
        return Err(Error::DegenerateFit("need at least two positive lags"));
    }
    let block = 16 * max_lag;
    if values.len() < block + max_lag {
        return Err(Error::Length(format!("{} samples too few for lag {}", values.len(), max_lag)));
    }
    let nblocks = (values.len() - max_lag) / block;
    let mut pts = Vec::with_capacity(lags.len());
    for &m in lags {
        let mut acc = 0.0;
        for b in 0..nblocks {
            let lo = b * block;
            let mut mx: f64 = 0.0;
            for j in lo..lo + block {
                mx = mx.max((values[j + m] - values[j]).abs());
            }
            acc += mx * mx;
        }
        pts.push((m as f64 * dx, acc / nblocks as f64));
    }
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::DegenerateFit("path has zero increments"));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    Ok(HolderFit { zeta: ols_slope(&xs, &ys)?, points: pts })
}

pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae coincide"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
