//! Radix-2 FFT and FFT-based linear convolution.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Smallest power of two `>= n`.
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// In-place FFT of a power-of-two length buffer. The forward transform uses
/// `e^{-i 2 pi jk/n}`; the inverse is unnormalized.
pub fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // twiddles computed directly rather than by repeated multiplication
        let tw: Vec<Complex64> = (0..half).map(|k| Complex64::from_polar(1.0, ang * k as f64)).collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = buf[start + k];
                let v = buf[start + k + half] * tw[k];
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Forward FFT of real data, zero padded to `n`.
pub fn fft_real(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    fft_in_place(&mut buf, false);
    buf
}

/// Full linear convolution `c[k] = sum_j a[j] b[k-j]`, length `a.len() + b.len() - 1`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let m = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= 32 {
        let mut c = alloc::vec![0.0; m];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        return c;
    }
    let n = next_pow2(m);
    let fa = fft_real(a, n);
    let mut fb = fft_real(b, n);
    for (y, x) in fb.iter_mut().zip(&fa) {
        *y *= x;
    }
    fft_in_place(&mut fb, true);
    let scale = 1.0 / n as f64;
    fb.iter().take(m).map(|z| z.re * scale).collect()
}

/// `out[j] = sum_{m >= 0, j + m < n} w[m] f[j + m]` for `j < n = f.len()`.
pub fn correlate(f: &[f64], w: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n == 0 || w.is_empty() {
        return alloc::vec![0.0; n];
    }
    let rf: Vec<f64> = f.iter().rev().copied().collect();
    let c = convolve(&rf, w);
    (0..n).map(|j| c[n - 1 - j]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_dft() {
        let x: Vec<f64> = (0..16).map(|i| ((i * i) % 7) as f64 - 3.0).collect();
        let f = fft_real(&x, 16);
        for k in 0..16 {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &v) in x.iter().enumerate() {
                s += Complex64::from_polar(v, -2.0 * PI * (j * k) as f64 / 16.0);
            }
            assert!((s - f[k]).norm() < 1e-12);
        }
        let mut g = f.clone();
        fft_in_place(&mut g, true);
        for (a, b) in g.iter().zip(&x) {
            assert!((a.re / 16.0 - b).abs() < 1e-13);
        }
    }

    #[test]
    fn correlation_matches_direct() {
        let f: Vec<f64> = (0..90).map(|i| (i as f64 * 0.3).cos()).collect();
        let w: Vec<f64> = (0..40).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let c = correlate(&f, &w);
        for j in [0, 10, 55, 89] {
            let s: f64 = (0..w.len()).filter(|m| j + m < f.len()).map(|m| w[m] * f[j + m]).sum();
            assert!((s - c[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_direct() {
        let a: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..70).map(|i| (i as f64 * 0.11).cos()).collect();
        let c = convolve(&a, &b);
        for k in [0, 5, 50, 120, 168] {
            let mut s = 0.0;
            for j in 0..a.len() {
                if k >= j && k - j < b.len() {
                    s += a[j] * b[k - j];
                }
            }
            assert!((s - c[k]).abs() < 1e-11);
        }
    }
}
