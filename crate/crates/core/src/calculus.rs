//! Tempered fractional integrals and derivatives on uniform grids.
//!
//! `I^{k,l}_- f(y) = 1/G(k) int_0^inf f(y+u) u^{k-1} e^{-l u} du` and the
//! Marchaud derivative
//! `D^{k,l}_- f(y) = l^k f(y) + k/G(1-k) int_0^inf (f(y) - f(y+u)) u^{-k-1} e^{-l u} du`.
//! The `+` operators are their mirror images. Beyond the grid, functions are
//! continued by their edge value.
//!
//! In Fourier terms (`f^(w) = int e^{-iwx} f(x) dx`) the minus operators are
//! the multipliers `(l - iw)^{-k}` and `(l - iw)^k`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::{correlate, fft_in_place, fft_real, next_pow2};
use crate::grid::GridFunction;
use crate::quad::GaussLegendre;
use crate::special::{gamma, gamma_p, gamma_p_diff, gamma_q, upper_gamma};

/// Tolerances for the grid operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalculusOptions {
    /// Largest acceptable bound on the part of the operator, seen from the
    /// middle of the grid, that falls beyond the grid edge (relative to `max |f|`).
    pub tail_tol: f64,
}

impl Default for CalculusOptions {
    fn default() -> Self {
        CalculusOptions { tail_tol: 1e-8 }
    }
}

/// Direction of a tempered operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Integrates over the future, `s > y`.
    Minus,
    /// Integrates over the past, `s < y`.
    Plus,
}

fn check_kl(kappa: f64, lambda: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain { arg: kappa, what: "order kappa must be positive" });
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain { arg: lambda, what: "tempering lambda must be positive" });
    }
    Ok(())
}

fn check_derivative_order(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain { arg: kappa, what: "pointwise derivative needs 0 < kappa < 1" });
    }
    Ok(())
}

/// Number of kernel cells before `e^{-l u}` is negligible.
fn kernel_cells(lambda: f64, h: f64, n: usize) -> usize {
    let m = (48.0 / (lambda * h)).ceil();
    if m >= n as f64 { n } else { (m as usize).max(1) }
}

fn check_tail(f: &GridFunction, bound_per_unit: f64, opts: &CalculusOptions) -> Result<()> {
    let v = f.values();
    let edge = v[v.len() - 1].abs();
    let scale = f.max_abs();
    if scale == 0.0 || edge == 0.0 {
        return Ok(());
    }
    let bound = edge * bound_per_unit / scale;
    if bound > opts.tail_tol {
        return Err(Error::GridTooNarrow { bound, tol: opts.tail_tol });
    }
    Ok(())
}

fn minus_integral(f: &GridFunction, kappa: f64, lambda: f64, opts: &CalculusOptions) -> Result<GridFunction> {
    check_kl(kappa, lambda)?;
    let grid = *f.grid();
    let h = grid.dx();
    let n = grid.n_cells();
    let half = 0.5 * (grid.x_max() - grid.x_min());
    check_tail(f, lambda.powf(-kappa) * gamma_q(kappa, lambda * half), opts)?;
    let fv = f.values();
    let fnode = fv[n];
    let lk = lambda.powf(-kappa);
    let gk = gamma(kappa);

    // A_m = int_cell w, B_m = int_cell w (u - m h)/h with w = u^{k-1} e^{-l u}/G(k)
    let mmax = kernel_cells(lambda, h, n);
    let mut a = alloc::vec![0.0; mmax];
    let mut b = alloc::vec![0.0; mmax];
    a[0] = lk * gamma_p(kappa, lambda * h);
    b[0] = kappa * lk / lambda * gamma_p(kappa + 1.0, lambda * h) / h;
    let gl = GaussLegendre::new(12);
    for m in 1..mmax {
        let lo = m as f64 * h;
        let (mut am, mut bm) = (0.0, 0.0);
        for (u, wt) in gl.mapped(lo, lo + h) {
            let w = wt * u.powf(kappa - 1.0) * (-lambda * u).exp() / gk;
            am += w;
            bm += w * (u - lo) / h;
        }
        a[m] = am;
        b[m] = bm;
    }
    let mut w = alloc::vec![0.0; mmax];
    for m in 0..mmax {
        w[m] = a[m] - b[m] + if m > 0 { b[m - 1] } else { 0.0 };
    }
    let body = correlate(&fv[..n], &w);
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let cells = n - j;
        let mut v = if j < n { body[j] } else { 0.0 };
        if cells >= 1 && cells <= mmax {
            v += b[cells - 1] * fnode;
        }
        v += fnode * lk * gamma_q(kappa, lambda * cells as f64 * h);
        out.push(v);
    }
    Ok(GridFunction::from_parts(grid, out))
}

fn minus_derivative(f: &GridFunction, kappa: f64, lambda: f64, opts: &CalculusOptions) -> Result<GridFunction> {
    check_kl(kappa, lambda)?;
    check_derivative_order(kappa)?;
    let grid = *f.grid();
    let h = grid.dx();
    let n = grid.n_cells();
    let half = 0.5 * (grid.x_max() - grid.x_min());
    let kk = kappa / gamma(1.0 - kappa);
    check_tail(f, kk * lambda.powf(kappa) * upper_gamma(-kappa, lambda * half), opts)?;
    let fv = f.values();
    let fnode = fv[n];
    let lk = lambda.powf(kappa);

    // first cell: exact power-law integral against the local linear model
    let c0 = lambda.powf(kappa - 1.0) * gamma(1.0 - kappa) * gamma_p(1.0 - kappa, lambda * h) / h;
    // remaining cells: midpoint rule
    let mmax = kernel_cells(lambda, h, n);
    let mut om = alloc::vec![0.0; mmax];
    for (m, o) in om.iter_mut().enumerate().skip(1) {
        let u = (m as f64 + 0.5) * h;
        *o = h * u.powf(-kappa - 1.0) * (-lambda * u).exp();
    }
    let mut prefix = alloc::vec![0.0; mmax + 1];
    for m in 1..mmax {
        prefix[m + 1] = prefix[m] + om[m];
    }
    let mut uw = alloc::vec![0.0; mmax];
    for m in 1..mmax {
        uw[m] = 0.5 * (om[m] + om[m - 1]);
    }
    let body = correlate(&fv[..n], &uw);
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let fj = fv[j];
        if j == n {
            out.push(lk * fj);
            continue;
        }
        let cells = n - j;
        let inner = cells - 1;
        let used = inner.min(mmax - 1);
        let mut s = (fj - fv[j + 1]) * c0;
        s += fj * prefix[used + 1] - body[j];
        if inner >= 1 && inner < mmax {
            s -= 0.5 * om[inner] * fnode;
        }
        s += (fj - fnode) * lk * upper_gamma(-kappa, lambda * cells as f64 * h);
        out.push(lk * fj + kk * s);
    }
    Ok(GridFunction::from_parts(grid, out))
}

fn mirrored<F>(f: &GridFunction, side: Side, op: F) -> Result<GridFunction>
where
    F: Fn(&GridFunction) -> Result<GridFunction>,
{
    match side {
        Side::Minus => op(f),
        Side::Plus => Ok(op(&f.reflect())?.reflect()),
    }
}

/// `I^{k,l}_- f` on the grid of `f`.
pub fn frac_integral_minus(f: &GridFunction, kappa: f64, lambda: f64) -> Result<GridFunction> {
    frac_integral(f, kappa, lambda, Side::Minus, &CalculusOptions::default())
}

/// `I^{k,l}_+ f` on the grid of `f`.
pub fn frac_integral_plus(f: &GridFunction, kappa: f64, lambda: f64) -> Result<GridFunction> {
    frac_integral(f, kappa, lambda, Side::Plus, &CalculusOptions::default())
}

/// Tempered fractional integral by product integration against the linear
/// interpolant of `f`.
pub fn frac_integral(
    f: &GridFunction,
    kappa: f64,
    lambda: f64,
    side: Side,
    opts: &CalculusOptions,
) -> Result<GridFunction> {
    mirrored(f, side, |g| minus_integral(g, kappa, lambda, opts))
}

/// `D^{k,l}_- f` on the grid of `f`, `0 < k < 1`.
pub fn frac_derivative_minus(f: &GridFunction, kappa: f64, lambda: f64) -> Result<GridFunction> {
    frac_derivative(f, kappa, lambda, Side::Minus, &CalculusOptions::default())
}

/// `D^{k,l}_+ f` on the grid of `f`, `0 < k < 1`.
pub fn frac_derivative_plus(f: &GridFunction, kappa: f64, lambda: f64) -> Result<GridFunction> {
    frac_derivative(f, kappa, lambda, Side::Plus, &CalculusOptions::default())
}

/// Marchaud-form tempered derivative. The cell next to the evaluation point
/// is integrated exactly against a linear model of `f`; the others use the
/// midpoint rule, which makes the scheme first order in `dx^{1-k}`.
pub fn frac_derivative(
    f: &GridFunction,
    kappa: f64,
    lambda: f64,
    side: Side,
    opts: &CalculusOptions,
) -> Result<GridFunction> {
    mirrored(f, side, |g| minus_derivative(g, kappa, lambda, opts))
}

/// Angular frequencies of an `n`-point FFT with sample spacing `h`.
fn fft_omegas(n: usize, h: f64) -> impl Iterator<Item = f64> {
    let base = 2.0 * core::f64::consts::PI / (n as f64 * h);
    (0..n).map(move |k| if k <= n / 2 { k as f64 * base } else { (k as f64 - n as f64) * base })
}

/// Applies the multiplier `(l - iw)^k` (`Side::Minus`) or `(l + iw)^k`
/// (`Side::Plus`) through a zero-padded FFT. Principal branch; since `l > 0`
/// the base stays in the right half-plane. Negative `kappa` gives the
/// fractional integrals.
pub fn fourier_multiplier(f: &GridFunction, kappa: f64, lambda: f64, side: Side) -> Result<GridFunction> {
    if !(lambda > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain { arg: lambda, what: "multiplier needs lambda > 0 and finite kappa" });
    }
    let grid = *f.grid();
    let n = next_pow2(2 * grid.n_points());
    let mut spec = fft_real(f.values(), n);
    let sgn = match side {
        Side::Minus => -1.0,
        Side::Plus => 1.0,
    };
    for (z, w) in spec.iter_mut().zip(fft_omegas(n, grid.dx())) {
        *z *= Complex64::new(lambda, sgn * w).powf(kappa);
    }
    fft_in_place(&mut spec, true);
    let inv = 1.0 / n as f64;
    let values = spec.iter().take(grid.n_points()).map(|z| z.re * inv).collect();
    Ok(GridFunction::from_parts(grid, values))
}

/// `||(l^2 + w^2)^{k/2} f^||` with the unitary normalization, so that
/// `k -> 0` recovers the plain L2 norm.
pub fn sobolev_norm(f: &GridFunction, kappa: f64, lambda: f64) -> Result<f64> {
    check_kl(kappa.max(f64::MIN_POSITIVE), lambda)?;
    let grid = *f.grid();
    let h = grid.dx();
    let n = next_pow2(2 * grid.n_points());
    let spec = fft_real(f.values(), n);
    let mut s = 0.0;
    for (z, w) in spec.iter().zip(fft_omegas(n, h)) {
        s += (lambda * lambda + w * w).powf(kappa) * z.norm_sqr();
    }
    Ok((s * h / n as f64).sqrt())
}

/// `I^{k,l}_- 1_{[a,b)}(y)` in closed form.
pub fn indicator_integral_minus(a: f64, b: f64, kappa: f64, lambda: f64, y: f64) -> f64 {
    if y >= b || a >= b {
        return 0.0;
    }
    let lo = lambda * (a - y).max(0.0);
    let hi = lambda * (b - y);
    lambda.powf(-kappa) * gamma_p_diff(kappa, lo, hi)
}

/// `D^{k,l}_- 1_{[a,b)}(y)` in closed form, `0 < k < 1`, for `y` off the
/// jump points: `l I^{1-k}_- 1(y) + [(b-y)^{-k} e^{-l(b-y)} - 1{y<a} (a-y)^{-k} e^{-l(a-y)}] / G(1-k)`.
pub fn indicator_derivative_minus(a: f64, b: f64, kappa: f64, lambda: f64, y: f64) -> f64 {
    if y >= b || a >= b {
        return 0.0;
    }
    let mut edges = (b - y).powf(-kappa) * (-lambda * (b - y)).exp();
    if y < a {
        edges -= (a - y).powf(-kappa) * (-lambda * (a - y)).exp();
    }
    lambda * indicator_integral_minus(a, b, 1.0 - kappa, lambda, y) + edges / gamma(1.0 - kappa)
}
