//! Wiener-type integrals `int f dS` against the tempered processes, realized
//! as `int F dL` for the regime-dependent transform `F` of the integrand.
//!
//! | regime | process | range           | transform                          |
//! |--------|---------|-----------------|------------------------------------|
//! | A1     | S^II    | d > 0           | `I^{d,l}_- f`                      |
//! | A2     | S^II    | -1/2 < d < 0    | `D^{-d,l}_- f`                     |
//! | A3     | S^I     | -1/2 < d < 0    | `D^{-d,l}_- f - l I^{1+d,l}_- f`   |
//! | A4     | S^I     | 0 < d < 1/2     | `I^{d,l}_- f - l I^{1+d,l}_- f`    |
//!
//! With these, `int 1_{[0,t]} dS = S(t)` and `Var int f dS = EL2 ||F||^2`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::calculus::{frac_derivative_minus, frac_integral_minus, indicator_derivative_minus, indicator_integral_minus};
use crate::error::{param, Error, Result};
use crate::grid::{GridFunction, SampleGrid};
use crate::levy::{cell_jumps, sample_increments, LevyDriverSpec};
use crate::process::{auto_trunc_width, SamplePath, TemperedParams};
use crate::quad::{GaussLegendre, TanhSinhRule};

/// Step function `sum_i a_i 1_{[t_i, t_{i+1})}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryFunction {
    breakpoints: Vec<f64>,
    coefficients: Vec<f64>,
}

impl ElementaryFunction {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || breakpoints.len() != coefficients.len() + 1 {
            return Err(Error::Length(format!(
                "{} breakpoints for {} coefficients",
                breakpoints.len(),
                coefficients.len()
            )));
        }
        if breakpoints.iter().chain(&coefficients).any(|v| !v.is_finite()) {
            return Err(param("elementary function must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(param("breakpoints must be strictly increasing"));
        }
        Ok(ElementaryFunction { breakpoints, coefficients })
    }

    /// `1_{[a, b)}`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(alloc::vec![a, b], alloc::vec![1.0])
    }

    /// `1_{[0, t]}`, read as `-1_{[t, 0]}` for `t < 0`.
    pub fn indicator_to(t: f64) -> Result<Self> {
        if t > 0.0 {
            Self::indicator(0.0, t)
        } else if t < 0.0 {
            Self::new(alloc::vec![t, 0.0], alloc::vec![-1.0])
        } else {
            Err(param("1_[0,t] needs t != 0"))
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.coefficients).map(|(w, &c)| (w[0], w[1], c))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces().find(|&(a, b, _)| a <= x && x < b).map_or(0.0, |p| p.2)
    }

    pub fn scale(&self, c: f64) -> Self {
        ElementaryFunction {
            breakpoints: self.breakpoints.clone(),
            coefficients: self.coefficients.iter().map(|v| v * c).collect(),
        }
    }

    /// Pointwise `self + c * other` on the union of the breakpoints.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Self {
        let mut bp: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bp.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bp.dedup();
        let coefficients = bp.windows(2).map(|w| self.eval(w[0]) + c * other.eval(w[0])).collect();
        ElementaryFunction { breakpoints: bp, coefficients }
    }

    pub fn sample(&self, grid: SampleGrid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }
}

/// Process an integral is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Tflp1,
    Tflp2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    A1,
    A2,
    A3,
    A4,
}

impl Regime {
    pub fn select(p: &TemperedParams, target: Target) -> Result<Regime> {
        p.validate()?;
        let d = p.d;
        match target {
            Target::Tflp2 if d > 0.0 => Ok(Regime::A1),
            Target::Tflp2 if d < 0.0 => Ok(Regime::A2),
            Target::Tflp2 => Err(Error::Regime { d, what: "TFLP II integrands (d != 0)" }),
            Target::Tflp1 if d > 0.0 && d < 0.5 => Ok(Regime::A4),
            Target::Tflp1 if d < 0.0 => Ok(Regime::A3),
            Target::Tflp1 => Err(Error::Regime { d, what: "TFLP integrands (-1/2 < d < 1/2, d != 0)" }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::A1 => "A1",
            Regime::A2 => "A2",
            Regime::A3 => "A3",
            Regime::A4 => "A4",
        }
    }
}

/// An integrand given either on a grid or as a step function.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrand {
    Grid(GridFunction),
    Elementary(ElementaryFunction),
}

impl From<GridFunction> for Integrand {
    fn from(f: GridFunction) -> Self {
        Integrand::Grid(f)
    }
}

impl From<ElementaryFunction> for Integrand {
    fn from(f: ElementaryFunction) -> Self {
        Integrand::Elementary(f)
    }
}

/// The transform `F` of an integrand, with `||F||_{L2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandTransform {
    pub regime: Regime,
    pub params: TemperedParams,
    /// `F` sampled on the nodes of the transform grid.
    pub transformed: GridFunction,
    pub norm: f64,
    /// Closed-form source, kept so that `F` can be evaluated exactly.
    pub source: Option<ElementaryFunction>,
}

impl IntegrandTransform {
    /// `F(y)`: closed form for step functions, linear interpolation otherwise.
    pub fn eval(&self, y: f64) -> f64 {
        match &self.source {
            Some(f) => elementary_transform_at(f, &self.params, self.regime, y),
            None => interpolate(&self.transformed, y),
        }
    }

    /// Predicted variance `EL2 ||F||^2` of the integral.
    pub fn predicted_variance(&self, el2: f64) -> f64 {
        el2 * self.norm * self.norm
    }

    /// Averages of `F` over the cells of the transform grid.
    pub fn cell_means(&self) -> Vec<f64> {
        let g = self.transformed.grid();
        let v = self.transformed.values();
        match &self.source {
            None => v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
            Some(f) => {
                let gl = GaussLegendre::new(6);
                let ts = TanhSinhRule::new(1.0 / 8.0, 4.0);
                let h = g.dx();
                let bp = f.breakpoints();
                (0..g.n_cells())
                    .map(|k| {
                        let (a, b) = (g.point(k), g.point(k + 1));
                        let inside: Vec<f64> = bp.iter().copied().filter(|&t| t >= a && t <= b).collect();
                        let s = if inside.is_empty() {
                            gl.integrate(a, b, |y| self.eval(y))
                        } else {
                            let mut cuts = alloc::vec![a];
                            cuts.extend(inside.iter().copied().filter(|&t| t > a && t < b));
                            cuts.push(b);
                            cuts.windows(2)
                                .map(|w| ts.integrate(w[0], w[1], |y, _, _| self.eval(y)))
                                .sum()
                        };
                        s / h
                    })
                    .collect()
            }
        }
    }
}

fn interpolate(f: &GridFunction, y: f64) -> f64 {
    let g = f.grid();
    if y < g.x_min() || y > g.x_max() {
        return 0.0;
    }
    let s = (y - g.x_min()) / g.dx();
    let k = (s.floor() as usize).min(g.n_cells() - 1);
    let r = s - k as f64;
    let v = f.values();
    v[k] * (1.0 - r) + v[k + 1] * r
}

fn indicator_transform(a: f64, b: f64, p: &TemperedParams, regime: Regime, y: f64) -> f64 {
    let (d, l) = (p.d, p.lambda);
    match regime {
        Regime::A1 => indicator_integral_minus(a, b, d, l, y),
        Regime::A2 => indicator_derivative_minus(a, b, -d, l, y),
        Regime::A3 => indicator_derivative_minus(a, b, -d, l, y) - l * indicator_integral_minus(a, b, 1.0 + d, l, y),
        Regime::A4 => indicator_integral_minus(a, b, d, l, y) - l * indicator_integral_minus(a, b, 1.0 + d, l, y),
    }
}

fn elementary_transform_at(f: &ElementaryFunction, p: &TemperedParams, regime: Regime, y: f64) -> f64 {
    f.pieces()
        .filter(|&(_, b, c)| y < b && c != 0.0)
        .map(|(a, b, c)| c * indicator_transform(a, b, p, regime, y))
        .sum()
}

fn grid_transform(f: &GridFunction, p: &TemperedParams, regime: Regime) -> Result<GridFunction> {
    let (d, l) = (p.d, p.lambda);
    let out = match regime {
        Regime::A1 => frac_integral_minus(f, d, l)?,
        Regime::A2 => frac_derivative_minus(f, -d, l)?,
        Regime::A3 => {
            let i = frac_integral_minus(f, 1.0 + d, l)?;
            frac_derivative_minus(f, -d, l)?.zip_with(&i, |x, y| x - l * y)?
        }
        Regime::A4 => {
            let i = frac_integral_minus(f, 1.0 + d, l)?;
            frac_integral_minus(f, d, l)?.zip_with(&i, |x, y| x - l * y)?
        }
    };
    Ok(out)
}

// Width left of the support that carries all but ~1e-14 of ||F||^2.
fn left_margin(p: &TemperedParams) -> f64 {
    auto_trunc_width(p, 1e-7)
}

/// Extends `f` by zeros: `left` cells before and one cell after its grid.
fn pad(f: &GridFunction, left: usize) -> Result<GridFunction> {
    let g = f.grid();
    let h = g.dx();
    let grid = SampleGrid::with_step(g.x_min() - left as f64 * h, h, g.n_cells() + left + 1)?;
    let mut v = alloc::vec![0.0; grid.n_points()];
    v[left..left + g.n_points()].copy_from_slice(f.values());
    GridFunction::new(grid, v)
}

/// Transform of a sampled integrand. The grid is extended to the left so
/// that it carries the support of `F`, and `f` is taken as zero off its grid.
pub fn transform_grid(f: &GridFunction, p: &TemperedParams, target: Target) -> Result<IntegrandTransform> {
    let regime = Regime::select(p, target)?;
    let left = (left_margin(p) / f.grid().dx()).ceil() as usize;
    let padded = pad(f, left)?;
    let transformed = grid_transform(&padded, p, regime)?;
    let norm = transformed.l2_norm();
    Ok(IntegrandTransform { regime, params: *p, transformed, norm, source: None })
}

/// Default grid for a step-function transform: dyadic step at most 1/256 of
/// the shortest piece, aligned to multiples of the step, spanning the
/// support of `F`.
pub fn default_elementary_grid(f: &ElementaryFunction, p: &TemperedParams) -> Result<SampleGrid> {
    let shortest = f.breakpoints.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut h = 2f64.powi((shortest / 256.0).log2().floor() as i32);
    let lo = f.breakpoints[0] - left_margin(p);
    let hi = *f.breakpoints.last().unwrap();
    while (hi - lo) / h > (1 << 21) as f64 {
        h *= 2.0;
    }
    let start = (lo / h).floor() * h;
    let n = ((hi - start) / h).ceil() as usize;
    SampleGrid::with_step(start, h, n.max(1))
}

/// Transform of a step function on `grid`, with the norm from quadrature of
/// the closed form.
pub fn transform_elementary_on(
    f: &ElementaryFunction,
    p: &TemperedParams,
    target: Target,
    grid: SampleGrid,
) -> Result<IntegrandTransform> {
    let regime = Regime::select(p, target)?;
    let values = grid
        .points()
        .into_iter()
        .map(|y| {
            let v = elementary_transform_at(f, p, regime, y);
            if v.is_finite() {
                v
            } else {
                // node sits on a singular breakpoint: sample just beside it
                elementary_transform_at(f, p, regime, y - 1e-9 * grid.dx())
            }
        })
        .collect();
    let transformed = GridFunction::new(grid, values)?;
    let mut t = IntegrandTransform { regime, params: *p, transformed, norm: 0.0, source: Some(f.clone()) };
    t.norm = elementary_inner(&t, &t).sqrt();
    Ok(t)
}

pub fn transform_elementary(f: &ElementaryFunction, p: &TemperedParams, target: Target) -> Result<IntegrandTransform> {
    transform_elementary_on(f, p, target, default_elementary_grid(f, p)?)
}

/// Regime-matched transform of `f` for integration against `target`.
pub fn transform_integrand(f: &Integrand, p: &TemperedParams, target: Target) -> Result<IntegrandTransform> {
    match f {
        Integrand::Grid(g) => transform_grid(g, p, target),
        Integrand::Elementary(e) => transform_elementary(e, p, target),
    }
}

// Fixed-node quadrature of int F G over the breakpoints of both step
// functions and a geometric left tail, so the result is exactly bilinear.
fn elementary_inner(f: &IntegrandTransform, g: &IntegrandTransform) -> f64 {
    let (fe, ge) = (f.source.as_ref().unwrap(), g.source.as_ref().unwrap());
    let mut bp: Vec<f64> = fe.breakpoints.iter().chain(&ge.breakpoints).copied().collect();
    bp.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bp.dedup();
    let p = &f.params;
    let ts = TanhSinhRule::new(1.0 / 16.0, 4.5);
    let gl = GaussLegendre::new(20);
    let prod = |y: f64| f.eval(y) * g.eval(y);
    let mut s = 0.0;
    for w in bp.windows(2) {
        s += ts.integrate(w[0], w[1], |y, _, _| prod(y));
    }
    let x0 = bp[0];
    let step = (0.5 / p.lambda).min(1.0);
    s += ts.integrate(x0 - step, x0, |y, _, _| prod(y));
    let far = left_margin(p);
    let mut lo = step;
    while lo < far {
        let hi = 2.0 * lo;
        s += gl.integrate(x0 - hi, x0 - lo, prod);
        lo = hi;
    }
    s
}

/// `<F, G>_{L2}`.
pub fn inner_product(f: &IntegrandTransform, g: &IntegrandTransform) -> Result<f64> {
    if f.regime != g.regime || f.params != g.params {
        return Err(Error::Mismatch("integrand transforms belong to different regimes"));
    }
    if f.source.is_some() && g.source.is_some() {
        return Ok(elementary_inner(f, g));
    }
    if f.transformed.grid() != g.transformed.grid() {
        return Err(Error::Mismatch("integrand transforms live on different grids"));
    }
    Ok(f.transformed.dot(&g.transformed))
}

/// `sum_i a_i (S(t_{i+1}) - S(t_i))` along a stored path.
pub fn integrate_elementary(f: &ElementaryFunction, path: &SamplePath) -> Result<f64> {
    let mut s = 0.0;
    for (a, b, c) in f.pieces() {
        let ia = path.grid.require_index(a)?;
        let ib = path.grid.require_index(b)?;
        s += c * (path.values[ib] - path.values[ia]);
    }
    Ok(s)
}

/// One draw of `int F dL` on the transform grid. Compound Poisson drivers
/// are integrated at their exact jump times; other drivers use cell
/// increments weighted by cell means of `F`.
pub fn integrate_transform(t: &IntegrandTransform, driver: &LevyDriverSpec, seed: u64) -> Result<f64> {
    driver.validate()?;
    let grid = *t.transformed.grid();
    if let LevyDriverSpec::CompoundPoisson { .. } = driver {
        let h = grid.dx();
        let mut s = 0.0;
        for k in 0..grid.n_cells() {
            for (tj, j) in cell_jumps(driver, seed, grid.point(k), h).unwrap_or_default() {
                s += j * t.eval(tj);
            }
        }
        return Ok(s);
    }
    let inc = sample_increments(driver, &grid, seed)?;
    Ok(t.cell_means().iter().zip(&inc).map(|(f, l)| f * l).sum())
}

/// One Monte Carlo draw of the integral of a sampled `f`.
pub fn integrate_general(
    f: &GridFunction,
    p: &TemperedParams,
    driver: &LevyDriverSpec,
    seed: u64,
    target: Target,
) -> Result<f64> {
    integrate_transform(&transform_grid(f, p, target)?, driver, seed)
}

/// A step-function approximation with its transform-space distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryApprox {
    pub function: ElementaryFunction,
    pub distance: f64,
    /// `(pieces, distance)` for every level tried.
    pub history: Vec<(usize, f64)>,
}

/// Dyadic refinement of piecewise averages of `f` over its grid until
/// `||F - F_n|| < tol`.
pub fn approximate_by_elementary(f: &GridFunction, p: &TemperedParams, target: Target, tol: f64) -> Result<ElementaryApprox> {
    let regime = Regime::select(p, target)?;
    let g = *f.grid();
    let n = g.n_cells();
    let left = (left_margin(p) / g.dx()).ceil() as usize;
    let v = f.values();
    let mut history = Vec::new();
    let mut pieces = 1usize;
    loop {
        let cuts: Vec<usize> = (0..=pieces).map(|j| (j * n + pieces / 2) / pieces).collect();
        let coeffs: Vec<f64> = cuts
            .windows(2)
            .map(|w| v[w[0]..w[1]].iter().sum::<f64>() / (w[1] - w[0]) as f64)
            .collect();
        let mut diff = v.to_vec();
        for (w, c) in cuts.windows(2).zip(&coeffs) {
            for x in &mut diff[w[0]..w[1]] {
                *x -= c;
            }
        }
        // cell k carries v[k]; the right end node is outside the support
        diff[n] = 0.0;
        let dist = grid_transform(&pad(&GridFunction::new(g, diff)?, left)?, p, regime)?.l2_norm();
        history.push((pieces, dist));
        if dist < tol {
            let bp = cuts.iter().map(|&i| g.point(i)).collect();
            return Ok(ElementaryApprox { function: ElementaryFunction::new(bp, coeffs)?, distance: dist, history });
        }
        if pieces >= n {
            return Err(Error::NonConvergence(history.len()));
        }
        pieces = (2 * pieces).min(n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::kernel_g2;
    use crate::special::gamma;

    fn tp(d: f64, l: f64) -> TemperedParams {
        TemperedParams::new(d, l).unwrap()
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::select(&tp(0.3, 1.0), Target::Tflp2).unwrap(), Regime::A1);
        assert_eq!(Regime::select(&tp(-0.3, 1.0), Target::Tflp2).unwrap(), Regime::A2);
        assert_eq!(Regime::select(&tp(-0.3, 1.0), Target::Tflp1).unwrap(), Regime::A3);
        assert_eq!(Regime::select(&tp(0.3, 1.0), Target::Tflp1).unwrap(), Regime::A4);
        assert!(Regime::select(&tp(0.7, 1.0), Target::Tflp1).is_err());
        assert!(Regime::select(&tp(0.0, 1.0), Target::Tflp2).is_err());
    }

    #[test]
    fn indicator_transform_is_the_kernel() {
        for d in [0.3, -0.3] {
            let p = tp(d, 0.8);
            let f = ElementaryFunction::indicator_to(1.5).unwrap();
            let t = transform_elementary(&f, &p, Target::Tflp2).unwrap();
            for y in [-3.1, -0.4, 0.7, 1.2] {
                let want = kernel_g2(&p, 1.5, y) / gamma(1.0 + d);
                assert!((t.eval(y) - want).abs() < 1e-12 * want.abs().max(1.0), "d={d} y={y}");
            }
        }
    }

    #[test]
    fn negative_t_sign_convention() {
        let p = tp(0.2, 1.0);
        let a = transform_elementary(&ElementaryFunction::indicator_to(-1.0).unwrap(), &p, Target::Tflp1).unwrap();
        let b = transform_elementary(&ElementaryFunction::indicator(-1.0, 0.0).unwrap(), &p, Target::Tflp1).unwrap();
        for y in [-2.0, -0.5] {
            assert!((a.eval(y) + b.eval(y)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_integrand() {
        let g = SampleGrid::new(0.0, 2.0, 64).unwrap();
        let t = transform_grid(&GridFunction::zeros(g), &tp(0.3, 1.0), Target::Tflp2).unwrap();
        assert_eq!(t.norm, 0.0);
        let cp = LevyDriverSpec::standard_compound_poisson();
        assert_eq!(integrate_general(&GridFunction::zeros(g), &tp(0.3, 1.0), &cp, 5, Target::Tflp2).unwrap(), 0.0);
    }
}
