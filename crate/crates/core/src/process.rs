//! Tempered fractional Lévy processes of the first and second kind, their
//! kernels, and Riemann-Stieltjes simulation against sampled driver noise.
//!
//! With `K(u) = u_+^d e^{-l u}` and `M(u) = int_0^{u_+} K`,
//!
//! * `g^I(t, x)  = K(t - x) - K(-x)`
//! * `g^II(t, y) = K(t - y) - K(-y) + l [M(t - y) - M(-y)]`
//!
//! and `S(t) = 1/G(1+d) int g(t, x) dL(x)`.
//!
//! The simulators integrate on a grid `refine` times finer than the
//! observation grid, each driver increment weighted by the exact cell average
//! of the kernel.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Error, Result};
use crate::fft::convolve;
use crate::grid::SampleGrid;
use crate::levy::{increments_on_edges, LevyDriverSpec};
use crate::quad::GaussLegendre;
use crate::special::{gamma, gamma_p};

/// Memory parameter `d > -1/2` and tempering rate `lambda > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperedParams {
    pub d: f64,
    pub lambda: f64,
}

impl TemperedParams {
    pub fn new(d: f64, lambda: f64) -> Result<Self> {
        let p = TemperedParams { d, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > -0.5) || !self.d.is_finite() {
            return Err(param(format!("memory parameter d must exceed -1/2, got {}", self.d)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(param(format!("tempering lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }

    /// `K(u) = u_+^d e^{-l u}` with `0^0 = 0`.
    pub fn k(&self, u: f64) -> f64 {
        if u > 0.0 { u.powf(self.d) * (-self.lambda * u).exp() } else { 0.0 }
    }

    /// `M(u) = int_0^{u_+} v^d e^{-l v} dv`.
    pub fn m(&self, u: f64) -> f64 {
        if u > 0.0 {
            let d1 = self.d + 1.0;
            self.lambda.powf(-d1) * gamma(d1) * gamma_p(d1, self.lambda * u)
        } else {
            0.0
        }
    }

    /// `int_0^{u_+} v^{d+1} e^{-l v} dv`.
    fn m1(&self, u: f64) -> f64 {
        if u > 0.0 {
            let d2 = self.d + 2.0;
            self.lambda.powf(-d2) * gamma(d2) * gamma_p(d2, self.lambda * u)
        } else {
            0.0
        }
    }
}

/// Which process a path realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    Tflp1,
    Tflp2,
    Tfln1,
    Tfln2,
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::Tflp1 => "tflp1",
            ProcessKind::Tflp2 => "tflp2",
            ProcessKind::Tfln1 => "tfln1",
            ProcessKind::Tfln2 => "tfln2",
        }
    }

    pub fn is_noise(&self) -> bool {
        matches!(self, ProcessKind::Tfln1 | ProcessKind::Tfln2)
    }
}

/// Everything needed to regenerate a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathMeta {
    pub params: TemperedParams,
    pub driver: LevyDriverSpec,
    pub seed: u64,
    pub kind: ProcessKind,
    pub trunc_width: f64,
    pub refine: usize,
}

/// A realized path on its observation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub grid: SampleGrid,
    pub values: Vec<f64>,
    pub meta: PathMeta,
}

/// `g^I_{d,l,t}(x)`.
pub fn kernel_g1(p: &TemperedParams, t: f64, x: f64) -> f64 {
    p.k(t - x) - p.k(-x)
}

/// `g^II_{d,l,t}(y)`, with the time integral in closed form.
pub fn kernel_g2(p: &TemperedParams, t: f64, y: f64) -> f64 {
    p.k(t - y) - p.k(-y) + p.lambda * (p.m(t - y) - p.m(-y))
}

/// The equivalent form `d int_0^t (s-y)_+^{d-1} e^{-l (s-y)_+} ds`, valid for `d > 0`.
pub fn kernel_g2_integral_form(p: &TemperedParams, t: f64, y: f64) -> Result<f64> {
    if !(p.d > 0.0) {
        return Err(Error::Regime { d: p.d, what: "the d-integral form of the second-kind kernel" });
    }
    let f = |u: f64| if u > 0.0 { gamma_p(p.d, p.lambda * u) } else { 0.0 };
    Ok(p.lambda.powf(-p.d) * gamma(p.d + 1.0) * (f(t - y) - f(-y)))
}

/// Simulation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Width of the driver window before the first observation; 0 selects it
    /// automatically from `trunc_tol`.
    pub trunc_width: f64,
    /// Integration cells per observation step.
    pub refine: usize,
    /// Bound on `e^{-l R} R^{max(d,0)}` for the truncated kernel tail.
    pub trunc_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { trunc_width: 0.0, refine: 8, trunc_tol: 1e-6 }
    }
}

fn tail_bound(p: &TemperedParams, r: f64) -> f64 {
    (-p.lambda * r).exp() * r.max(1.0).powf(p.d.max(0.0))
}

/// Smallest window `R` with `e^{-l R} R^{max(d,0)} < tol`.
pub fn auto_trunc_width(p: &TemperedParams, tol: f64) -> f64 {
    let mut r = (1.0 / tol).ln() / p.lambda;
    for _ in 0..50 {
        let next = ((1.0 / tol).ln() + p.d.max(0.0) * r.max(1.0).ln()) / p.lambda;
        if (next - r).abs() < 1e-12 * r {
            break;
        }
        r = next;
    }
    r * (1.0 + 1e-9)
}

/// Cell averages `(1/h) int_{ch}^{(c+1)h} K` and `(1/h) int M` for `c < n`.
fn cell_averages(p: &TemperedParams, h: f64, n: usize, with_m: bool) -> (Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::new(12);
    let mut kb = alloc::vec![0.0; n];
    let mut mb = alloc::vec![0.0; if with_m { n } else { 0 }];
    if n == 0 {
        return (kb, mb);
    }
    kb[0] = p.m(h) / h;
    if with_m {
        mb[0] = (h * p.m(h) - p.m1(h)) / h;
    }
    let mut cut = n;
    for c in 1..n {
        let a = c as f64 * h;
        let b = a + h;
        let (mut sk, mut sm) = (0.0, 0.0);
        for (v, w) in gl.mapped(a, b) {
            let kv = p.k(v);
            sk += w * kv;
            sm += w * (b - v) * kv;
        }
        kb[c] = sk / h;
        if with_m {
            mb[c] = p.m(a) + sm / h;
        }
        if kb[c] == 0.0 && sk == 0.0 {
            cut = c;
            break;
        }
    }
    if with_m && cut < n {
        let tail = p.lambda.powf(-(p.d + 1.0)) * gamma(p.d + 1.0);
        for v in &mut mb[cut..] {
            *v = tail;
        }
    }
    (kb, mb)
}

/// Pre-computed simulator for one law and one observation grid; the weights
/// are shared by every path drawn from it.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: TemperedParams,
    driver: LevyDriverSpec,
    kind: ProcessKind,
    obs: SampleGrid,
    opts: SimOptions,
    smooth: bool,
    h: f64,
    k_start: i64,
    n_cells: usize,
    obs_idx: Vec<i64>,
    weights: Vec<f64>,
    norm: f64,
}

impl Simulator {
    /// Direct Riemann-Stieltjes simulator of `TFLP` (`Tflp1`) or `TFLP II` (`Tflp2`).
    pub fn new(
        kind: ProcessKind,
        params: TemperedParams,
        obs: SampleGrid,
        driver: LevyDriverSpec,
        opts: SimOptions,
    ) -> Result<Self> {
        Self::build(kind, params, obs, driver, opts, false)
    }

    /// Simulator through `S(t) = int_0^t Y(s) ds` with the absolutely
    /// continuous inner process `Y`; requires `d > 1/2`.
    pub fn smooth(
        kind: ProcessKind,
        params: TemperedParams,
        obs: SampleGrid,
        driver: LevyDriverSpec,
        opts: SimOptions,
    ) -> Result<Self> {
        if !(params.d > 0.5) {
            return Err(Error::Regime { d: params.d, what: "the absolutely continuous representation (needs d > 1/2)" });
        }
        Self::build(kind, params, obs, driver, opts, true)
    }

    fn build(
        kind: ProcessKind,
        params: TemperedParams,
        obs: SampleGrid,
        driver: LevyDriverSpec,
        opts: SimOptions,
        smooth: bool,
    ) -> Result<Self> {
        params.validate()?;
        driver.validate()?;
        if kind.is_noise() {
            return Err(param("simulate a process kind and difference it with noise_path"));
        }
        if kind == ProcessKind::Tflp2 && params.d == 0.0 {
            return Err(Error::Regime { d: 0.0, what: "the second-kind process (needs d != 0)" });
        }
        if opts.refine == 0 {
            return Err(param("refinement factor must be at least 1"));
        }
        if !(opts.trunc_tol > 0.0) {
            return Err(param("truncation tolerance must be positive"));
        }
        let zero = obs.index_of(0.0).ok_or_else(|| param("observation grid must contain t = 0 as a node"))?;
        let h = obs.dx() / opts.refine as f64;
        let r = if opts.trunc_width == 0.0 {
            auto_trunc_width(&params, opts.trunc_tol)
        } else {
            let b = tail_bound(&params, opts.trunc_width);
            if !(opts.trunc_width > 0.0) || b > opts.trunc_tol {
                return Err(Error::Truncation { width: opts.trunc_width, bound: b });
            }
            opts.trunc_width
        };
        let step_cells = opts.refine as i64;
        let obs_idx: Vec<i64> = (0..obs.n_points()).map(|j| (j as i64 - zero as i64) * step_cells).collect();
        let n_min = obs_idx[0];
        let n_max = obs_idx[obs_idx.len() - 1];
        let k_start = n_min.min(0) - (r / h).ceil() as i64;
        let n_cells = (n_max - k_start) as usize;
        let norm = 1.0 / gamma(1.0 + params.d);
        let weights = if smooth {
            // cell averages of K' (first kind) or K' + l K (second kind)
            let mut w: Vec<f64> = (0..n_cells)
                .map(|c| (params.k((c + 1) as f64 * h) - params.k(c as f64 * h)) / h)
                .collect();
            if kind == ProcessKind::Tflp2 {
                let (kb, _) = cell_averages(&params, h, n_cells, false);
                for (x, k) in w.iter_mut().zip(kb) {
                    *x += params.lambda * k;
                }
            }
            w
        } else {
            let (kb, mb) = cell_averages(&params, h, n_cells, kind == ProcessKind::Tflp2);
            if kind == ProcessKind::Tflp2 {
                kb.iter().zip(&mb).map(|(k, m)| k + params.lambda * m).collect()
            } else {
                kb
            }
        };
        Ok(Simulator {
            params,
            driver,
            kind,
            obs,
            opts: SimOptions { trunc_width: r, ..opts },
            smooth,
            h,
            k_start,
            n_cells,
            obs_idx,
            weights,
            norm,
        })
    }

    pub fn integration_step(&self) -> f64 {
        self.h
    }

    pub fn trunc_width(&self) -> f64 {
        self.opts.trunc_width
    }

    pub fn obs_grid(&self) -> &SampleGrid {
        &self.obs
    }

    /// Driver increments on the integration cells, oldest first.
    pub fn increments(&self, seed: u64) -> Result<Vec<f64>> {
        let edges: Vec<f64> = (0..=self.n_cells).map(|i| (self.k_start + i as i64) as f64 * self.h).collect();
        increments_on_edges(&self.driver, seed, &edges, self.h)
    }

    /// Path for `seed`.
    pub fn path(&self, seed: u64) -> Result<SamplePath> {
        let inc = self.increments(seed)?;
        let values = self.path_from_increments(&inc)?;
        Ok(SamplePath {
            grid: self.obs,
            values,
            meta: PathMeta {
                params: self.params,
                driver: self.driver,
                seed,
                kind: self.kind,
                trunc_width: self.opts.trunc_width,
                refine: self.opts.refine,
            },
        })
    }

    /// Observation values for given driver increments (one per integration cell).
    pub fn path_from_increments(&self, inc: &[f64]) -> Result<Vec<f64>> {
        if inc.len() != self.n_cells {
            return Err(Error::Length(format!("expected {} increments, got {}", self.n_cells, inc.len())));
        }
        if self.smooth {
            return Ok(self.smooth_values(inc));
        }
        // A(n) = sum_{k < n} w_{n-1-k} dL_k; S(t_n) = (A(n) - A(0)) / G(1+d)
        let a0 = self.moving_average(inc, &[0]);
        let a = self.moving_average(inc, &self.obs_idx);
        Ok(self
            .obs_idx
            .iter()
            .zip(a)
            .map(|(&n, v)| if n == 0 { 0.0 } else { self.norm * (v - a0[0]) })
            .collect())
    }

    /// `A(n)` for each requested fine-grid index `n`.
    fn moving_average(&self, inc: &[f64], idx: &[i64]) -> Vec<f64> {
        let direct_cost = idx.len() as f64 * self.n_cells as f64;
        let fft_cost = 40.0 * self.n_cells as f64 * (2.0 * self.n_cells as f64).log2();
        if direct_cost <= fft_cost {
            idx.iter()
                .map(|&n| {
                    let top = (n - self.k_start) as usize;
                    let mut s = 0.0;
                    for i in 0..top {
                        s += self.weights[top - 1 - i] * inc[i];
                    }
                    s
                })
                .collect()
        } else {
            let conv = convolve(&self.weights, inc);
            idx.iter()
                .map(|&n| {
                    let top = (n - self.k_start) as usize;
                    if top == 0 { 0.0 } else { conv[top - 1] }
                })
                .collect()
        }
    }

    fn smooth_values(&self, inc: &[f64]) -> Vec<f64> {
        let conv = convolve(&self.weights, inc);
        let y = |n: i64| -> f64 {
            let top = (n - self.k_start) as usize;
            if top == 0 { 0.0 } else { self.norm * conv[top - 1] }
        };
        // trapezoid from the fine node 0 outward in both directions
        let n_min = self.obs_idx[0].min(0);
        let n_max = self.obs_idx[self.obs_idx.len() - 1];
        let mut cum = alloc::vec![0.0; (n_max - n_min + 1) as usize];
        let off = (-n_min) as usize;
        let half = 0.5 * self.h;
        let mut prev = y(0);
        for n in 1..=n_max {
            let cur = y(n);
            cum[off + n as usize] = cum[off + n as usize - 1] + half * (prev + cur);
            prev = cur;
        }
        prev = y(0);
        for n in (n_min..0).rev() {
            let cur = y(n);
            let i = (n - n_min) as usize;
            cum[i] = cum[i + 1] - half * (prev + cur);
            prev = cur;
        }
        self.obs_idx.iter().map(|&n| cum[(n - n_min) as usize]).collect()
    }
}

fn sim_opts(trunc_width: f64) -> SimOptions {
    SimOptions { trunc_width, ..SimOptions::default() }
}

/// One path of `S^I` on `obs` (which must contain 0). `trunc_width = 0` picks
/// the driver window automatically.
pub fn simulate_tflp1(
    params: &TemperedParams,
    obs: &SampleGrid,
    driver: &LevyDriverSpec,
    trunc_width: f64,
    seed: u64,
) -> Result<SamplePath> {
    Simulator::new(ProcessKind::Tflp1, *params, *obs, *driver, sim_opts(trunc_width))?.path(seed)
}

/// One path of `S^II` on `obs`.
pub fn simulate_tflp2(
    params: &TemperedParams,
    obs: &SampleGrid,
    driver: &LevyDriverSpec,
    trunc_width: f64,
    seed: u64,
) -> Result<SamplePath> {
    Simulator::new(ProcessKind::Tflp2, *params, *obs, *driver, sim_opts(trunc_width))?.path(seed)
}

/// One path for `d > 1/2` through the absolutely continuous representation.
/// Shares driver increments with the direct simulators for equal seeds.
pub fn simulate_smooth_regime(
    params: &TemperedParams,
    obs: &SampleGrid,
    driver: &LevyDriverSpec,
    trunc_width: f64,
    seed: u64,
    kind: ProcessKind,
) -> Result<SamplePath> {
    Simulator::smooth(kind, *params, *obs, *driver, sim_opts(trunc_width))?.path(seed)
}

/// Increment series `X(t) = S(t + lag) - S(t)` of a process path.
pub fn noise_path(path: &SamplePath, unit_lag: f64) -> Result<SamplePath> {
    let kind = match path.meta.kind {
        ProcessKind::Tflp1 => ProcessKind::Tfln1,
        ProcessKind::Tflp2 => ProcessKind::Tfln2,
        _ => return Err(param("noise_path needs a process path, not a noise path")),
    };
    let dx = path.grid.dx();
    let r = unit_lag / dx;
    let l = r.round();
    if !(l >= 1.0) || (r - l).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::LagMisaligned { lag: unit_lag, dx });
    }
    let l = l as usize;
    if l >= path.grid.n_cells() {
        return Err(Error::Length(format!("lag of {l} steps leaves fewer than two noise values")));
    }
    let values: Vec<f64> = (0..path.values.len() - l).map(|j| path.values[j + l] - path.values[j]).collect();
    let grid = SampleGrid::with_step(path.grid.x_min(), dx, values.len() - 1)?;
    Ok(SamplePath { grid, values, meta: PathMeta { kind, ..path.meta } })
}
