//! Verification batteries behind `tflp verify`.

use serde::Serialize;

use tflp_core::analytics::{
    acvf_tfln1, acvf_tfln2, acvf_tfln2_fourier, cov_tflp1, cov_tflp2, spec_density_tfln1, spec_density_tfln2,
    var_limit_tflp1,
};
use tflp_core::calculus::{fourier_multiplier, frac_derivative_minus, frac_integral_minus, Side};
use tflp_core::grid::{GridFunction, SampleGrid};
use tflp_core::integration::{integrate_transform, transform_elementary, transform_grid, ElementaryFunction, Target};
use tflp_core::levy::LevyDriverSpec;
use tflp_core::process::{kernel_g1, kernel_g2, ProcessKind, SimOptions, TemperedParams};
use tflp_core::quad::{adaptive_to_inf, tanh_sinh};

use crate::ensemble::{member_seed, par_map, Moments, PathJob};
use crate::error::{CliError, CliResult};

/// Size of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Quick,
    Full,
}

impl std::str::FromStr for Budget {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "quick" => Ok(Budget::Quick),
            "full" => Ok(Budget::Full),
            _ => Err(CliError::Param(format!("budget must be quick or full, got {s:?}"))),
        }
    }
}

pub const SUITES: [&str; 4] = ["calculus", "covariance", "isometry", "spectra"];

/// One line of a verification table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip)]
    one_sided: bool,
}

impl Check {
    /// `|measured - expected| <= tol`.
    fn near(suite: &'static str, name: String, measured: f64, expected: f64, tol: f64) -> Check {
        let pass = (measured - expected).abs() <= tol;
        Check { suite, name, measured, expected, tol, pass, one_sided: false }
    }

    /// Relative error `|measured/expected - 1| <= tol`.
    fn rel(suite: &'static str, name: String, measured: f64, expected: f64, tol: f64) -> Check {
        Check::near(suite, name, measured, expected, tol * expected.abs())
    }

    /// `measured >= expected - tol`.
    fn at_least(suite: &'static str, name: String, measured: f64, expected: f64, tol: f64) -> Check {
        let pass = measured >= expected - tol;
        Check { suite, name, measured, expected, tol, pass, one_sided: true }
    }

    /// The same check with its tolerance multiplied by `k`.
    pub fn scaled(self, k: f64) -> Check {
        let tol = self.tol * k;
        let pass = if self.one_sided {
            self.measured >= self.expected - tol
        } else {
            (self.measured - self.expected).abs() <= tol
        };
        Check { tol, pass, ..self }
    }
}

pub struct VerifyOptions {
    pub budget: Budget,
    /// Monte Carlo draws per check.
    pub draws: usize,
    pub seed: u64,
}

pub fn run_suite(suite: &str, opts: &VerifyOptions, pool: &rayon::ThreadPool) -> CliResult<Vec<Check>> {
    match suite {
        "calculus" => calculus(opts),
        "covariance" => covariance(opts, pool),
        "isometry" => isometry(opts, pool),
        "spectra" => spectra(),
        "all" => {
            let mut all = Vec::new();
            for s in SUITES {
                all.extend(run_suite(s, opts, pool)?);
            }
            Ok(all)
        }
        _ => Err(CliError::Param(format!("unknown suite {suite:?}"))),
    }
}

/// Fixed-width pass/fail table.
pub fn format_table(checks: &[Check]) -> String {
    let mut s = format!("{:<11} {:<48} {:>14} {:>14} {:>10}  result\n", "suite", "check", "measured", "expected", "tol");
    for c in checks {
        s += &format!(
            "{:<11} {:<48} {:>14.6e} {:>14.6e} {:>10.2e}  {}\n",
            c.suite,
            c.name,
            c.measured,
            c.expected,
            c.tol,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    s
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn bump_grid(dx: f64) -> CliResult<GridFunction> {
    let half = 12.0;
    let n = (2.0 * half / dx).round() as usize;
    Ok(GridFunction::from_fn(SampleGrid::new(-half, half, n)?, |x| (-x * x).exp()))
}

fn calculus(opts: &VerifyOptions) -> CliResult<Vec<Check>> {
    const S: &str = "calculus";
    let last = if opts.budget == Budget::Quick { 6 } else { 9 };
    let dxs: Vec<f64> = (4..=last).map(|k| 2f64.powi(-k)).collect();
    let lambda = 1.0;
    let mut out = Vec::new();
    for kappa in [0.2f64, 0.5, 0.8] {
        let nominal = (1.0 - kappa).min(1.0);
        let mut errs = Vec::new();
        let mut worst_ratio: f64 = 0.0;
        for &dx in &dxs {
            let f = bump_grid(dx)?;
            let back = frac_derivative_minus(&frac_integral_minus(&f, kappa, lambda)?, kappa, lambda)?;
            errs.push(back.sub(&f)?.max_abs());
            let m = fourier_multiplier(&f, kappa, lambda, Side::Minus)?;
            let d = frac_derivative_minus(&f, kappa, lambda)?;
            worst_ratio = worst_ratio.max(m.sub(&d)?.l2_norm() / (0.1 * dx.powf(1.0 - kappa)));
        }
        let lx: Vec<f64> = dxs.iter().map(|d| d.ln()).collect();
        let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        out.push(Check::at_least(S, format!("D(I f) = f order, kappa={kappa}"), slope(&lx, &ly), nominal, 0.15));
        out.push(Check::at_least(
            S,
            format!("multiplier vs Marchaud / 0.1dx^(1-k), k={kappa}"),
            -worst_ratio,
            -1.0,
            0.0,
        ));
    }
    let f = bump_grid(2f64.powi(-6))?;
    let ab = frac_integral_minus(&frac_integral_minus(&f, 0.3, lambda)?, 0.4, lambda)?;
    let c = frac_integral_minus(&f, 0.7, lambda)?;
    out.push(Check::near(S, "semigroup I^0.4 I^0.3 = I^0.7 (max)".into(), ab.sub(&c)?.max_abs(), 0.0, 1e-4));
    Ok(out)
}

/// `int f` over the real line, split at `cuts`, for integrands that vanish
/// to the right of the last cut and decay to the left.
pub fn kernel_integral<F: Fn(f64) -> f64>(f: F, cuts: &[f64]) -> CliResult<f64> {
    let mut c = cuts.to_vec();
    c.sort_by(|a, b| a.partial_cmp(b).unwrap());
    c.dedup();
    let mut s = adaptive_to_inf(|u| f(c[0] - u), 0.0, 1e-300, 1e-13)?;
    for w in c.windows(2) {
        s += tanh_sinh(|x, _, _| f(x), w[0], w[1], 1e-13)?;
    }
    Ok(s)
}

fn gamma1p(d: f64) -> f64 {
    tflp_core::special::gamma_fn(1.0 + d).unwrap_or(f64::NAN)
}

fn covariance(opts: &VerifyOptions, pool: &rayon::ThreadPool) -> CliResult<Vec<Check>> {
    const S: &str = "covariance";
    let mut out = Vec::new();
    let el2 = 1.0 / 3.0;
    for d in [-0.3, 0.2, 0.45] {
        let p = TemperedParams::new(d, 0.5)?;
        let g = gamma1p(d);
        for (s, t) in [(0.5, 1.0), (1.0, 2.0), (2.0, 3.0)] {
            let q = kernel_integral(|x| kernel_g1(&p, s, x) * kernel_g1(&p, t, x), &[0.0, s, t])?;
            let want = el2 * q / (g * g);
            out.push(Check::rel(S, format!("cov1 d={d} (s,t)=({s},{t})"), cov_tflp1(&p, s, t, el2), want, 1e-6));
        }
        let t = 20.0 / p.lambda;
        out.push(Check::rel(S, format!("plateau d={d}"), cov_tflp1(&p, t, t, el2), var_limit_tflp1(&p, el2), 1e-5));
        let pts = [0.5, 1.0, 1.5, 2.0];
        let gram = nalgebra::Matrix4::from_fn(|i, j| cov_tflp1(&p, pts[i], pts[j], el2));
        let min_eig = gram.symmetric_eigenvalues().min();
        out.push(Check::at_least(S, format!("Gram min eigenvalue d={d}"), min_eig, 0.0, 1e-10));
    }
    for d in [0.2, 0.45] {
        let p = TemperedParams::new(d, 1.0)?;
        let g = gamma1p(d);
        for (s, t) in [(1.0, 1.0), (1.0, 2.0)] {
            let q = kernel_integral(|y| kernel_g2(&p, s, y) * kernel_g2(&p, t, y), &[0.0, s, t])?;
            let want = el2 * q / (g * g);
            out.push(Check::rel(S, format!("cov2 d={d} (s,t)=({s},{t})"), cov_tflp2(&p, s, t, el2)?, want, 1e-5));
        }
    }
    // ensemble variances against the formulas
    let p = TemperedParams::new(0.3, 0.5)?;
    let cp = LevyDriverSpec::standard_compound_poisson();
    let obs = SampleGrid::new(0.0, 2.0, 4)?;
    for kind in [ProcessKind::Tflp1, ProcessKind::Tflp2] {
        let job = PathJob::new(kind, p, obs, cp, SimOptions::default(), false)?;
        let paths = job.ensemble(opts.seed, opts.draws, pool)?;
        for (j, t) in [(1, 0.5), (2, 1.0), (4, 2.0)] {
            let x: Vec<f64> = paths.iter().map(|q| q.values[j]).collect();
            let m = Moments::of(&x);
            let want = match kind {
                ProcessKind::Tflp1 => cov_tflp1(&p, t, t, el2),
                _ => cov_tflp2(&p, t, t, el2)?,
            };
            out.push(Check::near(S, format!("MC Var {} t={t}", kind.name()), m.var, want, 3.0 * m.var_se));
        }
    }
    Ok(out)
}

/// Test integrands of the isometry battery.
pub fn isometry_integrands(budget: Budget) -> CliResult<(Vec<(String, ElementaryFunction)>, Vec<(String, GridFunction)>)> {
    let mut el = vec![
        ("1[0,1)".to_string(), ElementaryFunction::indicator(0.0, 1.0)?),
        ("2*1[0,.5)-1[.5,1.5)".to_string(), ElementaryFunction::new(vec![0.0, 0.5, 1.5], vec![2.0, -1.0])?),
    ];
    let mut gr = vec![(
        "bump exp(-4(x-1)^2)".to_string(),
        GridFunction::from_fn(SampleGrid::new(-1.0, 3.0, 512)?, |x| (-4.0 * (x - 1.0) * (x - 1.0)).exp()),
    )];
    if budget == Budget::Full {
        el.push((
            "1[-1,0)+.5*1[1,2)".to_string(),
            ElementaryFunction::new(vec![-1.0, 0.0, 1.0, 2.0], vec![1.0, 0.0, 0.5])?,
        ));
        gr.push((
            "sin(pi x) on [0,2]".to_string(),
            GridFunction::from_fn(SampleGrid::new(0.0, 2.0, 256)?, |x| (std::f64::consts::PI * x).sin()),
        ));
    }
    Ok((el, gr))
}

/// The four regimes as `(label, params, target)`.
pub fn isometry_regimes() -> CliResult<Vec<(&'static str, TemperedParams, Target)>> {
    Ok(vec![
        ("A1", TemperedParams::new(0.3, 1.0)?, Target::Tflp2),
        ("A2", TemperedParams::new(-0.3, 1.0)?, Target::Tflp2),
        ("A3", TemperedParams::new(-0.3, 1.0)?, Target::Tflp1),
        ("A4", TemperedParams::new(0.3, 1.0)?, Target::Tflp1),
    ])
}

fn isometry(opts: &VerifyOptions, pool: &rayon::ThreadPool) -> CliResult<Vec<Check>> {
    const S: &str = "isometry";
    let cp = LevyDriverSpec::standard_compound_poisson();
    let el2 = cp.second_moment();
    let (el, gr) = isometry_integrands(opts.budget)?;
    let mut out = Vec::new();
    for (label, p, target) in isometry_regimes()? {
        let mut transforms = Vec::new();
        for (name, f) in &el {
            transforms.push((name.clone(), transform_elementary(f, &p, target)?));
        }
        for (name, f) in &gr {
            transforms.push((name.clone(), transform_grid(f, &p, target)?));
        }
        for (k, (name, t)) in transforms.iter().enumerate() {
            let seed = member_seed(opts.seed, k as u64);
            let draws = par_map(opts.draws, pool, |i| Ok(integrate_transform(t, &cp, member_seed(seed, i as u64))?))?;
            let m = Moments::of(&draws);
            let pred = t.predicted_variance(el2);
            out.push(Check::near(S, format!("{label} Var/pred {name}"), m.var / pred, 1.0, 3.0 * m.var_se / pred));
            out.push(Check::near(S, format!("{label} mean {name}"), m.mean, 0.0, 3.0 * m.mean_se));
        }
        // transform of 1_[0,t] reproduces the process kernel
        let t = 1.5;
        let tr = transform_elementary(&ElementaryFunction::indicator_to(t)?, &p, target)?;
        let g = gamma1p(p.d);
        let grid = *tr.transformed.grid();
        let err = grid
            .points()
            .iter()
            .filter(|&&y| y != 0.0 && y != t)
            .map(|&y| {
                let k = match target {
                    Target::Tflp2 => kernel_g2(&p, t, y),
                    Target::Tflp1 => kernel_g1(&p, t, y),
                } / g;
                (tr.eval(y) - k).abs()
            })
            .fold(0.0, f64::max);
        out.push(Check::near(S, format!("{label} transform of 1[0,t] = kernel"), err, 0.0, 1e-3));
    }
    Ok(out)
}

/// `int_R h` for an even density `h(w) = (1 - cos w) g(w)` with smooth,
/// monotone `g` in the tail. The body is integrated up to `W = 2 pi N`; beyond
/// it `int_W^inf cos(w) g = -g'(W) + O(g'')`.
pub fn line_integral<H: Fn(f64) -> f64, G: Fn(f64) -> f64>(h: H, g: G) -> CliResult<f64> {
    let big_w = 2.0 * std::f64::consts::PI * 500.0;
    let rule = tflp_core::quad::GaussLegendre::new(16);
    let step = std::f64::consts::PI / 2.0;
    let n = (big_w / step).round() as usize;
    let body: f64 = (0..n).map(|k| rule.integrate(k as f64 * step, (k + 1) as f64 * step, &h)).sum();
    let e = 1e-3;
    let dg = (g(big_w + e) - g(big_w - e)) / (2.0 * e);
    let tail = adaptive_to_inf(&g, big_w, 1e-300, 1e-12)? + dg;
    Ok(2.0 * (body + tail))
}

fn spectra() -> CliResult<Vec<Check>> {
    const S: &str = "spectra";
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = Vec::new();
    for (d, l) in [(0.2, 0.3), (-0.2, 0.5), (0.4, 1.0)] {
        let p = TemperedParams::new(d, l)?;
        let i1 = line_integral(|w| spec_density_tfln1(&p, w), |w| 1.0 / (two_pi * (l * l + w * w).powf(d + 1.0)))?;
        out.push(Check::rel(S, format!("2 int h^I = gamma^I(0), d={d}"), 2.0 * i1, acvf_tfln1(&p, 0.0, 1.0), 1e-7));
        let i2 = line_integral(
            |w| spec_density_tfln2(&p, w),
            |w| 1.0 / (two_pi * w * w * (l * l + w * w).powf(d)),
        )?;
        out.push(Check::rel(S, format!("2 int h^II = gamma^II(0), d={d}"), 2.0 * i2, acvf_tfln2(&p, 0.0, 1.0)?, 1e-7));
        for h in [1.0, 3.0] {
            let a = acvf_tfln2(&p, h, 1.0)?;
            let b = acvf_tfln2_fourier(&p, h, 1.0)?;
            out.push(Check::near(S, format!("gamma^II time vs Fourier, d={d} h={h}"), b, a, 1e-7 * a.abs().max(1e-3)));
        }
    }
    Ok(out)
}
