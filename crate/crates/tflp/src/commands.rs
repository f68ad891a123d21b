//! The `simulate`, `analytic`, `estimate` and `verify` commands. Each one
//! reads a resolved [`RunConfig`], writes its outputs and a manifest, and is
//! a pure function of the configuration.

use std::path::{Path, PathBuf};

use serde::Serialize;

use tflp_core::analytics::{
    acvf_tfln1, acvf_tfln1_asymptotic, acvf_tfln2, cov_tflp1, cov_tflp2, empirical_acvf, fit_semi_lrd,
    holder_exponent, periodogram, spec_density_tfln1, spec_density_tfln2, var_limit_tflp1, Tfln2Band,
};
use tflp_core::grid::SampleGrid;
use tflp_core::levy::{JumpLaw, LevyDriverSpec};
use tflp_core::process::{ProcessKind, SimOptions, TemperedParams};

use crate::config::{parse_range, RunConfig};
use crate::csvio::{read_series, Table};
use crate::ensemble::{member_seed, PathJob};
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, Manifest};
use crate::verify::{format_table, run_suite, Budget, VerifyOptions};

/// Keys and defaults of one command; the first key is its positional argument.
pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub positional: &'static str,
    pub choices: &'static [&'static str],
    pub defaults: &'static [(&'static str, &'static str)],
}

pub const SIMULATE: CommandSpec = CommandSpec {
    name: "simulate",
    about: "Simulate paths of TFLP, TFLP II or their unit-lag noises",
    positional: "kind",
    choices: &["tflp1", "tflp2", "tfln1", "tfln2"],
    defaults: &[
        ("kind", "tflp1"),
        ("d", "0.3"),
        ("lambda", "0.5"),
        ("driver", "cpois"),
        ("intensity", "1"),
        ("jumps", "uniform"),
        ("a", "1"),
        ("alpha", "1.65"),
        ("lambda-noise", "0.01"),
        ("ts-scale", "1"),
        ("symmetric", "true"),
        ("sigma", "1"),
        ("tmin", "0"),
        ("tmax", "10"),
        ("n", "1024"),
        ("ensemble", "1"),
        ("seed", "1"),
        ("refine", "8"),
        ("trunc-width", "0"),
        ("trunc-tol", "1e-6"),
        ("smooth", "false"),
        ("out", "simulate.csv"),
    ],
};

pub const ANALYTIC: CommandSpec = CommandSpec {
    name: "analytic",
    about: "Tabulate covariances, autocovariances and spectral densities",
    positional: "curve",
    choices: &["cov1", "cov2", "varlimit", "acvf1", "spec1", "spec2", "acvf2band"],
    defaults: &[
        ("curve", "cov1"),
        ("d", "0.3"),
        ("lambda", "0.5"),
        ("el2", "1"),
        ("s", "diag"),
        ("t", "0:5:0.05"),
        ("h", "1:40:1"),
        ("omega", "0:10:0.01"),
        ("seed", "1"),
        ("out", "analytic.csv"),
    ],
};

pub const ESTIMATE: CommandSpec = CommandSpec {
    name: "estimate",
    about: "Run an estimator on a (t, value) series",
    positional: "task",
    choices: &["acvf", "periodogram", "fit-semilrd", "holder"],
    defaults: &[
        ("task", "acvf"),
        ("input", ""),
        ("max-lag", "50"),
        ("segment", "256"),
        ("lags", "1,2,4,8,16,32"),
        ("hmin", "0"),
        ("hmax", "inf"),
        ("seed", "1"),
        ("out", "estimate.csv"),
    ],
};

pub const VERIFY: CommandSpec = CommandSpec {
    name: "verify",
    about: "Run the verification batteries and print a pass/fail table",
    positional: "suite",
    choices: &["calculus", "covariance", "isometry", "spectra", "all"],
    defaults: &[("suite", "all"), ("budget", "quick"), ("n", "0"), ("tol-scale", "1"), ("seed", "1"), ("out", "verify.json")],
};

pub const COMMANDS: [&CommandSpec; 4] = [&SIMULATE, &ANALYTIC, &ESTIMATE, &VERIFY];

pub fn command_spec(name: &str) -> CliResult<&'static CommandSpec> {
    COMMANDS
        .iter()
        .copied()
        .find(|c| c.name == name)
        .ok_or_else(|| CliError::Param(format!("unknown command {name:?}")))
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    /// Text for standard output.
    pub report: String,
    pub failed_checks: usize,
}

/// Runs `command` under `cfg` and writes the manifest next to the output.
pub fn run(command: &str, cfg: &RunConfig, pool: &rayon::ThreadPool) -> CliResult<Outcome> {
    let spec = command_spec(command)?;
    let choice = cfg.str(spec.positional)?;
    if !spec.choices.contains(&choice) {
        return Err(CliError::Param(format!("{} must be one of {:?}, got {choice:?}", spec.positional, spec.choices)));
    }
    let outcome = match command {
        "simulate" => simulate(cfg, pool)?,
        "analytic" => analytic(cfg)?,
        "estimate" => estimate(cfg)?,
        _ => verify(cfg, pool)?,
    };
    let out = PathBuf::from(cfg.str("out")?);
    let names = outcome.outputs.iter().map(|p| p.display().to_string()).collect();
    Manifest::new(command, cfg, names).write(&manifest_path(&out))?;
    Ok(outcome)
}

fn params(cfg: &RunConfig) -> CliResult<TemperedParams> {
    Ok(TemperedParams::new(cfg.real("d")?, cfg.real("lambda")?)?)
}

/// Driver from the `driver` family key and its parameters.
pub fn driver_from(cfg: &RunConfig) -> CliResult<LevyDriverSpec> {
    let spec = match cfg.str("driver")? {
        "cpois" => {
            let a = cfg.real("a")?;
            let jumps = match cfg.str("jumps")? {
                "uniform" => JumpLaw::UniformSymmetric(a),
                "gaussian" => JumpLaw::Gaussian(a),
                "twopoint" => JumpLaw::TwoPoint(a),
                j => return Err(CliError::Param(format!("unknown jump law {j:?}"))),
            };
            LevyDriverSpec::CompoundPoisson { intensity: cfg.real("intensity")?, jumps }
        }
        "ts" => LevyDriverSpec::TemperedStable {
            alpha: cfg.real("alpha")?,
            lambda_noise: cfg.real("lambda-noise")?,
            scale: cfg.real("ts-scale")?,
            symmetric: cfg.flag("symmetric")?,
        },
        "gauss" => LevyDriverSpec::GaussianValidation { sigma: cfg.real("sigma")? },
        d => return Err(CliError::Param(format!("driver must be cpois, ts or gauss, got {d:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn kind_from(s: &str) -> ProcessKind {
    match s {
        "tflp1" => ProcessKind::Tflp1,
        "tflp2" => ProcessKind::Tflp2,
        "tfln1" => ProcessKind::Tfln1,
        _ => ProcessKind::Tfln2,
    }
}

fn simulate(cfg: &RunConfig, pool: &rayon::ThreadPool) -> CliResult<Outcome> {
    let kind = kind_from(cfg.str("kind")?);
    let p = params(cfg)?;
    let driver = driver_from(cfg)?;
    let n: usize = cfg.get("n")?;
    let members: usize = cfg.get("ensemble")?;
    if members == 0 {
        return Err(CliError::Param("ensemble size must be at least 1".into()));
    }
    let obs = SampleGrid::new(cfg.real("tmin")?, cfg.real("tmax")?, n)?;
    let opts = SimOptions {
        trunc_width: cfg.real("trunc-width")?,
        refine: cfg.get("refine")?,
        trunc_tol: cfg.real("trunc-tol")?,
    };
    let job = PathJob::new(kind, p, obs, driver, opts, cfg.flag("smooth")?)?;
    let seed: u64 = cfg.get("seed")?;
    let paths = if members == 1 { vec![job.path(seed)?] } else { job.ensemble(seed, members, pool)? };
    let mut names = vec!["t".to_string()];
    let mut units = vec!["time".to_string()];
    if members == 1 {
        names.push(kind.name().to_string());
        units.push("1".into());
    } else {
        for i in 0..members {
            names.push(format!("path_{i}"));
            units.push(format!("seed={}", member_seed(seed, i as u64)));
        }
    }
    let grid = paths[0].grid;
    let mut table = Table { names, units, rows: Vec::with_capacity(grid.n_points()) };
    for (j, t) in grid.points().into_iter().enumerate() {
        let mut row = vec![t];
        row.extend(paths.iter().map(|q| q.values[j]));
        table.push(row);
    }
    let out = PathBuf::from(cfg.str("out")?);
    table.write(&out)?;
    Ok(Outcome {
        report: format!("wrote {} path(s) of {} points to {}\n", members, grid.n_points(), out.display()),
        outputs: vec![out],
        failed_checks: 0,
    })
}

fn analytic(cfg: &RunConfig) -> CliResult<Outcome> {
    let p = params(cfg)?;
    let el2 = cfg.real("el2")?;
    let curve = cfg.str("curve")?;
    let out = PathBuf::from(cfg.str("out")?);
    let mut report = String::new();
    let table = match curve {
        "cov1" | "cov2" => {
            let s = cfg.str("s")?;
            let fixed = if s == "diag" { None } else { Some(cfg.real("s")?) };
            let mut t = Table::new(&["t", "cov"], &["time", "EL2-scaled"]);
            for x in parse_range(cfg.str("t")?)? {
                let s = fixed.unwrap_or(x);
                let v = if curve == "cov1" { cov_tflp1(&p, s, x, el2) } else { cov_tflp2(&p, s, x, el2)? };
                t.push(vec![x, v]);
            }
            t
        }
        "varlimit" => {
            let v = var_limit_tflp1(&p, el2);
            report = format!("{v}\n");
            let mut t = Table::new(&["d", "lambda", "var_limit"], &["1", "1/time", "EL2-scaled"]);
            t.push(vec![p.d, p.lambda, v]);
            t
        }
        "acvf1" => {
            let mut t = Table::new(&["h", "gamma", "asymptotic"], &["time", "EL2-scaled", "EL2-scaled"]);
            for h in parse_range(cfg.str("h")?)? {
                t.push(vec![h, acvf_tfln1(&p, h, el2), el2 * acvf_tfln1_asymptotic(&p, h)]);
            }
            t
        }
        "spec1" | "spec2" => {
            let mut t = Table::new(&["omega", "density"], &["rad/time", "EL2-scaled display"]);
            for w in parse_range(cfg.str("omega")?)? {
                let v = if curve == "spec1" { spec_density_tfln1(&p, w) } else { spec_density_tfln2(&p, w) };
                t.push(vec![w, el2 * v]);
            }
            t
        }
        _ => {
            let band = Tfln2Band::calibrate(&p)?;
            report = format!("C1 = {}, C2 = {}, calibrated up to h = {}\n", band.c1, band.c2, band.calib_max);
            let mut t = Table::new(&["h", "gamma", "lower", "upper"], &["time", "EL2-scaled", "EL2-scaled", "EL2-scaled"]);
            for h in parse_range(cfg.str("h")?)? {
                if !(h > 0.0) {
                    return Err(CliError::Param("acvf2band needs lags h > 0".into()));
                }
                let (lo, hi) = band.at(&p, h);
                t.push(vec![h, acvf_tfln2(&p, h, el2)?, el2 * lo, el2 * hi]);
            }
            t
        }
    };
    table.write(&out)?;
    Ok(Outcome { outputs: vec![out], report, failed_checks: 0 })
}

#[derive(Serialize)]
struct FitRecord {
    lambda_hat: f64,
    delta_hat: f64,
    c_hat: f64,
    fit_range: [f64; 2],
    residual_rms: f64,
    mixed_sign: bool,
}

#[derive(Serialize)]
struct HolderRecord {
    zeta: f64,
    exponent: f64,
    points: Vec<(f64, f64)>,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    s.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, s).map_err(|e| CliError::io(path, e))
}

fn series_step(t: &[f64], path: &Path) -> CliResult<f64> {
    if t.len() < 2 {
        return Err(CliError::Parse { path: path.to_path_buf(), line: 3, msg: "need at least two samples".into() });
    }
    Ok((t[t.len() - 1] - t[0]) / (t.len() - 1) as f64)
}

fn estimate(cfg: &RunConfig) -> CliResult<Outcome> {
    let input = cfg.str("input")?;
    if input.is_empty() {
        return Err(CliError::Param("estimate needs --input".into()));
    }
    let input = PathBuf::from(input);
    let (t, v) = read_series(&input)?;
    let out = PathBuf::from(cfg.str("out")?);
    let mut report = String::new();
    match cfg.str("task")? {
        "acvf" => {
            let dx = series_step(&t, &input)?;
            let g = empirical_acvf(&v, cfg.get("max-lag")?)?;
            let mut tab = Table::new(&["h", "gamma"], &["time", "value^2"]);
            for (k, gk) in g.into_iter().enumerate() {
                tab.push(vec![k as f64 * dx, gk]);
            }
            tab.write(&out)?;
        }
        "periodogram" => {
            let mut tab = Table::new(&["omega", "power"], &["rad/sample", "value^2 per rad/sample"]);
            for (w, pw) in periodogram(&v, cfg.get("segment")?)? {
                tab.push(vec![w, pw]);
            }
            tab.write(&out)?;
        }
        "fit-semilrd" => {
            let lo = cfg.real("hmin").unwrap_or(0.0);
            let hi: f64 = cfg.get("hmax")?;
            let pts: Vec<(f64, f64)> =
                t.iter().copied().zip(v.iter().copied()).filter(|&(h, _)| h > 0.0 && h >= lo && h <= hi).collect();
            let f = fit_semi_lrd(&pts)?;
            report = format!("lambda_hat = {}, delta_hat = {}, c_hat = {}\n", f.lambda_hat, f.delta_hat, f.c_hat);
            let rec = FitRecord {
                lambda_hat: f.lambda_hat,
                delta_hat: f.delta_hat,
                c_hat: f.c_hat,
                fit_range: f.fit_range,
                residual_rms: f.residual_rms,
                mixed_sign: f.mixed_sign,
            };
            write_json(&rec, &out)?;
        }
        _ => {
            let dx = series_step(&t, &input)?;
            let lags = cfg
                .str("lags")?
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Param(format!("bad lag {s:?}"))))
                .collect::<CliResult<Vec<usize>>>()?;
            let f = holder_exponent(&v, dx, &lags)?;
            report = format!("zeta = {}, Hölder exponent = {}\n", f.zeta, f.exponent());
            write_json(&HolderRecord { zeta: f.zeta, exponent: f.exponent(), points: f.points }, &out)?;
        }
    }
    Ok(Outcome { outputs: vec![out], report, failed_checks: 0 })
}

fn verify(cfg: &RunConfig, pool: &rayon::ThreadPool) -> CliResult<Outcome> {
    let budget: Budget = cfg.str("budget")?.parse()?;
    let n: usize = cfg.get("n")?;
    let draws = match (n, budget) {
        (0, Budget::Quick) => 2000,
        (0, Budget::Full) => 10_000,
        (n, _) => n,
    };
    let opts = VerifyOptions { budget, draws, seed: cfg.get("seed")? };
    let k = cfg.real("tol-scale")?;
    if !(k > 0.0) {
        return Err(CliError::Param(format!("tol-scale must be positive, got {k}")));
    }
    let checks: Vec<_> = run_suite(cfg.str("suite")?, &opts, pool)?.into_iter().map(|c| c.scaled(k)).collect();
    let failed = checks.iter().filter(|c| !c.pass).count();
    let out = PathBuf::from(cfg.str("out")?);
    write_json(&checks, &out)?;
    let mut report = format_table(&checks);
    report += &format!("{} checks, {} failed\n", checks.len(), failed);
    Ok(Outcome { outputs: vec![out], report, failed_checks: failed })
}
