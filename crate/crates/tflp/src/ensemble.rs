//! Parallel ensembles with run-order independent reductions.

use rayon::prelude::*;

use tflp_core::grid::SampleGrid;
use tflp_core::levy::LevyDriverSpec;
use tflp_core::process::{noise_path, ProcessKind, SamplePath, SimOptions, Simulator, TemperedParams};

use crate::error::{CliError, CliResult};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "TFLP_THREADS";

/// Worker pool sized by `threads`, else `TFLP_THREADS`, else the machine.
pub fn pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let n = match threads {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Param(format!("{THREADS_ENV} must be a thread count, got {v:?}")))?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Param(format!("thread pool: {e}")))
}

/// Seed of ensemble member `i`.
pub fn member_seed(base: u64, i: u64) -> u64 {
    let mut z = base ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pairwise (cascade) summation; the result depends only on the order of `x`.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 32 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample moments with Monte Carlo standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    pub mean_se: f64,
    /// Standard error of `var`, from the fourth central moment.
    pub var_se: f64,
}

impl Moments {
    pub fn of(x: &[f64]) -> Moments {
        let n = x.len();
        let nf = n as f64;
        let mean = pairwise_sum(x) / nf;
        let c2: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
        let m2 = pairwise_sum(&c2) / nf;
        let c4: Vec<f64> = c2.iter().map(|v| v * v).collect();
        let m4 = pairwise_sum(&c4) / nf;
        let var = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        Moments { n, mean, var, mean_se: (var / nf).sqrt(), var_se: ((m4 - m2 * m2).max(0.0) / nf).sqrt() }
    }

    /// `|var / expected - 1|` in units of the relative standard error.
    pub fn var_z(&self, expected: f64) -> f64 {
        (self.var - expected).abs() / self.var_se.max(f64::MIN_POSITIVE)
    }
}

/// A process or noise law on an observation grid, ready to draw paths.
#[derive(Debug, Clone)]
pub struct PathJob {
    sim: Simulator,
    noise_lag: Option<f64>,
}

impl PathJob {
    /// Noise kinds simulate the parent process on a grid one unit longer and
    /// difference it at unit lag.
    pub fn new(
        kind: ProcessKind,
        params: TemperedParams,
        obs: SampleGrid,
        driver: LevyDriverSpec,
        opts: SimOptions,
        smooth: bool,
    ) -> CliResult<PathJob> {
        let (proc_kind, grid, noise_lag) = match kind {
            ProcessKind::Tfln1 | ProcessKind::Tfln2 => {
                let steps = 1.0 / obs.dx();
                if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) || steps.round() < 1.0 {
                    return Err(tflp_core::Error::LagMisaligned { lag: 1.0, dx: obs.dx() }.into());
                }
                let parent = if kind == ProcessKind::Tfln1 { ProcessKind::Tflp1 } else { ProcessKind::Tflp2 };
                let grid = SampleGrid::with_step(obs.x_min(), obs.dx(), obs.n_cells() + steps.round() as usize)?;
                (parent, grid, Some(1.0))
            }
            k => (k, obs, None),
        };
        let sim = if smooth {
            Simulator::smooth(proc_kind, params, grid, driver, opts)?
        } else {
            Simulator::new(proc_kind, params, grid, driver, opts)?
        };
        Ok(PathJob { sim, noise_lag })
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn path(&self, seed: u64) -> CliResult<SamplePath> {
        let p = self.sim.path(seed)?;
        Ok(match self.noise_lag {
            Some(lag) => noise_path(&p, lag)?,
            None => p,
        })
    }

    /// Paths for members `0..n` of the ensemble seeded by `seed`, in order.
    pub fn ensemble(&self, seed: u64, n: usize, pool: &rayon::ThreadPool) -> CliResult<Vec<SamplePath>> {
        pool.install(|| (0..n as u64).into_par_iter().map(|i| self.path(member_seed(seed, i))).collect())
    }
}

/// `f(i)` for `i in 0..n` on `pool`, returned in index order.
pub fn par_map<T, F>(n: usize, pool: &rayon::ThreadPool, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> CliResult<T> + Sync + Send,
{
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}
