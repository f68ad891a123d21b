use alloc::string::String;

/// Errors raised by the numerical kernels, simulators and estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("gamma function has a pole at {0}")]
    Pole(f64),
    #[error("result is not representable (overflow) at {0}")]
    Overflow(f64),
    #[error("argument {arg} outside the domain: {what}")]
    Domain { arg: f64, what: &'static str },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("memory parameter d = {d} is outside the admissible range for {what}")]
    Regime { d: f64, what: &'static str },
    #[error("operands do not match: {0}")]
    Mismatch(&'static str),
    #[error("grid too narrow: truncation tail bound {bound:e} exceeds tolerance {tol:e}")]
    GridTooNarrow { bound: f64, tol: f64 },
    #[error("length error: {0}")]
    Length(String),
    #[error("breakpoint {0} does not lie on the path grid")]
    OffGrid(f64),
    #[error("lag {lag} is not an integer multiple of the grid step {dx}")]
    LagMisaligned { lag: f64, dx: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("no sampler available for {0}")]
    UnsupportedSampler(&'static str),
    #[error("quadrature failed to reach tolerance {tol:e} (estimate {err:e})")]
    Quadrature { tol: f64, err: f64 },
    #[error("no convergence after {0} refinements")]
    NonConvergence(usize),
    #[error("truncation width {width} leaves tail bound {bound:e} above tolerance")]
    Truncation { width: f64, bound: f64 },
}

impl Error {
    /// True for failures of a numerical tolerance rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::Quadrature { .. }
                | Error::NonConvergence(_)
                | Error::Truncation { .. }
                | Error::GridTooNarrow { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
