use thiserror::Error;

/// Failure modes shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("moment diverges: {0}")]
    DivergentMoment(&'static str),
    #[error("operation requires compact support (finite maximal speed)")]
    InfiniteSupport,
    #[error("argument out of range: {0}")]
    OutOfRange(&'static str),
    #[error("pole {pole} lies outside ({a}, {b})")]
    PoleOutsideDomain { pole: f64, a: f64, b: f64 },
    #[error("analytic continuation unavailable at z = {re} + {im}i")]
    ContinuationUnavailable { re: f64, im: f64 },
    #[error("Newton iteration failed to converge (|D| = {residual:e})")]
    NewtonDiverged { residual: f64 },
    #[error("winding integral {value} is {residual} away from an integer")]
    ContourTooCoarse { value: f64, residual: f64 },
    #[error("degenerate root: |∂λD| = {0:e}")]
    DegenerateRoot(f64),
    #[error("quadrature stalled: {0}")]
    QuadratureStall(&'static str),
    #[error("fit window has {0} samples, at least 8 are needed")]
    WindowTooShort(usize),
    #[error("analytic and finite-difference derivatives disagree (relative {0:e})")]
    DerivativeMismatch(f64),
    #[error("invalid profile: {0}")]
    InvalidProfile(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
