use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures raised by the numerical routines.
///
/// Variants carry enough context for a module-qualified message; the
/// companion crate maps them onto CLI exit codes.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Matrix or vector shapes do not agree.
    DimensionMismatch { context: &'static str, expected: usize, found: usize },
    /// A constructor received NaN or infinite entries.
    NonFinite(&'static str),
    /// Kernel polynomial degree above the supported bound.
    DegreeTooLarge { degree: usize, max: usize },
    /// Input outside the documented range of an operation.
    InvalidInput(String),
    /// A contour passes too close to a zero of the function.
    ContourTooClose { min_abs: f64, max_abs: f64 },
    /// Phase accumulation did not settle to an integer winding number.
    WindingNotIntegral(f64),
    /// Newton plus quadrisection fallback failed to isolate a root.
    NoConvergence(String),
    /// Dense eigensolver failed.
    EigensolveFailure,
    /// A vector expected to lie in a kernel does not.
    KernelMismatch { residual: f64 },
    /// Condition estimate above the solver threshold.
    NearSingular { condition: f64 },
    /// A scan received an empty set.
    EmptyInput(&'static str),
    /// Too few samples for a requested statistic.
    InsufficientData(&'static str),
    /// Pontryagin split requires real coefficients.
    ComplexCoefficients,
    /// Implicit simulator step matrix singular.
    SingularStep,
    /// Simulator state overflowed.
    NonFiniteState { time: f64 },
    /// No scalarized input found within the draw budget.
    ScalarizationFailed { worst_margin: f64 },
    /// Closed-loop modal spectrum misses its targets.
    PlacementFailed { deviation: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { context, expected, found } => {
                write!(f, "model: dimension mismatch in {context}: expected {expected}, found {found}")
            }
            Error::NonFinite(what) => write!(f, "model: non-finite entry in {what}"),
            Error::DegreeTooLarge { degree, max } => {
                write!(f, "model: kernel degree {degree} exceeds maximum {max}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ContourTooClose { min_abs, max_abs } => write!(
                f,
                "spectrum: contour too close to a root (min |det| = {min_abs:.3e}, max |det| = {max_abs:.3e})"
            ),
            Error::WindingNotIntegral(w) => {
                write!(f, "spectrum: winding number not integral ({w:.4})")
            }
            Error::NoConvergence(msg) => write!(f, "spectrum: no convergence: {msg}"),
            Error::EigensolveFailure => write!(f, "classify: eigensolver failed to converge"),
            Error::KernelMismatch { residual } => {
                write!(f, "eigen: vector not in kernel (residual {residual:.3e})")
            }
            Error::NearSingular { condition } => {
                write!(f, "eigen: characteristic matrix near singular (cond ≈ {condition:.3e})")
            }
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::InsufficientData(what) => write!(f, "insufficient data: {what}"),
            Error::ComplexCoefficients => {
                write!(f, "pontryagin: F/G split requires real coefficients")
            }
            Error::SingularStep => write!(f, "sim: implicit step matrix is singular"),
            Error::NonFiniteState { time } => write!(f, "sim: non-finite state at t = {time}"),
            Error::ScalarizationFailed { worst_margin } => {
                write!(f, "stabilize: scalarization failed after 64 draws (best margin {worst_margin:.3e})")
            }
            Error::PlacementFailed { deviation } => {
                write!(f, "stabilize: placement deviates from targets by {deviation:.3e}")
            }
        }
    }
}

impl core::error::Error for Error {}
