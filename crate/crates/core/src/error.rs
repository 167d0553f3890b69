use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Reflection across the boundary is undefined at the disk center.
    FocalPoint,
    /// A point lies outside the closed disk.
    OutOfDomain { radius: f64, domain_radius: f64 },
    /// Kernel evaluated at or after its singular time.
    KernelTime { t: f64, s: f64 },
    /// Adaptive quadrature hit its depth limit before meeting the tolerance.
    Quadrature { estimate: f64 },
    /// Inconsistent or out-of-range configuration.
    InvalidConfig(&'static str),
    /// A test function does not satisfy the zero normal-derivative condition.
    NeumannViolation { max_normal_derivative: f64 },
    /// Non-finite values appeared during time stepping.
    NumericalBlowup { step: u64 },
    /// The field has no sign change, so there is no zero level set.
    NoInterface,
    /// An operation that needs at least one diagnostics row got none.
    EmptyTable,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::FocalPoint => write!(f, "reflection undefined at focal point"),
            Error::OutOfDomain { radius, domain_radius } => {
                write!(f, "point at radius {radius} lies outside the disk of radius {domain_radius}")
            }
            Error::KernelTime { t, s } => write!(f, "kernel needs t < s, got t = {t}, s = {s}"),
            Error::Quadrature { estimate } => {
                write!(f, "quadrature did not converge (last estimate {estimate})")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NeumannViolation { max_normal_derivative } => write!(
                f,
                "test function violates the Neumann condition: max |dphi/dnu| = {max_normal_derivative:e}"
            ),
            Error::NumericalBlowup { step } => write!(f, "non-finite values at step {step}"),
            Error::NoInterface => write!(f, "no interface"),
            Error::EmptyTable => write!(f, "diagnostics table is empty"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
