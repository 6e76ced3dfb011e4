use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::certify::Violation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside its admissible domain.
    Domain { what: &'static str, value: f64 },
    /// Vectors or kernels of incompatible sizes were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// A kernel row does not sum to one within the repair tolerance.
    RowSum { kernel: usize, row: usize, sum: f64 },
    /// A kernel or measure has a negative or non-finite entry.
    InvalidEntry {
        kernel: usize,
        row: usize,
        col: usize,
        value: f64,
    },
    /// Two measures that should have equal mass do not.
    MassMismatch { left: f64, right: f64 },
    /// The kernel is not irreducible.
    Reducible,
    /// The kernel is irreducible but periodic.
    Periodic { period: usize },
    /// A required set of states was empty.
    EmptySet(&'static str),
    /// An iterative computation did not reach its tolerance within its budget.
    NonConvergence { what: &'static str, steps: usize },
    /// A computed quantity overflowed `f64`.
    Overflow(&'static str),
    /// The residual kernel `Q_k` would have a negative entry.
    NegativeResidual {
        kernel: usize,
        row: usize,
        col: usize,
        value: f64,
    },
    /// The certificate is degenerate for the requested quantity.
    Degenerate(&'static str),
    /// Drift or minorisation could not be certified.
    Certification {
        reason: String,
        violations: Vec<Violation>,
    },
    /// The requested combination is not supported.
    Unsupported(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::RowSum { kernel, row, sum } => {
                write!(f, "kernel {kernel} row {row} sums to {sum}, not 1")
            }
            Error::InvalidEntry {
                kernel,
                row,
                col,
                value,
            } => {
                write!(f, "kernel {kernel} entry ({row},{col}) is invalid: {value}")
            }
            Error::MassMismatch { left, right } => {
                write!(f, "measure masses differ: {left} vs {right}")
            }
            Error::Reducible => f.write_str("kernel is reducible"),
            Error::Periodic { period } => write!(f, "kernel is periodic with period {period}"),
            Error::EmptySet(what) => write!(f, "{what} is empty"),
            Error::NonConvergence { what, steps } => {
                write!(f, "{what} did not converge within {steps} steps")
            }
            Error::Overflow(what) => write!(f, "{what} overflowed"),
            Error::NegativeResidual {
                kernel,
                row,
                col,
                value,
            } => write!(
                f,
                "residual kernel {kernel} has negative entry ({row},{col}) = {value}"
            ),
            Error::Degenerate(what) => write!(f, "degenerate certificate: {what}"),
            Error::Certification { reason, violations } => {
                write!(
                    f,
                    "certification failed: {reason} ({} violations)",
                    violations.len()
                )
            }
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_domain(ok: bool, what: &'static str, value: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}
