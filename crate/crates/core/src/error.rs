use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    Domain(&'static str),
    /// A model parameter violates its stated constraint.
    InvalidParameter(&'static str),
    /// An iterative method exhausted its iteration budget.
    NoConvergence(&'static str),
    /// A root could not be bracketed.
    Bracket(&'static str),
    /// A series could not reach the requested truncation tolerance.
    Truncation { bound: f64, tolerance: f64 },
    /// Moment matching produced a non-positive variance or mean.
    DegenerateFit,
    /// A requested run cannot be carried out with the given resources.
    Infeasible(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::NoConvergence(m) => write!(f, "no convergence: {m}"),
            Error::Bracket(m) => write!(f, "root not bracketed: {m}"),
            Error::Truncation { bound, tolerance } => {
                write!(f, "series truncation bound {bound:e} exceeds tolerance {tolerance:e}")
            }
            Error::DegenerateFit => write!(f, "degenerate moment fit"),
            Error::Infeasible(m) => write!(f, "infeasible: {m}"),
        }
    }
}

impl core::error::Error for Error {}
