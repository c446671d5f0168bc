//! One error type for the whole crate. Variants mirror the failure modes of
//! the numerical routines; `exit_code` maps them onto the CLI contract
//! (2 = bad configuration, 3 = numerical failure).

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// An argument is outside the documented domain.
    Domain(String),
    /// A block probability matrix has an eigenvalue below -1e-10.
    NotPsd(String),
    /// A matrix that must have full rank is numerically singular.
    RankDeficient(String),
    /// Input to the dense eigensolver is not symmetric.
    NotSymmetric(String),
    /// Input exceeds the dense eigensolver's size guard.
    TooLarge {
        n: usize,
        max: usize,
    },
    /// An iteration failed to converge; carries the residuals it reached.
    NoConvergence {
        what: String,
        residuals: Vec<f64>,
    },
    /// Lanczos start vectors kept landing in an invariant subspace.
    DegenerateStart,
    /// The Procrustes cross-product matrix is rank deficient.
    RankDeficientCross,
    /// A retained adjacency eigenvalue is not strictly positive.
    DegenerateSpectrum(String),
    /// The second-moment matrix is too ill-conditioned to invert.
    SingularDelta(String),
    /// A one-dimensional limiting variance came out non-positive.
    NonPositiveVariance(String),
    /// A limiting covariance matrix is not positive definite.
    SingularSigma(String),
    /// A requested block holds no vertices.
    EmptyBlock(String),
    /// Too few replicates for a cross-replicate statistic.
    TooFewReplicates {
        got: usize,
        need: usize,
    },
    /// Fewer distinct points than clusters.
    DegeneratePoints(String),
    /// Class count exceeds the exact label-matching limit.
    TooManyClasses {
        k: usize,
        max: usize,
    },
    /// Configuration file or flag errors.
    Config(String),
    Io(std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: config problems are 2, everything
    /// else (numerical or I/O failure mid-run) is 3.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::NotPsd(m) => write!(f, "matrix is not positive semidefinite: {m}"),
            Error::RankDeficient(m) => write!(f, "rank deficient: {m}"),
            Error::NotSymmetric(m) => write!(f, "matrix is not symmetric: {m}"),
            Error::TooLarge { n, max } => {
                write!(f, "dense eigensolver limited to n <= {max}, got n = {n}")
            }
            Error::NoConvergence { what, residuals } => {
                write!(f, "{what} did not converge; residuals {residuals:?}")
            }
            Error::DegenerateStart => {
                write!(f, "Lanczos start vector lies in an invariant subspace")
            }
            Error::RankDeficientCross => {
                write!(f, "Procrustes cross-product matrix is rank deficient")
            }
            Error::DegenerateSpectrum(m) => write!(f, "degenerate spectrum: {m}"),
            Error::SingularDelta(m) => write!(f, "second-moment matrix singular: {m}"),
            Error::NonPositiveVariance(m) => write!(f, "non-positive variance: {m}"),
            Error::SingularSigma(m) => write!(f, "covariance not positive definite: {m}"),
            Error::EmptyBlock(m) => write!(f, "empty block: {m}"),
            Error::TooFewReplicates { got, need } => {
                write!(f, "need at least {need} replicates, got {got}")
            }
            Error::DegeneratePoints(m) => write!(f, "degenerate points: {m}"),
            Error::TooManyClasses { k, max } => {
                write!(f, "label matching supports at most {max} classes, got {k}")
            }
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
