use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("off-diagonal coefficient a_{index} = {value} is not strictly positive")]
    NonPositiveOffDiagonal { index: usize, value: f64 },

    #[error("coefficient bound violated at index {index}: |a|+|b| = {sum} > M = {bound}")]
    BoundExceeded { index: usize, sum: f64, bound: f64 },

    #[error("coefficient at index {index} is not finite")]
    NonFiniteCoefficient { index: usize },

    #[error("tabulated coefficients end at index {len}, requested {index}")]
    OutsideTable { index: usize, len: usize },

    #[error("truncation size must be at least {min}, got {got}")]
    SizeTooSmall { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("argument is not finite")]
    NonFiniteArgument,

    #[error("zero bracket failed at degree {degree}, bracket {bracket}")]
    BracketFailure { degree: usize, bracket: usize },

    #[error("rule of {nodes} nodes is exact to degree {exact}, degree {needed} requested")]
    DegreeNotExact { nodes: usize, exact: usize, needed: usize },

    #[error("point {0} lies inside the support of the measure")]
    InsideSupport(f64),

    #[error("spectrum contains 0")]
    SpectrumContainsZero,

    #[error("quadrature did not converge: last relative change {change:e}")]
    NoConvergence { change: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("vacuum amplitude u_{m} = {value} is negative")]
    NegativeAmplitude { m: usize, value: f64 },

    #[error("eigenvalue {0} is not positive")]
    NonPositiveEigenvalue(f64),

    #[error("resolvent is singular: z lies in the spectrum")]
    SingularResolvent,

    #[error("vector is not square summable")]
    NotSquareSummable,
}

pub type Result<T> = std::result::Result<T, Error>;
