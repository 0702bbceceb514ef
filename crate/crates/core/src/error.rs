use thiserror::Error;

use crate::chambers::Resonance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("degree mismatch: mu has degree {mu}, nu has degree {nu}")]
    DegreeMismatch { mu: u64, nu: u64 },

    #[error("index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("variable spec mismatch: ({0}, {1}) vs ({2}, {3})")]
    VarSpecMismatch(usize, usize, usize, usize),

    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },

    #[error("variable {0} has no assignment")]
    UnassignedVariable(usize),

    #[error("cannot substitute a non-monomial form into a negative power")]
    NegativePowerSubstitution,

    #[error("division by zero")]
    DivisionByZero,

    #[error("interpolation system is underdetermined: rank {rank} < {unknowns} unknowns")]
    Underdetermined { rank: usize, unknowns: usize },

    #[error("interpolation samples are inconsistent (do they straddle a wall?)")]
    InconsistentSamples,

    #[error("point is not in the open parameter cone: {0}")]
    NotInCone(String),

    #[error("point lies on the wall {0}")]
    OnWall(Resonance),

    #[error("signature is infeasible")]
    Infeasible,

    #[error("malformed signature: {0}")]
    MalformedSignature(String),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("dithering failed after {0} retries")]
    DitherFailed(usize),

    #[error("method {method} is not applicable to shape ({m}, {n})")]
    MethodInapplicable { method: &'static str, m: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
