//! Error types shared by the whole library.

use thiserror::Error;

use crate::constellation::PointId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("constellation has no root: point 1 must exist and have no parent")]
    MissingRoot,
    #[error("point {id} has a missing or invalid parent reference")]
    DanglingParent { id: usize },
    #[error("point {id} has an invalid second proximity: {reason}")]
    InvalidSatellite { id: usize, reason: String },
    #[error("point {id} references point {referenced} which does not precede it")]
    OrderViolation { id: usize, referenced: usize },
    #[error("point ids must be exactly 1..={expected}, got {got} at position {pos}")]
    NonContiguousIds {
        expected: usize,
        got: usize,
        pos: usize,
    },
    #[error("point id {0} is out of range")]
    InvalidPoint(usize),
    #[error("branch {0} is not a valid branch index")]
    InvalidBranch(usize),
    #[error("branch `{at}` does not point at a valid constellation point")]
    BranchOffConstellation { at: usize },
    #[error("constellation point {0} lies on no branch chain")]
    UncoveredPoint(usize),
    #[error("operation needs two distinct branches")]
    SameBranch,
    #[error("point {0} is not in the set of admissible vertices")]
    PointNotInF(usize),
    #[error("arrow {arrow} is not strictly below vertex {vertex}")]
    NotInVLess { arrow: usize, vertex: usize },
    #[error("no distinguished vertex: input violates the standing assumptions ({0})")]
    NoDistinguishedVertex(String),
    #[error("input outside the formula's hypotheses: {0}")]
    ExcludedInput(String),
    #[error("curve has {0} branches, the two-branch formula needs exactly 2")]
    NotTwoBranches(usize),
    #[error("methods disagree: {0}")]
    MethodDisagreement(String),
    #[error("beta pair ({0}, {1}) is not coprime")]
    NotCoprime(u64, u64),
    #[error("beta pair ({0}, {1}) must satisfy beta1 > beta0 >= 2")]
    BadOrder(u64, u64),
    #[error("generator exhausted its retry budget for seed {seed}")]
    GenerationFailed { seed: u64 },
    #[error("complete-ideal input marks no point")]
    EmptyIdeal,
    #[error("curve valuation vanishes at point {0}")]
    ZeroValuation(usize),
}

impl Error {
    pub(crate) fn dangling(id: PointId) -> Self {
        Error::DanglingParent { id: id.index() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
