use thiserror::Error;

use crate::module::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime representable in 16 bits")]
    NotPrime(u64),
    #[error("entry {value} is not reduced modulo {p}")]
    UnreducedEntry { value: u64, p: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system has no solution")]
    NoSolution,
    #[error("cap exceeded: {what} would be {requested}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("invalid module: {0}")]
    InvalidModule(Violation),
    #[error("map is not a module homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("map is not injective")]
    NotInjective,
    #[error("modules or subgroups live over different groups")]
    GroupMismatch,
    #[error("generator {generator} is not a permutation matrix (row {row})")]
    NotPermutationBasis { generator: usize, row: usize },
    #[error("periodic complex length {0} is not an even integer >= 2")]
    OddLength(usize),
    #[error("coordinate index {index} out of range for rank {rank}")]
    BadCoordinate { index: usize, rank: usize },
    #[error("chain map lift failed: {0}")]
    LiftFailed(String),
    #[error("not a resolution: {0}")]
    NotResolution(String),
    #[error("free summand selection failed: {0}")]
    SelectionFailed(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("{0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit status: 2 invalid input, 3 cap exceeded, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. } => 3,
            Error::LiftFailed(_)
            | Error::NotResolution(_)
            | Error::SelectionFailed(_)
            | Error::CertificationFailed(_)
            | Error::NoSolution
            | Error::Internal(_) => 4,
            _ => 2,
        }
    }
}
