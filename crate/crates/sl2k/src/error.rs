//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is unsupported")]
    CharTwoUnsupported,
    #[error("modulus is reducible over F_{0}")]
    ReducibleModulus(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("characteristic {p} too small: need 0 or >= {needed}")]
    CharTooSmall { p: u64, needed: u64 },
    #[error("characteristic window violated: need n < p < 2n, got n = {n}, p = {p}")]
    BadCharacteristicWindow { n: usize, p: u64 },
    #[error("operation requires positive characteristic")]
    CharZeroUnsupported,
    #[error("field mismatch between operands")]
    FieldMismatch,
    #[error("subspace is not invariant under generator {0}")]
    NotInvariant(String),
    #[error("enumeration budget exceeded: {count} points > budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("x generator is not nilpotent")]
    Unbounded,
    #[error("field too large for exhaustive scalar check: {q} elements > cap {cap}")]
    FieldTooLargeForExhaustiveCheck { q: u128, cap: u128 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("witness construction failed: {0}")]
    WitnessConstructionFailed(String),
    #[error("module is not of cross-linked two-chain type: {0}")]
    NotAnSab(String),
    #[error("isomorphism test for non-invertible pairs is unsupported")]
    NonInvertibleUnsupported,
    #[error("scalar {0} is not invertible; required division unavailable")]
    DivisionUnavailable(String),
    #[error("annihilator and g.V do not sum directly to V")]
    NotDirect,
    #[error("no coherence degree found up to the nilpotency index {0}")]
    BoundViolated(usize),
    #[error("iterated bracket chain did not vanish within {0} steps")]
    HeightUnboundedWithinCap(usize),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
