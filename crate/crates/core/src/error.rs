use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at position {pos}: {msg} (near `{token}`)")]
    Parse { pos: usize, token: String, msg: String },
    #[error("zero input")]
    Zero,
    #[error("norm {norm} exceeds factorization bound {bound}")]
    NormBound { norm: String, bound: u64 },
    #[error("wrong field: {0}")]
    WrongField(String),
    #[error("singular curve")]
    Singular,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("incompatible radicand sets")]
    MixedTowers,
    #[error("tower too deep: {0} radicands requested")]
    TowerTooDeep(usize),
    #[error("dependent radicand: {0}")]
    DependentRadicand(String),
    #[error("order cap {0} exceeded")]
    CapExceeded(u64),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("residue characteristic 2 is not supported")]
    ResidueCharTwo,
    #[error("not a prime of the ring of integers: {0}")]
    NotPrime(String),
    #[error("curve is not integral at the prime")]
    NotIntegral,
    #[error("singular reduction")]
    SingularReduction,
    #[error("only {found} good primes found below the search bound")]
    TooFewPrimes { found: usize },
    #[error("classification violation: {0}")]
    Violation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
