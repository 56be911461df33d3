use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m^dagger| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max defect {0:e})")]
    NotUnitary(f64),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("group closure exceeded {0} elements")]
    OrderExceeded(usize),
    #[error("{what} of size {size} exceeds the cap {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u128 },
    #[error("representation is projective on the subgroup (max phase defect {0:e})")]
    ProjectivePhases(f64),
    #[error("invalid permutation action: {0}")]
    InvalidAction(String),
    #[error("{0} sections exceed the cap {1}")]
    TooManySections(u128, u128),
    #[error("assemblage invariant violated: {0}")]
    InvariantViolation(String),
    #[error("no partition of the orbit into measurements exists")]
    NoPartition,
    #[error("assemblage is not uniform")]
    NotUniform,
    #[error("closed form not certified: {0}")]
    NotUniformOrRigid(String),
    #[error("assemblage is not symmetric under the given group (residual {0:e})")]
    NotSymmetric(f64),
    #[error("dual certificate infeasible (first constraint {first:e}, worst section eigenvalue {worst:e})")]
    InfeasibleCertificate { first: f64, worst: f64 },
    #[error("noise parameter {0} outside [0, 1]")]
    EtaOutOfRange(f64),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("operation requires odd characteristic")]
    EvenCharacteristic,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
