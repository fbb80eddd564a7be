use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("rank {rank} out of range 1..={levels}")]
    RankOutOfRange { rank: usize, levels: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("feasible sets have an empty intersection")]
    EmptyIntersection,

    #[error("round {round} exceeds the common randomness supply of {supply} symbols")]
    RandomnessExhausted { round: usize, supply: usize },

    #[error("database {db} does not exist (N2 = {n2})")]
    UnknownDatabase { db: usize, n2: usize },

    #[error("threshold must be at least 1")]
    InvalidThreshold,

    #[error("cardinality {m} is outside the admissible range {min}..={max}")]
    InvalidCardinality { m: u64, min: u64, max: u64 },

    #[error("decoded value {value} at index {index} is not a bit")]
    CorruptBit { index: usize, value: u64 },

    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("enumeration of {size} cases exceeds the limit of {limit}")]
    EnumerationTooLarge { size: u128, limit: u128 },

    #[error("parameter grid too large: {0}")]
    GridTooLarge(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
