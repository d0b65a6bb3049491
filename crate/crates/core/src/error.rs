use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::matcore::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid preparation: {0}")]
    InvalidPreparation(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid behavior table: {0}")]
    InvalidBehavior(String),

    #[error("invalid ontic extension: {0}")]
    InvalidExtension(String),

    #[error("preparation is signalling (ensemble averages differ by {0:e})")]
    SignallingPreparation(f64),

    #[error("state is not normalized (trace {0})")]
    NotNormalized(f64),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("alphabets must be binary for this operation")]
    NonBinaryAlphabet,

    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("unitary gauge requires an identity channel")]
    NonIdentityChannel,

    #[error("enumeration guard exceeded: {0} candidates (limit {1})")]
    GuardExceeded(u128, u128),

    #[error("certificate failed independent verification: {0}")]
    CertificateRejected(String),

    #[error("malformed document: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
