use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not prime")]
    NotPrime(usize),

    /// Progressive edge growth could not reach the requested girth within the
    /// retry budget. Reported instead of silently relaxing the target.
    #[error(
        "could not place edge for variable node {vn} with girth >= {girth} \
         after {restarts} restarts"
    )]
    GirthUnreachable {
        vn: usize,
        girth: usize,
        restarts: usize,
    },

    #[error("alist parse error at line {line}: {message}")]
    Alist { line: usize, message: String },

    #[error("adjacency inconsistency: {0}")]
    Inconsistent(String),

    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cluster must be a nonempty proper subset of the check nodes")]
    ImproperCluster,

    #[error("unsupported cycle length {0} (supported: 4, 6, 8)")]
    UnsupportedCycleLength(usize),

    #[error(
        "exhaustive clustering over C({remaining}, {z}) = {subsets} subsets \
         exceeds the enumeration budget of {budget}"
    )]
    EnumerationBudget {
        remaining: usize,
        z: usize,
        subsets: u128,
        budget: u128,
    },

    #[error("clustering does not partition the {m} check nodes: {0}", m = .1)]
    InvalidClustering(String, usize),

    #[error("Q-table was trained for a different code (fingerprint {expected:#018x}, code has {got:#018x})")]
    FingerprintMismatch { expected: u64, got: u64 },

    #[error("Q-table data: {0}")]
    QTableFormat(String),

    #[error("unsupported Q-table version {got} (this build reads version {supported})")]
    QTableVersion { got: u32, supported: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by bad inputs rather than runtime failures.
    /// The CLI maps these to exit code 1, everything else to 2.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::GirthUnreachable { .. })
    }
}
