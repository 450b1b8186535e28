pub type BenchResult<T> = Result<T, BenchError>;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("checksum gate failed for {kernel}: scalar {scalar:e} vs packed {packed:e} (relative {relative:e})")]
    ChecksumMismatch {
        kernel: String,
        scalar: f64,
        packed: f64,
        relative: f64,
    },

    #[error(transparent)]
    Core(packfem::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<packfem::Error> for BenchError {
    fn from(e: packfem::Error) -> Self {
        match e {
            packfem::Error::Config(m) => BenchError::Config(m),
            packfem::Error::Parse { .. } => BenchError::Config(e.to_string()),
            other => BenchError::Core(other),
        }
    }
}

impl BenchError {
    /// Process exit status: 2 for the checksum gate, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::ChecksumMismatch { .. } => 2,
            _ => 1,
        }
    }
}
