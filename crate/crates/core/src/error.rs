use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input has {actual} features, expected {expected}")]
    InputShape { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("feature {feature} is constant (value {value}) and cannot be binarized")]
    DegenerateFeature { feature: usize, value: f64 },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("corrupt archive: {0}")]
    CorruptArchive(String),

    #[error("unsupported archive version {found} (this build reads version {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("model would need about {estimated} bytes of clause state, above the {cap} byte cap")]
    ResourceLimit { estimated: u64, cap: u64 },

    #[error("{}: {source}", path.display())]
    File { path: std::path::PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::InputShape { expected, actual })
    }
}
