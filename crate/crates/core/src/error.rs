use std::path::PathBuf;

/// Errors surfaced by every layer of the lab.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no feasible phases")]
    NoFeasiblePhases,

    #[error("invalid intersection: {0}")]
    InvalidIntersection(String),

    #[error("invalid flow: {0}")]
    InvalidFlow(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("need at least 2 datasets to split, got {0}")]
    TooFewDatasets(usize),

    #[error("invalid phase id {phase} (intersection has {count} phases)")]
    InvalidPhase { phase: usize, count: usize },

    #[error("action {action} out of range for {count} actions")]
    InvalidAction { action: usize, count: usize },

    #[error("empty flow")]
    EmptyFlow,

    #[error("episode is terminal")]
    EpisodeTerminal,

    #[error("smdp step requested mid-yellow")]
    MidYellow,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("architecture mismatch: {0:?} vs {1:?}")]
    ArchitectureMismatch(Vec<usize>, Vec<usize>),

    #[error("empty q-value vector")]
    EmptyQValues,

    #[error("empty batch")]
    EmptyBatch,

    #[error("replay buffer holds {size} transitions, cannot sample {requested}")]
    UnderfilledBuffer { size: usize, requested: usize },

    #[error("non-finite loss")]
    NonFiniteLoss,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &std::path::Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
