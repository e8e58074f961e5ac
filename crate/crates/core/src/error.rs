use std::fmt;

use crate::channel::Node;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage names attached to errors surfaced by `run_pipeline`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Probe,
    Clean,
    Eliminate,
    Quantize,
    Evaluate,
    Amplify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Probe => "probe",
            Stage::Clean => "clean",
            Stage::Eliminate => "eliminate",
            Stage::Quantize => "quantize",
            Stage::Evaluate => "evaluate",
            Stage::Amplify => "amplify",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("session exhausted: probe {index} is beyond the configured {available} probes")]
    SessionExhausted { index: u64, available: u64 },

    #[error("probe index {index} does not follow previous index {previous}")]
    ProbeOrder { index: u64, previous: u64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("probe index mismatch at position {position}: {left} vs {right}")]
    ProbeMismatch { position: usize, left: u64, right: u64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dc window {window} around index {center} does not fit a grid of {len}")]
    WindowTooLarge { center: usize, window: usize, len: usize },

    #[error("need at least {needed} distinct sample values, found {found}")]
    TooFewDistinct { needed: usize, found: usize },

    #[error("missing node: {0}")]
    MissingNode(Node),

    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Innermost error, stripped of stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code used by the CLI: 2 config, 3 I/O or trace format, 4 pipeline.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::InvalidConfig(_) => 2,
            Error::Io(_) | Error::Trace { .. } => 3,
            _ => 4,
        }
    }
}
