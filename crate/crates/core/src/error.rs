use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset error: {0}")]
    Data(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("cannot regrow {needed} connections in layer {layer}: only {available} empty positions")]
    Regrow {
        layer: usize,
        needed: usize,
        available: usize,
    },
}

/// Malformed topology, checkpoint, IDX or CSV input.
#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("unsupported format version {0}")]
    Version(String),

    #[error("file declares no layers")]
    NoLayers,

    #[error("layer {layer}: edge ({from}, {to}) outside {in_width}x{out_width}")]
    EdgeOutOfRange {
        layer: usize,
        from: usize,
        to: usize,
        in_width: usize,
        out_width: usize,
    },

    #[error("layer {layer}: duplicate edge ({from}, {to})")]
    DuplicateEdge {
        layer: usize,
        from: usize,
        to: usize,
    },

    #[error("layer {layer}: header declares {declared} edges, found {found}")]
    EdgeCount {
        layer: usize,
        declared: usize,
        found: usize,
    },

    #[error("width mismatch: {0}")]
    WidthMismatch(String),

    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    Magic { found: u32, expected: u32 },

    #[error("checksum mismatch for {file}")]
    Checksum { file: String },

    #[error("truncated input: {0}")]
    Truncated(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dimension(_) => 2,
            Error::Parse(_) => 3,
            Error::Io { .. } => 4,
            Error::Training(_) | Error::Regrow { .. } => 5,
            Error::Data(_) => 6,
        }
    }
}
