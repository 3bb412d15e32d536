use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "incompatible block spec: {width}x{height} image cannot be split into {bx}x{by} blocks"
    )]
    IncompatibleBlockSpec {
        width: usize,
        height: usize,
        bx: usize,
        by: usize,
    },

    #[error("malformed dataset: {0}")]
    MalformedDataset(String),

    #[error("nothing to attack: grid has {blocks} block(s), at least 2 are required")]
    NothingToAttack { blocks: usize },

    /// A caller broke an operation's precondition (zero bound, out-of-range index, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: png decode failed: {source}", path.display())]
    PngDecode {
        path: PathBuf,
        #[source]
        source: png::DecodingError,
    },

    #[error("{}: png encode failed: {source}", path.display())]
    PngEncode {
        path: PathBuf,
        #[source]
        source: png::EncodingError,
    },

    #[error("{}: unsupported image: {reason}", path.display())]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
