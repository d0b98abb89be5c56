use thiserror::Error;

/// Errors produced by the compression toolkit.
///
/// Variants are grouped so that front ends can map them onto coarse exit
/// classes: `Config`/`Usage` are caller mistakes, `Io` is environment,
/// everything else means the input bytes cannot be trusted.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("bad magic in {context}: expected {expected:?}, found {found:?}")]
    BadMagic {
        context: &'static str,
        expected: [u8; 4],
        found: [u8; 4],
    },

    #[error("unknown algorithm byte 0x{0:02x}")]
    UnknownAlgorithm(u8),

    #[error("truncated input while reading {0}")]
    Truncated(&'static str),

    #[error("predefined dictionary hash mismatch: stored {stored:016x}, computed {computed:016x}")]
    DictHashMismatch { stored: u64, computed: u64 },

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("internal error: {0}")]
    Internal(&'static str),
}

impl Error {
    /// True for every variant that signals untrustworthy input bytes, as
    /// opposed to caller or environment mistakes.
    pub fn is_corruption(&self) -> bool {
        matches!(
            self,
            Error::BadMagic { .. }
                | Error::UnknownAlgorithm(_)
                | Error::Truncated(_)
                | Error::DictHashMismatch { .. }
                | Error::Corrupt(_)
                | Error::Integrity(_)
                | Error::Internal(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
