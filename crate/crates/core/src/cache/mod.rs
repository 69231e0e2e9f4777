//! Two-layer compilation cache: an in-memory memo of rewritten sources and
//! programs, backed by a content-addressed on-disk store.

pub mod jit;
pub mod store;

pub use jit::{JitOutput, JitStats, Provenance, QJit};
pub use store::{CacheEntry, DiskCache, DiskStats, CACHE_DIR_ENV, CACHE_FORMAT_VERSION};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(String),
    #[error("corrupt cache entry {digest}: {reason}")]
    Corrupt { digest: String, reason: String },
    #[error("cannot encode cache entry: {0}")]
    Encode(String),
    #[error("`{0}` is not a valid digest")]
    BadDigest(String),
}

impl From<std::io::Error> for CacheError {
    fn from(e: std::io::Error) -> Self {
        CacheError::Io(e.to_string())
    }
}
