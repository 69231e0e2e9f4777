//! On-disk program cache. One file per digest at `<root>/aa/bb/<digest>.qir`.
//!
//! File layout: magic, little-endian format version, SHA-256 of the body,
//! then the bincode-encoded [`CacheEntry`].

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CacheError;
use crate::compiler::Program;

const MAGIC: &[u8; 4] = b"QKIR";
/// Bumped whenever [`CacheEntry`] or the program encoding changes.
pub const CACHE_FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 32;
const EXTENSION: &str = "qir";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub digest: String,
    /// bincode encoding of the lowered [`Program`].
    pub program: Vec<u8>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub format_version: u32,
}

impl CacheEntry {
    pub fn new(digest: &str, program: &Program) -> Result<Self, CacheError> {
        Ok(CacheEntry {
            digest: digest.to_string(),
            program: bincode::serialize(program).map_err(|e| CacheError::Encode(e.to_string()))?,
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            format_version: CACHE_FORMAT_VERSION,
        })
    }

    pub fn program(&self) -> Result<Program, CacheError> {
        bincode::deserialize(&self.program).map_err(|e| CacheError::Corrupt {
            digest: self.digest.clone(),
            reason: format!("program does not decode: {e}"),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskStats {
    pub entries: u64,
    pub bytes: u64,
}

#[derive(Clone, Debug)]
pub struct DiskCache {
    root: PathBuf,
}

/// Environment variable that overrides the cache location.
pub const CACHE_DIR_ENV: &str = "QK_CACHE_DIR";

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DiskCache { root: root.into() }
    }

    /// `$QK_CACHE_DIR`, else `qk` under the platform user cache directory.
    pub fn default_location() -> Option<PathBuf> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(p) if !p.is_empty() => Some(PathBuf::from(p)),
            _ => dirs::cache_dir().map(|d| d.join("qk")),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, digest: &str) -> Result<PathBuf, CacheError> {
        if digest.len() < 4 || !digest.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(CacheError::BadDigest(digest.to_string()));
        }
        Ok(self
            .root
            .join(&digest[0..2])
            .join(&digest[2..4])
            .join(format!("{digest}.{EXTENSION}")))
    }

    /// Writes through a temporary file in the target directory and renames
    /// it into place, so readers never see a partial entry.
    pub fn write(&self, entry: &CacheEntry) -> Result<PathBuf, CacheError> {
        let path = self.path_for(&entry.digest)?;
        let dir = path.parent().expect("fan-out directory");
        fs::create_dir_all(dir)?;
        let body = bincode::serialize(entry).map_err(|e| CacheError::Encode(e.to_string()))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(MAGIC)?;
        tmp.write_all(&entry.format_version.to_le_bytes())?;
        tmp.write_all(&Sha256::digest(&body))?;
        tmp.write_all(&body)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CacheError::Io(e.error.to_string()))?;
        Ok(path)
    }

    /// `Ok(None)` for a missing entry or one written by another format
    /// version. Damaged files are reported as [`CacheError::Corrupt`].
    pub fn read(&self, digest: &str) -> Result<Option<CacheEntry>, CacheError> {
        let path = self.path_for(digest)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: &str| CacheError::Corrupt {
            digest: digest.to_string(),
            reason: reason.to_string(),
        };
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(corrupt("bad header"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != CACHE_FORMAT_VERSION {
            log::debug!("ignoring cache entry {digest} with format version {version}");
            return Ok(None);
        }
        let body = &bytes[HEADER_LEN..];
        if Sha256::digest(body).as_slice() != &bytes[8..HEADER_LEN] {
            return Err(corrupt("checksum mismatch"));
        }
        let entry: CacheEntry = bincode::deserialize(body).map_err(|_| corrupt("entry does not decode"))?;
        if entry.digest != digest || entry.format_version != version {
            return Err(corrupt("entry does not match its file name"));
        }
        Ok(Some(entry))
    }

    fn entry_files(&self) -> Result<Vec<PathBuf>, CacheError> {
        let mut out = Vec::new();
        if !self.root.is_dir() {
            return Ok(out);
        }
        for a in fs::read_dir(&self.root)? {
            let a = a?.path();
            if !a.is_dir() {
                continue;
            }
            for b in fs::read_dir(&a)? {
                let b = b?.path();
                if !b.is_dir() {
                    continue;
                }
                for f in fs::read_dir(&b)? {
                    let f = f?.path();
                    if f.extension().is_some_and(|e| e == EXTENSION) {
                        out.push(f);
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn stats(&self) -> Result<DiskStats, CacheError> {
        let mut s = DiskStats::default();
        for f in self.entry_files()? {
            s.entries += 1;
            s.bytes += fs::metadata(&f)?.len();
        }
        Ok(s)
    }

    /// Deletes every entry and the fan-out directories left empty. Other
    /// files under the root are kept. Returns the number of entries removed.
    pub fn clear(&self) -> Result<u64, CacheError> {
        let files = self.entry_files()?;
        for f in &files {
            fs::remove_file(f)?;
            for dir in f.ancestors().skip(1).take(2) {
                // Fails while other files remain, which is what we want.
                if fs::remove_dir(dir).is_err() {
                    break;
                }
            }
        }
        Ok(files.len() as u64)
    }
}
