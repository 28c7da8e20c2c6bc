//! Content-addressed blob store.
//!
//! Blobs are keyed by their SHA-256 digest. The store lives in memory and can
//! optionally mirror every blob to a directory as `<dir>/<hex-digest>`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("refusing to store empty content")]
    EmptyContent,
    #[error("no blob with digest {0}")]
    NotFound(Digest),
    #[error("blob {0} on disk does not match its digest")]
    Corrupt(Digest),
    #[error("invalid digest: {0}")]
    InvalidDigest(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, StoreError>;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Digest([u8; 32]);

impl Digest {
    pub fn of(content: &[u8]) -> Self {
        Self(Sha256::digest(content).into())
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl FromStr for Digest {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| StoreError::InvalidDigest(e.to_string()))?;
        Ok(Self(out))
    }
}

impl From<Digest> for String {
    fn from(d: Digest) -> String {
        d.to_hex()
    }
}

impl TryFrom<String> for Digest {
    type Error = StoreError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Default)]
pub struct BlobStore {
    blobs: BTreeMap<Digest, Vec<u8>>,
    dir: Option<PathBuf>,
}

impl BlobStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Store that also persists blobs under `dir`, creating it if needed.
    pub fn with_directory(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            blobs: BTreeMap::new(),
            dir: Some(dir),
        })
    }

    pub fn put(&mut self, content: &[u8]) -> Result<Digest> {
        if content.is_empty() {
            return Err(StoreError::EmptyContent);
        }
        let digest = Digest::of(content);
        if self.blobs.contains_key(&digest) {
            return Ok(digest);
        }
        if let Some(dir) = &self.dir {
            let path = dir.join(digest.to_hex());
            if !path.exists() {
                fs::write(&path, content)?;
            }
        }
        self.blobs.insert(digest, content.to_vec());
        Ok(digest)
    }

    pub fn get(&self, digest: &Digest) -> Result<Vec<u8>> {
        if let Some(b) = self.blobs.get(digest) {
            return Ok(b.clone());
        }
        let Some(dir) = &self.dir else {
            return Err(StoreError::NotFound(*digest));
        };
        match fs::read(dir.join(digest.to_hex())) {
            Ok(bytes) if Digest::of(&bytes) == *digest => Ok(bytes),
            Ok(_) => Err(StoreError::Corrupt(*digest)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::NotFound(*digest)),
            Err(e) => Err(e.into()),
        }
    }

    pub fn contains(&self, digest: &Digest) -> bool {
        self.blobs.contains_key(digest)
            || self
                .dir
                .as_ref()
                .is_some_and(|d| d.join(digest.to_hex()).is_file())
    }

    pub fn len(&self) -> usize {
        self.blobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blobs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn put_is_idempotent_and_round_trips() {
        let mut s = BlobStore::in_memory();
        let a = s.put(b"hello").unwrap();
        assert_eq!(s.put(b"hello").unwrap(), a);
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&a).unwrap(), b"hello");
    }

    #[test]
    fn empty_content_is_rejected() {
        assert!(matches!(BlobStore::in_memory().put(b""), Err(StoreError::EmptyContent)));
    }

    #[test]
    fn unknown_digest_is_not_found() {
        let s = BlobStore::in_memory();
        let d = Digest::of(b"never stored");
        assert!(matches!(s.get(&d), Err(StoreError::NotFound(x)) if x == d));
    }

    #[test]
    fn distinct_contents_get_distinct_digests() {
        let mut s = BlobStore::in_memory();
        let digests: HashSet<_> = (0u32..2000).map(|i| s.put(&i.to_le_bytes()).unwrap()).collect();
        assert_eq!(digests.len(), 2000);
    }

    #[test]
    fn mebibyte_payload_round_trips() {
        let payload: Vec<u8> = (0..1 << 20).map(|i: u32| (i.wrapping_mul(2654435761) >> 13) as u8).collect();
        let mut s = BlobStore::in_memory();
        let d = s.put(&payload).unwrap();
        assert_eq!(s.get(&d).unwrap(), payload);
    }

    #[test]
    fn directory_layout_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("store");
        let d = {
            let mut s = BlobStore::with_directory(&root).unwrap();
            s.put(b"persisted").unwrap()
        };
        assert_eq!(fs::read(root.join(d.to_hex())).unwrap(), b"persisted");
        let reopened = BlobStore::with_directory(&root).unwrap();
        assert!(reopened.contains(&d));
        assert_eq!(reopened.get(&d).unwrap(), b"persisted");

        fs::write(root.join(d.to_hex()), b"tampered").unwrap();
        assert!(matches!(reopened.get(&d), Err(StoreError::Corrupt(_))));
    }

    #[test]
    fn digest_hex_round_trip() {
        let d = Digest::of(b"x");
        assert_eq!(d.to_hex().parse::<Digest>().unwrap(), d);
        assert!("zz".parse::<Digest>().is_err());
    }
}
