//! On-disk memoization for expensive enumerations.
//!
//! One file per key under the cache directory. Format: 8-byte magic,
//! 4-byte version, 4-byte payload length, then little-endian f64 values.
//! Writes go to a temp file first and are renamed into place, so readers
//! never observe a partial file. Corrupt files are recomputed and
//! overwritten with a warning.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::lattice::LatticeBasis;

const MAGIC: &[u8; 8] = b"SHEARCNT";
const VERSION: u32 = 1;

/// Identity of one cached computation: operation tag, basis digest, and the
/// radius quantized to 1e-12 so that equal keys imply equal values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    tag: String,
    basis_hash: [u8; 32],
    radius_quantized: i64,
}

impl CacheKey {
    pub fn new(tag: &str, basis: &LatticeBasis, radius: f64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(basis.canonical_bytes());
        CacheKey {
            tag: tag.to_string(),
            basis_hash: hasher.finalize().into(),
            radius_quantized: (radius / 1e-12).round() as i64,
        }
    }

    fn file_name(&self) -> String {
        let hex: String = self.basis_hash[..12].iter().map(|b| format!("{b:02x}")).collect();
        format!("{}-{}-{}.bin", self.tag, hex, self.radius_quantized)
    }
}

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// Cache rooted at SHEARCOUNT_CACHE_DIR, or a per-user directory under
    /// the system temp dir.
    pub fn from_env() -> Self {
        let dir = std::env::var_os("SHEARCOUNT_CACHE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("shearcount-cache"));
        Cache { dir: Some(dir) }
    }

    pub fn at(dir: PathBuf) -> Self {
        Cache { dir: Some(dir) }
    }

    /// A cache that never stores anything (`--no-cache`).
    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    /// Fetch the payload for `key`, computing and storing it on a miss.
    /// The boolean reports whether the value came from disk.
    pub fn get_or_compute<F>(&self, key: &CacheKey, thunk: F) -> Result<(Vec<f64>, bool)>
    where
        F: FnOnce() -> Result<Vec<f64>>,
    {
        let Some(dir) = &self.dir else {
            return Ok((thunk()?, false));
        };
        let path = dir.join(key.file_name());
        if let Some(values) = read_payload(&path) {
            return Ok((values, true));
        }
        if path.exists() {
            eprintln!("warning: corrupt cache file {}, recomputing", path.display());
        }
        let values = thunk()?;
        if let Err(e) = write_payload(dir, &path, &values) {
            eprintln!("warning: cache write failed ({e}), continuing uncached");
        }
        Ok((values, false))
    }
}

fn read_payload(path: &PathBuf) -> Option<Vec<f64>> {
    let bytes = fs::read(path).ok()?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return None;
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().ok()?);
    if version != VERSION {
        return None;
    }
    let count = u32::from_le_bytes(bytes[12..16].try_into().ok()?) as usize;
    if bytes.len() != 16 + 8 * count {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    for chunk in bytes[16..].chunks_exact(8) {
        out.push(f64::from_le_bytes(chunk.try_into().ok()?));
    }
    Some(out)
}

fn write_payload(dir: &PathBuf, path: &PathBuf, values: &[f64]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(MAGIC)?;
        f.write_all(&VERSION.to_le_bytes())?;
        f.write_all(&(values.len() as u32).to_le_bytes())?;
        for v in values {
            f.write_all(&v.to_le_bytes())?;
        }
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_quantization() {
        let g = LatticeBasis::identity(2);
        let a = CacheKey::new("count", &g, 1.5);
        let b = CacheKey::new("count", &g, 1.5 + 1e-15);
        let c = CacheKey::new("count", &g, 1.5 + 1e-9);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, CacheKey::new("psum", &g, 1.5));
    }

    #[test]
    fn hit_after_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path().to_path_buf());
        let key = CacheKey::new("count", &LatticeBasis::identity(2), 1.5);
        let (v1, hit1) = cache.get_or_compute(&key, || Ok(vec![9.0, 7.0])).unwrap();
        assert!(!hit1);
        let (v2, hit2) = cache
            .get_or_compute(&key, || panic!("must not recompute"))
            .unwrap();
        assert!(hit2);
        assert_eq!(v1, v2);
    }

    #[test]
    fn disabled_never_stores() {
        let cache = Cache::disabled();
        let key = CacheKey::new("count", &LatticeBasis::identity(2), 1.5);
        let mut calls = 0;
        for _ in 0..2 {
            let (_, hit) = cache
                .get_or_compute(&key, || {
                    calls += 1;
                    Ok(vec![1.0])
                })
                .unwrap();
            assert!(!hit);
        }
        assert_eq!(calls, 2);
    }

    #[test]
    fn truncated_file_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path().to_path_buf());
        let key = CacheKey::new("count", &LatticeBasis::identity(3), 2.5);
        cache.get_or_compute(&key, || Ok(vec![3.25])).unwrap();

        // truncate the single cache file
        let entry = fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap();
        let bytes = fs::read(entry.path()).unwrap();
        fs::write(entry.path(), &bytes[..bytes.len() / 2]).unwrap();

        let (v, hit) = cache.get_or_compute(&key, || Ok(vec![3.25])).unwrap();
        assert!(!hit);
        assert_eq!(v, vec![3.25]);
        // overwritten file is healthy again
        let (_, hit) = cache.get_or_compute(&key, || panic!("should hit")).unwrap();
        assert!(hit);
    }
}
