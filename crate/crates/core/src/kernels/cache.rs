//! Persistent Gram-matrix cache.
//!
//! File layout (little-endian): magic `QKGM`, format version `u32`, `N` as
//! `u64`, the 32-byte kernel spec digest, the 32-byte row-set digest, then
//! `N·N` `f64` values row-major. Writes go to a temporary file in the cache
//! directory and are renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::gram::GramMatrix;
use crate::digest::Digest;
use crate::error::{Error, Result};

pub const GRAM_MAGIC: &[u8; 4] = b"QKGM";
pub const GRAM_FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 32 + 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramFileHeader {
    pub version: u32,
    pub n: u64,
    pub spec_digest: Digest,
    pub rowset_digest: Digest,
}

pub fn write_gram_file(w: &mut impl Write, spec_digest: &Digest, rowset_digest: &Digest, values: &Array2<f64>) -> std::io::Result<()> {
    let n = values.nrows() as u64;
    let mut buf = Vec::with_capacity(HEADER_LEN + values.len() * 8);
    buf.extend_from_slice(GRAM_MAGIC);
    buf.extend_from_slice(&GRAM_FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&spec_digest.0);
    buf.extend_from_slice(&rowset_digest.0);
    for row in values.rows() {
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)
}

/// Parses a cache file. Rejects unknown versions, truncated payloads, and
/// non-finite or asymmetric matrices.
pub fn read_gram_file(bytes: &[u8]) -> Result<(GramFileHeader, Array2<f64>)> {
    let corrupt = |m: String| Error::Cache(m);
    if bytes.len() < HEADER_LEN || &bytes[..4] != GRAM_MAGIC {
        return Err(corrupt("missing QKGM header".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != GRAM_FORMAT_VERSION {
        return Err(corrupt(format!("unsupported Gram file version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let spec_digest = Digest(bytes[16..48].try_into().unwrap());
    let rowset_digest = Digest(bytes[48..80].try_into().unwrap());
    let expected = (n as usize)
        .checked_mul(n as usize)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| corrupt(format!("implausible size {n}")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(corrupt(format!("payload has {} bytes, expected {expected}", payload.len())));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let n = n as usize;
    let values = Array2::from_shape_vec((n, n), data).map_err(|e| corrupt(e.to_string()))?;
    for i in 0..n {
        for j in i..n {
            let v = values[(i, j)];
            if !v.is_finite() || v.to_bits() != values[(j, i)].to_bits() {
                return Err(corrupt(format!("entry ({i}, {j}) is non-finite or asymmetric")));
            }
        }
    }
    Ok((
        GramFileHeader {
            version,
            n: n as u64,
            spec_digest,
            rowset_digest,
        },
        values,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub path: PathBuf,
    pub bytes: u64,
}

/// Directory of Gram files keyed by `(spec digest, row-set digest)`.
#[derive(Debug, Clone)]
pub struct GramCache {
    dir: PathBuf,
}

impl GramCache {
    /// Opens (creating if needed) a cache directory.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let meta = fs::metadata(&dir).map_err(|e| Error::io(&dir, e))?;
        if meta.permissions().readonly() {
            return Err(Error::Cache(format!("cache directory {} is not writable", dir.display())));
        }
        Ok(GramCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, spec: &Digest, rowset: &Digest) -> PathBuf {
        self.dir.join(format!("{}-{}.qkgm", spec.to_hex(), rowset.to_hex()))
    }

    /// `Ok(None)` on a miss; `Err` when a file exists but does not match.
    pub fn load(&self, spec: &Digest, rowset: &Digest, n: usize) -> Result<Option<Array2<f64>>> {
        let path = self.path_for(spec, rowset);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let (header, values) = read_gram_file(&bytes)?;
        if header.spec_digest != *spec || header.rowset_digest != *rowset || header.n as usize != n {
            return Err(Error::Cache(format!("{} does not match its key", path.display())));
        }
        Ok(Some(values))
    }

    pub fn store(&self, gram: &GramMatrix) -> Result<()> {
        let path = self.path_for(&gram.spec_digest, &gram.rowset_digest);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        write_gram_file(tmp.as_file_mut(), &gram.spec_digest, &gram.rowset_digest, &gram.values)
            .map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        Ok(())
    }

    pub fn entries(&self) -> Result<Vec<CacheEntry>> {
        let mut out = Vec::new();
        for item in fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))? {
            let item = item.map_err(|e| Error::io(&self.dir, e))?;
            let path = item.path();
            if path.extension().is_some_and(|e| e == "qkgm") {
                let bytes = item.metadata().map_err(|e| Error::io(&path, e))?.len();
                out.push(CacheEntry { path, bytes });
            }
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    /// Checks every entry's structure and that its header matches its name.
    pub fn verify(&self) -> Result<Vec<(PathBuf, std::result::Result<(), String>)>> {
        let mut out = Vec::new();
        for entry in self.entries()? {
            let status = fs::read(&entry.path)
                .map_err(|e| e.to_string())
                .and_then(|b| read_gram_file(&b).map_err(|e| e.to_string()))
                .and_then(|(h, _)| {
                    if entry.path == self.path_for(&h.spec_digest, &h.rowset_digest) {
                        Ok(())
                    } else {
                        Err("header digests do not match the file name".to_string())
                    }
                });
            out.push((entry.path, status));
        }
        Ok(out)
    }

    /// Removes every cache entry; returns how many were deleted.
    pub fn clear(&self) -> Result<usize> {
        let entries = self.entries()?;
        for e in &entries {
            fs::remove_file(&e.path).map_err(|err| Error::io(&e.path, err))?;
        }
        Ok(entries.len())
    }
}
