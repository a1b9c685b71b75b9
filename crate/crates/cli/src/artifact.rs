//! Binary feature artifact shared by `features` and `synth`.
//!
//! Layout, all integers little-endian:
//! magic `QKFT`, version u32, rows u64, cols u64, input digest (32 bytes),
//! params digest (32 bytes), then per row an id (u32 length + UTF-8) and a
//! label byte (0 bona fide, 1 spoof), then rows·cols f64 values row-major.

use std::io::Write;
use std::path::Path;

use qkswap_core::digest::Digest;
use qkswap_core::evaluation::FeatureSet;
use qkswap_core::{Error, FeatureMatrix, Label, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"QKFT";
pub const FEATURE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureArtifact {
    /// Digest of everything the features were computed from.
    pub input_digest: Digest,
    pub params_digest: Digest,
    pub set: FeatureSet,
}

pub fn encode(a: &FeatureArtifact) -> Vec<u8> {
    let (n, d) = a.set.features.dim();
    let mut out = Vec::with_capacity(84 + n * (16 + 8 * d));
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FEATURE_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&a.input_digest.0);
    out.extend_from_slice(&a.params_digest.0);
    for (id, label) in a.set.ids.iter().zip(&a.set.labels) {
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
        out.push(u8::from(label.is_spoof()));
    }
    for v in a.set.features.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::InvalidInput("feature artifact is truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn digest(&mut self) -> Result<Digest> {
        Ok(Digest(self.take(32)?.try_into().expect("32 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<FeatureArtifact> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != FEATURE_MAGIC {
        return Err(Error::InvalidInput("not a feature artifact (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FEATURE_FORMAT_VERSION {
        return Err(Error::InvalidInput(format!("unsupported feature artifact version {version}")));
    }
    let n = usize::try_from(r.u64()?).map_err(|_| Error::InvalidInput("row count overflows".into()))?;
    let d = usize::try_from(r.u64()?).map_err(|_| Error::InvalidInput("column count overflows".into()))?;
    let input_digest = r.digest()?;
    let params_digest = r.digest()?;
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let len = r.u32()? as usize;
        let id = std::str::from_utf8(r.take(len)?).map_err(|e| Error::InvalidInput(format!("row id: {e}")))?;
        ids.push(id.to_string());
        labels.push(match r.take(1)?[0] {
            0 => Label::Bonafide,
            1 => Label::Spoof,
            b => return Err(Error::InvalidInput(format!("invalid label byte {b}"))),
        });
    }
    let total = n.checked_mul(d).and_then(|t| t.checked_mul(8));
    let raw = r.take(total.ok_or_else(|| Error::InvalidInput("feature matrix size overflows".into()))?)?;
    if r.pos != bytes.len() {
        return Err(Error::InvalidInput("trailing bytes after feature matrix".into()));
    }
    let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let features = FeatureMatrix::from_shape_vec((n, d), values).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(FeatureArtifact {
        input_digest,
        params_digest,
        set: FeatureSet::new(ids, labels, features)?,
    })
}

pub fn read(path: &Path) -> Result<FeatureArtifact> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    decode(&bytes)
}

/// Writes through a temporary file in the target directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
