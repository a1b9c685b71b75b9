use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
    /// 1-based line in the manifest file.
    pub line: usize,
}

/// Parses `relative/path.wav,label` records. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (path, label) = trimmed.rsplit_once(',').ok_or_else(|| Error::Manifest {
            line,
            reason: format!("expected `path,label`, got {trimmed:?}"),
        })?;
        let path = path.trim();
        if path.is_empty() {
            return Err(Error::Manifest {
                line,
                reason: "empty path".into(),
            });
        }
        let label = label.trim().parse::<Label>().map_err(|e| Error::Manifest {
            line,
            reason: e.to_string(),
        })?;
        out.push(ManifestEntry {
            path: PathBuf::from(path),
            label,
            line,
        });
    }
    Ok(out)
}
