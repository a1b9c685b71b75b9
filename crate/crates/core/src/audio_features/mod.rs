//! Waveform → mel-spectrogram → min-max → PCA feature pipeline.
//!
//! Everything here is a pure function of its inputs. Scaler and PCA models
//! are fitted on training rows only and are immutable afterwards.

mod manifest;
mod mel;
mod pca;
mod scaling;
mod wav;

pub use manifest::{parse_manifest, ManifestEntry};
pub use mel::{hz_to_mel, mel_filterbank, mel_spectrogram, mel_to_hz, ExtractionParams, MelSpectrogram};
pub use pca::{apply_pca, fit_pca, PcaModel};
pub use scaling::{apply_minmax, fit_minmax, ScalerParams};
pub use wav::{load_audio, resample_linear, Waveform};

use crate::{FeatureMatrix, Result};

/// Loads, extracts and flattens one file into a mel-major feature row.
pub fn extract_file(path: &std::path::Path, params: &ExtractionParams) -> Result<Vec<f64>> {
    let wave = load_audio(path, params.sample_rate)?;
    Ok(mel_spectrogram(&wave, params)?.flatten())
}

/// Stacks equally long rows into a matrix.
pub fn stack_rows(rows: &[Vec<f64>]) -> Result<FeatureMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows.len() * cols);
    for r in rows {
        if r.len() != cols {
            return Err(crate::Error::DimensionMismatch {
                context: "stack_rows",
                expected: cols,
                got: r.len(),
            });
        }
        data.extend_from_slice(r);
    }
    FeatureMatrix::from_shape_vec((rows.len(), cols), data)
        .map_err(|e| crate::Error::InvalidInput(e.to_string()))
}
