use std::path::Path;

use hound::{SampleFormat, WavReader};

use crate::error::{Error, Result};

/// Mono waveform with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("waveform has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("waveform has non-finite samples".into()));
        }
        Ok(Waveform {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Reads a PCM WAV file (16-bit integer or 32-bit float), averages channels
/// to mono and resamples to `target_rate` by linear interpolation.
pub fn load_audio(path: &Path, target_rate: u32) -> Result<Waveform> {
    let mut reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::UnreadableAudio {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let unreadable = |e: hound::Error| Error::UnreadableAudio {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(unreadable)?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(unreadable)?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                encoding: format!("{fmt:?} {bits}-bit"),
            })
        }
    };
    if interleaved.len() < channels {
        return Err(Error::EmptyAudio(path.to_path_buf()));
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    if mono.iter().any(|s| !s.is_finite()) {
        return Err(Error::UnreadableAudio {
            path: path.to_path_buf(),
            reason: "non-finite sample".into(),
        });
    }
    let wave = Waveform::new(mono, spec.sample_rate)?;
    Ok(resample_linear(&wave, target_rate))
}

/// Linear-interpolation resampler. Output length is
/// `floor(len * target / source)`, at least one sample.
pub fn resample_linear(w: &Waveform, target_rate: u32) -> Waveform {
    if w.sample_rate == target_rate {
        return w.clone();
    }
    let n = w.samples.len();
    let out_len = ((n as u128 * target_rate as u128) / w.sample_rate as u128).max(1) as usize;
    let step = w.sample_rate as f64 / target_rate as f64;
    let last = n - 1;
    let samples = (0..out_len)
        .map(|j| {
            let pos = j as f64 * step;
            let i = (pos.floor() as usize).min(last);
            let frac = pos - i as f64;
            if i == last {
                w.samples[last]
            } else {
                w.samples[i] * (1.0 - frac) + w.samples[i + 1] * frac
            }
        })
        .collect();
    Waveform {
        samples,
        sample_rate: target_rate,
    }
}
