use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::wav::Waveform;
use crate::digest::{Digest, Hasher};
use crate::error::{Error, Result};

/// STFT and mel filterbank settings. The defaults are conventional speech
/// front-end values; every field takes part in [`ExtractionParams::digest`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionParams {
    pub sample_rate: u32,
    /// Analysis window and FFT length in samples.
    pub window: usize,
    pub hop: usize,
    pub n_mels: usize,
    /// Floor added before the logarithm.
    pub epsilon: f64,
    /// Clips are center-cropped or tail-padded with silence to this length.
    pub duration_secs: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        ExtractionParams {
            sample_rate: 16_000,
            window: 512,
            hop: 256,
            n_mels: 64,
            epsilon: 1e-10,
            duration_secs: 4.0,
            f_min: 0.0,
            f_max: 8_000.0,
        }
    }
}

impl ExtractionParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("extraction parameters: {m}")));
        if self.sample_rate == 0 {
            return bad("sample_rate must be positive");
        }
        if self.window < 2 || self.hop == 0 {
            return bad("window must be >= 2 and hop >= 1");
        }
        if self.n_mels == 0 {
            return bad("n_mels must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.f_min >= 0.0 && self.f_min < self.f_max) {
            return bad("need 0 <= f_min < f_max");
        }
        if self.f_max > self.sample_rate as f64 / 2.0 {
            return bad("f_max exceeds the Nyquist frequency");
        }
        if self.duration_samples() < self.window {
            return bad("duration is shorter than one analysis window");
        }
        Ok(())
    }

    pub fn duration_samples(&self) -> usize {
        (self.duration_secs * self.sample_rate as f64).round().max(0.0) as usize
    }

    pub fn n_frames_target(&self) -> usize {
        1 + (self.duration_samples().saturating_sub(self.window)) / self.hop
    }

    /// Length of the flattened feature row.
    pub fn feature_len(&self) -> usize {
        self.n_mels * self.n_frames_target()
    }

    pub fn canonical(&self) -> String {
        format!(
            "sample_rate={};window={};hop={};n_mels={};epsilon={};duration_secs={};f_min={};f_max={}",
            self.sample_rate,
            self.window,
            self.hop,
            self.n_mels,
            self.epsilon,
            self.duration_secs,
            self.f_min,
            self.f_max
        )
    }

    pub fn digest(&self) -> Digest {
        let mut h = Hasher::new();
        h.str("extraction").str(&self.canonical());
        h.finish()
    }
}

/// Log mel energies, `[n_mels × n_frames]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub values: Array2<f64>,
    pub params_hash: Digest,
}

impl MelSpectrogram {
    pub fn n_mels(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_frames(&self) -> usize {
        self.values.ncols()
    }

    /// Mel-major flattening: entry `(m, t)` lands at `m * n_frames + t`.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().copied().collect()
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular HTK-scale filterbank over the `n_fft / 2 + 1` one-sided bins.
/// Filter `m` rises from mel point `m` to `m + 1` and falls to `m + 2`, with a
/// peak weight of one.
pub fn mel_filterbank(n_mels: usize, n_fft: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Array2<f64> {
    let n_bins = n_fft / 2 + 1;
    let (lo, hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = sample_rate as f64 / n_fft as f64;
    Array2::from_shape_fn((n_mels, n_bins), |(m, k)| {
        let f = k as f64 * bin_hz;
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let rise = (f - left) / (center - left);
        let fall = (right - f) / (right - center);
        rise.min(fall).max(0.0)
    })
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Fixed-duration crop (centered) or pad (tail, silence).
fn fix_duration(samples: &[f64], target: usize) -> Vec<f64> {
    if samples.len() >= target {
        let start = (samples.len() - target) / 2;
        samples[start..start + target].to_vec()
    } else {
        let mut v = samples.to_vec();
        v.resize(target, 0.0);
        v
    }
}

/// `S(τ, m) = ln(Σ_f Mel_m(f)·|X(τ, f)|² + ε)` over a Hann-windowed STFT,
/// clipped or padded (with `ln ε`) to exactly `n_frames_target` frames.
pub fn mel_spectrogram(w: &Waveform, params: &ExtractionParams) -> Result<MelSpectrogram> {
    params.validate()?;
    if w.sample_rate != params.sample_rate {
        return Err(Error::InvalidInput(format!(
            "waveform is at {} Hz, extraction expects {} Hz",
            w.sample_rate, params.sample_rate
        )));
    }
    if w.samples.len() < params.window {
        return Err(Error::InvalidInput(format!(
            "waveform of {} samples is shorter than one {}-sample window",
            w.samples.len(),
            params.window
        )));
    }
    let signal = fix_duration(&w.samples, params.duration_samples());
    let n_fft = params.window;
    let n_bins = n_fft / 2 + 1;
    let window = hann(n_fft);
    let bank = mel_filterbank(params.n_mels, n_fft, params.sample_rate, params.f_min, params.f_max);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);

    let n_frames = 1 + (signal.len() - n_fft) / params.hop;
    let target = params.n_frames_target();
    let floor = params.epsilon.ln();
    let mut out = Array2::from_elem((params.n_mels, target), floor);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let mut power = vec![0.0; n_bins];
    for t in 0..n_frames.min(target) {
        let frame = &signal[t * params.hop..t * params.hop + n_fft];
        for ((b, &s), &h) in buf.iter_mut().zip(frame).zip(&window) {
            *b = Complex64::new(s * h, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf[..n_bins]) {
            *p = c.norm_sqr();
        }
        for m in 0..params.n_mels {
            let energy: f64 = bank.row(m).iter().zip(&power).map(|(w, p)| w * p).sum();
            out[(m, t)] = (energy + params.epsilon).ln();
        }
    }
    Ok(MelSpectrogram {
        values: out,
        params_hash: params.digest(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ExtractionParams {
        ExtractionParams {
            duration_secs: 0.25,
            ..ExtractionParams::default()
        }
    }

    #[test]
    fn zeros_give_log_epsilon_everywhere() {
        let p = params();
        let w = Waveform::new(vec![0.0; 4000], 16000).unwrap();
        let s = mel_spectrogram(&w, &p).unwrap();
        assert_eq!(s.n_mels(), 64);
        assert_eq!(s.n_frames(), p.n_frames_target());
        assert!(s.values.iter().all(|&v| v == p.epsilon.ln()));
    }

    #[test]
    fn shorter_than_window_is_rejected() {
        let w = Waveform::new(vec![0.1; 100], 16000).unwrap();
        assert!(matches!(mel_spectrogram(&w, &params()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn short_input_is_padded_to_target_frames() {
        let p = params();
        let w = Waveform::new((0..1000).map(|i| (i as f64 * 0.3).sin()).collect(), 16000).unwrap();
        let s = mel_spectrogram(&w, &p).unwrap();
        assert_eq!(s.n_frames(), p.n_frames_target());
        // trailing frames cover only silence
        let last = s.values.column(s.n_frames() - 1);
        assert!(last.iter().all(|&v| v == p.epsilon.ln()));
        assert!(s.values.column(0).iter().any(|&v| v > p.epsilon.ln()));
    }

    #[test]
    fn filterbank_rows_peak_at_one_and_cover_band() {
        let fb = mel_filterbank(40, 1024, 16000, 0.0, 8000.0);
        assert_eq!(fb.dim(), (40, 513));
        for row in fb.rows() {
            let max = row.iter().cloned().fold(0.0, f64::max);
            assert!(max > 0.5 && max <= 1.0, "{max}");
        }
        assert!((hz_to_mel(mel_to_hz(1234.5)) - 1234.5).abs() < 1e-9);
        assert!((hz_to_mel(700.0) - 2595.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn digest_tracks_every_parameter() {
        let a = ExtractionParams::default();
        let b = ExtractionParams {
            hop: 128,
            ..a.clone()
        };
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), ExtractionParams::default().digest());
    }

    #[test]
    fn default_frame_count() {
        let p = ExtractionParams::default();
        assert_eq!(p.duration_samples(), 64000);
        assert_eq!(p.n_frames_target(), 249);
        assert_eq!(p.feature_len(), 64 * 249);
    }
}
