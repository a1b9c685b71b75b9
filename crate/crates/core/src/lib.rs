//! Controlled kernel-swap experiments for audio deepfake detection.
//!
//! The crate turns waveforms into fold-specific PCA features, evaluates either
//! classical kernels or a classically simulated quantum fidelity kernel on
//! them, trains the same soft-margin SVM on the resulting Gram matrix, and
//! scores the held-out trials with anti-spoofing metrics (EER, FPR) plus the
//! margin-based separability and security diagnostics.
//!
//! Labels follow the anti-spoofing convention used throughout: bona fide
//! speech is `+1` for the SVM, spoof is the positive class for every
//! detection metric.

pub mod audio_features;
pub mod diagnostics;
pub mod digest;
pub mod error;
pub mod evaluation;
pub mod kernels;
pub mod label;
pub mod numfmt;
pub mod quantum_kernel;
pub mod svm;

pub use digest::Digest;
pub use error::{Error, ErrorClass, Result};
pub use label::Label;

/// Row-major sample × feature matrix shared by every stage of the pipeline.
pub type FeatureMatrix = ndarray::Array2<f64>;
