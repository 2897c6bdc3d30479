//! Detection of "dead air" telephony SPAM from the first two seconds of call
//! audio.
//!
//! The pipeline decodes G.711 μ-law or PCM audio into a fixed two-second
//! clip, computes a Hann-windowed magnitude spectrogram, factorizes it with
//! a thin SVD and classifies the leading left singular vectors (the
//! dominant basis spectra) with a random forest. Linear hinge-loss
//! baselines, stratified cross-validation and a seeded synthetic corpus
//! generator round out the experiment tooling.

pub mod audio;
pub mod dataset;
pub mod detect;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod factorization;
pub mod learn;
pub mod matrix;
pub mod synth;

pub use audio::{AudioClip, LevelReport};
pub use dataset::{Dataset, FeatureRecord, Label, LabeledExample};
pub use detect::{Classification, Detector, Featurizer, SilencePolicy};
pub use dsp::{Spectrogram, StftConfig};
pub use error::{Error, Result};
pub use factorization::{FeatureVector, SvdResult};
pub use learn::{ForestModel, ForestParams, LinearModel, LinearParams, Loss, Model, Prediction};
pub use matrix::Matrix;
