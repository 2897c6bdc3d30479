use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no audio captured: input is empty")]
    EmptyAudio,

    #[error("unsupported sample rate {0} Hz (expected 8000 Hz)")]
    UnsupportedSampleRate(u32),

    #[error("unsupported channel count {0} (expected mono)")]
    UnsupportedChannels(u16),

    #[error(
        "unsupported codec: format tag {format_tag:#06x} with {bits_per_sample} bits per sample"
    )]
    UnsupportedCodec {
        format_tag: u16,
        bits_per_sample: u16,
    },

    #[error("malformed WAV: {0}")]
    MalformedWav(String),

    #[error("invalid STFT configuration: {0}")]
    InvalidConfig(String),

    #[error("FFT length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("signal of {len} samples is shorter than the {window}-sample window")]
    SignalTooShort { len: usize, window: usize },

    #[error("spectrogram has {frames} time frames; at least {required} are needed")]
    TooFewFrames { frames: usize, required: usize },

    #[error("feature dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid training data: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported model schema version {found} (this build reads version {supported})")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("feature CSV: {0}")]
    FeatureCsv(String),

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("cross-validation cell (setting {setting}, split {split}) failed: {source}")]
    CvCell {
        setting: String,
        split: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
