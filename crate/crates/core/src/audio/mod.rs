//! Call audio ingest: μ-law/WAV decoding, two-second clip normalization,
//! level metering and digital-silence detection.

pub mod mulaw;
pub mod wav;

use std::ops::Deref;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use mulaw::{decode_mulaw, encode_mulaw};
pub use wav::{read_wav, write_wav_pcm16};

pub const SAMPLE_RATE: u32 = 8000;
/// Two seconds at 8 kHz.
pub const CLIP_LEN: usize = 16000;
/// dBFS reference amplitude.
pub const FULL_SCALE: f64 = 32768.0;

/// The first two seconds of a call as linear 16-bit PCM at 8 kHz.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<i16>,
    padded_fraction: f64,
}

impl AudioClip {
    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        SAMPLE_RATE
    }

    /// Fraction of the clip that is zero padding appended by normalization.
    pub fn padded_fraction(&self) -> f64 {
        self.padded_fraction
    }

    pub fn into_samples(self) -> Vec<i16> {
        self.samples
    }
}

impl Deref for AudioClip {
    type Target = [i16];

    fn deref(&self) -> &[i16] {
        &self.samples
    }
}

/// Truncates or zero-pads PCM to exactly [`CLIP_LEN`] samples. Long inputs
/// keep their first two seconds.
pub fn normalize_clip(pcm: &[i16]) -> Result<AudioClip> {
    if pcm.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let kept = pcm.len().min(CLIP_LEN);
    let mut samples = Vec::with_capacity(CLIP_LEN);
    samples.extend_from_slice(&pcm[..kept]);
    samples.resize(CLIP_LEN, 0);
    Ok(AudioClip {
        samples,
        padded_fraction: (CLIP_LEN - kept) as f64 / CLIP_LEN as f64,
    })
}

/// Decodes raw μ-law bytes (`.ul`) straight into a normalized clip.
pub fn clip_from_mulaw(codes: &[u8]) -> Result<AudioClip> {
    normalize_clip(&decode_mulaw(codes)?)
}

/// True iff every sample is exactly zero.
pub fn is_digital_silence(samples: &[i16]) -> bool {
    samples.iter().all(|&s| s == 0)
}

/// Peak and RMS levels of a clip. Silent clips carry `-inf` levels, which
/// serialize as the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    #[serde(with = "dbfs")]
    pub peak_dbfs: f64,
    #[serde(with = "dbfs")]
    pub rms_dbfs: f64,
    #[serde(rename = "digital_silence")]
    pub is_digital_silence: bool,
}

pub fn meter_levels(samples: &[i16]) -> LevelReport {
    let peak = samples
        .iter()
        .map(|&s| i32::from(s).unsigned_abs())
        .max()
        .unwrap_or(0);
    if peak == 0 {
        return LevelReport {
            peak_dbfs: f64::NEG_INFINITY,
            rms_dbfs: f64::NEG_INFINITY,
            is_digital_silence: true,
        };
    }
    let energy: f64 = samples.iter().map(|&s| f64::from(s) * f64::from(s)).sum();
    let rms = (energy / samples.len() as f64).sqrt();
    LevelReport {
        peak_dbfs: to_dbfs(f64::from(peak)),
        rms_dbfs: to_dbfs(rms),
        is_digital_silence: false,
    }
}

pub fn to_dbfs(amplitude: f64) -> f64 {
    20.0 * (amplitude / FULL_SCALE).log10()
}

mod dbfs {
    use super::*;

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *value == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*value)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("invalid level {s:?}"))),
        }
    }
}
