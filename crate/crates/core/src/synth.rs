//! Seeded synthetic call corpus.
//!
//! Dead-air SPAM is colored noise far below audibility with a handful of
//! isolated clicks setting the peak; HAM is a few audible tones plus
//! enveloped noise bursts. The dead-air shaping (one-pole low-pass, pole
//! 0.95) is an assumption about channel coloration, not a measured profile.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{wav, CLIP_LEN, FULL_SCALE, SAMPLE_RATE};
use crate::dataset::Label;
use crate::error::{Error, Result};

const DEADAIR_STREAM: u64 = 1;
const HAM_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadAirParams {
    /// Inclusive peak range, dBFS.
    pub peak_dbfs: (f64, f64),
    /// Noise-floor RMS range, dBFS.
    pub noise_rms_dbfs: (f64, f64),
    pub lowpass_pole: f64,
    /// Inclusive range of isolated full-peak clicks per clip.
    pub clicks: (usize, usize),
}

impl Default for DeadAirParams {
    fn default() -> Self {
        DeadAirParams {
            peak_dbfs: (-52.0, -48.0),
            noise_rms_dbfs: (-74.0, -70.0),
            lowpass_pole: 0.95,
            clicks: (1, 3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamParams {
    pub peak_dbfs: (f64, f64),
    pub tones: (usize, usize),
    pub tone_hz: (f64, f64),
    pub bursts: (usize, usize),
    /// Burst noise level relative to the strongest tone amplitude.
    pub burst_level: f64,
}

impl Default for HamParams {
    fn default() -> Self {
        HamParams {
            peak_dbfs: (-22.0, -18.0),
            tones: (2, 4),
            tone_hz: (300.0, 3400.0),
            bursts: (1, 3),
            burst_level: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClip {
    pub call_id: String,
    pub label: Label,
    pub samples: Vec<i16>,
    /// Tone frequencies mixed into a HAM clip; empty otherwise.
    pub tones_hz: Vec<f64>,
}

fn clip_rng(seed: u64, stream: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | index as u64);
    rng
}

fn dbfs_to_amplitude(dbfs: f64) -> f64 {
    FULL_SCALE * 10f64.powf(dbfs / 20.0)
}

/// Integer peak amplitude drawn from a dBFS range, kept inside the range
/// after rounding.
fn draw_peak(rng: &mut impl Rng, range: (f64, f64)) -> i32 {
    let lo = dbfs_to_amplitude(range.0).ceil() as i32;
    let hi = dbfs_to_amplitude(range.1).floor() as i32;
    let target = dbfs_to_amplitude(rng.random_range(range.0..=range.1)).round() as i32;
    target.clamp(lo, hi)
}

fn to_pcm(value: f64, limit: i32) -> i16 {
    let v = value.round() as i32;
    let v = v.clamp(-limit, limit);
    assert!(
        (i32::from(i16::MIN)..=i32::from(i16::MAX)).contains(&v),
        "synthetic sample {v} outside 16-bit range"
    );
    v as i16
}

fn deadair_clip(seed: u64, index: usize, p: &DeadAirParams) -> SynthClip {
    let mut rng = clip_rng(seed, DEADAIR_STREAM, index);
    let peak = draw_peak(&mut rng, p.peak_dbfs);
    let target_rms = dbfs_to_amplitude(rng.random_range(p.noise_rms_dbfs.0..=p.noise_rms_dbfs.1));

    let mut state = 0.0;
    let noise: Vec<f64> = (0..CLIP_LEN)
        .map(|_| {
            let white: f64 = rng.sample(StandardNormal);
            state = p.lowpass_pole * state + white;
            state
        })
        .collect();
    let rms = (noise.iter().map(|v| v * v).sum::<f64>() / CLIP_LEN as f64).sqrt();
    let gain = target_rms / rms;
    let mut samples: Vec<i16> = noise.iter().map(|v| to_pcm(v * gain, peak - 1)).collect();

    let clicks = rng.random_range(p.clicks.0..=p.clicks.1).max(1);
    for _ in 0..clicks {
        let at = rng.random_range(0..CLIP_LEN);
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        samples[at] = (sign * peak) as i16;
    }
    SynthClip {
        call_id: format!("deadair-{index:05}"),
        label: Label::Spam,
        samples,
        tones_hz: Vec::new(),
    }
}

fn ham_clip(seed: u64, index: usize, p: &HamParams) -> SynthClip {
    let mut rng = clip_rng(seed, HAM_STREAM, index);
    let peak = draw_peak(&mut rng, p.peak_dbfs);
    let rate = f64::from(SAMPLE_RATE);

    let n_tones = rng.random_range(p.tones.0..=p.tones.1);
    let tones: Vec<(f64, f64, f64)> = (0..n_tones)
        .map(|_| {
            (
                rng.random_range(p.tone_hz.0..=p.tone_hz.1),
                rng.random_range(0.3..=1.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let mut signal: Vec<f64> = (0..CLIP_LEN)
        .map(|n| {
            let t = n as f64 / rate;
            tones
                .iter()
                .map(|&(f, a, phi)| a * (2.0 * PI * f * t + phi).sin())
                .sum()
        })
        .collect();

    let loudest = tones.iter().fold(0.0f64, |m, t| m.max(t.1));
    let n_bursts = rng.random_range(p.bursts.0..=p.bursts.1);
    for _ in 0..n_bursts {
        let len = rng.random_range(800..=3200usize);
        let start = rng.random_range(0..CLIP_LEN - len);
        for k in 0..len {
            let envelope = 0.5 * (1.0 - (2.0 * PI * k as f64 / len as f64).cos());
            let white: f64 = rng.sample(StandardNormal);
            signal[start + k] += p.burst_level * loudest * envelope * white;
        }
    }

    let max = signal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = f64::from(peak) / max;
    let samples = signal.iter().map(|v| to_pcm(v * gain, peak)).collect();
    SynthClip {
        call_id: format!("ham-{index:05}"),
        label: Label::Ham,
        samples,
        tones_hz: tones.iter().map(|t| t.0).collect(),
    }
}

pub fn gen_deadair(seed: u64, count: usize, params: &DeadAirParams) -> Vec<SynthClip> {
    (0..count)
        .into_par_iter()
        .map(|i| deadair_clip(seed, i, params))
        .collect()
}

pub fn gen_ham(seed: u64, count: usize, params: &HamParams) -> Vec<SynthClip> {
    (0..count)
        .into_par_iter()
        .map(|i| ham_clip(seed, i, params))
        .collect()
}

pub fn gen_digital_silence(count: usize, label: Label) -> Vec<SynthClip> {
    (0..count)
        .map(|i| SynthClip {
            call_id: format!("silence-{i:05}"),
            label,
            samples: vec![0; CLIP_LEN],
            tones_hz: Vec::new(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub ham_count: usize,
    pub deadair_count: usize,
    pub silence_count: usize,
    pub silence_label: Label,
    pub deadair: DeadAirParams,
    pub ham: HamParams,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 0,
            ham_count: 1500,
            deadair_count: 256,
            silence_count: 0,
            silence_label: Label::Spam,
            deadair: DeadAirParams::default(),
            ham: HamParams::default(),
        }
    }
}

/// All clips of a corpus, ordered by call id.
pub fn generate_corpus(cfg: &CorpusConfig) -> Vec<SynthClip> {
    let mut clips = gen_deadair(cfg.seed, cfg.deadair_count, &cfg.deadair);
    clips.extend(gen_ham(cfg.seed, cfg.ham_count, &cfg.ham));
    clips.extend(gen_digital_silence(cfg.silence_count, cfg.silence_label));
    clips.sort_by(|a, b| a.call_id.cmp(&b.call_id));
    clips
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub call_id: String,
    pub label: Label,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub config: CorpusConfig,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl CorpusManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Regenerates the clips this manifest describes.
    pub fn regenerate(&self) -> Vec<SynthClip> {
        generate_corpus(&self.config)
    }

    pub fn label_of(&self, call_id: &str) -> Option<Label> {
        self.files
            .iter()
            .find(|e| e.call_id == call_id)
            .map(|e| e.label)
    }
}

/// Writes every clip as PCM-16 WAV plus `manifest.json` into `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, cfg: &CorpusConfig) -> Result<CorpusManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let clips = generate_corpus(cfg);
    let files = clips
        .par_iter()
        .map(|clip| {
            let name = PathBuf::from(format!("{}.wav", clip.call_id));
            let out = BufWriter::new(File::create(dir.join(&name))?);
            wav::write_wav_pcm16(out, &clip.samples)?;
            Ok(ManifestEntry {
                call_id: clip.call_id.clone(),
                label: clip.label,
                path: name,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = CorpusManifest {
        config: *cfg,
        files,
    };
    fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

pub fn validate_counts(cfg: &CorpusConfig) -> Result<()> {
    if cfg.ham_count + cfg.deadair_count + cfg.silence_count == 0 {
        return Err(Error::InvalidParameter("corpus would be empty".into()));
    }
    Ok(())
}
