use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::FftPlan;
use super::window::hann_window;
use crate::audio::{FULL_SCALE, SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window_size: usize,
    pub hop: usize,
    #[serde(default)]
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            window_size: 256,
            hop: 128,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn new(window_size: usize, hop: usize) -> Result<Self> {
        let cfg = StftConfig {
            window_size,
            hop,
            window: WindowKind::Hann,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_size < 2 || !self.window_size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "window size {} must be a power of two >= 2",
                self.window_size
            )));
        }
        if self.hop == 0 || self.hop > self.window_size {
            return Err(Error::InvalidConfig(format!(
                "hop {} must satisfy 0 < hop <= {}",
                self.hop, self.window_size
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.window_size / 2 + 1
    }

    /// `⌊(len − W)/h⌋ + 1`, or zero when the signal is shorter than a window.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.window_size {
            0
        } else {
            (len - self.window_size) / self.hop + 1
        }
    }
}

/// Magnitude spectrogram, frequency bins × time frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    magnitudes: Matrix,
    config: StftConfig,
}

impl Spectrogram {
    pub fn new(magnitudes: Matrix, config: StftConfig) -> Self {
        Spectrogram { magnitudes, config }
    }

    pub fn magnitudes(&self) -> &Matrix {
        &self.magnitudes
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn bins(&self) -> usize {
        self.magnitudes.rows()
    }

    pub fn frames(&self) -> usize {
        self.magnitudes.cols()
    }

    pub fn bin_hz(&self, bin: usize) -> f64 {
        bin as f64 * f64::from(SAMPLE_RATE) / self.config.window_size as f64
    }

    pub fn frame_seconds(&self, frame: usize) -> f64 {
        (frame * self.config.hop) as f64 / f64::from(SAMPLE_RATE)
    }

    /// Index of the strongest bin in one frame (lowest index on ties).
    pub fn argmax_bin(&self, frame: usize) -> usize {
        let mut best = 0;
        for bin in 1..self.bins() {
            if self.magnitudes[(bin, frame)] > self.magnitudes[(best, frame)] {
                best = bin;
            }
        }
        best
    }

    /// Writes the matrix as CSV: one row per frequency bin, one column per frame.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["freq_hz".to_string()];
        header.extend((0..self.frames()).map(|n| format!("t{n}")));
        w.write_record(&header)?;
        for bin in 0..self.bins() {
            let mut record = vec![format!("{}", self.bin_hz(bin))];
            record.extend(self.magnitudes.row(bin).iter().map(|v| format!("{v:e}")));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long-format CSV (`frame,time_s,bin,freq_hz,magnitude`) for plotting tools.
    pub fn write_long_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["frame", "time_s", "bin", "freq_hz", "magnitude"])?;
        for frame in 0..self.frames() {
            for bin in 0..self.bins() {
                w.write_record([
                    frame.to_string(),
                    self.frame_seconds(frame).to_string(),
                    bin.to_string(),
                    self.bin_hz(bin).to_string(),
                    format!("{:e}", self.magnitudes[(bin, frame)]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Window and FFT plan for one [`StftConfig`]; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct StftPlan {
    config: StftConfig,
    window: Vec<f64>,
    fft: FftPlan,
}

impl StftPlan {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        Ok(StftPlan {
            config,
            window: hann_window(config.window_size)?,
            fft: FftPlan::new(config.window_size)?,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    /// Complex STFT of a real signal, bins 0..=W/2 for each uncentered frame
    /// starting at `n·h`. Returned as `[frame][bin]`.
    pub fn complex(&self, signal: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        let w = self.config.window_size;
        let frames = self.config.frame_count(signal.len());
        if frames == 0 {
            return Err(Error::SignalTooShort {
                len: signal.len(),
                window: w,
            });
        }
        let mut buf = vec![Complex64::default(); w];
        let mut out = Vec::with_capacity(frames);
        for n in 0..frames {
            let segment = &signal[n * self.config.hop..n * self.config.hop + w];
            for ((b, &x), &win) in buf.iter_mut().zip(segment).zip(&self.window) {
                *b = Complex64::new(x * win, 0.0);
            }
            self.fft.process(&mut buf)?;
            out.push(buf[..self.config.bins()].to_vec());
        }
        Ok(out)
    }

    /// Magnitude spectrogram of a real-valued signal.
    pub fn magnitudes(&self, signal: &[f64]) -> Result<Spectrogram> {
        let frames = self.complex(signal)?;
        let bins = self.config.bins();
        let mut mags = Matrix::zeros(bins, frames.len());
        for (n, frame) in frames.iter().enumerate() {
            for (k, z) in frame.iter().enumerate() {
                mags[(k, n)] = z.norm();
            }
        }
        Ok(Spectrogram::new(mags, self.config))
    }

    /// Spectrogram of 16-bit PCM, scaled to [−1, 1) by the full-scale reference.
    pub fn spectrogram(&self, samples: &[i16]) -> Result<Spectrogram> {
        self.magnitudes(&pcm_to_unit(samples))
    }
}

pub fn pcm_to_unit(samples: &[i16]) -> Vec<f64> {
    samples.iter().map(|&s| f64::from(s) / FULL_SCALE).collect()
}

/// One-shot STFT magnitude spectrogram of a PCM clip.
pub fn stft(samples: &[i16], config: StftConfig) -> Result<Spectrogram> {
    StftPlan::new(config)?.spectrogram(samples)
}
