//! Short-time Fourier analysis: periodic Hann window, radix-2 FFT and the
//! magnitude spectrogram.

pub mod fft;
pub mod stft;
pub mod window;

pub use fft::{fft, FftPlan};
pub use stft::{pcm_to_unit, stft, Spectrogram, StftConfig, StftPlan, WindowKind};
pub use window::hann_window;
