//! FFT and STFT checked against a brute-force DFT.

use std::f64::consts::PI;

use deadair_core::audio::CLIP_LEN;
use deadair_core::dsp::{fft, hann_window, stft, StftConfig, StftPlan};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// O(W²) DFT with exactly reduced twiddle angles.
fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(l, &v)| {
                    let angle = -2.0 * PI * ((l * k) % n) as f64 / n as f64;
                    v * Complex64::new(angle.cos(), angle.sin())
                })
                .sum()
        })
        .collect()
}

fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    diff / scale.max(f64::MIN_POSITIVE)
}

#[test]
fn random_length_64_matches_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..50 {
        let x: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        assert!(relative_error(&fft(&x).unwrap(), &naive_dft(&x)) < 1e-9);
    }
}

proptest! {
    #[test]
    fn fft_matches_dft(log in 0u32..9, seed: u64) {
        let n = 1usize << log;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)))
            .collect();
        prop_assert!(relative_error(&fft(&x).unwrap(), &naive_dft(&x)) < 1e-9);
    }

    #[test]
    fn magnitudes_ignore_sign_and_scale(seed: u64, c in -8.0f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..1024).map(|_| rng.random_range(-0.5..0.5)).collect();
        let plan = StftPlan::new(StftConfig::default()).unwrap();
        let base = plan.magnitudes(&x).unwrap();
        let flipped = plan.magnitudes(&x.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        let scaled = plan.magnitudes(&x.iter().map(|v| c * v).collect::<Vec<_>>()).unwrap();
        for ((a, b), s) in base.magnitudes().as_slice().iter()
            .zip(flipped.magnitudes().as_slice())
            .zip(scaled.magnitudes().as_slice())
        {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            prop_assert!((s - c.abs() * a).abs() <= 1e-9 * (c.abs() * a).max(1e-12));
            prop_assert!(*a >= 0.0);
        }
    }

    #[test]
    fn frame_count_formula(log_w in 1u32..9, hop_frac in 0.01f64..=1.0, extra in 0usize..3000) {
        let w = 1usize << log_w;
        let hop = ((w as f64 * hop_frac).ceil() as usize).clamp(1, w);
        let len = w + extra;
        let cfg = StftConfig::new(w, hop).unwrap();
        let x = vec![0.25; len];
        let spec = StftPlan::new(cfg).unwrap().magnitudes(&x).unwrap();
        prop_assert_eq!(spec.frames(), (len - w) / hop + 1);
        prop_assert_eq!(spec.bins(), w / 2 + 1);
    }

    #[test]
    fn parseval_per_frame(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..2048).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = StftConfig::default();
        let w = hann_window(cfg.window_size).unwrap();
        let plan = StftPlan::new(cfg).unwrap();
        let frames = plan.complex(&x).unwrap();
        for (n, half) in frames.iter().enumerate() {
            // rebuild the full spectrum from the retained half (real input ⇒ Hermitian)
            let mut energy = 0.0;
            for (k, z) in half.iter().enumerate() {
                let mult = if k == 0 || k == cfg.window_size / 2 { 1.0 } else { 2.0 };
                energy += mult * z.norm_sqr();
            }
            let time: f64 = (0..cfg.window_size)
                .map(|l| (w[l] * x[n * cfg.hop + l]).powi(2))
                .sum();
            let expected = cfg.window_size as f64 * time;
            prop_assert!((energy - expected).abs() <= 1e-6 * expected);
        }
    }
}

#[test]
fn thousand_hz_tone_peaks_at_bin_32() {
    let pcm: Vec<i16> = (0..CLIP_LEN)
        .map(|n| (32767.0 * (2.0 * PI * 1000.0 * n as f64 / 8000.0).sin()).round() as i16)
        .collect();
    let spec = stft(&pcm, StftConfig::default()).unwrap();
    let window = hann_window(256).unwrap();
    for frame in 1..spec.frames() - 1 {
        assert_eq!(spec.argmax_bin(frame), 32, "frame {frame}");
        // cross-check the frame against a direct DFT of the windowed segment
        let segment: Vec<Complex64> = (0..256)
            .map(|l| Complex64::new(f64::from(pcm[frame * 128 + l]) / 32768.0 * window[l], 0.0))
            .collect();
        let direct = naive_dft(&segment);
        for (k, d) in direct.iter().take(129).enumerate() {
            assert!((d.norm() - spec.magnitudes()[(k, frame)]).abs() < 1e-9);
        }
    }
}

#[test]
fn dc_concentrates_in_bin_zero() {
    let value = 8192i16;
    let spec = stft(&vec![value; CLIP_LEN], StftConfig::default()).unwrap();
    let expected = (f64::from(value) / 32768.0) * 128.0;
    for frame in 1..spec.frames() - 1 {
        assert!((spec.magnitudes()[(0, frame)] - expected).abs() < 1e-6);
        assert_eq!(spec.argmax_bin(frame), 0);
    }
}
