//! Iterative radix-2 decimation-in-time FFT with a reusable plan.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed twiddle factors and bit-reversal permutation for one size.
/// Immutable once built, so a plan can be shared across threads.
#[derive(Debug, Clone)]
pub struct FftPlan {
    size: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl FftPlan {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(size));
        }
        let twiddles = (0..size / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / size as f64))
            .collect();
        let bits = size.trailing_zeros();
        let bit_reverse = (0..size)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Ok(FftPlan {
            size,
            twiddles,
            bit_reverse,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place forward transform, unnormalized.
    pub fn process(&self, buf: &mut [Complex64]) -> Result<()> {
        let n = self.size;
        if buf.len() != n {
            return Err(Error::InvalidConfig(format!(
                "buffer of length {} passed to size-{n} FFT plan",
                buf.len()
            )));
        }
        for i in 0..n {
            let j = self.bit_reverse[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let t = self.twiddles[k * stride] * buf[start + k + half];
                    let u = buf[start + k];
                    buf[start + k] = u + t;
                    buf[start + k + half] = u - t;
                }
            }
            half *= 2;
        }
        Ok(())
    }
}

/// Forward DFT `X[k] = Σ x[l]·e^(−2πi·lk/W)` of a power-of-two-length input.
pub fn fft(input: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(input.len())?;
    let mut buf = input.to_vec();
    plan.process(&mut buf)?;
    Ok(buf)
}
