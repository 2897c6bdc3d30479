use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic (DFT-even) Hann window: `w[l] = 0.5 * (1 - cos(2πl/W))`.
pub fn hann_window(size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::InvalidConfig(format!(
            "window size must be at least 2, got {size}"
        )));
    }
    Ok((0..size)
        .map(|l| 0.5 * (1.0 - (2.0 * PI * l as f64 / size as f64).cos()))
        .collect())
}
