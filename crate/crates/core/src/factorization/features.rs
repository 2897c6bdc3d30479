use serde::{Deserialize, Serialize};

use super::svd::svd;
use crate::dsp::Spectrogram;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_TOP_BASES: usize = 3;
/// Largest singular value below which a spectrogram counts as degenerate.
pub const DEGENERATE_SIGMA: f64 = 1e-12;

/// Leading left singular vectors of a spectrogram, concatenated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub degenerate: bool,
}

impl FeatureVector {
    pub fn degenerate(len: usize) -> Self {
        FeatureVector {
            values: vec![0.0; len],
            degenerate: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The `i`-th basis block, `block_len` values long.
    pub fn block(&self, i: usize, block_len: usize) -> &[f64] {
        &self.values[i * block_len..(i + 1) * block_len]
    }
}

/// Sign-normalized `U[:, 0..top_bases]` of a magnitude matrix, flattened
/// column after column.
pub fn extract_features_from_matrix(x: &Matrix, top_bases: usize) -> Result<FeatureVector> {
    let (rows, cols) = x.shape();
    if top_bases == 0 {
        return Err(Error::InvalidParameter(
            "top_bases must be at least 1".into(),
        ));
    }
    if cols < top_bases {
        return Err(Error::TooFewFrames {
            frames: cols,
            required: top_bases,
        });
    }
    if rows < top_bases {
        return Err(Error::InvalidParameter(format!(
            "{rows} frequency bins cannot hold {top_bases} orthogonal bases"
        )));
    }
    let len = rows * top_bases;
    if x.max_abs() == 0.0 {
        return Ok(FeatureVector::degenerate(len));
    }
    let factors = svd(x);
    if factors.singular_values[0] < DEGENERATE_SIGMA {
        return Ok(FeatureVector::degenerate(len));
    }
    let mut values = Vec::with_capacity(len);
    for c in 0..top_bases {
        values.extend(factors.u.column(c));
    }
    Ok(FeatureVector {
        values,
        degenerate: false,
    })
}

pub fn extract_features(spec: &Spectrogram, top_bases: usize) -> Result<FeatureVector> {
    extract_features_from_matrix(spec.magnitudes(), top_bases)
}
