//! G.711 μ-law companding.
//!
//! Codes are stored bit-complemented on the wire. After complementing, bit 7
//! is the sign, bits 4..7 the segment (exponent) and bits 0..4 the mantissa.
//! Magnitudes are offset by a bias of 0x84 (132) so that every segment starts
//! on a power of two.

use crate::error::{Error, Result};

const BIAS: i32 = 0x84;
const CLIP: i32 = 32635;

/// Expands a single μ-law code to linear 16-bit PCM.
#[inline]
pub fn decode_sample(code: u8) -> i16 {
    let code = !code;
    let exponent = i32::from((code >> 4) & 0x07);
    let mantissa = i32::from(code & 0x0F);
    let magnitude = (((mantissa << 3) + BIAS) << exponent) - BIAS;
    if code & 0x80 != 0 {
        -magnitude as i16
    } else {
        magnitude as i16
    }
}

/// Compresses a linear 16-bit PCM sample to a μ-law code.
///
/// Linear zero maps to 0xFF; the negative-zero code 0x7F is never produced.
#[inline]
pub fn encode_sample(sample: i16) -> u8 {
    let sign: u8 = if sample < 0 { 0x80 } else { 0x00 };
    let magnitude = i32::from(sample).abs().min(CLIP) + BIAS;
    // magnitude is in [0x84, 0x7FFF], so the leading bit sits at position 7..=14
    let leading = 31 - magnitude.leading_zeros() as i32;
    let exponent = (leading - 7).clamp(0, 7);
    let mantissa = (magnitude >> (exponent + 3)) & 0x0F;
    !(sign | ((exponent as u8) << 4) | mantissa as u8)
}

/// Decodes a buffer of μ-law codes.
pub fn decode_mulaw(codes: &[u8]) -> Result<Vec<i16>> {
    if codes.is_empty() {
        return Err(Error::EmptyAudio);
    }
    Ok(codes.iter().map(|&c| decode_sample(c)).collect())
}

pub fn encode_mulaw(samples: &[i16]) -> Vec<u8> {
    samples.iter().map(|&s| encode_sample(s)).collect()
}
