//! Minimal RIFF/WAVE reader and writer for 8 kHz mono telephony audio.
//!
//! Only linear PCM-16 and G.711 μ-law payloads are accepted. Anything else is
//! rejected rather than converted; there is no resampling or downmixing.

use std::io::{Read, Write};

use super::{mulaw, normalize_clip, AudioClip, SAMPLE_RATE};
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_MULAW: u16 = 0x0007;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    MuLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavFormat {
    pub encoding: WavEncoding,
    pub channels: u16,
    pub sample_rate: u32,
}

fn u16_le(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn u32_le(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

fn parse_fmt(chunk: &[u8]) -> Result<WavFormat> {
    if chunk.len() < 16 {
        return Err(Error::MalformedWav(format!(
            "fmt chunk is {} bytes, need at least 16",
            chunk.len()
        )));
    }
    let mut format_tag = u16_le(&chunk[0..2]);
    let channels = u16_le(&chunk[2..4]);
    let sample_rate = u32_le(&chunk[4..8]);
    let bits_per_sample = u16_le(&chunk[14..16]);

    if format_tag == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the sub-format GUID whose
        // first two bytes carry the plain format tag
        if chunk.len() < 26 {
            return Err(Error::MalformedWav(
                "WAVE_FORMAT_EXTENSIBLE fmt chunk too short".into(),
            ));
        }
        format_tag = u16_le(&chunk[24..26]);
    }

    let encoding = match (format_tag, bits_per_sample) {
        (FORMAT_PCM, 16) => WavEncoding::Pcm16,
        (FORMAT_MULAW, 8) => WavEncoding::MuLaw,
        _ => {
            return Err(Error::UnsupportedCodec {
                format_tag,
                bits_per_sample,
            })
        }
    };
    if channels != 1 {
        return Err(Error::UnsupportedChannels(channels));
    }
    if sample_rate != SAMPLE_RATE {
        return Err(Error::UnsupportedSampleRate(sample_rate));
    }
    Ok(WavFormat {
        encoding,
        channels,
        sample_rate,
    })
}

/// Parses a WAV image held in memory and returns its format and the decoded
/// linear PCM samples (not yet normalized to clip length).
pub fn parse_wav(bytes: &[u8]) -> Result<(WavFormat, Vec<i16>)> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedWav("missing RIFF/WAVE header".into()));
    }

    let mut format = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let declared = u32_le(&bytes[pos + 4..pos + 8]) as usize;
        let body_start = pos + 8;
        let available = bytes.len() - body_start;

        match id {
            b"fmt " => {
                if declared > available {
                    return Err(Error::MalformedWav("truncated fmt chunk".into()));
                }
                format = Some(parse_fmt(&bytes[body_start..body_start + declared])?);
            }
            b"data" => {
                let format = format
                    .ok_or_else(|| Error::MalformedWav("data chunk precedes fmt chunk".into()))?;
                // streaming writers often leave the size field unset
                let len = declared.min(available);
                let body = &bytes[body_start..body_start + len];
                let samples = match format.encoding {
                    WavEncoding::Pcm16 => body
                        .chunks_exact(2)
                        .map(|b| i16::from_le_bytes([b[0], b[1]]))
                        .collect::<Vec<_>>(),
                    WavEncoding::MuLaw => body.iter().map(|&c| mulaw::decode_sample(c)).collect(),
                };
                if samples.is_empty() {
                    return Err(Error::EmptyAudio);
                }
                return Ok((format, samples));
            }
            _ => {}
        }
        pos = body_start
            .saturating_add(declared)
            .saturating_add(declared & 1);
    }

    match format {
        None => Err(Error::MalformedWav("no fmt chunk".into())),
        Some(_) => Err(Error::MalformedWav("no data chunk".into())),
    }
}

/// Reads a WAV stream and normalizes it to a two-second clip.
pub fn read_wav<R: Read>(mut reader: R) -> Result<AudioClip> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let (_, samples) = parse_wav(&bytes)?;
    normalize_clip(&samples)
}

/// Writes mono 8 kHz PCM-16 samples as a canonical 44-byte-header WAV.
pub fn write_wav_pcm16<W: Write>(mut writer: W, samples: &[i16]) -> Result<()> {
    let data_len = (samples.len() * 2) as u32;
    let mut header = Vec::with_capacity(44);
    header.extend_from_slice(b"RIFF");
    header.extend_from_slice(&(36 + data_len).to_le_bytes());
    header.extend_from_slice(b"WAVE");
    header.extend_from_slice(b"fmt ");
    header.extend_from_slice(&16u32.to_le_bytes());
    header.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    header.extend_from_slice(&1u16.to_le_bytes());
    header.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
    header.extend_from_slice(&(SAMPLE_RATE * 2).to_le_bytes());
    header.extend_from_slice(&2u16.to_le_bytes());
    header.extend_from_slice(&16u16.to_le_bytes());
    header.extend_from_slice(b"data");
    header.extend_from_slice(&data_len.to_le_bytes());
    writer.write_all(&header)?;

    let mut body = Vec::with_capacity(samples.len() * 2);
    for s in samples {
        body.extend_from_slice(&s.to_le_bytes());
    }
    writer.write_all(&body)?;
    Ok(())
}

/// Writes μ-law codes as a WAV with format tag 7.
pub fn write_wav_mulaw<W: Write>(mut writer: W, codes: &[u8]) -> Result<()> {
    let data_len = codes.len() as u32;
    let mut header = Vec::with_capacity(46);
    header.extend_from_slice(b"RIFF");
    header.extend_from_slice(&(38 + data_len + (data_len & 1)).to_le_bytes());
    header.extend_from_slice(b"WAVE");
    header.extend_from_slice(b"fmt ");
    header.extend_from_slice(&18u32.to_le_bytes());
    header.extend_from_slice(&FORMAT_MULAW.to_le_bytes());
    header.extend_from_slice(&1u16.to_le_bytes());
    header.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
    header.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
    header.extend_from_slice(&1u16.to_le_bytes());
    header.extend_from_slice(&8u16.to_le_bytes());
    header.extend_from_slice(&0u16.to_le_bytes());
    header.extend_from_slice(b"data");
    header.extend_from_slice(&data_len.to_le_bytes());
    writer.write_all(&header)?;
    writer.write_all(codes)?;
    if data_len & 1 == 1 {
        writer.write_all(&[0])?;
    }
    Ok(())
}
