//! Minimal RIFF/WAV PCM codec.
//!
//! Reads 8/16/24/32-bit integer PCM and 32/64-bit IEEE float, any channel
//! count (averaged to mono). Writes mono 16-bit PCM or 32-bit float.

use std::fs;
use std::path::Path;

use super::AudioSignal;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy)]
struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn wav_err(chunk: &str, reason: impl Into<String>) -> Error {
    Error::Wav {
        chunk: chunk.to_string(),
        reason: reason.into(),
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub fn load_audio(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes)
}

pub fn decode_wav(bytes: &[u8]) -> Result<AudioSignal> {
    if bytes.len() < 12 {
        return Err(wav_err("RIFF", "truncated header"));
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(wav_err("RIFF", "not a RIFF/WAVE container"));
    }

    let mut format: Option<Format> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let name = String::from_utf8_lossy(id).into_owned();
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body_start + size > bytes.len() {
                    return Err(wav_err(&name, "truncated format chunk"));
                }
                let body = &bytes[body_start..body_start + size];
                let mut tag = u16_at(body, 0);
                let channels = u16_at(body, 2);
                let sample_rate = u32_at(body, 4);
                let bits = u16_at(body, 14);
                if tag == FORMAT_EXTENSIBLE {
                    if size < 40 {
                        return Err(wav_err(&name, "truncated WAVE_FORMAT_EXTENSIBLE"));
                    }
                    tag = u16_at(body, 24);
                }
                if channels == 0 {
                    return Err(wav_err(&name, "zero channels"));
                }
                if sample_rate == 0 {
                    return Err(wav_err(&name, "zero sample rate"));
                }
                match (tag, bits) {
                    (FORMAT_PCM, 8 | 16 | 24 | 32) | (FORMAT_FLOAT, 32 | 64) => {}
                    _ => {
                        return Err(wav_err(
                            &name,
                            format!("unsupported codec (format tag {tag}, {bits} bits)"),
                        ))
                    }
                }
                format = Some(Format {
                    tag,
                    channels,
                    sample_rate,
                    bits,
                });
            }
            b"data" => {
                let fmt = format.ok_or_else(|| wav_err("data", "data chunk precedes fmt chunk"))?;
                // Some writers leave the size field at 0 or oversize it when streaming.
                let end = (body_start + size).min(bytes.len());
                let end = if size == 0 { bytes.len() } else { end };
                return decode_samples(&bytes[body_start..end], fmt);
            }
            _ => {}
        }
        pos = body_start + size + (size & 1);
    }
    if format.is_none() {
        Err(wav_err("fmt ", "missing format chunk"))
    } else {
        Err(wav_err("data", "missing data chunk"))
    }
}

fn decode_samples(data: &[u8], fmt: Format) -> Result<AudioSignal> {
    let width = fmt.bits as usize / 8;
    let frame = width * fmt.channels as usize;
    let n_frames = data.len() / frame;
    if n_frames == 0 {
        return Err(wav_err("data", "no complete sample frames"));
    }
    let decode_one = |b: &[u8]| -> f64 {
        match (fmt.tag, fmt.bits) {
            (FORMAT_PCM, 8) => (b[0] as f64 - 128.0) / 128.0,
            (FORMAT_PCM, 16) => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
            (FORMAT_PCM, 24) => {
                let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
                v as f64 / 8_388_608.0
            }
            (FORMAT_PCM, 32) => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0,
            (FORMAT_FLOAT, 32) => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            (FORMAT_FLOAT, 64) => f64::from_le_bytes(b[..8].try_into().unwrap()),
            _ => unreachable!("format validated in fmt chunk"),
        }
    };
    let mut samples = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let base = f * frame;
        let mut acc = 0.0;
        for c in 0..fmt.channels as usize {
            let off = base + c * width;
            acc += decode_one(&data[off..off + width]);
        }
        let v = acc / fmt.channels as f64;
        if !v.is_finite() {
            return Err(wav_err("data", format!("non-finite sample at frame {f}")));
        }
        samples.push(v.clamp(-1.0, 1.0));
    }
    AudioSignal::new(samples, fmt.sample_rate)
}

fn header(sample_rate: u32, tag: u16, bits: u16, data_len: usize) -> Vec<u8> {
    let block_align = bits / 8;
    let mut h = Vec::with_capacity(44);
    h.extend_from_slice(b"RIFF");
    h.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    h.extend_from_slice(b"WAVE");
    h.extend_from_slice(b"fmt ");
    h.extend_from_slice(&16u32.to_le_bytes());
    h.extend_from_slice(&tag.to_le_bytes());
    h.extend_from_slice(&1u16.to_le_bytes());
    h.extend_from_slice(&sample_rate.to_le_bytes());
    h.extend_from_slice(&(sample_rate * block_align as u32).to_le_bytes());
    h.extend_from_slice(&block_align.to_le_bytes());
    h.extend_from_slice(&bits.to_le_bytes());
    h.extend_from_slice(b"data");
    h.extend_from_slice(&(data_len as u32).to_le_bytes());
    h
}

/// Mono 16-bit PCM; samples are clamped to [-1, 1].
pub fn encode_wav_i16(signal: &AudioSignal) -> Vec<u8> {
    let mut out = header(signal.sample_rate(), FORMAT_PCM, 16, signal.len() * 2);
    for &s in signal.samples() {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Mono 32-bit float.
pub fn encode_wav_f32(signal: &AudioSignal) -> Vec<u8> {
    let mut out = header(signal.sample_rate(), FORMAT_FLOAT, 32, signal.len() * 4);
    for &s in signal.samples() {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    out
}

pub fn write_wav_i16(signal: &AudioSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_wav_i16(signal)).map_err(|e| Error::io(path, e))
}

pub fn write_wav_f32(signal: &AudioSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_wav_f32(signal)).map_err(|e| Error::io(path, e))
}
