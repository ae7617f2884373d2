//! 16-bit PCM mono RIFF/WAVE encoding.

use std::io::Write;
use std::path::Path;

use super::TimeSignal;
use crate::{Error, Result};

const HEADER_LEN: usize = 44;

/// Encodes a signal as a 16-bit little-endian mono WAV file in memory.
///
/// Samples are clipped to [-1, 1] and scaled by 32767.
pub fn encode_pcm16(sig: &TimeSignal) -> Vec<u8> {
    let rate = sig.sample_rate.round() as u32;
    let data_len = (sig.len() * 2) as u32;
    let mut out = Vec::with_capacity(HEADER_LEN + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in &sig.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_pcm16(path: impl AsRef<Path>, sig: &TimeSignal) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_pcm16(sig))
        .map_err(|e| Error::io(path, e))
}

/// Decodes the files produced by [`encode_pcm16`] (canonical 44-byte header).
pub fn decode_pcm16(bytes: &[u8]) -> Result<TimeSignal> {
    let bad = |m: &str| Error::Format(format!("wav: {m}"));
    if bytes.len() < HEADER_LEN || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("missing RIFF/WAVE header"));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    if &bytes[12..16] != b"fmt " || u16_at(20) != 1 || u16_at(22) != 1 || u16_at(34) != 16 {
        return Err(bad("only 16-bit PCM mono is supported"));
    }
    if &bytes[36..40] != b"data" {
        return Err(bad("data chunk must follow fmt"));
    }
    let rate = u32_at(24) as f64;
    let len = u32_at(40) as usize;
    let data = bytes
        .get(HEADER_LEN..HEADER_LEN + len)
        .ok_or_else(|| bad("truncated data chunk"))?;
    let samples = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32767.0)
        .collect();
    TimeSignal::new(samples, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{synth_tone, SAMPLE_RATE};

    #[test]
    fn header_layout() {
        let t = synth_tone(440.0, 0.05, SAMPLE_RATE).unwrap();
        let bytes = encode_pcm16(&t);
        assert_eq!(bytes.len(), 44 + 2 * 1103);
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(
            u32::from_le_bytes(bytes[4..8].try_into().unwrap()),
            36 + 2206
        );
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 22050);
        assert_eq!(u32::from_le_bytes(bytes[28..32].try_into().unwrap()), 44100);
    }

    #[test]
    fn round_trip_within_quantization() {
        let t = synth_tone(659.26, 0.05, SAMPLE_RATE).unwrap();
        let back = decode_pcm16(&encode_pcm16(&t)).unwrap();
        assert_eq!(back.sample_rate, SAMPLE_RATE);
        for (a, b) in t.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() <= 0.5 / 32767.0 + 1e-12);
        }
    }

    #[test]
    fn clips_out_of_range() {
        let t = TimeSignal::new(vec![2.0, -3.0], SAMPLE_RATE).unwrap();
        let back = decode_pcm16(&encode_pcm16(&t)).unwrap();
        assert_eq!(back.samples, vec![1.0, -1.0]);
    }
}
