use std::f64::consts::TAU;

use super::TimeSignal;
use crate::{Error, Result};

/// Number of harmonic partials in a theremin tone.
pub const PARTIALS: usize = 8;
/// Amplitude of the fundamental.
pub const TONE_GAIN: f64 = 0.4;
/// Amplitude ratio between consecutive partials.
pub const TONE_RATIO: f64 = 0.25;

/// Synthesizes a theremin tone of `duration` seconds at base frequency `f`.
///
/// `x[n] = Σ_{i<8} 0.4·4^(-i)·sin(2π·f·(i+1)·n/fs)`. The sample count is
/// `round(duration·fs)`, which gives 1103 samples for 50 ms at 22.05 kHz.
pub fn synth_tone(f: f64, duration: f64, sample_rate: f64) -> Result<TimeSignal> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidSignal(format!(
            "tone duration must be positive, got {duration}"
        )));
    }
    let n = (duration * sample_rate).round() as usize;
    synth_tone_len(f, n.max(1), sample_rate)
}

/// Same as [`synth_tone`] with an explicit sample count.
pub fn synth_tone_len(f: f64, len: usize, sample_rate: f64) -> Result<TimeSignal> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::InvalidSignal(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidPitch(format!(
            "frequency must be positive, got {f}"
        )));
    }
    let top = f * PARTIALS as f64;
    if top >= sample_rate / 2.0 {
        return Err(Error::InvalidPitch(format!(
            "partial {PARTIALS} of {f:.2} Hz ({top:.1} Hz) aliases at sample rate {sample_rate}"
        )));
    }
    if len == 0 {
        return Err(Error::InvalidSignal(
            "tone needs at least one sample".into(),
        ));
    }

    let mut samples = vec![0.0; len];
    let mut amp = TONE_GAIN;
    for i in 0..PARTIALS {
        let w = TAU * f * (i + 1) as f64 / sample_rate;
        for (n, s) in samples.iter_mut().enumerate() {
            *s += amp * (w * n as f64).sin();
        }
        amp *= TONE_RATIO;
    }
    TimeSignal::new(samples, sample_rate)
}

/// Renders one tone per step back to back, keeping every partial's phase
/// continuous across frequency changes. Step `k` covers samples
/// `round(k·step·fs)..round((k+1)·step·fs)`, so the total length is exactly
/// `round(n·step·fs)`.
pub fn synth_sequence(freqs: &[f64], step_seconds: f64, sample_rate: f64) -> Result<TimeSignal> {
    if freqs.is_empty() {
        return Err(Error::InvalidSignal("no steps to render".into()));
    }
    if !(step_seconds > 0.0 && step_seconds.is_finite()) {
        return Err(Error::InvalidSignal(format!(
            "step duration must be positive, got {step_seconds}"
        )));
    }
    for &f in freqs {
        // Validates the pitch against the sample rate.
        synth_tone_len(f, 1, sample_rate)?;
    }
    let edge = |k: usize| (k as f64 * step_seconds * sample_rate).round() as usize;
    let mut samples = vec![0.0; edge(freqs.len())];
    let mut phase = [0.0_f64; PARTIALS];
    for (k, &f) in freqs.iter().enumerate() {
        for s in &mut samples[edge(k)..edge(k + 1)] {
            let mut amp = TONE_GAIN;
            for (i, ph) in phase.iter_mut().enumerate() {
                *s += amp * ph.sin();
                *ph = (*ph + TAU * f * (i + 1) as f64 / sample_rate) % TAU;
                amp *= TONE_RATIO;
            }
        }
    }
    TimeSignal::new(samples, sample_rate)
}
