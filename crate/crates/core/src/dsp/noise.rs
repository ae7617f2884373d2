use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TimeSignal;
use crate::{Error, Result};

/// Number of octave rows in the Voss–McCartney generator.
pub const PINK_ROWS: usize = 16;

/// Seeded pink noise with zero mean and unit variance.
///
/// Voss–McCartney: row `k` is refreshed every `2^(k+1)` samples, staggered by
/// the trailing-zero count of the sample index, and a white source is added on
/// every sample to cover the top octave. The sample rate is only recorded;
/// the generator itself is rate-agnostic.
pub fn pink_noise(len: usize, seed: u64, sample_rate: f64) -> Result<TimeSignal> {
    if len == 0 {
        return Err(Error::InvalidSignal(
            "pink noise length must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = [0.0f64; PINK_ROWS];
    for r in rows.iter_mut() {
        *r = rng.random_range(-1.0..1.0);
    }
    let mut running: f64 = rows.iter().sum();

    let mut samples = Vec::with_capacity(len);
    for n in 0..len {
        if n > 0 {
            let k = n.trailing_zeros() as usize;
            if k < PINK_ROWS {
                let fresh = rng.random_range(-1.0..1.0);
                running += fresh - rows[k];
                rows[k] = fresh;
            }
        }
        let white: f64 = rng.random_range(-1.0..1.0);
        samples.push(running + white);
    }

    let n = len as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 0.0 };
    for s in samples.iter_mut() {
        *s = (*s - mean) * scale;
    }
    TimeSignal::new(samples, sample_rate)
}

/// Mean square of the samples.
pub fn mean_power(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}

/// `10·log10(P_signal / P_noise)`.
pub fn snr_db(signal: &[f64], noise: &[f64]) -> f64 {
    10.0 * (mean_power(signal) / mean_power(noise)).log10()
}

/// Adds `noise` to `signal`, rescaled so the mixture has the requested SNR.
pub fn mix_snr(signal: &TimeSignal, noise: &TimeSignal, snr_db: f64) -> Result<TimeSignal> {
    if signal.len() != noise.len() {
        return Err(Error::InvalidSignal(format!(
            "signal has {} samples but noise has {}",
            signal.len(),
            noise.len()
        )));
    }
    if signal.sample_rate != noise.sample_rate {
        return Err(Error::InvalidSignal(format!(
            "sample rates differ: {} vs {}",
            signal.sample_rate, noise.sample_rate
        )));
    }
    if !snr_db.is_finite() {
        return Err(Error::UndefinedSnr("requested SNR is not finite"));
    }
    let ps = mean_power(&signal.samples);
    let pn = mean_power(&noise.samples);
    if ps <= 0.0 {
        return Err(Error::UndefinedSnr("signal has zero power"));
    }
    if pn <= 0.0 {
        return Err(Error::UndefinedSnr("noise has zero power"));
    }
    let gain = (ps / (pn * 10f64.powf(snr_db / 10.0))).sqrt();
    let samples = signal
        .samples
        .iter()
        .zip(&noise.samples)
        .map(|(s, n)| s + gain * n)
        .collect();
    TimeSignal::new(samples, signal.sample_rate)
}
