//! Theremin tone synthesis, pink noise and magnitude spectra.

mod noise;
mod synth;
mod transform;
pub mod wav;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use noise::{mean_power, mix_snr, pink_noise, snr_db, PINK_ROWS};
pub use synth::{synth_sequence, synth_tone, synth_tone_len, PARTIALS, TONE_GAIN, TONE_RATIO};
pub use transform::{
    cqt_magnitude, hann, mel_filterbank, mel_scale, stft_magnitude, transform, MelFilter,
    SpectralFrontEnd,
};

/// Default simulation sample rate in Hz.
pub const SAMPLE_RATE: f64 = 22050.0;

/// Length of one environment tone in seconds.
pub const TONE_SECONDS: f64 = 0.05;

/// Number of samples in one 50 ms tone at [`SAMPLE_RATE`].
pub const TONE_SAMPLES: usize = 1103;

/// A mono block of real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl TimeSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("signal has no samples".into()));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    /// Returns a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> TimeSignal {
        TimeSignal {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Cqt,
    Stft,
    Mel,
}

impl TransformKind {
    pub const ALL: [TransformKind; 3] =
        [TransformKind::Cqt, TransformKind::Stft, TransformKind::Mel];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Cqt => "cqt",
            TransformKind::Stft => "stft",
            TransformKind::Mel => "mel",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cqt" => Ok(TransformKind::Cqt),
            "stft" => Ok(TransformKind::Stft),
            "mel" => Ok(TransformKind::Mel),
            other => Err(Error::Config(format!(
                "unknown transform {other:?} (expected cqt, stft or mel)"
            ))),
        }
    }

    /// The default configuration for this transform.
    pub fn default_config(self) -> TransformConfig {
        match self {
            TransformKind::Cqt => TransformConfig::cqt(),
            TransformKind::Stft => TransformConfig::stft(),
            TransformKind::Mel => TransformConfig::mel(),
        }
    }
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A magnitude-only frequency frame.
///
/// `bin_centers` is shared between all spectra produced by the same front end,
/// so cloning a spectrum only copies the magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<f64>,
    pub bin_centers: Arc<[f64]>,
    pub kind: TransformKind,
}

impl Spectrum {
    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    /// Index of the largest bin; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.bins)
    }

    /// Sum of absolute bin differences.
    pub fn l1_distance(&self, other: &Spectrum) -> Result<f64> {
        if self.bins.len() != other.bins.len() {
            return Err(Error::SpectrumMismatch(format!(
                "{} bins vs {} bins",
                self.bins.len(),
                other.bins.len()
            )));
        }
        Ok(l1_distance(&self.bins, &other.bins))
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Parameters of one of the three spectral front ends.
///
/// Fields that do not apply to a kind are ignored by it: `bins_per_octave` is
/// CQT-only, `fft_size` and `mel_filters` are STFT/mel-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub kind: TransformKind,
    pub n_bins: usize,
    pub f_min: f64,
    pub bins_per_octave: usize,
    pub window_len: usize,
    pub fft_size: usize,
    pub mel_filters: usize,
}

impl TransformConfig {
    /// 60 semitone bins from 220 Hz (A3), five octaves.
    pub fn cqt() -> Self {
        Self {
            kind: TransformKind::Cqt,
            n_bins: 60,
            f_min: 220.0,
            bins_per_octave: 12,
            window_len: TONE_SAMPLES,
            fft_size: 2048,
            mel_filters: 64,
        }
    }

    /// One Hann-windowed 1103-sample frame zero-padded to 2048 points.
    pub fn stft() -> Self {
        Self {
            kind: TransformKind::Stft,
            n_bins: 2048 / 2 + 1,
            f_min: 0.0,
            bins_per_octave: 12,
            window_len: TONE_SAMPLES,
            fft_size: 2048,
            mel_filters: 64,
        }
    }

    /// 64 unit-area triangular filters spanning 0 Hz to Nyquist.
    pub fn mel() -> Self {
        Self {
            kind: TransformKind::Mel,
            n_bins: 64,
            f_min: 0.0,
            bins_per_octave: 12,
            window_len: TONE_SAMPLES,
            fft_size: 2048,
            mel_filters: 64,
        }
    }

    /// Ratio `1 / (2^(1/b) - 1)` between a CQT bin's center and its bandwidth.
    pub fn q_factor(&self) -> f64 {
        1.0 / (2f64.powf(1.0 / self.bins_per_octave as f64) - 1.0)
    }

    /// `f_min · 2^(k/b)` for every CQT bin.
    pub fn cqt_centers(&self) -> Vec<f64> {
        (0..self.n_bins)
            .map(|k| self.f_min * 2f64.powf(k as f64 / self.bins_per_octave as f64))
            .collect()
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidTransform(msg));
        if !(sample_rate > 0.0) {
            return bad(format!("sample rate must be positive, got {sample_rate}"));
        }
        if self.window_len == 0 {
            return bad("window_len must be positive".into());
        }
        match self.kind {
            TransformKind::Cqt => {
                if !(self.f_min > 0.0) {
                    return bad(format!("CQT f_min must be positive, got {}", self.f_min));
                }
                if self.bins_per_octave == 0 || self.n_bins == 0 {
                    return bad("CQT needs at least one bin and one bin per octave".into());
                }
                let top =
                    self.f_min * 2f64.powf((self.n_bins - 1) as f64 / self.bins_per_octave as f64);
                if top >= sample_rate / 2.0 {
                    return bad(format!(
                        "highest CQT center {top:.1} Hz is not below Nyquist {:.1} Hz",
                        sample_rate / 2.0
                    ));
                }
            }
            TransformKind::Stft | TransformKind::Mel => {
                if self.fft_size < self.window_len {
                    return bad(format!(
                        "fft_size {} shorter than window_len {}",
                        self.fft_size, self.window_len
                    ));
                }
                if self.kind == TransformKind::Stft && self.n_bins != self.fft_size / 2 + 1 {
                    return bad(format!(
                        "STFT n_bins must be fft_size/2 + 1 = {}, got {}",
                        self.fft_size / 2 + 1,
                        self.n_bins
                    ));
                }
                if self.kind == TransformKind::Mel {
                    if self.mel_filters == 0 || self.n_bins != self.mel_filters {
                        return bad(format!(
                            "mel n_bins ({}) must equal mel_filters ({}) and be positive",
                            self.n_bins, self.mel_filters
                        ));
                    }
                    if self.f_min < 0.0 || self.f_min >= sample_rate / 2.0 {
                        return bad(format!("mel f_min {} outside [0, Nyquist)", self.f_min));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Equal-tempered frequency `semitones` above A4.
pub fn equal_tempered(semitones: i32) -> f64 {
    440.0 * 2f64.powf(semitones as f64 / 12.0)
}
