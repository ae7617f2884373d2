use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{Spectrum, TimeSignal, TransformConfig, TransformKind};
use crate::{Error, Result};

/// Shortest effective CQT kernel accepted after truncation to the signal.
const MIN_CQT_KERNEL: usize = 64;

/// Symmetric Hann window of length `len`.
pub fn hann(len: usize) -> Vec<f64> {
    match len {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let denom = (len - 1) as f64;
            (0..len)
                .map(|n| 0.5 - 0.5 * (TAU * n as f64 / denom).cos())
                .collect()
        }
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// One triangular mel filter stored sparsely over STFT bins.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilter {
    pub center: f64,
    pub start: usize,
    pub weights: Vec<f64>,
}

impl MelFilter {
    fn apply(&self, mags: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&mags[self.start..])
            .map(|(w, m)| w * m)
            .sum()
    }
}

/// Triangular filters with centers evenly spaced on the mel scale between
/// `f_lo` and `f_hi`, each normalized so its weights sum to one.
pub fn mel_filterbank(
    bin_freqs: &[f64],
    f_lo: f64,
    f_hi: f64,
    n_filters: usize,
) -> Result<Vec<MelFilter>> {
    let (m_lo, m_hi) = (hz_to_mel(f_lo), hz_to_mel(f_hi));
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n_filters + 1) as f64))
        .collect();

    let mut filters = Vec::with_capacity(n_filters);
    for j in 1..=n_filters {
        let (lo, mid, hi) = (edges[j - 1], edges[j], edges[j + 1]);
        let mut start = None;
        let mut weights = Vec::new();
        for (k, &f) in bin_freqs.iter().enumerate() {
            let w = ((f - lo) / (mid - lo)).min((hi - f) / (hi - mid));
            if w > 0.0 {
                start.get_or_insert(k);
                weights.push(w);
            } else if start.is_some() {
                break;
            }
        }
        let total: f64 = weights.iter().sum();
        let Some(start) = start.filter(|_| total > 0.0) else {
            return Err(Error::InvalidTransform(format!(
                "mel filter {j} centered at {mid:.1} Hz covers no STFT bin"
            )));
        };
        weights.iter_mut().for_each(|w| *w /= total);
        filters.push(MelFilter {
            center: mid,
            start,
            weights,
        });
    }
    Ok(filters)
}

struct StftPlan {
    window: Vec<f64>,
    window_sum: f64,
    fft: Arc<dyn Fft<f64>>,
    fft_size: usize,
    centers: Arc<[f64]>,
}

impl StftPlan {
    fn new(cfg: &TransformConfig, sample_rate: f64) -> Self {
        let window = hann(cfg.window_len);
        let window_sum = window.iter().sum();
        let fft = FftPlanner::new().plan_fft_forward(cfg.fft_size);
        let centers: Vec<f64> = (0..=cfg.fft_size / 2)
            .map(|k| k as f64 * sample_rate / cfg.fft_size as f64)
            .collect();
        Self {
            window,
            window_sum,
            fft,
            fft_size: cfg.fft_size,
            centers: centers.into(),
        }
    }

    fn magnitudes(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let n = self.window.len();
        if samples.len() < n {
            return Err(Error::InvalidSignal(format!(
                "signal of {} samples is shorter than the {n}-sample window",
                samples.len()
            )));
        }
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_size];
        for ((b, s), w) in buf.iter_mut().zip(samples).zip(&self.window) {
            b.re = s * w;
        }
        self.fft.process(&mut buf);
        let norm = 1.0 / self.window_sum;
        Ok(buf[..=self.fft_size / 2]
            .iter()
            .map(|c| c.norm() * norm)
            .collect())
    }
}

struct CqtKernel {
    offset: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

struct CqtPlan {
    freqs: Vec<f64>,
    q: f64,
    sample_rate: f64,
    signal_len: usize,
    kernels: Vec<CqtKernel>,
}

impl CqtPlan {
    fn new(cfg: &TransformConfig, sample_rate: f64) -> Result<Self> {
        let freqs = cfg.cqt_centers();
        let q = cfg.q_factor();
        let kernels = build_cqt_kernels(&freqs, q, sample_rate, cfg.window_len)?;
        Ok(Self {
            freqs,
            q,
            sample_rate,
            signal_len: cfg.window_len,
            kernels,
        })
    }

    fn magnitudes(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let fresh;
        let kernels = if samples.len() == self.signal_len {
            &self.kernels
        } else {
            fresh = build_cqt_kernels(&self.freqs, self.q, self.sample_rate, samples.len())?;
            &fresh
        };
        Ok(kernels
            .iter()
            .map(|k| {
                let seg = &samples[k.offset..k.offset + k.re.len()];
                let mut re = 0.0;
                let mut im = 0.0;
                for ((s, kr), ki) in seg.iter().zip(&k.re).zip(&k.im) {
                    re += s * kr;
                    im += s * ki;
                }
                re.hypot(im)
            })
            .collect())
    }
}

/// Kernel `k`: Hann window of length `min(ceil(fs·Q/f_k), len)` times
/// `e^{-2πi f_k n / fs}`, scaled by `1/length`, centered in the signal.
fn build_cqt_kernels(
    freqs: &[f64],
    q: f64,
    sample_rate: f64,
    len: usize,
) -> Result<Vec<CqtKernel>> {
    if len < MIN_CQT_KERNEL {
        return Err(Error::InvalidSignal(format!(
            "signal of {len} samples is shorter than the {MIN_CQT_KERNEL}-sample CQT kernel floor"
        )));
    }
    Ok(freqs
        .iter()
        .map(|&f| {
            let ideal = (sample_rate * q / f).ceil() as usize;
            let n = ideal.min(len);
            let window = hann(n);
            let scale = 1.0 / n as f64;
            let w = TAU * f / sample_rate;
            let (re, im) = window
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    let phase = w * i as f64;
                    (h * phase.cos() * scale, -h * phase.sin() * scale)
                })
                .unzip();
            CqtKernel {
                offset: (len - n) / 2,
                re,
                im,
            }
        })
        .collect())
}

enum Plan {
    Stft(StftPlan),
    Mel(StftPlan, Vec<MelFilter>),
    Cqt(CqtPlan),
}

/// A transform with its window, FFT plan, filterbank or kernels precomputed.
pub struct SpectralFrontEnd {
    cfg: TransformConfig,
    sample_rate: f64,
    centers: Arc<[f64]>,
    plan: Plan,
}

impl std::fmt::Debug for SpectralFrontEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralFrontEnd")
            .field("cfg", &self.cfg)
            .field("sample_rate", &self.sample_rate)
            .finish_non_exhaustive()
    }
}

impl SpectralFrontEnd {
    pub fn new(cfg: &TransformConfig, sample_rate: f64) -> Result<Self> {
        cfg.validate(sample_rate)?;
        let (plan, centers): (Plan, Arc<[f64]>) = match cfg.kind {
            TransformKind::Stft => {
                let p = StftPlan::new(cfg, sample_rate);
                let c = p.centers.clone();
                (Plan::Stft(p), c)
            }
            TransformKind::Mel => {
                let p = StftPlan::new(cfg, sample_rate);
                let filters =
                    mel_filterbank(&p.centers, cfg.f_min, sample_rate / 2.0, cfg.mel_filters)?;
                let c: Vec<f64> = filters.iter().map(|f| f.center).collect();
                (Plan::Mel(p, filters), c.into())
            }
            TransformKind::Cqt => {
                let p = CqtPlan::new(cfg, sample_rate)?;
                let c = p.freqs.clone();
                (Plan::Cqt(p), c.into())
            }
        };
        Ok(Self {
            cfg: cfg.clone(),
            sample_rate,
            centers,
            plan,
        })
    }

    pub fn config(&self) -> &TransformConfig {
        &self.cfg
    }

    pub fn kind(&self) -> TransformKind {
        self.cfg.kind
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn n_bins(&self) -> usize {
        self.centers.len()
    }

    pub fn bin_centers(&self) -> &Arc<[f64]> {
        &self.centers
    }

    pub fn transform(&self, sig: &TimeSignal) -> Result<Spectrum> {
        if sig.sample_rate != self.sample_rate {
            return Err(Error::InvalidSignal(format!(
                "front end runs at {} Hz but the signal is at {} Hz",
                self.sample_rate, sig.sample_rate
            )));
        }
        let bins = match &self.plan {
            Plan::Stft(p) => p.magnitudes(&sig.samples)?,
            Plan::Mel(p, filters) => {
                let mags = p.magnitudes(&sig.samples)?;
                filters.iter().map(|f| f.apply(&mags)).collect()
            }
            Plan::Cqt(p) => p.magnitudes(&sig.samples)?,
        };
        Ok(Spectrum {
            bins,
            bin_centers: self.centers.clone(),
            kind: self.cfg.kind,
        })
    }
}

fn expect_kind(cfg: &TransformConfig, kind: TransformKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::InvalidTransform(format!(
            "expected a {kind} configuration, got {}",
            cfg.kind
        )));
    }
    Ok(())
}

/// Single Hann-windowed frame over the first `window_len` samples, zero-padded
/// to `fft_size`, normalized by the window sum.
pub fn stft_magnitude(sig: &TimeSignal, cfg: &TransformConfig) -> Result<Spectrum> {
    expect_kind(cfg, TransformKind::Stft)?;
    SpectralFrontEnd::new(cfg, sig.sample_rate)?.transform(sig)
}

/// Applies the mel filterbank to an STFT spectrum. The span runs from
/// `cfg.f_min` to the top STFT bin (Nyquist).
pub fn mel_scale(spec: &Spectrum, cfg: &TransformConfig) -> Result<Spectrum> {
    if spec.kind != TransformKind::Stft {
        return Err(Error::SpectrumMismatch(format!(
            "mel scaling needs an STFT spectrum, got {}",
            spec.kind
        )));
    }
    let nyquist = *spec.bin_centers.last().expect("non-empty spectrum");
    let filters = mel_filterbank(&spec.bin_centers, cfg.f_min, nyquist, cfg.mel_filters)?;
    let centers: Vec<f64> = filters.iter().map(|f| f.center).collect();
    Ok(Spectrum {
        bins: filters.iter().map(|f| f.apply(&spec.bins)).collect(),
        bin_centers: centers.into(),
        kind: TransformKind::Mel,
    })
}

pub fn cqt_magnitude(sig: &TimeSignal, cfg: &TransformConfig) -> Result<Spectrum> {
    expect_kind(cfg, TransformKind::Cqt)?;
    SpectralFrontEnd::new(cfg, sig.sample_rate)?.transform(sig)
}

/// Dispatches on `cfg.kind`.
pub fn transform(sig: &TimeSignal, cfg: &TransformConfig) -> Result<Spectrum> {
    SpectralFrontEnd::new(cfg, sig.sample_rate)?.transform(sig)
}
