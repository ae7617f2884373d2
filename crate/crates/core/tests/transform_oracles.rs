mod common;

use common::{direct_cqt, naive_stft, random_signal};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdg::dsp::{
    cqt_magnitude, equal_tempered, mel_filterbank, stft_magnitude, synth_tone, transform,
    SpectralFrontEnd, TimeSignal, TransformConfig, TransformKind, SAMPLE_RATE, TONE_SAMPLES,
};

fn sig(x: Vec<f64>) -> TimeSignal {
    TimeSignal::new(x, SAMPLE_RATE).unwrap()
}

#[test]
fn stft_matches_naive_dft() {
    let cfg = TransformConfig::stft();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let x = random_signal(&mut rng, TONE_SAMPLES);
        let want = naive_stft(&x, cfg.window_len, cfg.fft_size);
        let got = stft_magnitude(&sig(x), &cfg).unwrap();
        for (g, w) in got.bins.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9);
        }
    }
}

#[test]
fn cqt_matches_direct_kernels() {
    let cfg = TransformConfig::cqt();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for len in [TONE_SAMPLES, 512, 2048] {
        let x = random_signal(&mut rng, len);
        let want = direct_cqt(&x, SAMPLE_RATE, cfg.f_min, cfg.bins_per_octave, cfg.n_bins);
        let got = cqt_magnitude(&sig(x), &cfg).unwrap();
        for (g, w) in got.bins.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}

#[test]
fn mel_matches_dense_filter_matrix() {
    let cfg = TransformConfig::mel();
    let stft = TransformConfig::stft();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_signal(&mut rng, TONE_SAMPLES);
    let mags = naive_stft(&x, stft.window_len, stft.fft_size);
    let freqs: Vec<f64> = (0..mags.len())
        .map(|k| k as f64 * SAMPLE_RATE / 2048.0)
        .collect();
    let fb = mel_filterbank(&freqs, 0.0, SAMPLE_RATE / 2.0, cfg.mel_filters).unwrap();
    // Dense row per filter, then a plain matrix-vector product.
    let want: Vec<f64> = fb
        .iter()
        .map(|f| {
            let mut row = vec![0.0; mags.len()];
            row[f.start..f.start + f.weights.len()].copy_from_slice(&f.weights);
            row.iter().zip(&mags).map(|(a, b)| a * b).sum()
        })
        .collect();
    let got = transform(&sig(x), &cfg).unwrap();
    for (g, w) in got.bins.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9);
    }
}

#[test]
fn partial_amplitudes_fall_by_four() {
    // A long frame with bin-aligned partials keeps leakage small.
    let f0 = 22050.0 / 2048.0 * 40.0;
    let tone = synth_tone(f0, 2048.0 / SAMPLE_RATE, SAMPLE_RATE).unwrap();
    let mags = naive_stft(&tone.samples, 2048, 2048);
    let a0 = mags[40];
    for i in 1..8 {
        let ratio = mags[40 * (i + 1)] / a0;
        let want = 4f64.powi(-(i as i32));
        assert!(
            (ratio / want - 1.0).abs() < 0.02,
            "partial {i}: {ratio} vs {want}"
        );
    }
}

#[test]
fn adjacent_notes_have_distinct_cqt_peaks() {
    let front = SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE).unwrap();
    let peaks: Vec<usize> = (0..12)
        .map(|k| {
            let t = synth_tone(equal_tempered(k), 0.05, SAMPLE_RATE).unwrap();
            front.transform(&t).unwrap().argmax()
        })
        .collect();
    for w in peaks.windows(2) {
        assert_ne!(w[0], w[1]);
    }
}

#[test]
fn identical_input_is_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = sig(random_signal(&mut rng, TONE_SAMPLES));
    for kind in TransformKind::ALL {
        let front = SpectralFrontEnd::new(&kind.default_config(), SAMPLE_RATE).unwrap();
        let a = front.transform(&x).unwrap();
        let b = front.transform(&x).unwrap();
        assert!(a
            .bins
            .iter()
            .zip(&b.bins)
            .all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn magnitude_scales_linearly(seed in any::<u64>(), alpha in 0.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_signal(&mut rng, TONE_SAMPLES);
        let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
        for kind in TransformKind::ALL {
            let cfg = kind.default_config();
            let a = transform(&sig(x.clone()), &cfg).unwrap();
            let b = transform(&sig(scaled.clone()), &cfg).unwrap();
            for (p, q) in a.bins.iter().zip(&b.bins) {
                prop_assert!((alpha * p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn spectra_are_non_negative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sig(random_signal(&mut rng, TONE_SAMPLES));
        for kind in TransformKind::ALL {
            let s = transform(&x, &kind.default_config()).unwrap();
            prop_assert_eq!(s.bins.len(), kind.default_config().n_bins);
            prop_assert!(s.bins.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
    }
}
