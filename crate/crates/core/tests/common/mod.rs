//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::Rng;

/// `0.5 - 0.5·cos(2πn/(N-1))`, written out directly.
pub fn hann_ref(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / (n as f64 - 1.0)).cos()))
        .collect()
}

/// O(N²) DFT of the Hann-windowed first `window` samples, zero-padded to
/// `fft_size`, magnitude divided by the window sum. Bins 0..=fft_size/2.
pub fn naive_stft(x: &[f64], window: usize, fft_size: usize) -> Vec<f64> {
    let w = hann_ref(window);
    let wsum: f64 = w.iter().sum();
    (0..=fft_size / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for n in 0..window {
                let ph = TAU * (k * n % fft_size) as f64 / fft_size as f64;
                re += x[n] * w[n] * ph.cos();
                im -= x[n] * w[n] * ph.sin();
            }
            (re * re + im * im).sqrt() / wsum
        })
        .collect()
}

/// Direct constant-Q correlation: bin `k` at `f_min·2^(k/b)` correlates a
/// centered Hann-windowed complex exponential of length
/// `min(ceil(fs·Q/f_k), N)` with the signal and divides by that length.
pub fn direct_cqt(
    x: &[f64],
    sr: f64,
    f_min: f64,
    bins_per_octave: usize,
    n_bins: usize,
) -> Vec<f64> {
    let q = 1.0 / (2f64.powf(1.0 / bins_per_octave as f64) - 1.0);
    (0..n_bins)
        .map(|k| {
            let f = f_min * 2f64.powf(k as f64 / bins_per_octave as f64);
            let len = ((sr * q / f).ceil() as usize).min(x.len());
            let start = (x.len() - len) / 2;
            let w = hann_ref(len);
            let (mut re, mut im) = (0.0, 0.0);
            for m in 0..len {
                let ph = 2.0 * PI * f * m as f64 / sr;
                re += x[start + m] * w[m] * ph.cos();
                im -= x[start + m] * w[m] * ph.sin();
            }
            (re * re + im * im).sqrt() / len as f64
        })
        .collect()
}

pub fn random_signal<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

type Mat4 = [[f64; 4]; 4];

fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn rot(axis: char, q: f64) -> Mat4 {
    let (s, c) = q.sin_cos();
    match axis {
        'z' => [
            [c, -s, 0.0, 0.0],
            [s, c, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        'y' => [
            [c, 0.0, s, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [-s, 0.0, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        _ => unreachable!(),
    }
}

fn lift(dz: f64) -> Mat4 {
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, dz],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// Tip of the z-y-y-y-y-z arm with 0.2 m links by chaining 4×4 transforms.
pub fn fk_homogeneous(q: &[f64]) -> [f64; 3] {
    let axes = ['z', 'y', 'y', 'y', 'y', 'z'];
    let mut t: Mat4 = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    for (a, &qi) in axes.iter().zip(q) {
        t = mul4(&t, &rot(*a, qi));
        t = mul4(&t, &lift(0.2));
    }
    [t[0][3], t[1][3], t[2][3]]
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `|a - b| ≤ rel·max(|a|, |b|) + abs`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}
