use serde::{Deserialize, Serialize};

use crate::dsp::{
    argmax, equal_tempered, l1_distance, mix_snr, pink_noise, synth_tone, SpectralFrontEnd,
    Spectrum, TransformConfig, TransformKind, TONE_SECONDS,
};
use crate::{Error, Result};

/// Relative pitch error accepted as a hit, 0.7 %.
pub const PITCH_TOLERANCE: f64 = 0.007;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    /// 0 when the L1 distance between achieved and goal spectra is below ε.
    TemplateMatch,
    /// 0 when the largest CQT bin of achieved and goal coincide.
    ArgmaxCqt,
}

/// A reward function with its threshold resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardFn {
    pub kind: RewardKind,
    pub epsilon: f64,
}

impl RewardFn {
    /// Reward on raw bin slices, used when relabeling stored transitions.
    pub fn compute(&self, achieved: &[f64], goal: &[f64]) -> Result<f64> {
        if achieved.len() != goal.len() {
            return Err(Error::SpectrumMismatch(format!(
                "{} achieved bins vs {} goal bins",
                achieved.len(),
                goal.len()
            )));
        }
        Ok(match self.kind {
            RewardKind::TemplateMatch => {
                if l1_distance(goal, achieved) < self.epsilon {
                    0.0
                } else {
                    -1.0
                }
            }
            RewardKind::ArgmaxCqt => {
                if argmax(achieved) == argmax(goal) {
                    0.0
                } else {
                    -1.0
                }
            }
        })
    }

    pub fn evaluate(&self, achieved: &Spectrum, goal: &Spectrum) -> Result<f64> {
        match self.kind {
            RewardKind::TemplateMatch => reward_template(achieved, goal, self.epsilon),
            RewardKind::ArgmaxCqt => reward_argmax(achieved, goal),
        }
    }
}

/// Spectrographic template matching: 0 iff `Σ|g_i - s_i| < ε`, else -1.
pub fn reward_template(s: &Spectrum, g: &Spectrum, epsilon: f64) -> Result<f64> {
    if s.kind != g.kind {
        return Err(Error::SpectrumMismatch(format!(
            "achieved is {} but goal is {}",
            s.kind, g.kind
        )));
    }
    let d = s.l1_distance(g)?;
    Ok(if d < epsilon { 0.0 } else { -1.0 })
}

/// 0 iff the largest CQT bins of `s` and `g` coincide, else -1.
pub fn reward_argmax(s: &Spectrum, g: &Spectrum) -> Result<f64> {
    if s.kind != TransformKind::Cqt || g.kind != TransformKind::Cqt {
        return Err(Error::SpectrumMismatch(format!(
            "argmax reward needs CQT spectra, got {} and {}",
            s.kind, g.kind
        )));
    }
    if s.n_bins() != g.n_bins() {
        return Err(Error::SpectrumMismatch(format!(
            "{} bins vs {} bins",
            s.n_bins(),
            g.n_bins()
        )));
    }
    Ok(if s.argmax() == g.argmax() { 0.0 } else { -1.0 })
}

/// L1 distance between the clean-tone spectra of `f` and `f·ratio`.
pub fn detuning_distance(front: &SpectralFrontEnd, f: f64, ratio: f64) -> Result<f64> {
    let sr = front.sample_rate();
    let a = front.transform(&synth_tone(f, TONE_SECONDS, sr)?)?;
    let b = front.transform(&synth_tone(f * ratio, TONE_SECONDS, sr)?)?;
    a.l1_distance(&b)
}

/// The template-matching threshold for a transform: the smallest spectral
/// distance, over the twelve goal notes, between a clean tone and the same
/// tone detuned upward by 0.7 %.
pub fn calibrate_epsilon(cfg: &TransformConfig, sample_rate: f64) -> Result<f64> {
    let front = SpectralFrontEnd::new(cfg, sample_rate)?;
    calibrate_epsilon_with(&front)
}

pub fn calibrate_epsilon_with(front: &SpectralFrontEnd) -> Result<f64> {
    (0..12).try_fold(f64::INFINITY, |eps, k| {
        Ok(eps.min(detuning_distance(
            front,
            equal_tempered(k),
            1.0 + PITCH_TOLERANCE,
        )?))
    })
}

/// Noise draws per note when calibrating against noisy observations.
pub const CALIBRATION_DRAWS: usize = 33;

/// Threshold for observations mixed with pink noise at `snr_db`: per goal
/// note, the median distance between a noisy tone detuned upward by 0.7 %
/// and the clean goal, minimized over the notes. `None` gives the clean
/// calibration.
pub fn calibrate_epsilon_at_snr(front: &SpectralFrontEnd, snr_db: Option<f64>) -> Result<f64> {
    let Some(snr) = snr_db else {
        return calibrate_epsilon_with(front);
    };
    let sr = front.sample_rate();
    let mut eps = f64::INFINITY;
    for k in 0..12 {
        let f = equal_tempered(k);
        let goal = front.transform(&synth_tone(f, TONE_SECONDS, sr)?)?;
        let tone = synth_tone(f * (1.0 + PITCH_TOLERANCE), TONE_SECONDS, sr)?;
        let mut d = (0..CALIBRATION_DRAWS)
            .map(|s| {
                let noise = pink_noise(tone.len(), (k as u64) << 32 | s as u64, sr)?;
                front
                    .transform(&mix_snr(&tone, &noise, snr)?)?
                    .l1_distance(&goal)
            })
            .collect::<Result<Vec<f64>>>()?;
        d.sort_by(f64::total_cmp);
        eps = eps.min(d[CALIBRATION_DRAWS / 2]);
    }
    Ok(eps)
}

/// Transform-independent hit test: relative pitch error below 0.7 %.
pub fn success_step(achieved_freq: f64, goal_freq: f64) -> bool {
    ((achieved_freq - goal_freq) / goal_freq).abs() < PITCH_TOLERANCE
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{SAMPLE_RATE, TONE_SECONDS};

    fn clean(front: &SpectralFrontEnd, f: f64) -> Spectrum {
        front
            .transform(&synth_tone(f, TONE_SECONDS, SAMPLE_RATE).unwrap())
            .unwrap()
    }

    #[test]
    fn identical_spectra_reward_zero() {
        let front = SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE).unwrap();
        let s = clean(&front, 523.25);
        assert_eq!(reward_template(&s, &s, 1e-6).unwrap(), 0.0);
        assert_eq!(reward_argmax(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn template_bin_mismatch_is_an_error() {
        let cqt = SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE).unwrap();
        let mut short = clean(&cqt, 440.0);
        let g = short.clone();
        short.bins.pop();
        assert!(reward_template(&short, &g, 1.0).is_err());
        let rf = RewardFn {
            kind: RewardKind::TemplateMatch,
            epsilon: 1.0,
        };
        assert!(rf.compute(&short.bins, &g.bins).is_err());
    }

    #[test]
    fn argmax_rejects_non_cqt() {
        let stft = SpectralFrontEnd::new(&TransformConfig::stft(), SAMPLE_RATE).unwrap();
        let s = clean(&stft, 440.0);
        assert!(reward_argmax(&s, &s).is_err());
    }

    #[test]
    fn argmax_semitone_and_two_percent() {
        let front = SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE).unwrap();
        let g = clean(&front, 440.0);
        assert_eq!(reward_argmax(&clean(&front, 466.16), &g).unwrap(), -1.0);
        assert_eq!(
            reward_argmax(&clean(&front, 440.0 * 1.02), &g).unwrap(),
            0.0
        );
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.0; 5]), 0);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn template_detuning_boundary_a4() {
        let cfg = TransformConfig::cqt();
        let eps = calibrate_epsilon(&cfg, SAMPLE_RATE).unwrap();
        let front = SpectralFrontEnd::new(&cfg, SAMPLE_RATE).unwrap();
        let g = clean(&front, 440.0);
        assert_eq!(
            reward_template(&clean(&front, 440.0 * 1.006), &g, eps).unwrap(),
            0.0
        );
        assert_eq!(
            reward_template(&clean(&front, 440.0 * 1.009), &g, eps).unwrap(),
            -1.0
        );
    }

    #[test]
    fn noisy_calibration_grows_with_noise() {
        let front = SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE).unwrap();
        let clean_eps = calibrate_epsilon_with(&front).unwrap();
        assert_eq!(calibrate_epsilon_at_snr(&front, None).unwrap(), clean_eps);
        let eps: Vec<f64> = [38.0, 16.0, 0.0]
            .iter()
            .map(|&s| calibrate_epsilon_at_snr(&front, Some(s)).unwrap())
            .collect();
        assert!(
            clean_eps < eps[0] && eps[0] < eps[1] && eps[1] < eps[2],
            "{clean_eps} {eps:?}"
        );
    }

    #[test]
    fn noisy_reward_still_prefers_the_right_pitch() {
        let front = SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE).unwrap();
        let eps = calibrate_epsilon_at_snr(&front, Some(16.0)).unwrap();
        let goal = clean(&front, 523.25);
        let hit_rate = |ratio: f64| {
            let tone = synth_tone(523.25 * ratio, TONE_SECONDS, SAMPLE_RATE).unwrap();
            let hits = (0..200u64)
                .filter(|&s| {
                    let noise = pink_noise(tone.len(), 9_000 + s, SAMPLE_RATE).unwrap();
                    let obs = front
                        .transform(&mix_snr(&tone, &noise, 16.0).unwrap())
                        .unwrap();
                    reward_template(&obs, &goal, eps).unwrap() == 0.0
                })
                .count();
            hits as f64 / 200.0
        };
        let (on, off) = (hit_rate(1.0), hit_rate(1.01));
        assert!(
            on > 0.5 && off < 0.5 && on > off,
            "in tune {on}, 1% sharp {off}"
        );
    }

    #[test]
    fn success_boundary() {
        assert!(success_step(440.0, 440.0));
        assert!(success_step(443.0, 440.0));
        assert!(!success_step(443.2, 440.0));
        assert!(success_step(437.0, 440.0));
        assert!(!success_step(436.8, 440.0));
    }
}
