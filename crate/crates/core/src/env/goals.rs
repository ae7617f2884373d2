use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{equal_tempered, synth_tone, SpectralFrontEnd, Spectrum, TONE_SECONDS};
use crate::{Error, Result};

pub const EPISODE_STEPS: usize = 200;
pub const SEGMENT_LEN: usize = 25;
pub const SEGMENTS: usize = EPISODE_STEPS / SEGMENT_LEN;

/// The twelve equal-tempered notes from A4 to Ab5.
pub fn chromatic_goal_notes() -> [f64; 12] {
    std::array::from_fn(|k| equal_tempered(k as i32))
}

/// Where goal notes are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalSet {
    /// Uniformly among the twelve notes A4..Ab5.
    Chromatic,
    /// Uniformly over the continuous band [A4, Ab5].
    OffScale,
}

/// Whether the goal changes within an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalMode {
    /// A new note every 25 steps.
    TimeDependent,
    /// A single note held for the whole episode.
    Constant,
}

/// Eight goal notes, each held for 25 steps, with their clean spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalTimeline {
    notes: Vec<f64>,
    spectra: Vec<Spectrum>,
}

impl GoalTimeline {
    /// Builds a timeline from exactly eight notes.
    pub fn from_notes(notes: &[f64], front: &SpectralFrontEnd) -> Result<Self> {
        if notes.len() != SEGMENTS {
            return Err(Error::Config(format!(
                "a goal timeline has {SEGMENTS} notes, got {}",
                notes.len()
            )));
        }
        let spectra = notes
            .iter()
            .map(|&f| front.transform(&synth_tone(f, TONE_SECONDS, front.sample_rate())?))
            .collect::<Result<_>>()?;
        Ok(Self {
            notes: notes.to_vec(),
            spectra,
        })
    }

    pub fn notes(&self) -> &[f64] {
        &self.notes
    }

    /// Segment index for an episode step; steps past the end map to the last segment.
    pub fn segment_of(step: usize) -> usize {
        (step / SEGMENT_LEN).min(SEGMENTS - 1)
    }

    pub fn note_at(&self, step: usize) -> f64 {
        self.notes[Self::segment_of(step)]
    }

    pub fn goal_at(&self, step: usize) -> &Spectrum {
        &self.spectra[Self::segment_of(step)]
    }

    pub fn segment_spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    /// One goal spectrum per step, 200 entries.
    pub fn per_step_goal_spectra(&self) -> Vec<&Spectrum> {
        (0..EPISODE_STEPS).map(|t| self.goal_at(t)).collect()
    }
}

pub fn sample_goal_notes<R: Rng + ?Sized>(rng: &mut R, set: GoalSet, mode: GoalMode) -> Vec<f64> {
    let chromatic = chromatic_goal_notes();
    let mut draw = || match set {
        GoalSet::Chromatic => chromatic[rng.random_range(0..chromatic.len())],
        GoalSet::OffScale => rng.random_range(chromatic[0]..=chromatic[11]),
    };
    match mode {
        GoalMode::TimeDependent => (0..SEGMENTS).map(|_| draw()).collect(),
        GoalMode::Constant => vec![draw(); SEGMENTS],
    }
}

/// Draws eight goal notes and synthesizes their noise-free goal spectra.
pub fn sample_goal_timeline<R: Rng + ?Sized>(
    rng: &mut R,
    set: GoalSet,
    mode: GoalMode,
    front: &SpectralFrontEnd,
) -> Result<GoalTimeline> {
    GoalTimeline::from_notes(&sample_goal_notes(rng, set, mode), front)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{TransformConfig, SAMPLE_RATE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn front() -> SpectralFrontEnd {
        SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE).unwrap()
    }

    #[test]
    fn structure_and_block_constancy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tl = sample_goal_timeline(
            &mut rng,
            GoalSet::Chromatic,
            GoalMode::TimeDependent,
            &front(),
        )
        .unwrap();
        let steps = tl.per_step_goal_spectra();
        assert_eq!(steps.len(), 200);
        assert_eq!(tl.notes().len(), 8);
        for seg in steps.chunks(SEGMENT_LEN) {
            assert!(seg.iter().all(|s| *s == seg[0]));
        }
        let chromatic = chromatic_goal_notes();
        assert!(tl.notes().iter().all(|n| chromatic.contains(n)));
    }

    #[test]
    fn top_note_is_ab5() {
        assert!((chromatic_goal_notes()[11] - 830.609).abs() < 1e-3);
    }

    #[test]
    fn seeded_replay() {
        let f = front();
        let a = sample_goal_timeline(
            &mut ChaCha8Rng::seed_from_u64(9),
            GoalSet::Chromatic,
            GoalMode::TimeDependent,
            &f,
        )
        .unwrap();
        let b = sample_goal_timeline(
            &mut ChaCha8Rng::seed_from_u64(9),
            GoalSet::Chromatic,
            GoalMode::TimeDependent,
            &f,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_mode_and_off_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let notes = sample_goal_notes(&mut rng, GoalSet::OffScale, GoalMode::Constant);
        assert!(notes.iter().all(|&n| n == notes[0]));
        for _ in 0..200 {
            let n = sample_goal_notes(&mut rng, GoalSet::OffScale, GoalMode::TimeDependent);
            assert!(n.iter().all(|&f| (440.0..=830.61).contains(&f)));
        }
    }

    #[test]
    fn wrong_note_count_rejected() {
        assert!(GoalTimeline::from_notes(&[440.0; 3], &front()).is_err());
    }
}
