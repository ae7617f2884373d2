use std::fmt::Write as _;
use std::path::Path;

use crate::agent::Policy;
use crate::dsp::wav::write_pcm16;
use crate::dsp::{equal_tempered, synth_sequence, TimeSignal, TONE_SECONDS};
use crate::env::{success_step, EnvConfig, ThereminEnv, SEGMENTS};
use crate::{Error, Result};

/// Parses scientific pitch notation (`A4`, `Ab5`, `C#3`) or a plain
/// frequency in Hz. A4 is 440 Hz; equal temperament.
pub fn parse_note(text: &str) -> Result<f64> {
    let s = text.trim();
    let unknown = || Error::UnknownNote(text.to_string());
    if let Ok(hz) = s.parse::<f64>() {
        return if hz > 0.0 && hz.is_finite() {
            Ok(hz)
        } else {
            Err(unknown())
        };
    }
    let mut chars = s.chars();
    let letter = chars.next().ok_or_else(unknown)?;
    let base = match letter.to_ascii_uppercase() {
        'C' => -9,
        'D' => -7,
        'E' => -5,
        'F' => -4,
        'G' => -2,
        'A' => 0,
        'B' => 2,
        _ => return Err(unknown()),
    };
    let rest = chars.as_str();
    let (shift, octave) = match rest.chars().next() {
        Some('#') => (1, &rest[1..]),
        Some('b') => (-1, &rest[1..]),
        _ => (0, rest),
    };
    let octave: i32 = octave.parse().map_err(|_| unknown())?;
    Ok(equal_tempered(base + shift + 12 * (octave - 4)))
}

/// Parses a comma-separated melody of at most eight notes and pads it with
/// its last note to one note per segment.
pub fn parse_melody(text: &str) -> Result<Vec<f64>> {
    let notes = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_note)
        .collect::<Result<Vec<_>>>()?;
    pad_melody(notes)
}

pub fn pad_melody(mut notes: Vec<f64>) -> Result<Vec<f64>> {
    if notes.is_empty() {
        return Err(Error::Config("a melody needs at least one note".into()));
    }
    if notes.len() > SEGMENTS {
        return Err(Error::Config(format!(
            "a melody has at most {SEGMENTS} notes, got {}",
            notes.len()
        )));
    }
    let last = *notes.last().expect("non-empty");
    notes.resize(SEGMENTS, last);
    Ok(notes)
}

/// One played step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelodyStep {
    pub goal_hz: f64,
    pub achieved_hz: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MelodyTrace {
    pub steps: Vec<MelodyStep>,
    /// The achieved pitches rendered back to back, 50 ms per step.
    pub audio: TimeSignal,
}

impl MelodyTrace {
    pub fn successes(&self) -> usize {
        self.steps.iter().filter(|s| s.success).count()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("step,goal_hz,achieved_hz,success\n");
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                out,
                "{i},{},{},{}",
                s.goal_hz,
                s.achieved_hz,
                u8::from(s.success)
            )
            .expect("string write");
        }
        out
    }

    /// Writes the WAV and the per-step CSV.
    pub fn write(&self, wav: impl AsRef<Path>, csv: impl AsRef<Path>) -> Result<()> {
        write_pcm16(wav, &self.audio)?;
        let csv = csv.as_ref();
        std::fs::write(csv, self.csv()).map_err(|e| Error::io(csv, e))
    }
}

/// Plays `notes` (padded to eight) with the policy in one deterministic
/// episode.
pub fn play_melody(
    policy: &Policy,
    notes: &[f64],
    env: &EnvConfig,
    seed: u64,
) -> Result<MelodyTrace> {
    let notes = pad_melody(notes.to_vec())?;
    let mut env = ThereminEnv::new(env.clone(), seed)?;
    let first = env.reset_with_notes(&notes)?;
    let out = policy.rollout(&mut env, first)?;
    let steps: Vec<MelodyStep> = out
        .goal_freqs
        .iter()
        .zip(&out.achieved_freqs)
        .map(|(&g, &a)| MelodyStep {
            goal_hz: g,
            achieved_hz: a,
            success: success_step(a, g),
        })
        .collect();
    let audio = synth_sequence(&out.achieved_freqs, TONE_SECONDS, env.config().sample_rate)?;
    Ok(MelodyTrace { steps, audio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{Agent, AgentConfig};
    use crate::dsp::wav::decode_pcm16;

    #[test]
    fn note_names() {
        assert_eq!(parse_note("A4").unwrap(), 440.0);
        assert!((parse_note("Ab5").unwrap() - 830.61).abs() < 0.01);
        assert!((parse_note("G#5").unwrap() - 830.61).abs() < 0.01);
        assert!((parse_note("C4").unwrap() - 261.63).abs() < 0.01);
        assert!((parse_note("A5").unwrap() - 880.0).abs() < 1e-9);
        assert_eq!(parse_note("523.25").unwrap(), 523.25);
        for bad in ["H4", "A", "Ax4", "", "-3", "A4.5"] {
            assert!(
                matches!(parse_note(bad), Err(Error::UnknownNote(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn melody_padding() {
        let m = parse_melody("A4,C5").unwrap();
        assert_eq!(m.len(), 8);
        assert!(m[2..].iter().all(|&f| f == m[1]));
        assert!(parse_melody("A4,A4,A4,A4,A4,A4,A4,A4,A4").is_err());
        assert!(parse_melody("").is_err());
    }

    #[test]
    fn playback_is_ten_seconds() {
        let env_cfg = EnvConfig::cart1d();
        let env = ThereminEnv::new(env_cfg.clone(), 0).unwrap();
        let cfg = AgentConfig {
            hidden: vec![8],
            ..AgentConfig::default()
        };
        let policy = Agent::for_env(&env, cfg, 0).unwrap().policy();
        let trace = play_melody(&policy, &parse_melody("A4,C5,E5").unwrap(), &env_cfg, 0).unwrap();
        assert_eq!(trace.steps.len(), 200);
        assert!((trace.audio.duration() - 10.0).abs() < 1e-9);
        assert_eq!(trace.steps[199].goal_hz, parse_note("E5").unwrap());
        let dir = tempfile::tempdir().unwrap();
        let (wav, csv) = (dir.path().join("m.wav"), dir.path().join("m.csv"));
        trace.write(&wav, &csv).unwrap();
        let back = decode_pcm16(&std::fs::read(&wav).unwrap()).unwrap();
        assert_eq!(back.len(), 220_500);
        assert_eq!(back.sample_rate, 22050.0);
        assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 201);
    }
}
