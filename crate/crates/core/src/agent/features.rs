use crate::dsp::{synth_tone, SpectralFrontEnd, TONE_SECONDS};
use crate::env::EnvConfig;
use crate::kinematics::{ActionSpace, RobotKind, ARM_REACH, CART_TRACK};
use crate::Result;

/// Fixed affine scaling from raw spectra and proprioception to network inputs.
///
/// Spectra are multiplied by the reciprocal of the largest bin of a clean A4
/// tone, so a goal note's fundamental lands near 1. Proprioception is mapped
/// to roughly [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub audio_gain: f64,
    pub proprio_offset: Vec<f64>,
    pub proprio_scale: Vec<f64>,
}

impl FeatureMap {
    pub fn for_env(cfg: &EnvConfig) -> Result<Self> {
        let front = SpectralFrontEnd::new(&cfg.transform, cfg.sample_rate)?;
        Self::with_front_end(cfg, &front)
    }

    pub fn with_front_end(cfg: &EnvConfig, front: &SpectralFrontEnd) -> Result<Self> {
        let reference = front.transform(&synth_tone(440.0, TONE_SECONDS, cfg.sample_rate)?)?;
        let peak = reference.bins.iter().fold(0.0_f64, |m, &b| m.max(b));
        let (offset, scale) = match (cfg.robot, cfg.actuation) {
            (RobotKind::Cart1D, _) => {
                let mid = 0.5 * (CART_TRACK.0 + CART_TRACK.1);
                let half = 0.5 * (CART_TRACK.1 - CART_TRACK.0);
                (vec![mid], vec![1.0 / half])
            }
            (RobotKind::Arm6D, ActionSpace::Cartesian) => (vec![0.0; 3], vec![1.0 / ARM_REACH; 3]),
            (RobotKind::Arm6D, ActionSpace::Joint) => {
                (vec![0.0; 6], vec![1.0 / std::f64::consts::PI; 6])
            }
        };
        Ok(Self {
            audio_gain: 1.0 / peak,
            proprio_offset: offset,
            proprio_scale: scale,
        })
    }

    /// Pass-through scaling for `proprio_dim` proprioceptive inputs.
    pub fn identity(proprio_dim: usize) -> Self {
        Self {
            audio_gain: 1.0,
            proprio_offset: vec![0.0; proprio_dim],
            proprio_scale: vec![1.0; proprio_dim],
        }
    }

    pub fn proprio_dim(&self) -> usize {
        self.proprio_offset.len()
    }

    /// Writes `audio ++ proprio` features into `out`.
    pub fn write_state(&self, audio: &[f64], proprio: &[f64], out: &mut [f64]) {
        let (a, p) = out.split_at_mut(audio.len());
        self.write_goal(audio, a);
        for (((o, x), off), s) in p
            .iter_mut()
            .zip(proprio)
            .zip(&self.proprio_offset)
            .zip(&self.proprio_scale)
        {
            *o = (x - off) * s;
        }
    }

    pub fn write_goal(&self, goal: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(goal) {
            *o = g * self.audio_gain;
        }
    }

    /// Actor input `state ++ goal` for one step.
    pub fn actor_input(&self, audio: &[f64], proprio: &[f64], goal: &[f64]) -> Vec<f64> {
        let s = audio.len() + proprio.len();
        let mut out = vec![0.0; s + goal.len()];
        self.write_state(audio, proprio, &mut out[..s]);
        self.write_goal(goal, &mut out[s..]);
        out
    }
}
