//! The theremin environment.
//!
//! Each step moves the robot, converts the tip-to-antenna distance to a pitch,
//! synthesizes the 50 ms tone the theremin would emit (plus pink noise), and
//! scores it against the goal note of the *next* step. Episodes last 200 steps
//! and the goal note changes every 25 steps.

mod goals;
mod pitch;
mod reward;

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{
    mix_snr, pink_noise, synth_tone, SpectralFrontEnd, Spectrum, TransformConfig, TransformKind,
    PARTIALS, SAMPLE_RATE, TONE_SECONDS,
};
use crate::kinematics::{Action, ActionSpace, RobotKind, RobotState, ARM_HOME};
use crate::{Error, Result};

pub use goals::{
    chromatic_goal_notes, sample_goal_notes, sample_goal_timeline, GoalMode, GoalSet, GoalTimeline,
    EPISODE_STEPS, SEGMENTS, SEGMENT_LEN,
};
pub use pitch::{distance_to_pitch, pitch_to_distance, PitchMap, PITCH_FLOOR};
pub use reward::{
    calibrate_epsilon, calibrate_epsilon_at_snr, calibrate_epsilon_with, detuning_distance,
    reward_argmax, reward_template, success_step, RewardFn, RewardKind, PITCH_TOLERANCE,
};

/// Antenna position for the cart: the track starts at the antenna.
pub const CART_ANTENNA: [f64; 3] = [0.0, 0.0, 0.0];
/// Antenna position for the arm, about 0.2 m in front of the home pose tip.
pub const ARM_ANTENNA: [f64; 3] = [1.08, 0.0, 0.30];
/// Where a fresh cart starts, meters along the track.
pub const CART_START: f64 = 0.20;

/// Lowest pitch the environment will synthesize, Hz.
const MIN_PITCH: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub robot: RobotKind,
    pub actuation: ActionSpace,
    pub transform: TransformConfig,
    pub sample_rate: f64,
    /// `None` disables the noise entirely.
    pub snr_db: Option<f64>,
    pub reward: RewardKind,
    /// Template-matching threshold; `None` calibrates it from the transform.
    pub epsilon: Option<f64>,
    pub reset_between_episodes: bool,
    pub antenna_y_jitter: f64,
    pub pitch_map: PitchMap,
    pub goal_set: GoalSet,
    pub goal_mode: GoalMode,
}

impl EnvConfig {
    /// 6-DOF arm, inverse kinematics, CQT, 38 dB SNR, template matching.
    pub fn arm() -> Self {
        Self {
            robot: RobotKind::Arm6D,
            actuation: ActionSpace::Cartesian,
            transform: TransformConfig::cqt(),
            sample_rate: SAMPLE_RATE,
            snr_db: Some(38.0),
            reward: RewardKind::TemplateMatch,
            epsilon: None,
            reset_between_episodes: true,
            antenna_y_jitter: 0.1,
            pitch_map: PitchMap::Exponential,
            goal_set: GoalSet::Chromatic,
            goal_mode: GoalMode::TimeDependent,
        }
    }

    /// 1-DOF cart, position carried across episodes.
    ///
    /// Uses template matching like the arm. The CQT argmax reward is flat
    /// over a whole semitone bin, so a policy trained on it parks anywhere in
    /// that bin and misses the 0.7% pitch tolerance; set `reward` to
    /// [`RewardKind::ArgmaxCqt`] to train on it anyway.
    pub fn cart1d() -> Self {
        Self {
            robot: RobotKind::Cart1D,
            actuation: ActionSpace::Cartesian,
            reset_between_episodes: false,
            antenna_y_jitter: 0.0,
            ..Self::arm()
        }
    }

    pub fn action_dim(&self) -> usize {
        self.robot.action_dim(self.actuation)
    }

    pub fn proprio_dim(&self) -> usize {
        match (self.robot, self.actuation) {
            (RobotKind::Cart1D, _) => 1,
            (RobotKind::Arm6D, ActionSpace::Cartesian) => 3,
            (RobotKind::Arm6D, ActionSpace::Joint) => 6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.transform.validate(self.sample_rate)?;
        if self.reward == RewardKind::ArgmaxCqt && self.transform.kind != TransformKind::Cqt {
            return Err(Error::Config(
                "the argmax reward needs the CQT transform".into(),
            ));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(Error::Config(format!(
                    "epsilon must be positive, got {eps}"
                )));
            }
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::Config("snr_db must be finite".into()));
            }
        }
        if !(self.antenna_y_jitter >= 0.0) {
            return Err(Error::Config(
                "antenna_y_jitter must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Resolves the reward threshold. An unpinned ε is calibrated at the
    /// configured SNR, so noisy observations of an in-tune tone still earn
    /// reward most of the time.
    pub fn reward_fn(&self, front: &SpectralFrontEnd) -> Result<RewardFn> {
        let epsilon = match (self.reward, self.epsilon) {
            (_, Some(eps)) => eps,
            (RewardKind::TemplateMatch, None) => calibrate_epsilon_at_snr(front, self.snr_db)?,
            (RewardKind::ArgmaxCqt, None) => f64::NAN,
        };
        Ok(RewardFn {
            kind: self.reward,
            epsilon,
        })
    }
}

/// What the agent perceives after each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Spectrum of the (noisy) tone the theremin emits.
    pub audio: Spectrum,
    pub proprio: Vec<f64>,
    /// Pitch of that tone. Used for evaluation only, never as network input.
    pub achieved_freq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    /// Goal spectrum for the step just reached.
    pub goal: Spectrum,
    pub goal_freq: f64,
    pub done: bool,
}

/// One environment instance. Not shared between threads while running.
#[derive(Debug)]
pub struct ThereminEnv {
    cfg: EnvConfig,
    front: Arc<SpectralFrontEnd>,
    reward: RewardFn,
    robot: RobotState,
    antenna: [f64; 3],
    timeline: Option<GoalTimeline>,
    step: usize,
    rng: ChaCha8Rng,
}

impl ThereminEnv {
    pub fn new(cfg: EnvConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let front = Arc::new(SpectralFrontEnd::new(&cfg.transform, cfg.sample_rate)?);
        Self::with_front_end(cfg, front, seed)
    }

    /// Reuses an already-built front end (it must match `cfg.transform`).
    pub fn with_front_end(cfg: EnvConfig, front: Arc<SpectralFrontEnd>, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if front.config() != &cfg.transform || front.sample_rate() != cfg.sample_rate {
            return Err(Error::Config(
                "front end does not match the transform config".into(),
            ));
        }
        let reward = cfg.reward_fn(&front)?;
        let (robot, antenna) = match cfg.robot {
            RobotKind::Cart1D => (RobotState::cart(CART_START), CART_ANTENNA),
            RobotKind::Arm6D => (RobotState::arm(ARM_HOME), ARM_ANTENNA),
        };
        Ok(Self {
            cfg,
            front,
            reward,
            robot,
            antenna,
            timeline: None,
            step: EPISODE_STEPS,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn front_end(&self) -> &Arc<SpectralFrontEnd> {
        &self.front
    }

    pub fn reward_fn(&self) -> RewardFn {
        self.reward
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn antenna(&self) -> [f64; 3] {
        self.antenna
    }

    pub fn timeline(&self) -> Option<&GoalTimeline> {
        self.timeline.as_ref()
    }

    /// Steps taken in the current episode.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn is_done(&self) -> bool {
        self.step >= EPISODE_STEPS
    }

    /// Swaps the pitch map, e.g. to test a policy against a different instrument.
    pub fn set_pitch_map(&mut self, map: PitchMap) {
        self.cfg.pitch_map = map;
    }

    /// Replaces the robot state (same kind). The next observation reflects it.
    pub fn set_robot(&mut self, robot: RobotState) -> Result<()> {
        if robot.kind() != self.cfg.robot {
            return Err(Error::Config(
                "robot kind does not match the environment".into(),
            ));
        }
        self.robot = robot;
        Ok(())
    }

    pub fn tip_distance(&self) -> f64 {
        let tip = self.robot.tip();
        tip.iter()
            .zip(&self.antenna)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Current pitch, clamped to what the synthesizer can render.
    pub fn pitch(&self) -> f64 {
        let max = self.cfg.sample_rate / (2.0 * PARTIALS as f64) * (1.0 - 1e-9);
        distance_to_pitch(self.tip_distance(), self.cfg.pitch_map).clamp(MIN_PITCH, max)
    }

    /// Starts a new episode with a freshly sampled goal timeline.
    pub fn reset(&mut self) -> Result<Observation> {
        let notes = sample_goal_notes(&mut self.rng, self.cfg.goal_set, self.cfg.goal_mode);
        self.reset_with_notes(&notes)
    }

    /// Starts a new episode with the given eight goal notes.
    pub fn reset_with_notes(&mut self, notes: &[f64]) -> Result<Observation> {
        let timeline = GoalTimeline::from_notes(notes, &self.front)?;
        if self.cfg.reset_between_episodes {
            self.robot = match self.cfg.robot {
                RobotKind::Cart1D => RobotState::cart(CART_START),
                RobotKind::Arm6D => RobotState::arm(ARM_HOME),
            };
        }
        let base = match self.cfg.robot {
            RobotKind::Cart1D => CART_ANTENNA,
            RobotKind::Arm6D => ARM_ANTENNA,
        };
        let jitter = self.cfg.antenna_y_jitter;
        let dy = if jitter > 0.0 {
            self.rng.random_range(-jitter..=jitter)
        } else {
            0.0
        };
        self.antenna = [base[0], base[1] + dy, base[2]];
        self.timeline = Some(timeline);
        self.step = 0;
        self.observe()
    }

    fn observe(&mut self) -> Result<Observation> {
        let f = self.pitch();
        let tone = synth_tone(f, TONE_SECONDS, self.cfg.sample_rate)?;
        let heard = match self.cfg.snr_db {
            Some(snr) => {
                let noise = pink_noise(tone.len(), self.rng.next_u64(), self.cfg.sample_rate)?;
                mix_snr(&tone, &noise, snr)?
            }
            None => tone,
        };
        Ok(Observation {
            audio: self.front.transform(&heard)?,
            proprio: self.robot.proprio(self.cfg.actuation),
            achieved_freq: f,
        })
    }

    /// Applies `a`, observes the new tone and scores it against the goal of
    /// the step just reached.
    pub fn step(&mut self, a: &Action) -> Result<StepResult> {
        if self.is_done() || self.timeline.is_none() {
            return Err(Error::EpisodeDone);
        }
        let dim = self.cfg.action_dim();
        if a.values.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: a.values.len(),
            });
        }
        let a = Action::new(a.values.clone(), self.cfg.actuation);
        self.robot = self.robot.apply(&a)?;
        self.step += 1;
        let obs = self.observe()?;
        let timeline = self.timeline.as_ref().expect("checked above");
        let goal = timeline.goal_at(self.step).clone();
        let goal_freq = timeline.note_at(self.step);
        let reward = self.reward.evaluate(&obs.audio, &goal)?;
        Ok(StepResult {
            obs,
            reward,
            goal,
            goal_freq,
            done: self.is_done(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(env: &ThereminEnv) -> Action {
        Action::zeros(env.config().action_dim(), env.config().actuation)
    }

    #[test]
    fn episode_runs_200_steps() {
        let mut env = ThereminEnv::new(EnvConfig::cart1d(), 1).unwrap();
        env.reset().unwrap();
        let a = zero(&env);
        let mut last = None;
        for _ in 0..EPISODE_STEPS {
            last = Some(env.step(&a).unwrap());
        }
        assert!(last.unwrap().done);
        assert_eq!(env.step_index(), 200);
        assert!(matches!(env.step(&a), Err(Error::EpisodeDone)));
    }

    #[test]
    fn stepping_before_reset_fails() {
        let mut env = ThereminEnv::new(EnvConfig::cart1d(), 1).unwrap();
        let a = zero(&env);
        assert!(env.step(&a).is_err());
    }

    #[test]
    fn on_pitch_clean_template_reward_is_zero() {
        let cfg = EnvConfig {
            reward: RewardKind::TemplateMatch,
            snr_db: None,
            ..EnvConfig::cart1d()
        };
        let mut env = ThereminEnv::new(cfg, 3).unwrap();
        for k in 0..12 {
            let f = chromatic_goal_notes()[k];
            env.reset_with_notes(&[f; 8]).unwrap();
            let d = pitch_to_distance(f, PitchMap::Exponential).unwrap();
            env.set_robot(RobotState::cart(d)).unwrap();
            let r = env.step(&zero(&env)).unwrap();
            assert_eq!(r.reward, 0.0, "note {k}");
            assert!(success_step(r.obs.achieved_freq, r.goal_freq));
        }
    }

    #[test]
    fn two_percent_detuned_template_reward_is_negative() {
        let cfg = EnvConfig {
            reward: RewardKind::TemplateMatch,
            snr_db: None,
            ..EnvConfig::cart1d()
        };
        let mut env = ThereminEnv::new(cfg, 3).unwrap();
        for f in chromatic_goal_notes() {
            env.reset_with_notes(&[f; 8]).unwrap();
            let d = pitch_to_distance(f * 1.02, PitchMap::Exponential).unwrap();
            env.set_robot(RobotState::cart(d)).unwrap();
            assert_eq!(env.step(&zero(&env)).unwrap().reward, -1.0);
        }
    }

    #[test]
    fn cart_position_persists_across_resets() {
        let mut env = ThereminEnv::new(EnvConfig::cart1d(), 2).unwrap();
        env.reset().unwrap();
        let a = Action::new(vec![1.0], ActionSpace::Cartesian);
        for _ in 0..5 {
            env.step(&a).unwrap();
        }
        let before = env.robot().clone();
        env.reset().unwrap();
        assert_eq!(env.robot(), &before);
    }

    #[test]
    fn arm_resets_home_with_jittered_antenna() {
        let mut a = ThereminEnv::new(EnvConfig::arm(), 11).unwrap();
        let mut b = ThereminEnv::new(EnvConfig::arm(), 11).unwrap();
        for _ in 0..20 {
            a.reset().unwrap();
            b.reset().unwrap();
            assert_eq!(a.antenna(), b.antenna());
            assert!(a.antenna()[1].abs() <= 0.1);
            assert_eq!(a.robot(), &RobotState::arm(ARM_HOME));
            let act = Action::new(vec![1.0, 0.0, 0.0], ActionSpace::Cartesian);
            a.step(&act).unwrap();
            b.step(&act).unwrap();
        }
    }

    #[test]
    fn observation_shapes() {
        let mut env = ThereminEnv::new(
            EnvConfig {
                actuation: ActionSpace::Joint,
                ..EnvConfig::arm()
            },
            0,
        )
        .unwrap();
        let obs = env.reset().unwrap();
        assert_eq!(obs.proprio.len(), 6);
        assert_eq!(obs.audio.n_bins(), 60);
        let mut env = ThereminEnv::new(EnvConfig::arm(), 0).unwrap();
        assert_eq!(env.reset().unwrap().proprio.len(), 3);
    }

    #[test]
    fn argmax_reward_requires_cqt() {
        let cfg = EnvConfig {
            transform: TransformConfig::stft(),
            reward: RewardKind::ArgmaxCqt,
            ..EnvConfig::cart1d()
        };
        assert!(ThereminEnv::new(cfg, 0).is_err());
    }
}
