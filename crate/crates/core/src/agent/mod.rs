//! Goal-conditioned DDPG with hindsight relabeling.
//!
//! [`Agent`] owns the actor, critic, their target copies and the replay
//! buffer. A training episode is collected with exploration noise, stored,
//! and followed by a fixed number of minibatch updates and one Polyak blend
//! of the target networks.

mod ddpg;
mod features;
mod her;
mod replay;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ddpg::{
    actor_gradients, actor_update, critic_gradients, critic_targets, critic_update, select_action,
    TrainingBatch,
};
pub use features::FeatureMap;
pub use her::{her_relabel, relabel_probability, relabel_transition, HerMode, Relabeled};
pub use replay::{Episode, EpisodeRecorder, ReplayBuffer, Transition};

use crate::dsp::Spectrum;
use crate::env::{success_step, EnvConfig, Observation, RewardFn, ThereminEnv};
use crate::kinematics::Action;
use crate::neuralnet::{polyak_blend, Mlp, MlpShape, OutputActivation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub lr: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub updates_per_episode: usize,
    pub buffer_capacity: usize,
    pub hidden: Vec<usize>,
    /// Probability of a uniform random action during training.
    pub random_action_prob: f64,
    /// Standard deviation of the Gaussian noise added to actor outputs.
    pub action_noise_scale: f64,
    /// Relabeled:original transitions; 0 disables hindsight relabeling.
    pub her_ratio: f64,
    pub her_mode: HerMode,
    /// Clip Bellman targets to `[-1/(1-γ), 0]`, the range of returns for
    /// rewards in {-1, 0}.
    pub clip_targets: bool,
    /// Weight of the mean squared action subtracted from the actor objective.
    pub action_l2: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.995,
            lr: 1e-3,
            tau: 0.05,
            batch_size: 128,
            updates_per_episode: 40,
            buffer_capacity: 5000,
            hidden: vec![64, 64, 64],
            random_action_prob: 0.3,
            action_noise_scale: 0.2,
            her_ratio: 4.0,
            her_mode: HerMode::PerTransition,
            clip_targets: true,
            action_l2: 1.0,
        }
    }
}

impl AgentConfig {
    pub fn target_bounds(&self) -> (f64, f64) {
        if self.clip_targets {
            (-1.0 / (1.0 - self.gamma), 0.0)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1]");
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch_size and buffer_capacity must be positive");
        }
        if !(0.0..=1.0).contains(&self.random_action_prob) {
            return bad("random_action_prob must lie in [0, 1]");
        }
        if !(self.action_noise_scale >= 0.0) || !(self.her_ratio >= 0.0) {
            return bad("action_noise_scale and her_ratio must be non-negative");
        }
        if !(self.action_l2 >= 0.0) {
            return bad("action_l2 must be non-negative");
        }
        Ok(())
    }
}

/// Losses from one round of updates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrainStats {
    pub critic_loss: f64,
    pub actor_objective: f64,
    pub updates: usize,
}

/// What happened during one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    /// Steps whose pitch lay within 0.7 % of the goal note.
    pub successful_steps: usize,
    pub mean_reward: f64,
    pub achieved_freqs: Vec<f64>,
    pub goal_freqs: Vec<f64>,
}

/// A frozen actor together with its input scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub actor: Mlp,
    pub features: FeatureMap,
}

impl Policy {
    pub fn act(&self, obs: &Observation, goal: &Spectrum) -> Result<Vec<f64>> {
        let x = self
            .features
            .actor_input(&obs.audio.bins, &obs.proprio, &goal.bins);
        self.actor.predict(&x)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.actor.save(path)
    }

    /// Loads actor weights and rebuilds the scaling for `env`.
    pub fn load(path: impl AsRef<Path>, env: &EnvConfig) -> Result<Self> {
        let actor = Mlp::load(path)?;
        let features = FeatureMap::for_env(env)?;
        let expected = 2 * env.transform.n_bins + env.proprio_dim();
        if actor.input_dim() != expected || actor.output_dim() != env.action_dim() {
            return Err(Error::Dimension {
                expected,
                actual: actor.input_dim(),
            });
        }
        Ok(Self { actor, features })
    }

    /// Runs one deterministic episode; the environment must already be reset.
    pub fn rollout(&self, env: &mut ThereminEnv, first: Observation) -> Result<EpisodeOutcome> {
        run_episode(env, first, |obs, goal| self.act(obs, goal), |_, _, _| {})
    }
}

fn run_episode(
    env: &mut ThereminEnv,
    first: Observation,
    mut choose: impl FnMut(&Observation, &Spectrum) -> Result<Vec<f64>>,
    mut record: impl FnMut(&[f64], f64, &Observation),
) -> Result<EpisodeOutcome> {
    let mut obs = first;
    let mut out = EpisodeOutcome {
        successful_steps: 0,
        mean_reward: 0.0,
        achieved_freqs: Vec::new(),
        goal_freqs: Vec::new(),
    };
    let mut total = 0.0;
    while !env.is_done() {
        let timeline = env.timeline().ok_or(Error::EpisodeDone)?;
        let goal = timeline.goal_at(env.step_index()).clone();
        let a = choose(&obs, &goal)?;
        let res = env.step(&Action::new(a.clone(), env.config().actuation))?;
        record(&a, res.reward, &res.obs);
        total += res.reward;
        out.successful_steps += usize::from(success_step(res.obs.achieved_freq, res.goal_freq));
        out.achieved_freqs.push(res.obs.achieved_freq);
        out.goal_freqs.push(res.goal_freq);
        obs = res.obs;
    }
    out.mean_reward = total / out.achieved_freqs.len().max(1) as f64;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Agent {
    cfg: AgentConfig,
    features: FeatureMap,
    reward_fn: RewardFn,
    actor: Mlp,
    critic: Mlp,
    actor_target: Mlp,
    critic_target: Mlp,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    episodes: u64,
}

impl Agent {
    /// Networks sized for `n_bins`-bin spectra, `proprio_dim` proprioceptive
    /// inputs and `action_dim` actions.
    pub fn new(
        n_bins: usize,
        proprio_dim: usize,
        action_dim: usize,
        features: FeatureMap,
        reward_fn: RewardFn,
        cfg: AgentConfig,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        if features.proprio_dim() != proprio_dim {
            return Err(Error::Dimension {
                expected: proprio_dim,
                actual: features.proprio_dim(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor_in = 2 * n_bins + proprio_dim;
        let actor_shape = MlpShape {
            input: actor_in,
            hidden: cfg.hidden.clone(),
            output: action_dim,
            output_activation: OutputActivation::Tanh,
        };
        let critic_shape = MlpShape {
            input: actor_in + action_dim,
            hidden: cfg.hidden.clone(),
            output: 1,
            output_activation: OutputActivation::Identity,
        };
        let actor = Mlp::init(&actor_shape, rng.random());
        let critic = Mlp::init(&critic_shape, rng.random());
        Ok(Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            features,
            reward_fn,
            cfg,
            rng,
            episodes: 0,
        })
    }

    /// Agent matched to an environment's observation and action sizes.
    pub fn for_env(env: &ThereminEnv, cfg: AgentConfig, seed: u64) -> Result<Self> {
        let ec = env.config();
        let features = FeatureMap::with_front_end(ec, env.front_end())?;
        Self::new(
            ec.transform.n_bins,
            ec.proprio_dim(),
            ec.action_dim(),
            features,
            env.reward_fn(),
            cfg,
            seed,
        )
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    pub fn actor_target(&self) -> &Mlp {
        &self.actor_target
    }

    pub fn critic_target(&self) -> &Mlp {
        &self.critic_target
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    pub fn policy(&self) -> Policy {
        Policy {
            actor: self.actor.clone(),
            features: self.features.clone(),
        }
    }

    pub fn act(&mut self, obs: &Observation, goal: &Spectrum, explore: bool) -> Result<Vec<f64>> {
        let x = self
            .features
            .actor_input(&obs.audio.bins, &obs.proprio, &goal.bins);
        select_action(&self.actor, &x, explore, &self.cfg, &mut self.rng)
    }

    /// Drops every stored episode, keeping the networks.
    pub fn clear_buffer(&mut self) {
        self.buffer = ReplayBuffer::new(self.cfg.buffer_capacity);
    }

    pub fn store(&mut self, ep: Episode) -> Result<()> {
        self.buffer.push(ep)?;
        Ok(())
    }

    /// Draws `batch_size` relabeled transitions uniformly from the buffer.
    pub fn sample_batch(&mut self) -> Result<TrainingBatch> {
        if self.buffer.is_empty() {
            return Err(Error::EmptyEpisode);
        }
        let mut samples = Vec::with_capacity(self.cfg.batch_size);
        for _ in 0..self.cfg.batch_size {
            let ep = self
                .buffer
                .get(self.rng.random_range(0..self.buffer.len()))
                .expect("index in range");
            let t = self.rng.random_range(0..ep.len());
            let r = relabel_transition(
                ep,
                t,
                &self.reward_fn,
                self.cfg.her_ratio,
                self.cfg.her_mode,
                &mut self.rng,
            )?;
            samples.push((ep.as_ref(), r));
        }
        Ok(TrainingBatch::from_samples(&samples, &self.features))
    }

    /// The updates that follow a stored episode: `updates_per_episode`
    /// critic and actor steps, then one target blend.
    pub fn train_on_episode(&mut self) -> Result<TrainStats> {
        let mut stats = TrainStats::default();
        for _ in 0..self.cfg.updates_per_episode {
            let batch = self.sample_batch()?;
            stats.critic_loss += critic_update(
                &mut self.critic,
                &self.critic_target,
                &self.actor_target,
                &batch,
                &self.cfg,
            )?;
            stats.actor_objective +=
                actor_update(&mut self.actor, &self.critic, &batch, &self.cfg)?;
            stats.updates += 1;
        }
        if stats.updates > 0 {
            stats.critic_loss /= stats.updates as f64;
            stats.actor_objective /= stats.updates as f64;
            polyak_blend(&mut self.actor_target, &self.actor, self.cfg.tau)?;
            polyak_blend(&mut self.critic_target, &self.critic, self.cfg.tau)?;
        }
        Ok(stats)
    }

    /// Resets `env`, collects one exploratory episode, stores it and trains.
    pub fn train_episode(&mut self, env: &mut ThereminEnv) -> Result<(EpisodeOutcome, TrainStats)> {
        let first = env.reset()?;
        let timeline = env.timeline().ok_or(Error::EpisodeDone)?;
        let mut rec = EpisodeRecorder::start(self.episodes, &first, timeline);
        let outcome = {
            let mut choose = |obs: &Observation, goal: &Spectrum| {
                let x = self
                    .features
                    .actor_input(&obs.audio.bins, &obs.proprio, &goal.bins);
                select_action(&self.actor, &x, true, &self.cfg, &mut self.rng)
            };
            run_episode(env, first, &mut choose, |a, r, o| rec.push(a, r, o))?
        };
        self.episodes += 1;
        self.store(rec.finish()?)?;
        let stats = self.train_on_episode()?;
        Ok((outcome, stats))
    }

    /// Resets `env` and runs the current actor without noise or learning.
    pub fn test_episode(&self, env: &mut ThereminEnv) -> Result<EpisodeOutcome> {
        let first = env.reset()?;
        self.policy().rollout(env, first)
    }
}
