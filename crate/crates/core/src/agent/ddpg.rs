//! Goal-conditioned DDPG updates.
//!
//! The actor sees `state ++ goal`; the critic sees `state ++ goal ++ action`.
//! Critic targets bootstrap through the target networks at the *next* goal,
//! `y = r + γ·Q'(s', π'(s', g'), g')`, so a goal change inside the episode is
//! part of the transition rather than a terminal event.

use ndarray::{concatenate, s, Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::features::FeatureMap;
use super::her::Relabeled;
use super::replay::Episode;
use super::AgentConfig;
use crate::neuralnet::{Gradients, Mlp};
use crate::Result;

/// Network-ready minibatch; rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBatch {
    pub states: Array2<f64>,
    pub goals: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    pub next_goals: Array2<f64>,
    pub terminal: Vec<bool>,
}

impl TrainingBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Featurizes relabeled samples drawn from stored episodes.
    pub fn from_samples(samples: &[(&Episode, Relabeled)], features: &FeatureMap) -> Self {
        let n = samples.len();
        let (ep0, r0) = samples.first().expect("non-empty batch");
        let tr0 = ep0.transition(r0.step);
        let s_dim = tr0.audio.len() + tr0.proprio.len();
        let g_dim = tr0.goal.len();
        let a_dim = tr0.action.len();

        let mut b = TrainingBatch {
            states: Array2::zeros((n, s_dim)),
            goals: Array2::zeros((n, g_dim)),
            actions: Array2::zeros((n, a_dim)),
            rewards: Array1::zeros(n),
            next_states: Array2::zeros((n, s_dim)),
            next_goals: Array2::zeros((n, g_dim)),
            terminal: vec![false; n],
        };
        for (i, (ep, r)) in samples.iter().enumerate() {
            let tr = ep.transition(r.step);
            features.write_state(
                tr.audio,
                tr.proprio,
                b.states.row_mut(i).as_slice_mut().expect("standard layout"),
            );
            features.write_goal(
                r.goal(ep),
                b.goals.row_mut(i).as_slice_mut().expect("standard layout"),
            );
            b.actions
                .row_mut(i)
                .iter_mut()
                .zip(tr.action)
                .for_each(|(o, a)| *o = *a);
            b.rewards[i] = r.reward;
            features.write_state(
                tr.next_audio,
                tr.next_proprio,
                b.next_states
                    .row_mut(i)
                    .as_slice_mut()
                    .expect("standard layout"),
            );
            features.write_goal(
                r.next_goal(ep),
                b.next_goals
                    .row_mut(i)
                    .as_slice_mut()
                    .expect("standard layout"),
            );
            b.terminal[i] = tr.terminal;
        }
        b
    }

    pub fn actor_input(&self) -> Array2<f64> {
        concatenate![Axis(1), self.states, self.goals]
    }

    pub fn next_actor_input(&self) -> Array2<f64> {
        concatenate![Axis(1), self.next_states, self.next_goals]
    }
}

/// Bellman targets `r + γ·Q'(s', π'(s', g'), g')`, zero bootstrap on
/// terminal rows, clipped to the configured bounds.
pub fn critic_targets(
    critic_target: &Mlp,
    actor_target: &Mlp,
    batch: &TrainingBatch,
    cfg: &AgentConfig,
) -> Result<Array1<f64>> {
    let next_in = batch.next_actor_input();
    let (next_a, _) = actor_target.forward_batch(next_in.view())?;
    let (q_next, _) = critic_target.forward_batch(concatenate![Axis(1), next_in, next_a].view())?;
    let (lo, hi) = cfg.target_bounds();
    Ok((0..batch.len())
        .map(|i| {
            let boot = if batch.terminal[i] {
                0.0
            } else {
                cfg.gamma * q_next[[i, 0]]
            };
            (batch.rewards[i] + boot).clamp(lo, hi)
        })
        .collect())
}

/// Mean-squared error of `Q(s, a, g)` against fixed targets and its gradient.
pub fn critic_gradients(
    critic: &Mlp,
    batch: &TrainingBatch,
    targets: &Array1<f64>,
) -> Result<(f64, Gradients)> {
    let n = batch.len() as f64;
    let input = concatenate![Axis(1), batch.actor_input(), batch.actions];
    let (q, cache) = critic.forward_batch(input.view())?;
    let err = &q.column(0) - targets;
    let loss = err.mapv(|e| e * e).sum() / n;
    let dq = (err * (2.0 / n)).insert_axis(Axis(1));
    let (grads, _) = critic.backward_batch(&cache, dq.view())?;
    Ok((loss, grads))
}

/// `J = mean Q(s, π(s, g), g) - action_l2 · mean(π(s, g)²)` and its gradient
/// with respect to the actor's parameters, with the critic held fixed. The
/// penalty keeps the tanh output away from saturation.
pub fn actor_gradients(
    actor: &Mlp,
    critic: &Mlp,
    batch: &TrainingBatch,
    action_l2: f64,
) -> Result<(f64, Gradients)> {
    let n = batch.len() as f64;
    let input = batch.actor_input();
    let (a, actor_cache) = actor.forward_batch(input.view())?;
    let elems = a.len() as f64;
    let penalty = action_l2 * a.mapv(|v| v * v).sum() / elems;
    let (q, critic_cache) =
        critic.forward_batch(concatenate![Axis(1), input, a.view()].view())?;
    let objective = q.sum() / n - penalty;
    let dq = Array2::from_elem((batch.len(), 1), 1.0 / n);
    let (_, dx) = critic.backward_batch(&critic_cache, dq.view())?;
    let da = &dx.slice(s![.., input.ncols()..]) - &(a.mapv(|v| 2.0 * action_l2 * v / elems));
    let (grads, _) = actor.backward_batch(&actor_cache, da.view())?;
    Ok((objective, grads))
}

/// One critic step on the mean-squared Bellman error. Returns the loss
/// measured before the update.
pub fn critic_update(
    critic: &mut Mlp,
    critic_target: &Mlp,
    actor_target: &Mlp,
    batch: &TrainingBatch,
    cfg: &AgentConfig,
) -> Result<f64> {
    let targets = critic_targets(critic_target, actor_target, batch, cfg)?;
    let (loss, grads) = critic_gradients(critic, batch, &targets)?;
    critic.adam_step(&grads, cfg.lr)?;
    Ok(loss)
}

/// One actor step ascending `J`. Returns `J` measured before the update.
pub fn actor_update(
    actor: &mut Mlp,
    critic: &Mlp,
    batch: &TrainingBatch,
    cfg: &AgentConfig,
) -> Result<f64> {
    let (objective, mut grads) = actor_gradients(actor, critic, batch, cfg.action_l2)?;
    // Adam descends.
    grads.scale(-1.0);
    actor.adam_step(&grads, cfg.lr)?;
    Ok(objective)
}

/// Deterministic actor output, or the exploratory version: a uniform random
/// action with probability `random_action_prob`, otherwise the actor output
/// plus Gaussian noise, clamped to [-1, 1].
pub fn select_action<R: Rng + ?Sized>(
    actor: &Mlp,
    input: &[f64],
    explore: bool,
    cfg: &AgentConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let a = actor.predict(input)?;
    if !explore {
        return Ok(a);
    }
    if rng.random::<f64>() < cfg.random_action_prob {
        return Ok((0..a.len()).map(|_| rng.random_range(-1.0..=1.0)).collect());
    }
    let noise = Normal::new(0.0, cfg.action_noise_scale).expect("non-negative noise scale");
    Ok(a.into_iter()
        .map(|v| (v + noise.sample(rng)).clamp(-1.0, 1.0))
        .collect())
}
