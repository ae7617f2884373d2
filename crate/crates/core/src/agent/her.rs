//! Hindsight relabeling over goal timelines.
//!
//! With the "future" strategy a stored transition `t` keeps its goal with
//! probability `1/(k+1)` and otherwise takes the spectrum actually reached at a
//! later step `t' ∈ (t, T]` as both `g_t` and `g_{t+1}`. The reward is always
//! recomputed from the achieved spectrum, never copied.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::replay::Episode;
use crate::env::RewardFn;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HerMode {
    /// `t'` uniform over every later observation.
    PerTransition,
    /// `t'` uniform over the later segment ends, so every transition of a
    /// segment draws from the same set of "settled" notes.
    SegmentCoherent,
}

/// A sampled transition after relabeling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relabeled {
    pub step: usize,
    /// Observation whose audio replaces the goal; `None` keeps the original.
    pub goal_obs: Option<usize>,
    pub reward: f64,
}

impl Relabeled {
    pub fn is_relabeled(&self) -> bool {
        self.goal_obs.is_some()
    }

    pub fn goal<'a>(&self, ep: &'a Episode) -> &'a [f64] {
        match self.goal_obs {
            Some(i) => &ep.audio[i],
            None => ep.goal_of(self.step),
        }
    }

    pub fn next_goal<'a>(&self, ep: &'a Episode) -> &'a [f64] {
        match self.goal_obs {
            Some(i) => &ep.audio[i],
            None => ep.goal_of(self.step + 1),
        }
    }
}

/// Probability that a transition is relabeled for a relabeled:original ratio `k`.
pub fn relabel_probability(ratio: f64) -> f64 {
    if ratio <= 0.0 {
        0.0
    } else {
        ratio / (ratio + 1.0)
    }
}

fn segment_ends_after(ep: &Episode, t: usize) -> Vec<usize> {
    let last = ep.len();
    (t + 1..=last)
        .filter(|&i| i == last || ep.goal_ids[i] != ep.goal_ids[i + 1])
        .collect()
}

/// Relabels transition `t` of `ep`.
pub fn relabel_transition<R: Rng + ?Sized>(
    ep: &Episode,
    t: usize,
    reward_fn: &RewardFn,
    ratio: f64,
    mode: HerMode,
    rng: &mut R,
) -> Result<Relabeled> {
    if ep.is_empty() {
        return Err(Error::EmptyEpisode);
    }
    if t >= ep.len() {
        return Err(Error::Config(format!(
            "step {t} outside an episode of {}",
            ep.len()
        )));
    }
    let p = relabel_probability(ratio);
    if p > 0.0 && rng.random::<f64>() < p {
        let future = match mode {
            HerMode::PerTransition => rng.random_range(t + 1..=ep.len()),
            HerMode::SegmentCoherent => {
                let ends = segment_ends_after(ep, t);
                ends[rng.random_range(0..ends.len())]
            }
        };
        let reward = reward_fn.compute(&ep.audio[t + 1], &ep.audio[future])?;
        Ok(Relabeled {
            step: t,
            goal_obs: Some(future),
            reward,
        })
    } else {
        Ok(Relabeled {
            step: t,
            goal_obs: None,
            reward: ep.rewards[t],
        })
    }
}

/// Relabels every transition of an episode independently.
pub fn her_relabel<R: Rng + ?Sized>(
    ep: &Episode,
    reward_fn: &RewardFn,
    ratio: f64,
    mode: HerMode,
    rng: &mut R,
) -> Result<Vec<Relabeled>> {
    if ep.is_empty() {
        return Err(Error::EmptyEpisode);
    }
    (0..ep.len())
        .map(|t| relabel_transition(ep, t, reward_fn, ratio, mode, rng))
        .collect()
}
