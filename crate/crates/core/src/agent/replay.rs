use std::collections::VecDeque;
use std::sync::Arc;

use crate::env::{GoalTimeline, Observation};
use crate::{Error, Result};

/// One recorded episode, stored compactly: observation `i` (0..=T) has its
/// audio bins, proprioception and goal id; step `t` (0..T) has an action and
/// a reward for reaching observation `t+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: u64,
    pub audio: Vec<Vec<f64>>,
    pub proprio: Vec<Vec<f64>>,
    pub achieved_freqs: Vec<f64>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    /// Distinct goal spectra used in the episode.
    pub goal_table: Vec<Vec<f64>>,
    /// Index into `goal_table` for every observation.
    pub goal_ids: Vec<usize>,
}

/// A borrowed `(s_t, a_t, g_t, s_{t+1}, g_{t+1})` tuple plus bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub audio: &'a [f64],
    pub proprio: &'a [f64],
    pub action: &'a [f64],
    pub goal: &'a [f64],
    pub next_audio: &'a [f64],
    pub next_proprio: &'a [f64],
    pub next_goal: &'a [f64],
    /// Spectrum actually reached after the action; the same data as `next_audio`.
    pub achieved_next: &'a [f64],
    pub reward: f64,
    pub achieved_freq_next: f64,
    pub episode_id: u64,
    pub step_index: usize,
    /// The goal changes between `t` and `t+1`.
    pub segment_boundary: bool,
    /// Last step of the episode.
    pub terminal: bool,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn goal_of(&self, obs_index: usize) -> &[f64] {
        &self.goal_table[self.goal_ids[obs_index]]
    }

    pub fn transition(&self, t: usize) -> Transition<'_> {
        Transition {
            audio: &self.audio[t],
            proprio: &self.proprio[t],
            action: &self.actions[t],
            goal: self.goal_of(t),
            next_audio: &self.audio[t + 1],
            next_proprio: &self.proprio[t + 1],
            next_goal: self.goal_of(t + 1),
            achieved_next: &self.audio[t + 1],
            reward: self.rewards[t],
            achieved_freq_next: self.achieved_freqs[t + 1],
            episode_id: self.id,
            step_index: t,
            segment_boundary: self.goal_ids[t] != self.goal_ids[t + 1],
            terminal: t + 1 == self.len(),
        }
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition<'_>> {
        (0..self.len()).map(|t| self.transition(t))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.actions.len();
        if n == 0 {
            return Err(Error::EmptyEpisode);
        }
        let obs_ok = self.audio.len() == n + 1
            && self.proprio.len() == n + 1
            && self.achieved_freqs.len() == n + 1
            && self.goal_ids.len() == n + 1;
        if !obs_ok || self.rewards.len() != n {
            return Err(Error::Config(
                "episode arrays have inconsistent lengths".into(),
            ));
        }
        if self.goal_ids.iter().any(|&g| g >= self.goal_table.len()) {
            return Err(Error::Config("goal id out of range".into()));
        }
        Ok(())
    }
}

/// Accumulates an episode step by step while an environment runs.
#[derive(Debug)]
pub struct EpisodeRecorder {
    ep: Episode,
}

impl EpisodeRecorder {
    /// Starts recording from the reset observation. Goal ids follow the
    /// timeline's 25-step segments.
    pub fn start(id: u64, first: &Observation, timeline: &GoalTimeline) -> Self {
        let goal_table = timeline
            .segment_spectra()
            .iter()
            .map(|s| s.bins.clone())
            .collect();
        Self {
            ep: Episode {
                id,
                audio: vec![first.audio.bins.clone()],
                proprio: vec![first.proprio.clone()],
                achieved_freqs: vec![first.achieved_freq],
                actions: Vec::new(),
                rewards: Vec::new(),
                goal_table,
                goal_ids: vec![GoalTimeline::segment_of(0)],
            },
        }
    }

    pub fn push(&mut self, action: &[f64], reward: f64, next: &Observation) {
        let step = self.ep.actions.len() + 1;
        self.ep.actions.push(action.to_vec());
        self.ep.rewards.push(reward);
        self.ep.audio.push(next.audio.bins.clone());
        self.ep.proprio.push(next.proprio.clone());
        self.ep.achieved_freqs.push(next.achieved_freq);
        self.ep.goal_ids.push(GoalTimeline::segment_of(step));
    }

    pub fn finish(self) -> Result<Episode> {
        self.ep.validate()?;
        Ok(self.ep)
    }
}

/// Ring buffer of whole episodes; the oldest episode is evicted first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    episodes: VecDeque<Arc<Episode>>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            episodes: VecDeque::with_capacity(capacity.min(1024)),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    /// Stores an episode, returning the evicted one when full.
    pub fn push(&mut self, ep: Episode) -> Result<Option<Arc<Episode>>> {
        ep.validate()?;
        let evicted = if self.episodes.len() == self.capacity {
            self.episodes.pop_front()
        } else {
            None
        };
        self.episodes.push_back(Arc::new(ep));
        Ok(evicted)
    }

    pub fn get(&self, i: usize) -> Option<&Arc<Episode>> {
        self.episodes.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Episode>> {
        self.episodes.iter()
    }

    pub fn transitions(&self) -> usize {
        self.episodes.iter().map(|e| e.len()).sum()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Small synthetic episode: audio is a 3-bin one-hot of `step % 3`.
    pub(crate) fn toy_episode(id: u64, steps: usize) -> Episode {
        let one_hot = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i % 3] = 1.0;
            v
        };
        Episode {
            id,
            audio: (0..=steps).map(one_hot).collect(),
            proprio: (0..=steps).map(|i| vec![i as f64]).collect(),
            achieved_freqs: (0..=steps).map(|i| 440.0 + i as f64).collect(),
            actions: (0..steps).map(|i| vec![(i as f64 * 0.1).sin()]).collect(),
            rewards: vec![-1.0; steps],
            goal_table: vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            goal_ids: (0..=steps).map(|i| usize::from(i >= steps / 2)).collect(),
        }
    }

    #[test]
    fn ring_semantics() {
        let mut buf = ReplayBuffer::new(3);
        for id in 0..3 {
            assert!(buf.push(toy_episode(id, 4)).unwrap().is_none());
        }
        let evicted = buf.push(toy_episode(3, 4)).unwrap().unwrap();
        assert_eq!(evicted.id, 0);
        assert_eq!(buf.len(), 3);
        assert_eq!(buf.get(0).unwrap().id, 1);
        assert_eq!(buf.get(2).unwrap().id, 3);
    }

    #[test]
    fn empty_episode_rejected() {
        let mut ep = toy_episode(0, 4);
        ep.actions.clear();
        ep.rewards.clear();
        assert!(matches!(
            ReplayBuffer::new(2).push(ep),
            Err(Error::EmptyEpisode)
        ));
    }

    #[test]
    fn transition_view() {
        let ep = toy_episode(7, 6);
        let tr = ep.transition(2);
        assert_eq!(tr.next_audio, &[1.0, 0.0, 0.0]);
        assert_eq!(tr.achieved_next, tr.next_audio);
        assert!(tr.segment_boundary);
        assert!(!tr.terminal);
        assert!(ep.transition(5).terminal);
        assert_eq!(ep.transitions().count(), 6);
    }
}
