use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Preset, RunConfig};
use super::metrics::{aggregate, export_metrics, EpochMetrics, SeedHistory, TestEpisode};
use crate::agent::{Agent, Policy};
use crate::env::{PitchMap, ThereminEnv};
use crate::Result;

/// Outcome of training one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub history: SeedHistory,
    pub policy: Policy,
}

/// Independent streams for the training environment, the test environment
/// and the agent, all derived from the run seed.
fn stream_seeds(seed: u64) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [rng.random(), rng.random(), rng.random()]
}

/// One seed's agent with its training and test environments.
#[derive(Debug)]
pub struct Trainer {
    cfg: RunConfig,
    seed: u64,
    train_env: ThereminEnv,
    test_env: ThereminEnv,
    agent: Agent,
    history: SeedHistory,
}

impl Trainer {
    pub fn new(cfg: &RunConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let [train_seed, test_seed, agent_seed] = stream_seeds(seed);
        let train_env = ThereminEnv::new(cfg.env.clone(), train_seed)?;
        let test_env =
            ThereminEnv::with_front_end(cfg.test_env(), train_env.front_end().clone(), test_seed)?;
        let agent = Agent::for_env(&train_env, cfg.agent.clone(), agent_seed)?;
        Ok(Self {
            cfg: cfg.clone(),
            seed,
            train_env,
            test_env,
            agent,
            history: SeedHistory {
                seed,
                epochs: Vec::new(),
            },
        })
    }

    /// Runs the training episodes with exploration and learning, then the
    /// test episodes on the separate test environment without either.
    pub fn run_epoch(&mut self) -> Result<&[TestEpisode]> {
        for _ in 0..self.cfg.train_episodes_per_epoch {
            self.agent.train_episode(&mut self.train_env)?;
        }
        let tests = (0..self.cfg.test_episodes_per_epoch)
            .map(|_| {
                self.agent
                    .test_episode(&mut self.test_env)
                    .map(|o| TestEpisode {
                        successful_steps: o.successful_steps,
                        mean_reward: o.mean_reward,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        self.history.epochs.push(tests);
        Ok(self.history.epochs.last().expect("just pushed"))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn history(&self) -> &SeedHistory {
        &self.history
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn agent_mut(&mut self) -> &mut Agent {
        &mut self.agent
    }

    pub fn train_env_mut(&mut self) -> &mut ThereminEnv {
        &mut self.train_env
    }

    pub fn test_env_mut(&mut self) -> &mut ThereminEnv {
        &mut self.test_env
    }

    /// Switches both environments to another distance-to-pitch map.
    pub fn set_pitch_map(&mut self, map: PitchMap) {
        self.train_env.set_pitch_map(map);
        self.test_env.set_pitch_map(map);
    }

    /// Starts a fresh history, e.g. before retraining on a changed task.
    pub fn reset_history(&mut self) {
        self.history.epochs.clear();
    }

    pub fn into_run(self) -> SeedRun {
        SeedRun {
            policy: self.agent.policy(),
            history: self.history,
        }
    }
}

/// Trains one seed for the configured number of epochs.
pub fn train_run(cfg: &RunConfig, seed: u64) -> Result<SeedRun> {
    train_run_with(cfg, seed, |_, _| {})
}

/// [`train_run`] with a callback receiving each epoch's mean test score.
pub fn train_run_with(
    cfg: &RunConfig,
    seed: u64,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<SeedRun> {
    let mut trainer = Trainer::new(cfg, seed)?;
    for epoch in 0..cfg.epochs {
        trainer.run_epoch()?;
        let score = *trainer.history().epoch_scores().last().expect("epoch ran");
        on_epoch(epoch, score);
    }
    Ok(trainer.into_run())
}

/// Results of every seed of one configuration.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub label: String,
    pub runs: Vec<SeedRun>,
    pub metrics: Vec<EpochMetrics>,
}

impl RunSummary {
    pub fn histories(&self) -> Vec<SeedHistory> {
        self.runs.iter().map(|r| r.history.clone()).collect()
    }

    /// Median across seeds at the last epoch.
    pub fn final_median(&self) -> f64 {
        self.metrics.last().map_or(0.0, |m| m.median)
    }
}

/// Trains all seeds of `cfg`, in parallel when workers are available.
pub fn run_config(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&s| train_run(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let scores: Vec<Vec<f64>> = runs.iter().map(|r| r.history.epoch_scores()).collect();
    Ok(RunSummary {
        label: cfg.label.clone(),
        metrics: aggregate(&scores)?,
        runs,
    })
}

/// Writes the CSVs and one policy file per seed under `dir`.
pub fn write_summary(summary: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    let (episodes, agg) = export_metrics(&summary.histories(), dir, &summary.label)?;
    let mut written = vec![episodes, agg];
    for r in &summary.runs {
        let path = dir.join(format!("{}_seed{}.policy", summary.label, r.history.seed));
        r.policy.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// Runs every configuration of a preset and writes its outputs to
/// `<out_dir>/<preset>/`.
pub fn run_preset(preset: &Preset) -> Result<Vec<RunSummary>> {
    for r in &preset.runs {
        r.validate()?;
    }
    preset
        .runs
        .iter()
        .map(|cfg| {
            let summary = run_config(cfg)?;
            write_summary(&summary, &cfg.out_dir.join(&preset.name))?;
            Ok(summary)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::AgentConfig;
    use crate::harness::config::{baseline, Platform};

    pub(crate) fn tiny(label: &str) -> RunConfig {
        let mut r = baseline(Platform::Cart1D);
        r.label = label.to_string();
        r.epochs = 2;
        r.train_episodes_per_epoch = 1;
        r.test_episodes_per_epoch = 2;
        r.seeds = vec![0, 1];
        r.agent = AgentConfig {
            batch_size: 8,
            updates_per_episode: 2,
            hidden: vec![8],
            ..AgentConfig::default()
        };
        r
    }

    #[test]
    fn run_shapes_and_bounds() {
        let s = run_config(&tiny("t")).unwrap();
        assert_eq!(s.runs.len(), 2);
        assert_eq!(s.metrics.len(), 2);
        for r in &s.runs {
            assert_eq!(r.history.epochs.len(), 2);
            for e in &r.history.epochs {
                assert_eq!(e.len(), 2);
                assert!(e.iter().all(|t| t.successful_steps <= 200));
            }
        }
    }

    #[test]
    fn seeds_are_isolated() {
        let cfg = tiny("t");
        let alone = train_run(&cfg, 1).unwrap();
        let mut both = cfg.clone();
        both.seeds = vec![1, 0];
        let s = run_config(&both).unwrap();
        assert_eq!(s.runs[0].history, alone.history);
        assert_eq!(s.runs[0].policy, alone.policy);
    }

    #[test]
    fn invalid_config_fails_before_work() {
        let mut cfg = tiny("t");
        cfg.test_episodes_per_epoch = 0;
        assert!(train_run(&cfg, 0).is_err());
    }
}
