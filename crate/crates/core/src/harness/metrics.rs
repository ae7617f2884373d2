use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// One deterministic test episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestEpisode {
    pub successful_steps: usize,
    pub mean_reward: f64,
}

/// Test results of one seed, epoch by epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedHistory {
    pub seed: u64,
    pub epochs: Vec<Vec<TestEpisode>>,
}

impl SeedHistory {
    /// Mean successful steps over each epoch's test episodes.
    pub fn epoch_scores(&self) -> Vec<f64> {
        self.epochs
            .iter()
            .map(|eps| {
                eps.iter().map(|e| e.successful_steps as f64).sum::<f64>() / eps.len().max(1) as f64
            })
            .collect()
    }
}

/// Spread of per-seed scores at one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Percentile with linear interpolation between order statistics:
/// position `p·(n-1)` in the sorted values.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Ragged("percentile of no values".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("percentile {p} outside [0, 1]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Per-epoch median and quartiles of the seeds' scores.
pub fn aggregate(runs: &[Vec<f64>]) -> Result<Vec<EpochMetrics>> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Ragged("no runs to aggregate".into()))?;
    if let Some(bad) = runs.iter().find(|r| r.len() != first.len()) {
        return Err(Error::Ragged(format!(
            "runs have {} and {} epochs",
            first.len(),
            bad.len()
        )));
    }
    (0..first.len())
        .map(|e| {
            let col: Vec<f64> = runs.iter().map(|r| r[e]).collect();
            Ok(EpochMetrics {
                epoch: e,
                median: percentile(&col, 0.5)?,
                q25: percentile(&col, 0.25)?,
                q75: percentile(&col, 0.75)?,
            })
        })
        .collect()
}

pub const EPISODE_HEADER: &str = "epoch,episode_index,seed,successful_steps,mean_reward";
pub const AGGREGATE_HEADER: &str = "epoch,median,q25,q75";

pub fn episodes_csv(histories: &[SeedHistory]) -> String {
    let mut out = format!("{EPISODE_HEADER}\n");
    for h in histories {
        for (e, eps) in h.epochs.iter().enumerate() {
            for (i, ep) in eps.iter().enumerate() {
                writeln!(
                    out,
                    "{e},{i},{},{},{}",
                    h.seed, ep.successful_steps, ep.mean_reward
                )
                .expect("string write");
            }
        }
    }
    out
}

pub fn aggregate_csv(metrics: &[EpochMetrics]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for m in metrics {
        writeln!(out, "{},{},{},{}", m.epoch, m.median, m.q25, m.q75).expect("string write");
    }
    out
}

/// Writes `<stem>.csv` with every test episode and `<stem>_aggregate.csv`
/// with the per-epoch spread across seeds. Returns both paths.
pub fn export_metrics(
    histories: &[SeedHistory],
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    let scores: Vec<Vec<f64>> = histories.iter().map(SeedHistory::epoch_scores).collect();
    let metrics = aggregate(&scores)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let episodes = dir.join(format!("{stem}.csv"));
    let agg = dir.join(format!("{stem}_aggregate.csv"));
    std::fs::write(&episodes, episodes_csv(histories)).map_err(|e| Error::io(&episodes, e))?;
    std::fs::write(&agg, aggregate_csv(&metrics)).map_err(|e| Error::io(&agg, e))?;
    Ok((episodes, agg))
}
