use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::dsp::TransformKind;
use crate::env::{EnvConfig, GoalMode, GoalSet, PitchMap};
use crate::kinematics::ActionSpace;
use crate::{Error, Result};

/// Everything needed to train and evaluate one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub label: String,
    pub epochs: usize,
    pub train_episodes_per_epoch: usize,
    pub test_episodes_per_epoch: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Goal set used by test episodes when it differs from training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_goal_set: Option<GoalSet>,
    pub env: EnvConfig,
    pub agent: AgentConfig,
}

impl RunConfig {
    /// 30 epochs of 25 training and 10 test episodes over seeds 0..7.
    pub fn new(label: &str, env: EnvConfig) -> Self {
        Self {
            label: label.to_string(),
            epochs: 30,
            train_episodes_per_epoch: 25,
            test_episodes_per_epoch: 10,
            seeds: (0..7).collect(),
            out_dir: PathBuf::from("runs"),
            test_goal_set: None,
            env,
            agent: AgentConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0
            || self.train_episodes_per_epoch == 0
            || self.test_episodes_per_epoch == 0
        {
            return Err(Error::Config(
                "episode and epoch counts must be positive".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        self.env.validate()?;
        self.agent.validate()
    }

    pub fn test_env(&self) -> EnvConfig {
        let mut env = self.env.clone();
        if let Some(set) = self.test_goal_set {
            env.goal_set = set;
        }
        env
    }

    /// Keeps the first `k` seeds.
    pub fn with_seed_count(mut self, k: usize) -> Self {
        self.seeds = (0..k as u64).collect();
        self
    }

    /// Dotted paths of every setting that differs from `other`, ignoring
    /// the label and output directory.
    pub fn differing_fields(&self, other: &RunConfig) -> Result<Vec<String>> {
        let flat = |c: &RunConfig| -> Result<BTreeMap<String, String>> {
            let mut c = c.clone();
            c.label.clear();
            c.out_dir = PathBuf::new();
            let value = toml::Value::try_from(&c).map_err(|e| Error::Format(e.to_string()))?;
            let mut out = BTreeMap::new();
            flatten("", &value, &mut out);
            Ok(out)
        };
        let (a, b) = (flat(self)?, flat(other)?);
        let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
        keys.sort();
        keys.dedup();
        Ok(keys
            .into_iter()
            .filter(|k| a.get(*k) != b.get(*k))
            .cloned()
            .collect())
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut BTreeMap<String, String>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

/// Robot the experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Arm6D,
    Cart1D,
}

impl Platform {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arm" | "arm6d" => Ok(Platform::Arm6D),
            "cart" | "cart1d" => Ok(Platform::Cart1D),
            _ => Err(Error::Config(format!(
                "unknown platform {s:?}; expected arm6d or cart1d"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Platform::Arm6D => "arm6d",
            Platform::Cart1D => "cart1d",
        }
    }

    pub fn env(self) -> EnvConfig {
        match self {
            Platform::Arm6D => EnvConfig::arm(),
            Platform::Cart1D => EnvConfig::cart1d(),
        }
    }
}

pub const PRESET_NAMES: [&str; 8] = [
    "baseline",
    "transforms",
    "action-spaces",
    "her-ablation",
    "snr-sweep",
    "generalization",
    "tdg-ablation",
    "cart1d",
];

/// A named set of runs that vary one factor of a baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub platform: Platform,
    /// Setting varied across the runs; empty for a single-run preset.
    pub factor: String,
    #[serde(rename = "run")]
    pub runs: Vec<RunConfig>,
}

impl Preset {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: Preset = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        for r in &p.runs {
            r.validate()?;
        }
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn run(&self, label: &str) -> Option<&RunConfig> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn with_seed_count(mut self, k: usize) -> Self {
        self.runs = self
            .runs
            .into_iter()
            .map(|r| r.with_seed_count(k))
            .collect();
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        for r in &mut self.runs {
            r.epochs = epochs;
        }
        self
    }

    pub fn with_out_dir(mut self, dir: &Path) -> Self {
        for r in &mut self.runs {
            r.out_dir = dir.to_path_buf();
        }
        self
    }
}

/// The baseline: CQT, inverse kinematics, 38 dB SNR, hindsight relabeling.
pub fn baseline(platform: Platform) -> RunConfig {
    RunConfig::new("baseline", platform.env())
}

fn variant(label: &str, platform: Platform, edit: impl FnOnce(&mut RunConfig)) -> RunConfig {
    let mut r = baseline(platform);
    r.label = label.to_string();
    edit(&mut r);
    r
}

/// Builds a named preset on the default platform for that preset: the arm
/// for everything except `cart1d`.
pub fn preset(name: &str) -> Result<Preset> {
    let platform = if name == "cart1d" {
        Platform::Cart1D
    } else {
        Platform::Arm6D
    };
    preset_on(name, platform)
}

/// Builds a named preset on the given robot. Presets that vary the spectral
/// transform or the action space only exist for the arm.
pub fn preset_on(name: &str, platform: Platform) -> Result<Preset> {
    let arm_only = |what: &str| -> Result<()> {
        if platform == Platform::Cart1D {
            Err(Error::Config(format!(
                "preset {what} needs the arm platform"
            )))
        } else {
            Ok(())
        }
    };
    let (factor, runs) = match name {
        "baseline" => ("", vec![baseline(platform)]),
        "cart1d" => {
            if platform != Platform::Cart1D {
                return Err(Error::Config(
                    "preset cart1d runs on the cart platform".into(),
                ));
            }
            ("", vec![variant("cart1d", platform, |_| {})])
        }
        "transforms" => {
            arm_only(name)?;
            let runs = TransformKind::ALL
                .iter()
                .map(|&k| variant(k.name(), platform, |r| r.env.transform = k.default_config()))
                .collect();
            ("env.transform", runs)
        }
        "action-spaces" => {
            arm_only(name)?;
            let runs = [
                ("cartesian", ActionSpace::Cartesian),
                ("joint", ActionSpace::Joint),
            ]
            .into_iter()
            .map(|(l, s)| variant(l, platform, |r| r.env.actuation = s))
            .collect();
            ("env.actuation", runs)
        }
        "her-ablation" => {
            let runs = [("her", 4.0), ("no-her", 0.0)]
                .into_iter()
                .map(|(l, k)| variant(l, platform, |r| r.agent.her_ratio = k))
                .collect();
            ("agent.her_ratio", runs)
        }
        "snr-sweep" => {
            let runs = [38.0, 16.0, 8.0, 0.0]
                .into_iter()
                .map(|db| variant(&format!("snr-{db}"), platform, |r| r.env.snr_db = Some(db)))
                .collect();
            ("env.snr_db", runs)
        }
        "generalization" => (
            "test_goal_set | env.pitch_map",
            vec![
                variant("off-scale", platform, |r| {
                    r.test_goal_set = Some(GoalSet::OffScale)
                }),
                variant("linear-map", platform, |r| {
                    r.env.pitch_map = PitchMap::Linear
                }),
            ],
        ),
        "tdg-ablation" => {
            let runs = [
                ("time-dependent", GoalMode::TimeDependent),
                ("constant", GoalMode::Constant),
            ]
            .into_iter()
            .map(|(l, m)| variant(l, platform, |r| r.env.goal_mode = m))
            .collect();
            ("env.goal_mode", runs)
        }
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                available: PRESET_NAMES.join(", "),
            })
        }
    };
    Ok(Preset {
        name: name.to_string(),
        platform,
        factor: factor.to_string(),
        runs,
    })
}

/// Whether `preset` is valid on `platform`.
pub fn supports(name: &str, platform: Platform) -> bool {
    preset_on(name, platform).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_values() {
        let b = preset("baseline").unwrap();
        let r = &b.runs[0];
        assert_eq!(r.env.snr_db, Some(38.0));
        assert_eq!(r.env.transform.kind, TransformKind::Cqt);
        assert_eq!(r.env.actuation, ActionSpace::Cartesian);
        assert_eq!(r.agent.her_ratio, 4.0);
        assert_eq!(r.epochs * r.train_episodes_per_epoch, 750);
        assert_eq!(r.seeds.len(), 7);
    }

    #[test]
    fn snr_sweep_has_four_levels() {
        let p = preset("snr-sweep").unwrap();
        let levels: Vec<_> = p.runs.iter().map(|r| r.env.snr_db.unwrap()).collect();
        assert_eq!(levels, vec![38.0, 16.0, 8.0, 0.0]);
    }

    #[test]
    fn presets_vary_a_single_declared_factor() {
        for platform in [Platform::Arm6D, Platform::Cart1D] {
            let base = baseline(platform);
            for name in PRESET_NAMES {
                let Ok(p) = preset_on(name, platform) else {
                    continue;
                };
                let allowed: Vec<&str> = p.factor.split(" | ").collect();
                for r in &p.runs {
                    r.validate().unwrap();
                    let diff = r.differing_fields(&base).unwrap();
                    let mut factors: Vec<&str> = diff
                        .iter()
                        .map(|d| {
                            *allowed
                                .iter()
                                .find(|f| d == *f || d.starts_with(&format!("{f}.")))
                                .unwrap_or_else(|| {
                                    panic!("{name}/{}: {d} not in {allowed:?}", r.label)
                                })
                        })
                        .collect();
                    factors.dedup();
                    assert!(factors.len() <= 1, "{name}/{}: {diff:?}", r.label);
                }
            }
        }
    }

    #[test]
    fn her_ablation_differs_only_in_ratio() {
        let p = preset("her-ablation").unwrap();
        assert_eq!(
            p.runs[1].differing_fields(&p.runs[0]).unwrap(),
            vec!["agent.her_ratio".to_string()]
        );
    }

    #[test]
    fn cart1d_is_the_cart_baseline() {
        let p = preset("cart1d").unwrap();
        assert!(p.runs[0]
            .differing_fields(&baseline(Platform::Cart1D))
            .unwrap()
            .is_empty());
        assert!(!supports("transforms", Platform::Cart1D));
        assert!(supports("snr-sweep", Platform::Cart1D));
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("nope").unwrap_err().to_string();
        for n in PRESET_NAMES {
            assert!(err.contains(n), "{err}");
        }
    }

    #[test]
    fn toml_round_trip() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            let back = Preset::from_toml(&p.to_toml().unwrap()).unwrap();
            assert_eq!(back, p, "{name}");
        }
    }

    #[test]
    fn invalid_run_configs() {
        let mut r = baseline(Platform::Cart1D);
        r.seeds = vec![1, 1];
        assert!(r.validate().is_err());
        let mut r = baseline(Platform::Cart1D);
        r.epochs = 0;
        assert!(r.validate().is_err());
    }
}
