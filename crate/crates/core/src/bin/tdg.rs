use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use tdg::agent::Policy;
use tdg::dsp::{SpectralFrontEnd, TransformKind, SAMPLE_RATE};
use tdg::env::calibrate_epsilon_with;
use tdg::harness::{self, Platform, Preset, OUT_DIR_ENV, PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "tdg",
    about = "Goal-conditioned theremin playing workbench",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train every configuration of a preset and write CSVs and policies.
    Train {
        #[arg(long)]
        preset: Option<String>,
        /// Load the preset from a TOML file instead of the built-in table.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// arm6d or cart1d; defaults to the preset's own platform.
        #[arg(long)]
        platform: Option<String>,
        /// Use seeds 0..k.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play a melody with a saved policy and write a WAV plus a per-step CSV.
    Play {
        #[arg(long)]
        policy: PathBuf,
        /// Comma-separated note names or frequencies, at most eight.
        #[arg(long)]
        notes: String,
        #[arg(long)]
        out: PathBuf,
        /// Preset whose environment the policy was trained in.
        #[arg(long, default_value = "cart1d")]
        preset: String,
        #[arg(long)]
        platform: Option<String>,
        /// Configuration label within the preset; defaults to the first.
        #[arg(long)]
        run: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the template-matching threshold for a transform.
    CalibrateEpsilon {
        #[arg(long, default_value = "cqt")]
        transform: String,
    },
    /// List the built-in presets.
    ListPresets,
    /// Write every built-in preset as a TOML file into a directory.
    WriteConfigs {
        #[arg(long, default_value = "configs")]
        dir: PathBuf,
    },
}

fn load_preset(name: &str, platform: Option<&str>) -> Result<Preset> {
    Ok(match platform {
        Some(p) => harness::preset_on(name, Platform::parse(p)?)?,
        None => harness::preset(name)?,
    })
}

fn out_root(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

fn train(
    preset: Option<String>,
    config: Option<PathBuf>,
    platform: Option<String>,
    seeds: Option<usize>,
    epochs: Option<usize>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut p = match (preset, config) {
        (_, Some(path)) => Preset::load(&path)?,
        (Some(name), None) => load_preset(&name, platform.as_deref())?,
        (None, None) => bail!("pass --preset <name> or --config <file>"),
    };
    if let Some(k) = seeds {
        p = p.with_seed_count(k);
    }
    if let Some(e) = epochs {
        p = p.with_epochs(e);
    }
    if let Some(dir) = out_root(out) {
        p = p.with_out_dir(&dir);
    }
    for run in &p.runs {
        run.validate()
            .with_context(|| format!("configuration {} of preset {}", run.label, p.name))?;
    }
    for s in harness::run_preset(&p)? {
        let dir = p.runs[0].out_dir.join(&p.name);
        println!(
            "{}/{}: final median {:.1} successful steps over {} seeds -> {}",
            p.name,
            s.label,
            s.final_median(),
            s.runs.len(),
            dir.display()
        );
    }
    Ok(())
}

fn play(
    policy: &Path,
    notes: &str,
    out: &Path,
    preset: &str,
    platform: Option<&str>,
    run: Option<&str>,
    seed: u64,
) -> Result<()> {
    let p = load_preset(preset, platform)?;
    let cfg = match run {
        Some(label) => p
            .run(label)
            .with_context(|| format!("preset {preset} has no configuration {label}"))?,
        None => &p.runs[0],
    };
    let policy = Policy::load(policy, &cfg.env)?;
    let melody = harness::parse_melody(notes)?;
    let trace = harness::play_melody(&policy, &melody, &cfg.env, seed)?;
    let csv = out.with_extension("csv");
    trace.write(out, &csv)?;
    println!(
        "{} of {} steps on pitch; wrote {} and {}",
        trace.successes(),
        trace.steps.len(),
        out.display(),
        csv.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Train {
            preset,
            config,
            platform,
            seeds,
            epochs,
            out,
        } => train(preset, config, platform, seeds, epochs, out)?,
        Cmd::Play {
            policy,
            notes,
            out,
            preset,
            platform,
            run,
            seed,
        } => play(
            &policy,
            &notes,
            &out,
            &preset,
            platform.as_deref(),
            run.as_deref(),
            seed,
        )?,
        Cmd::CalibrateEpsilon { transform } => {
            let kind = TransformKind::parse(&transform)?;
            let front = SpectralFrontEnd::new(&kind.default_config(), SAMPLE_RATE)?;
            println!("{}", calibrate_epsilon_with(&front)?);
        }
        Cmd::ListPresets => {
            for name in PRESET_NAMES {
                let p = harness::preset(name)?;
                let labels: Vec<&str> = p.runs.iter().map(|r| r.label.as_str()).collect();
                println!("{name:<16} {:<7} {}", p.platform.name(), labels.join(", "));
            }
        }
        Cmd::WriteConfigs { dir } => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for name in PRESET_NAMES {
                let path = dir.join(format!("{name}.toml"));
                harness::preset(name)?.save(&path)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}
