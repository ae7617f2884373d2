//! Plays a melody with a saved cart policy and writes the audio plus a
//! per-step trace.
//!
//! `cargo run --release --example play_melody <policy> [notes] [out.wav]`

use tdg::agent::Policy;
use tdg::env::EnvConfig;
use tdg::harness::{parse_melody, play_melody};

fn main() -> tdg::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(policy_path) = args.next() else {
        eprintln!("usage: play_melody <policy> [notes] [out.wav]");
        std::process::exit(2);
    };
    let notes = parse_melody(
        &args
            .next()
            .unwrap_or_else(|| "A4,C5,E5,A5,G5,E5,C5,A4".into()),
    )?;
    let wav = args.next().unwrap_or_else(|| "melody.wav".into());

    let env = EnvConfig::cart1d();
    let policy = Policy::load(&policy_path, &env)?;
    let trace = play_melody(&policy, &notes, &env, 0)?;
    let csv = std::path::Path::new(&wav).with_extension("csv");
    trace.write(&wav, &csv)?;
    println!(
        "{} of {} steps on the note; wrote {wav} and {}",
        trace.successes(),
        trace.steps.len(),
        csv.display()
    );
    Ok(())
}
