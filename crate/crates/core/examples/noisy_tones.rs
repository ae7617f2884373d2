//! Mixes pink noise into a tone at several SNRs and shows how often the CQT
//! peak still lands on the right bin.
//!
//! `cargo run --example noisy_tones`

use tdg::dsp::{
    mix_snr, pink_noise, snr_db, synth_tone, SpectralFrontEnd, TransformConfig, SAMPLE_RATE,
    TONE_SECONDS,
};
use tdg::env::chromatic_goal_notes;

fn main() -> tdg::Result<()> {
    let front = SpectralFrontEnd::new(&TransformConfig::cqt(), SAMPLE_RATE)?;
    let notes = chromatic_goal_notes();
    println!("{:>6} {:>10} {:>12}", "SNR", "measured", "peak kept");
    for target in [38.0, 16.0, 8.0, 0.0, -6.0] {
        let mut kept = 0;
        let mut measured = 0.0;
        let trials = 200;
        for t in 0..trials {
            let note = notes[t % notes.len()];
            let tone = synth_tone(note, TONE_SECONDS, SAMPLE_RATE)?;
            let noise = pink_noise(tone.len(), t as u64, SAMPLE_RATE)?;
            let mixed = mix_snr(&tone, &noise, target)?;
            let residual: Vec<f64> = mixed
                .samples
                .iter()
                .zip(&tone.samples)
                .map(|(m, s)| m - s)
                .collect();
            measured += snr_db(&tone.samples, &residual) / trials as f64;
            kept +=
                usize::from(front.transform(&mixed)?.argmax() == front.transform(&tone)?.argmax());
        }
        println!(
            "{target:>6.0} {measured:>10.2} {:>11.1}%",
            100.0 * kept as f64 / trials as f64
        );
    }
    Ok(())
}
