//! Synthesizes one theremin tone per goal note and prints where each
//! front end puts its energy.
//!
//! `cargo run --example tone_spectra [out.wav]`

use tdg::dsp::wav::write_pcm16;
use tdg::dsp::{
    synth_sequence, synth_tone, SpectralFrontEnd, TransformKind, SAMPLE_RATE, TONE_SECONDS,
};
use tdg::env::chromatic_goal_notes;

fn main() -> tdg::Result<()> {
    let fronts: Vec<_> = TransformKind::ALL
        .iter()
        .map(|k| SpectralFrontEnd::new(&k.default_config(), SAMPLE_RATE))
        .collect::<tdg::Result<_>>()?;

    print!("{:>9}", "note Hz");
    for f in &fronts {
        print!("{:>8} peak", f.kind().name());
    }
    println!();
    for note in chromatic_goal_notes() {
        let tone = synth_tone(note, TONE_SECONDS, SAMPLE_RATE)?;
        print!("{note:>9.2}");
        for f in &fronts {
            print!("{:>13}", f.transform(&tone)?.argmax());
        }
        println!();
    }

    if let Some(path) = std::env::args().nth(1) {
        let scale = synth_sequence(&chromatic_goal_notes(), 0.25, SAMPLE_RATE)?;
        write_pcm16(&path, &scale)?;
        println!("wrote the scale to {path}");
    }
    Ok(())
}
