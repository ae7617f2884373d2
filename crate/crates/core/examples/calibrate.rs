//! Calibrates the spectral-distance threshold for each front end and shows
//! the distances it separates.
//!
//! `cargo run --example calibrate`

use tdg::dsp::{SpectralFrontEnd, TransformKind, SAMPLE_RATE};
use tdg::env::{calibrate_epsilon_with, chromatic_goal_notes, detuning_distance};

fn main() -> tdg::Result<()> {
    for kind in TransformKind::ALL {
        let front = SpectralFrontEnd::new(&kind.default_config(), SAMPLE_RATE)?;
        let eps = calibrate_epsilon_with(&front)?;
        let (mut near, mut far) = (0.0f64, f64::INFINITY);
        for f in chromatic_goal_notes() {
            for r in [1.0035, 1.0 / 1.0035] {
                near = near.max(detuning_distance(&front, f, r)?);
            }
            for r in [1.01, 1.0 / 1.01] {
                far = far.min(detuning_distance(&front, f, r)?);
            }
        }
        println!(
            "{:>4}: epsilon {eps:.5}  largest 0.35% distance {near:.5}  smallest 1% distance {far:.5}",
            kind.name()
        );
    }
    Ok(())
}
