//! Lists the experiment presets and what each run changes relative to the
//! baseline of its platform.
//!
//! `cargo run --example presets`

use tdg::harness::{baseline, preset, PRESET_NAMES};

fn main() -> tdg::Result<()> {
    for name in PRESET_NAMES {
        let p = preset(name)?;
        let base = baseline(p.platform);
        let factor = if p.factor.is_empty() {
            "nothing"
        } else {
            &p.factor
        };
        println!("{name} ({}, varies {factor}):", p.platform.name());
        for run in &p.runs {
            let diff = run.differing_fields(&base)?;
            let diff = if diff.is_empty() {
                "baseline".to_string()
            } else {
                diff.join(", ")
            };
            println!("  {:<16} {diff}", run.label);
        }
    }
    Ok(())
}
