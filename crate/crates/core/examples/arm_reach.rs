//! Drives the 6-DOF arm's tip toward a point in front of the antenna with
//! Cartesian actions and prints the pitch it plays on the way.
//!
//! `cargo run --example arm_reach`

use tdg::env::{distance_to_pitch, PitchMap, ARM_ANTENNA};
use tdg::kinematics::{Action, ActionSpace, RobotState, TIP_STEP};

fn main() -> tdg::Result<()> {
    let mut arm = RobotState::arm_home();
    let target = [ARM_ANTENNA[0] - 0.35, 0.12, ARM_ANTENNA[2] + 0.1];
    let dist = |p: [f64; 3], q: [f64; 3]| (0..3).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>().sqrt();
    for step in 0..=24 {
        let tip = arm.tip();
        if step % 3 == 0 {
            let pitch = distance_to_pitch(dist(tip, ARM_ANTENNA), PitchMap::Exponential);
            println!(
                "step {step:>2}: tip ({:.3}, {:.3}, {:.3})  error {:.4} m  pitch {pitch:.1} Hz",
                tip[0],
                tip[1],
                tip[2],
                dist(tip, target)
            );
        }
        let a: Vec<f64> = (0..3)
            .map(|k| ((target[k] - tip[k]) / TIP_STEP).clamp(-1.0, 1.0))
            .collect();
        arm = arm.apply(&Action::new(a, ActionSpace::Cartesian))?;
    }
    Ok(())
}
