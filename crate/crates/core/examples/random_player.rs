//! Runs a uniformly random policy on the cart theremin and reports how often
//! it hits the goal note by accident.
//!
//! `cargo run --example random_player [episodes]`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdg::env::{success_step, EnvConfig, ThereminEnv};
use tdg::kinematics::Action;

fn main() -> tdg::Result<()> {
    let episodes: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let cfg = EnvConfig::cart1d();
    let space = cfg.actuation;
    let mut env = ThereminEnv::new(cfg, 7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut rewarded, mut hits, mut steps) = (0, 0, 0);
    for _ in 0..episodes {
        env.reset()?;
        loop {
            let a = Action::new(vec![rng.random_range(-1.0..=1.0)], space);
            let r = env.step(&a)?;
            steps += 1;
            rewarded += usize::from(r.reward == 0.0);
            hits += usize::from(success_step(r.obs.achieved_freq, r.goal_freq));
            if r.done {
                break;
            }
        }
    }
    println!("{episodes} episodes, {steps} steps");
    println!("reward 0 on {rewarded} steps, within the pitch tolerance on {hits}");
    Ok(())
}
