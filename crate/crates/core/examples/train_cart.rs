//! Trains the cart theremin player for a few epochs, prints test scores and
//! saves the policy.
//!
//! `cargo run --release --example train_cart [epochs] [policy-out]`

use tdg::harness::{preset, Trainer};

fn main() -> tdg::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let out = args.next().unwrap_or_else(|| "cart.policy".into());

    let cfg = preset("cart1d")?.runs.remove(0);
    let mut trainer = Trainer::new(&cfg, 0)?;
    for epoch in 0..epochs {
        let tests = trainer.run_epoch()?;
        let mean =
            tests.iter().map(|t| t.successful_steps as f64).sum::<f64>() / tests.len() as f64;
        println!("epoch {epoch:>3}: {mean:6.1} of 200 test steps on the goal note");
    }
    trainer.agent().policy().save(&out)?;
    println!("policy saved to {out}");
    Ok(())
}
