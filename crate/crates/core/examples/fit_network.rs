//! Fits a small network to a sine with Adam, the same engine the actor and
//! critic use.
//!
//! `cargo run --example fit_network`

use ndarray::Array2;
use tdg::neuralnet::{Mlp, MlpShape, OutputActivation};

fn main() -> tdg::Result<()> {
    let mut net = Mlp::init(&MlpShape::standard(1, 1, OutputActivation::Identity), 3);
    let xs: Vec<f64> = (0..64).map(|i| -3.0 + 6.0 * i as f64 / 63.0).collect();
    let x = Array2::from_shape_vec((xs.len(), 1), xs.clone()).unwrap();
    for epoch in 0..=2000 {
        let (y, cache) = net.forward_batch(x.view())?;
        let mut dy = y.clone();
        let mut loss = 0.0;
        for (i, &xi) in xs.iter().enumerate() {
            let err = y[[i, 0]] - xi.sin();
            loss += err * err / xs.len() as f64;
            dy[[i, 0]] = 2.0 * err / xs.len() as f64;
        }
        let (g, _) = net.backward_batch(&cache, dy.view())?;
        net.adam_step(&g, 1e-3)?;
        if epoch % 400 == 0 {
            println!("epoch {epoch:>4}: mse {loss:.5}");
        }
    }
    for x in [-2.0, -0.5, 1.0, 2.5] {
        println!(
            "f({x:+.1}) = {:+.3}  sin = {:+.3}",
            net.predict(&[x])?[0],
            f64::sin(x)
        );
    }
    Ok(())
}
