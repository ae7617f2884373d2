use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn fresh_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Identity,
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MlpShape {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
    pub output_activation: OutputActivation,
}

impl MlpShape {
    /// Three hidden ReLU layers of 64 units.
    pub fn standard(input: usize, output: usize, output_activation: OutputActivation) -> Self {
        Self {
            input,
            hidden: vec![64, 64, 64],
            output,
            output_activation,
        }
    }

    /// Layer widths from input to output.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.hidden.len() + 2);
        s.push(self.input);
        s.extend(&self.hidden);
        s.push(self.output);
        s
    }
}

/// One affine layer; `w` is `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            w: Array2::zeros((n_out, n_in)),
            b: Array1::zeros(n_out),
        }
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.w.ncols(), self.w.nrows())
    }

    pub fn n_in(&self) -> usize {
        self.w.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.w.nrows()
    }
}

/// Parameter gradients, shaped like the owning network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.w *= k;
            l.b *= k;
        }
    }

    /// Flattened in the same order as [`Mlp::flat_params`].
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(l.b.iter()).copied())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(l.b.iter()).all(|&v| v == 0.0))
    }
}

/// Activations recorded by a forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    /// Input to every layer (the first entry is the network input).
    inputs: Vec<Array2<f64>>,
    /// Pre-activation of every layer.
    pre: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }

    pub fn batch_size(&self) -> usize {
        self.output.nrows()
    }
}

#[derive(Debug, Clone)]
struct AdamState {
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: u64,
}

/// A multilayer perceptron together with its Adam moment estimates.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<Layer>,
    output_activation: OutputActivation,
    adam: AdamState,
    /// Bumped on every parameter change so stale caches can be detected.
    version: u64,
}

impl PartialEq for Mlp {
    /// Compares parameters and activation only.
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.output_activation == other.output_activation
    }
}

impl Mlp {
    /// Glorot-uniform weights `U(±√(6/(fan_in+fan_out)))`, zero biases.
    pub fn init(shape: &MlpShape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = shape.sizes();
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let bound = (6.0 / (n_in + n_out) as f64).sqrt();
                Layer {
                    w: Array2::from_shape_simple_fn((n_out, n_in), || {
                        rng.random_range(-bound..=bound)
                    }),
                    b: Array1::zeros(n_out),
                }
            })
            .collect();
        Self::from_layers(layers, shape.output_activation).expect("shapes chain by construction")
    }

    /// Builds a network from explicit layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<Layer>, output_activation: OutputActivation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        for l in &layers {
            if l.b.len() != l.n_out() {
                return Err(Error::Dimension {
                    expected: l.n_out(),
                    actual: l.b.len(),
                });
            }
        }
        for pair in layers.windows(2) {
            if pair[0].n_out() != pair[1].n_in() {
                return Err(Error::Dimension {
                    expected: pair[0].n_out(),
                    actual: pair[1].n_in(),
                });
            }
        }
        let zeros: Vec<Layer> = layers.iter().map(Layer::zeros_like).collect();
        Ok(Self {
            adam: AdamState {
                m: zeros.clone(),
                v: zeros,
                t: 0,
            },
            layers,
            output_activation,
            version: fresh_version(),
        })
    }

    pub fn shape(&self) -> MlpShape {
        MlpShape {
            input: self.input_dim(),
            hidden: self.layers[..self.layers.len() - 1]
                .iter()
                .map(Layer::n_out)
                .collect(),
            output: self.output_dim(),
            output_activation: self.output_activation,
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").n_out()
    }

    pub fn adam_steps(&self) -> u64 {
        self.adam.t
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Weights then bias for each layer, row-major.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(l.b.iter()).copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                actual: values.len(),
            });
        }
        let mut it = values.iter();
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = *it.next().expect("length checked");
            }
        }
        self.version = fresh_version();
        Ok(())
    }

    /// Forward pass on a batch (`batch × input`).
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for (i, l) in self.layers.iter().enumerate() {
            let z = a.dot(&l.w.t()) + &l.b;
            let next = if i == last {
                match self.output_activation {
                    OutputActivation::Identity => z.clone(),
                    OutputActivation::Tanh => z.mapv(f64::tanh),
                }
            } else {
                z.mapv(|v| v.max(0.0))
            };
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        let cache = ForwardCache {
            version: self.version,
            inputs,
            pre,
            output: a.clone(),
        };
        Ok((a, cache))
    }

    /// Forward pass on a single input vector.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("contiguous row");
        let (y, cache) = self.forward_batch(view)?;
        Ok((y.into_raw_vec_and_offset().0, cache))
    }

    /// Output only, without keeping a cache.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.0)
    }

    /// Reverse-mode pass. `dy` is the gradient of a scalar loss with respect to
    /// every output row; parameter gradients are summed over the batch.
    /// Returns the parameter gradients and the gradient with respect to the input.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        dy: ArrayView2<f64>,
    ) -> Result<(Gradients, Array2<f64>)> {
        if cache.version != self.version {
            return Err(Error::StaleCache("network changed since the forward pass"));
        }
        if cache.pre.len() != self.layers.len() {
            return Err(Error::StaleCache(
                "cache was produced by a different network",
            ));
        }
        if dy.dim() != cache.output.dim() {
            return Err(Error::Dimension {
                expected: cache.output.len(),
                actual: dy.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut dz = match self.output_activation {
            OutputActivation::Identity => dy.to_owned(),
            OutputActivation::Tanh => {
                let mut d = dy.to_owned();
                d.zip_mut_with(&cache.output, |g, y| *g *= 1.0 - y * y);
                d
            }
        };
        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        for i in (0..=last).rev() {
            let l = &self.layers[i];
            let gw = dz.t().dot(&cache.inputs[i]);
            let gb = dz.sum_axis(Axis(0));
            let da = dz.dot(&l.w);
            grads.push(Layer { w: gw, b: gb });
            if i == 0 {
                grads.reverse();
                return Ok((Gradients { layers: grads }, da));
            }
            let mut next = da;
            next.zip_mut_with(&cache.pre[i - 1], |g, z| {
                if *z <= 0.0 {
                    *g = 0.0;
                }
            });
            dz = next;
        }
        unreachable!("loop returns at the input layer")
    }

    /// Reverse-mode pass for a single-row cache.
    pub fn backward(&self, cache: &ForwardCache, dy: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let view = ArrayView2::from_shape((1, dy.len()), dy).map_err(|_| Error::Dimension {
            expected: self.output_dim(),
            actual: dy.len(),
        })?;
        let (g, dx) = self.backward_batch(cache, view)?;
        Ok((g, dx.into_raw_vec_and_offset().0))
    }

    /// One Adam step descending along `g`.
    pub fn adam_step(&mut self, g: &Gradients, lr: f64) -> Result<()> {
        if g.layers.len() != self.layers.len()
            || g.layers
                .iter()
                .zip(&self.layers)
                .any(|(a, b)| a.w.dim() != b.w.dim() || a.b.len() != b.b.len())
        {
            return Err(Error::Config(
                "gradient shapes do not match the network".into(),
            ));
        }
        self.adam.t += 1;
        let t = self.adam.t as i32;
        let c1 = 1.0 - ADAM_BETA1.powi(t);
        let c2 = 1.0 - ADAM_BETA2.powi(t);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        };
        for (((l, m), v), g) in self
            .layers
            .iter_mut()
            .zip(&mut self.adam.m)
            .zip(&mut self.adam.v)
            .zip(&g.layers)
        {
            ndarray::Zip::from(&mut l.w)
                .and(&mut m.w)
                .and(&mut v.w)
                .and(&g.w)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut l.b)
                .and(&mut m.b)
                .and(&mut v.b)
                .and(&g.b)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
        self.version = fresh_version();
        Ok(())
    }
}

/// `target ← (1-τ)·target + τ·online`, elementwise.
pub fn polyak_blend(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
    }
    if target.shape() != online.shape() {
        return Err(Error::Config("target and online shapes differ".into()));
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        t.w.zip_mut_with(&o.w, |a, &b| *a = (1.0 - tau) * *a + tau * b);
        t.b.zip_mut_with(&o.b, |a, &b| *a = (1.0 - tau) * *a + tau * b);
    }
    target.version = fresh_version();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn scalar_chain(w: f64, b: f64, depth: usize, act: OutputActivation) -> Mlp {
        let layers = (0..depth)
            .map(|_| Layer {
                w: array![[w]],
                b: array![b],
            })
            .collect();
        Mlp::from_layers(layers, act).unwrap()
    }

    #[test]
    fn zero_net_outputs_zero() {
        let layers = vec![
            Layer::zeros(4, 64),
            Layer::zeros(64, 64),
            Layer::zeros(64, 64),
            Layer::zeros(64, 2),
        ];
        let net = Mlp::from_layers(layers, OutputActivation::Identity).unwrap();
        assert_eq!(net.predict(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn hand_traced_scalar_chain() {
        // x=1 → relu(2·1-1)=1 → relu(2·1-1)=1 → relu(1)=1 → 2·1-1 = 1
        let net = scalar_chain(2.0, -1.0, 4, OutputActivation::Identity);
        assert_eq!(net.predict(&[1.0]).unwrap(), vec![1.0]);
        // x=3 → 5 → 9 → 17 → 33
        assert_eq!(net.predict(&[3.0]).unwrap(), vec![33.0]);
        // x=0.25 → relu(-0.5)=0 → relu(-1)=0 → 0 → -1
        assert_eq!(net.predict(&[0.25]).unwrap(), vec![-1.0]);
        let tanh = scalar_chain(2.0, -1.0, 4, OutputActivation::Tanh);
        assert!((tanh.predict(&[1.0]).unwrap()[0] - 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn tanh_output_in_open_interval() {
        let net = Mlp::init(&MlpShape::standard(5, 3, OutputActivation::Tanh), 4);
        for i in 0..50 {
            let x: Vec<f64> = (0..5).map(|j| ((i * 7 + j) as f64).sin() * 3.0).collect();
            assert!(net.predict(&x).unwrap().iter().all(|y| y.abs() < 1.0));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let net = Mlp::init(&MlpShape::standard(5, 1, OutputActivation::Identity), 0);
        assert!(matches!(
            net.predict(&[1.0; 4]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn init_is_seeded_glorot() {
        let shape = MlpShape::standard(10, 2, OutputActivation::Tanh);
        let a = Mlp::init(&shape, 17);
        let b = Mlp::init(&shape, 17);
        assert_eq!(a.flat_params(), b.flat_params());
        assert_ne!(a.flat_params(), Mlp::init(&shape, 18).flat_params());
        for l in a.layers() {
            assert!(l.b.iter().all(|&v| v == 0.0));
            let bound = (6.0 / (l.n_in() + l.n_out()) as f64).sqrt();
            assert!(l.w.iter().all(|w| w.abs() <= bound));
        }
    }

    #[test]
    fn zero_cotangent_zero_gradient() {
        let net = Mlp::init(&MlpShape::standard(3, 2, OutputActivation::Tanh), 1);
        let (_, cache) = net.forward(&[0.3, -0.2, 0.9]).unwrap();
        let (g, dx) = net.backward(&cache, &[0.0, 0.0]).unwrap();
        assert!(g.is_zero());
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_cache_rejected() {
        let mut net = Mlp::init(&MlpShape::standard(3, 1, OutputActivation::Identity), 1);
        let (_, cache) = net.forward(&[0.3, -0.2, 0.9]).unwrap();
        let (g, _) = net.backward(&cache, &[1.0]).unwrap();
        net.adam_step(&g, 1e-3).unwrap();
        assert!(matches!(
            net.backward(&cache, &[1.0]),
            Err(Error::StaleCache(_))
        ));
        let other = Mlp::init(&MlpShape::standard(3, 1, OutputActivation::Identity), 2);
        assert!(other.backward(&cache, &[1.0]).is_err());
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut net = Mlp::init(&MlpShape::standard(3, 1, OutputActivation::Identity), 5);
        let before = net.flat_params();
        let (_, cache) = net.forward(&[0.1, 0.2, 0.3]).unwrap();
        let (g, _) = net.backward(&cache, &[0.0]).unwrap();
        net.adam_step(&g, 1e-3).unwrap();
        assert_eq!(net.flat_params(), before);
        assert_eq!(net.adam_steps(), 1);
    }

    #[test]
    fn adam_first_step_is_lr_times_sign() {
        let mut net = Mlp::init(&MlpShape::standard(2, 1, OutputActivation::Identity), 5);
        let before = net.flat_params();
        let mut g = Gradients {
            layers: net.layers().iter().map(Layer::zeros_like).collect(),
        };
        for (i, l) in g.layers.iter_mut().enumerate() {
            let s = if i % 2 == 0 { 0.37 } else { -2.5 };
            l.w.fill(s);
            l.b.fill(s);
        }
        let signs: Vec<f64> = g.flat().iter().map(|v| v.signum()).collect();
        net.adam_step(&g, 1e-3).unwrap();
        for ((a, b), s) in net.flat_params().iter().zip(&before).zip(&signs) {
            assert!(((a - b) + 1e-3 * s).abs() < 1e-9, "{a} {b} {s}");
        }
    }

    #[test]
    fn polyak_endpoints_and_scalar() {
        let shape = MlpShape::standard(3, 1, OutputActivation::Identity);
        let online = Mlp::init(&shape, 1);
        let mut target = Mlp::init(&shape, 2);
        let orig = target.clone();
        polyak_blend(&mut target, &online, 0.0).unwrap();
        assert_eq!(target, orig);
        polyak_blend(&mut target, &online, 1.0).unwrap();
        assert_eq!(target, online);

        let mut t = scalar_chain(0.0, 0.0, 1, OutputActivation::Identity);
        let o = scalar_chain(1.0, 1.0, 1, OutputActivation::Identity);
        polyak_blend(&mut t, &o, 0.05).unwrap();
        assert!((t.layers()[0].w[[0, 0]] - 0.05).abs() < 1e-15);
        assert!(polyak_blend(&mut t, &o, 1.5).is_err());
    }
}
