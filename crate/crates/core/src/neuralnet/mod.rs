//! Dense networks with exact reverse-mode gradients and Adam.
//!
//! The actor and critic are both `input → 64 → 64 → 64 → output` ReLU
//! networks; the actor squashes its output with `tanh`. Everything runs in
//! 64-bit floats so finite-difference checks stay tight.

mod io;
mod mlp;

pub use io::{read_params, write_params};
pub use mlp::{
    polyak_blend, ForwardCache, Gradients, Layer, Mlp, MlpShape, OutputActivation, ADAM_BETA1,
    ADAM_BETA2, ADAM_EPS,
};
