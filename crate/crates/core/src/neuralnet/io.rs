//! Flat binary parameter files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "TDGMLP01"
//! n_sizes    u32      number of layer widths (layers + 1)
//! sizes      u64 × n_sizes
//! activation u8       0 = identity, 1 = tanh
//! per layer: weights f64 × (out·in) row-major, then bias f64 × out
//! ```
//!
//! Adam moments are not stored.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Layer, Mlp, OutputActivation};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"TDGMLP01";
const MAX_WIDTH: u64 = 1 << 20;

pub fn write_params<W: Write>(net: &Mlp, mut w: W) -> Result<()> {
    let sizes = net.shape().sizes();
    w.write_all(MAGIC)?;
    w.write_all(&(sizes.len() as u32).to_le_bytes())?;
    for s in &sizes {
        w.write_all(&(*s as u64).to_le_bytes())?;
    }
    let act: u8 = match net.output_activation() {
        OutputActivation::Identity => 0,
        OutputActivation::Tanh => 1,
    };
    w.write_all(&[act])?;
    for v in net.flat_params() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_params<R: Read>(mut r: R) -> Result<Mlp> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let n_sizes = u32::from_le_bytes(b4) as usize;
    if !(2..=64).contains(&n_sizes) {
        return Err(Error::Format(format!("implausible layer count {n_sizes}")));
    }
    let mut sizes = Vec::with_capacity(n_sizes);
    let mut b8 = [0u8; 8];
    for _ in 0..n_sizes {
        r.read_exact(&mut b8)?;
        let s = u64::from_le_bytes(b8);
        if s == 0 || s > MAX_WIDTH {
            return Err(Error::Format(format!("implausible layer width {s}")));
        }
        sizes.push(s as usize);
    }
    let mut act = [0u8; 1];
    r.read_exact(&mut act)?;
    let activation = match act[0] {
        0 => OutputActivation::Identity,
        1 => OutputActivation::Tanh,
        other => return Err(Error::Format(format!("unknown activation tag {other}"))),
    };
    let mut next = || -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let mut layers = Vec::with_capacity(n_sizes - 1);
    for w in sizes.windows(2) {
        let (n_in, n_out) = (w[0], w[1]);
        let weights = (0..n_in * n_out)
            .map(|_| next())
            .collect::<Result<Vec<_>>>()?;
        let bias = (0..n_out).map(|_| next()).collect::<Result<Vec<_>>>()?;
        layers.push(Layer {
            w: Array2::from_shape_vec((n_out, n_in), weights)
                .map_err(|e| Error::Format(e.to_string()))?,
            b: Array1::from(bias),
        });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after parameters".into()));
    }
    Mlp::from_layers(layers, activation)
}

impl Mlp {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_params(self, &mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        read_params(bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
