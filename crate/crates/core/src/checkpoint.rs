//! Binary model checkpoints.
//!
//! Little-endian layout, version 1:
//!
//! ```text
//! magic        8 bytes  "RAREAECK"
//! version      u32      1
//! seed         u64
//! widths       4 × u64  input, hidden1, hidden2, latent
//! image dims   3 × u64  channels, height, width
//! 6 layers     each: activation u8 (0 identity, 1 relu, 2 sigmoid),
//!              rows u64, cols u64, rows·cols f64 weights (row-major,
//!              fan_out × fan_in), rows f64 biases
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{Activation, AeDims, Layer, MlpAutoencoder};
use crate::tensor::{DenseMatrix, ImageDims};

pub const MAGIC: &[u8; 8] = b"RAREAECK";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: MlpAutoencoder,
    pub image_dims: ImageDims,
}

impl Checkpoint {
    pub fn new(model: MlpAutoencoder, image_dims: ImageDims) -> Result<Self> {
        if image_dims.len() != model.input_dim() {
            return Err(Error::Shape(format!(
                "image dims {image_dims:?} do not flatten to model input {}",
                model.input_dim()
            )));
        }
        Ok(Self { model, image_dims })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(96 + self.model.parameter_count() * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.model.seed().to_le_bytes());
        let d = self.model.dims();
        for w in [d.input, d.hidden1, d.hidden2, d.latent] {
            out.extend_from_slice(&(w as u64).to_le_bytes());
        }
        let i = self.image_dims;
        for w in [i.channels, i.height, i.width] {
            out.extend_from_slice(&(w as u64).to_le_bytes());
        }
        for layer in self.model.layers() {
            out.push(layer.activation.tag());
            out.extend_from_slice(&(layer.fan_out() as u64).to_le_bytes());
            out.extend_from_slice(&(layer.fan_in() as u64).to_le_bytes());
            for v in layer.weight.as_slice().iter().chain(&layer.bias) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic header".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let seed = read_u64(&mut r)?;
        let mut w = [0usize; 4];
        for x in &mut w {
            *x = read_usize(&mut r)?;
        }
        let dims = AeDims::new(w[0], w[1], w[2], w[3]);
        let image_dims = ImageDims::new(
            read_usize(&mut r)?,
            read_usize(&mut r)?,
            read_usize(&mut r)?,
        );

        let mut layers = Vec::with_capacity(6);
        for _ in 0..6 {
            let mut tag = [0u8; 1];
            read_exact(&mut r, &mut tag)?;
            let activation = match tag[0] {
                0 => Activation::Identity,
                1 => Activation::Relu,
                2 => Activation::Sigmoid,
                t => return Err(Error::Checkpoint(format!("unknown activation tag {t}"))),
            };
            let rows = read_usize(&mut r)?;
            let cols = read_usize(&mut r)?;
            let n = rows
                .checked_mul(cols)
                .filter(|n| n.saturating_add(rows).saturating_mul(8) <= r.len())
                .ok_or_else(|| Error::Checkpoint("truncated layer payload".into()))?;
            let weights = read_f64s(&mut r, n)?;
            let bias = read_f64s(&mut r, rows)?;
            layers.push(Layer {
                weight: DenseMatrix::from_vec(rows, cols, weights)?,
                bias,
                activation,
            });
        }
        if !r.is_empty() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", r.len())));
        }
        let model = MlpAutoencoder::from_layers(dims, layers, seed)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        Self::new(model, image_dims)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Checkpoint("unexpected end of checkpoint".into()))
}

fn read_array<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    read_exact(r, &mut b)?;
    Ok(b)
}

fn read_u64(r: &mut &[u8]) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_usize(r: &mut &[u8]) -> Result<usize> {
    usize::try_from(read_u64(r)?).map_err(|_| Error::Checkpoint("size overflows usize".into()))
}

fn read_f64s(r: &mut &[u8], n: usize) -> Result<Vec<f64>> {
    (0..n)
        .map(|_| Ok(f64::from_le_bytes(read_array(r)?)))
        .collect()
}
