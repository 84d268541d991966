//! Scalar reference implementations shared by the integration tests.
//!
//! Everything here is written as plain nested loops straight from the loss
//! and network definitions, with no code shared with the library internals.
#![allow(dead_code)]

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rareae::nn::{Activation, MlpAutoencoder};
use rareae::{ImageBatch, ImageDims};

/// Prints a report line that bypasses libtest output capture.
pub fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_batch(rng: &mut impl Rng, batch: usize, dims: ImageDims) -> ImageBatch {
    let values = (0..batch * dims.len()).map(|_| rng.gen::<f64>()).collect();
    ImageBatch::new(batch, dims, values).unwrap()
}

/// A batch whose pixels come from a handful of levels, so histogram bins collide.
pub fn quantized_batch(
    rng: &mut impl Rng,
    batch: usize,
    dims: ImageDims,
    levels: usize,
) -> ImageBatch {
    let values = (0..batch * dims.len())
        .map(|_| rng.gen_range(0..levels) as f64 / (levels - 1).max(1) as f64)
        .collect();
    ImageBatch::new(batch, dims, values).unwrap()
}

fn activate(act: Activation, z: f64) -> f64 {
    match act {
        Activation::Identity => z,
        Activation::Relu => {
            if z > 0.0 {
                z
            } else {
                0.0
            }
        }
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
    }
}

/// One sample through the network, one dot product at a time.
pub fn naive_forward(model: &MlpAutoencoder, x: &[f64]) -> Vec<f64> {
    let mut h = x.to_vec();
    for layer in model.layers() {
        let mut next = vec![0.0; layer.fan_out()];
        for (o, out) in next.iter_mut().enumerate() {
            let mut z = layer.bias[o];
            for (i, v) in h.iter().enumerate() {
                z += layer.weight.get(o, i) * v;
            }
            *out = activate(layer.activation, z);
        }
        h = next;
    }
    h
}

/// Pairwise co-occurrence count: how many batch samples share `x[b][l]`'s bin.
pub fn naive_count(x: &[Vec<f64>], b: usize, l: usize, bins: usize) -> usize {
    let bin = |v: f64| (((v * (bins - 1) as f64).floor()) as usize).min(bins - 1);
    let k = bin(x[b][l]);
    x.iter().filter(|s| bin(s[l]) == k).count()
}

/// Per-sample composite losses `MSE_b + λ·Ent_b` and their mean.
pub fn naive_composite(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    channels: usize,
    bins: usize,
    eps: f64,
    lambda: f64,
) -> (Vec<f64>, f64) {
    let batch = x.len();
    let len = x[0].len();
    let plane = len / channels;
    let mut totals = Vec::with_capacity(batch);
    for b in 0..batch {
        let s: Vec<f64> = (0..len)
            .map(|l| {
                let p = bins as f64 / batch as f64 * naive_count(x, b, l, bins) as f64;
                -(p + eps).ln()
            })
            .collect();
        let mut ent = 0.0;
        let mut mse = 0.0;
        for c in 0..channels {
            let span = &s[c * plane..(c + 1) * plane];
            let lo = span.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = span.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for i in 0..plane {
                let l = c * plane + i;
                let mask = (s[l] - lo) / (hi - lo + eps);
                let r = y[b][l] - x[b][l];
                ent += r.abs() * (mask + 0.05);
                mse += r * r;
            }
        }
        totals.push(mse / len as f64 + lambda * ent / len as f64);
    }
    let mean = totals.iter().sum::<f64>() / batch as f64;
    (totals, mean)
}

pub fn rows(batch: &ImageBatch) -> Vec<Vec<f64>> {
    (0..batch.batch_size())
        .map(|b| batch.sample(b).to_vec())
        .collect()
}

/// Mean composite loss of the network's reconstruction, entirely through the scalar path.
pub fn naive_network_loss(
    model: &MlpAutoencoder,
    x: &[Vec<f64>],
    channels: usize,
    bins: usize,
    eps: f64,
    lambda: f64,
) -> f64 {
    let y: Vec<Vec<f64>> = x.iter().map(|s| naive_forward(model, s)).collect();
    naive_composite(x, &y, channels, bins, eps, lambda).1
}
