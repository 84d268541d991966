//! Fully connected autoencoder with hand-written forward and backward passes.
//!
//! The encoder is `input → hidden1 → hidden2 → latent` with ReLU on the two
//! hidden layers and a linear bottleneck; the decoder mirrors it and ends in
//! a sigmoid so reconstructions stay inside `(0, 1)`.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{shape_err, Error, Result};
use crate::exec::Exec;
use crate::tensor::{DenseMatrix, ImageBatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `y`.
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Sigmoid => 2,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Layer widths of the funnel `input > hidden1 > hidden2 > latent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AeDims {
    pub input: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub latent: usize,
}

impl AeDims {
    pub fn new(input: usize, hidden1: usize, hidden2: usize, latent: usize) -> Self {
        Self {
            input,
            hidden1,
            hidden2,
            latent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent == 0
            || !(self.input > self.hidden1
                && self.hidden1 > self.hidden2
                && self.hidden2 > self.latent)
        {
            return Err(Error::Config(format!(
                "encoder widths must strictly decrease, got {}→{}→{}→{}",
                self.input, self.hidden1, self.hidden2, self.latent
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out, activation)` for the six linear layers.
    fn layer_plan(&self) -> [(usize, usize, Activation); 6] {
        use Activation::*;
        [
            (self.input, self.hidden1, Relu),
            (self.hidden1, self.hidden2, Relu),
            (self.hidden2, self.latent, Identity),
            (self.latent, self.hidden2, Relu),
            (self.hidden2, self.hidden1, Relu),
            (self.hidden1, self.input, Sigmoid),
        ]
    }
}

/// One linear layer; `weight` is `fan_out × fan_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn fan_in(&self) -> usize {
        self.weight.cols()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpAutoencoder {
    dims: AeDims,
    layers: Vec<Layer>,
    seed: u64,
}

impl MlpAutoencoder {
    /// Kaiming-uniform weights `U(±√(6/fan_in))`, zero biases.
    pub fn init(dims: AeDims, seed: u64) -> Result<Self> {
        dims.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .layer_plan()
            .iter()
            .map(|&(fan_in, fan_out, activation)| {
                let bound = (6.0 / fan_in as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound);
                let values = (0..fan_in * fan_out)
                    .map(|_| dist.sample(&mut rng))
                    .collect();
                Layer {
                    weight: DenseMatrix::from_vec(fan_out, fan_in, values)
                        .expect("length matches by construction"),
                    bias: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Ok(Self { dims, layers, seed })
    }

    /// Rebuilds a model from stored parameters, checking every shape.
    pub fn from_layers(dims: AeDims, layers: Vec<Layer>, seed: u64) -> Result<Self> {
        dims.validate()?;
        let plan = dims.layer_plan();
        if layers.len() != plan.len() {
            return shape_err(format!(
                "expected {} layers, got {}",
                plan.len(),
                layers.len()
            ));
        }
        for (i, (layer, &(fan_in, fan_out, act))) in layers.iter().zip(plan.iter()).enumerate() {
            if layer.weight.shape() != (fan_out, fan_in) || layer.bias.len() != fan_out {
                return shape_err(format!(
                    "layer {i}: weight {:?}/bias {} do not match {fan_in}→{fan_out}",
                    layer.weight.shape(),
                    layer.bias.len()
                ));
            }
            if layer.activation != act {
                return shape_err(format!(
                    "layer {i}: unexpected activation {:?}",
                    layer.activation
                ));
            }
        }
        Ok(Self { dims, layers, seed })
    }

    pub fn dims(&self) -> AeDims {
        self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims.input
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    fn check_input(&self, batch: &ImageBatch) -> Result<()> {
        if batch.dims().len() != self.dims.input {
            return shape_err(format!(
                "batch flattens to {} values per sample, model expects {}",
                batch.dims().len(),
                self.dims.input
            ));
        }
        Ok(())
    }

    fn run(
        &self,
        input: &DenseMatrix,
        mut keep: Option<&mut Vec<LayerCache>>,
    ) -> Result<DenseMatrix> {
        let mut x = input.clone();
        for layer in &self.layers {
            let mut z = x.matmul_nt(&layer.weight)?;
            z.add_row_vector(&layer.bias);
            let mut y = z.clone();
            y.map_inplace(|v| layer.activation.apply(v));
            if let Some(cache) = keep.as_deref_mut() {
                cache.push(LayerCache {
                    pre: z,
                    post: y.clone(),
                });
            }
            x = y;
        }
        Ok(x)
    }

    /// Forward pass keeping the activations needed by [`Self::backward`].
    pub fn forward(&self, batch: &ImageBatch) -> Result<(ImageBatch, ForwardCache)> {
        self.check_input(batch)?;
        let mut layers = Vec::with_capacity(self.layers.len());
        let out = self.run(batch.matrix(), Some(&mut layers))?;
        let cache = ForwardCache {
            input: batch.matrix().clone(),
            layers,
        };
        Ok((ImageBatch::from_matrix(batch.dims(), out)?, cache))
    }

    /// Forward pass without a cache.
    pub fn reconstruct(&self, batch: &ImageBatch) -> Result<ImageBatch> {
        self.check_input(batch)?;
        let out = self.run(batch.matrix(), None)?;
        ImageBatch::from_matrix(batch.dims(), out)
    }

    /// Cache-free forward pass evaluated over row chunks of `chunk` samples.
    pub fn reconstruct_with(
        &self,
        batch: &ImageBatch,
        chunk: usize,
        exec: Exec,
    ) -> Result<ImageBatch> {
        self.check_input(batch)?;
        let n = batch.batch_size();
        let chunk = chunk.max(1);
        let pieces = exec.map(n.div_ceil(chunk), |i| {
            let rows: Vec<usize> = (i * chunk..((i + 1) * chunk).min(n)).collect();
            self.run(&batch.matrix().select_rows(&rows), None)
        });
        let mut values = Vec::with_capacity(n * self.dims.input);
        for piece in pieces {
            values.extend_from_slice(piece?.as_slice());
        }
        ImageBatch::from_matrix(
            batch.dims(),
            DenseMatrix::from_vec(n, self.dims.input, values)?,
        )
    }

    /// Backpropagates `grad_output` (∂loss/∂reconstruction) to every parameter.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &DenseMatrix) -> Result<Gradients> {
        if cache.layers.len() != self.layers.len() {
            return shape_err(format!(
                "cache holds {} layers, model has {}",
                cache.layers.len(),
                self.layers.len()
            ));
        }
        let batch = cache.input.rows();
        if grad_output.shape() != (batch, self.dims.input) || cache.input.cols() != self.dims.input
        {
            return shape_err(format!(
                "output gradient {:?} does not match cached batch of {batch}",
                grad_output.shape()
            ));
        }
        for (layer, lc) in self.layers.iter().zip(&cache.layers) {
            if lc.pre.shape() != (batch, layer.fan_out()) {
                return shape_err("stale forward cache".to_string());
            }
        }

        let mut grads: Vec<LayerGrad> = Vec::with_capacity(self.layers.len());
        let mut upstream = grad_output.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let lc = &cache.layers[i];
            let mut delta = upstream;
            for ((d, &z), &y) in delta
                .as_mut_slice()
                .iter_mut()
                .zip(lc.pre.as_slice())
                .zip(lc.post.as_slice())
            {
                *d *= layer.activation.derivative(z, y);
            }
            let layer_input = if i == 0 {
                &cache.input
            } else {
                &cache.layers[i - 1].post
            };
            let weight = delta.matmul_tn(layer_input)?;
            let bias = delta.column_sums();
            upstream = if i > 0 {
                delta.matmul(&layer.weight)?
            } else {
                DenseMatrix::zeros(0, 0)
            };
            grads.push(LayerGrad { weight, bias });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerCache {
    pub pre: DenseMatrix,
    pub post: DenseMatrix,
}

/// Activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    input: DenseMatrix,
    layers: Vec<LayerCache>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.input.rows()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[LayerCache] {
        &self.layers
    }

    /// Restricts the cache to the given samples; equivalent to re-running
    /// the forward pass on just those rows.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            input: self.input.select_rows(rows),
            layers: self
                .layers
                .iter()
                .map(|l| LayerCache {
                    pre: l.pre.select_rows(rows),
                    post: l.post.select_rows(rows),
                })
                .collect(),
        }
    }

    /// The network output held in the last layer.
    pub fn output(&self) -> Option<&DenseMatrix> {
        self.layers.last().map(|l| &l.post)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

/// One gradient per parameter, in layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpAutoencoder) -> Self {
        Self {
            layers: model
                .layers()
                .iter()
                .map(|l| LayerGrad {
                    weight: DenseMatrix::zeros(l.fan_out(), l.fan_in()),
                    bias: vec![0.0; l.fan_out()],
                })
                .collect(),
        }
    }

    /// All gradient entries flattened layer by layer (weights then bias).
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.as_slice().iter().chain(&l.bias).copied())
            .collect()
    }
}
