//! Training loops for the plain and sample-propagation schedulers.

use std::time::Instant;

use crate::adam::{AdamConfig, AdamState};
use crate::data::{batch_iterator, Dataset};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::nn::{AeDims, ForwardCache, MlpAutoencoder};
use crate::sampling::{
    focal_weights, spp_training_step, weighted_batch_loss, Learner, ReplayBuffer, SppConfig,
    StepOutcome, DEFAULT_FOCAL_EPS,
};
use crate::tensor::ImageBatch;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheduler {
    Plain,
    Spp { k: usize, weighting: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden1: usize,
    pub hidden2: usize,
    pub latent: usize,
    pub loss: LossKind,
    pub scheduler: Scheduler,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

/// Model, optimizer and active loss.
pub struct Trainer {
    pub model: MlpAutoencoder,
    pub adam: AdamState,
    pub loss: LossKind,
    pool_cache: Option<ForwardCache>,
}

impl Trainer {
    pub fn new(model: MlpAutoencoder, adam: AdamConfig, loss: LossKind) -> Self {
        let adam = AdamState::new(&model, adam);
        Self {
            model,
            adam,
            loss,
            pool_cache: None,
        }
    }

    /// Forward, loss, backward and one Adam step on `batch`; returns the batch loss.
    fn step_on(&mut self, batch: &ImageBatch, cache: ForwardCache, weighting: bool) -> Result<f64> {
        let recon = ImageBatch::from_matrix(
            batch.dims(),
            cache
                .output()
                .expect("cache holds the output layer")
                .clone(),
        )?;
        let (losses, mut grads) = self.loss.sample_losses_and_grads(batch, &recon)?;
        let weights = if weighting {
            focal_weights(&losses, DEFAULT_FOCAL_EPS)
        } else {
            vec![1.0; losses.len()]
        };
        let batch_loss = weighted_batch_loss(&losses, &weights)?;
        let n = losses.len() as f64;
        for (b, w) in weights.iter().enumerate() {
            let s = w / n;
            grads.row_mut(b).iter_mut().for_each(|g| *g *= s);
        }
        let param_grads = self.model.backward(&cache, &grads)?;
        self.adam.step(&mut self.model, &param_grads)?;
        Ok(batch_loss)
    }

    /// One plain step on a full batch.
    pub fn train_batch(&mut self, batch: &ImageBatch, weighting: bool) -> Result<f64> {
        let (_, cache) = self.model.forward(batch)?;
        self.step_on(batch, cache, weighting)
    }
}

impl Learner for Trainer {
    fn pool_losses(&mut self, pool: &ImageBatch, _indices: &[usize]) -> Result<Vec<f64>> {
        let (recon, cache) = self.model.forward(pool)?;
        let losses = self.loss.sample_losses(pool, &recon)?;
        self.pool_cache = Some(cache);
        Ok(losses)
    }

    fn update(
        &mut self,
        pool: &ImageBatch,
        _indices: &[usize],
        selected: &[usize],
        weighting: bool,
    ) -> Result<f64> {
        let batch = pool.select(selected);
        // The pool forward already holds these rows' activations.
        let cache = match self.pool_cache.take() {
            Some(c) if c.batch_size() == pool.batch_size() => c.select(selected),
            _ => self.model.forward(&batch)?.1,
        };
        self.step_on(&batch, cache, weighting)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub wall_seconds: f64,
}

pub struct TrainOutcome {
    pub model: MlpAutoencoder,
    pub epochs: Vec<EpochRecord>,
    /// Empty for the plain scheduler.
    pub steps: Vec<StepOutcome>,
}

impl TrainConfig {
    pub fn dims(&self, input: usize) -> AeDims {
        AeDims::new(input, self.hidden1, self.hidden2, self.latent)
    }
}

/// Trains a fresh model on `dataset`. `progress` sees each finished epoch.
pub fn train(
    dataset: &Dataset,
    cfg: &TrainConfig,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    if cfg.epochs == 0 {
        return Err(Error::Config("need at least one epoch".into()));
    }
    let model = MlpAutoencoder::init(cfg.dims(dataset.dims().len()), cfg.seed)?;
    let mut trainer = Trainer::new(model, cfg.adam, cfg.loss);
    let spp = match cfg.scheduler {
        Scheduler::Plain => None,
        Scheduler::Spp { k, weighting } => Some(SppConfig::new(cfg.batch_size, k, weighting)?),
    };
    let mut buffer = ReplayBuffer::new(spp.map_or(0, |s| s.memory));
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut steps = Vec::new();

    for epoch in 0..cfg.epochs {
        let start = Instant::now();
        buffer.clear();
        let batches = batch_iterator(dataset.len(), cfg.batch_size, cfg.seed, epoch as u64)?;
        let mut total = 0.0;
        for indices in &batches {
            let batch = dataset.batch(indices);
            let loss = match &spp {
                None => trainer.train_batch(&batch, false)?,
                Some(s) => {
                    let out = spp_training_step(&mut trainer, &batch, indices, &mut buffer, s)?;
                    let loss = out.loss;
                    steps.push(out);
                    loss
                }
            };
            if !loss.is_finite() {
                return Err(Error::Domain(format!("non-finite loss in epoch {epoch}")));
            }
            total += loss;
        }
        let record = EpochRecord {
            epoch,
            mean_loss: total / batches.len() as f64,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        progress(&record);
        epochs.push(record);
    }
    Ok(TrainOutcome {
        model: trainer.model,
        epochs,
        steps,
    })
}

/// Reconstructs a dataset in chunks of `chunk` frames.
pub fn reconstruct_dataset(
    model: &MlpAutoencoder,
    dataset: &Dataset,
    chunk: usize,
) -> Result<ImageBatch> {
    model.reconstruct_with(dataset.frames(), chunk, crate::exec::Exec::default())
}
