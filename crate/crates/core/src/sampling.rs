//! Sample propagation (spp-k) and focal-style batch weighting.
//!
//! Each step pools the incoming batch with the hardest samples held over
//! from the previous step, ranks the pool by per-sample loss, keeps the
//! `M = ⌊B/k⌋` hardest for the next step and updates the model on the `B`
//! hardest only, so the gradient budget never changes.

use crate::error::{shape_err, Error, Result};
use crate::tensor::ImageBatch;

pub const DEFAULT_FOCAL_EPS: f64 = 1e-8;

/// Focal-style weights `f_b = 1 + (ℓ_b − ℓ_min)/max(ℓ_max − ℓ_min, ε)·(n − 1)`.
pub fn focal_weights(losses: &[f64], eps: f64) -> Vec<f64> {
    let n = losses.len();
    if n == 0 {
        return Vec::new();
    }
    let lo = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(eps);
    losses
        .iter()
        .map(|l| 1.0 + (l - lo) / range * (n - 1) as f64)
        .collect()
}

/// `(1/n) Σ f_b ℓ_b`
pub fn weighted_batch_loss(losses: &[f64], weights: &[f64]) -> Result<f64> {
    if losses.len() != weights.len() {
        return shape_err(format!(
            "{} losses but {} weights",
            losses.len(),
            weights.len()
        ));
    }
    if losses.is_empty() {
        return Err(Error::Domain("no losses to weight".into()));
    }
    Ok(losses.iter().zip(weights).map(|(l, f)| l * f).sum::<f64>() / losses.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SppConfig {
    pub batch_size: usize,
    pub k: usize,
    pub memory: usize,
    pub weighting: bool,
}

impl SppConfig {
    pub fn new(batch_size: usize, k: usize, weighting: bool) -> Result<Self> {
        if k == 0 || batch_size == 0 {
            return Err(Error::Config(
                "spp needs a positive batch size and divisor".into(),
            ));
        }
        let memory = batch_size / k;
        if memory == 0 {
            return Err(Error::Config(format!(
                "spp divisor k={k} exceeds batch size {batch_size}, memory would be 0"
            )));
        }
        Ok(Self {
            batch_size,
            k,
            memory,
            weighting,
        })
    }
}

/// A sample carried over by value from the previous step.
#[derive(Debug, Clone, PartialEq)]
pub struct HeldSample {
    pub index: usize,
    pub pixels: Vec<f64>,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<HeldSample>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            items: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[HeldSample] {
        &self.items
    }

    pub fn indices(&self) -> Vec<usize> {
        self.items.iter().map(|s| s.index).collect()
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    fn replace(&mut self, items: Vec<HeldSample>) {
        assert!(items.len() <= self.capacity, "replay buffer overflow");
        self.items = items;
    }
}

/// Pool positions of the hardest samples, hardest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub update: Vec<usize>,
    pub carryover: Vec<usize>,
}

/// Ranks the pool by descending loss (ties: lower dataset index first) and
/// returns the top-`batch_size` and top-`memory` prefixes.
pub fn rank_and_split(
    losses: &[f64],
    indices: &[usize],
    batch_size: usize,
    memory: usize,
) -> Result<Split> {
    if losses.len() != indices.len() {
        return shape_err(format!(
            "{} losses for {} pool samples",
            losses.len(),
            indices.len()
        ));
    }
    if losses.len() < batch_size {
        return Err(Error::Config(format!(
            "pool of {} is smaller than the batch size {batch_size}",
            losses.len()
        )));
    }
    if memory > losses.len() {
        return Err(Error::Config(format!(
            "memory {memory} exceeds the pool of {}",
            losses.len()
        )));
    }
    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_by(|&a, &b| {
        losses[b]
            .total_cmp(&losses[a])
            .then(indices[a].cmp(&indices[b]))
            .then(a.cmp(&b))
    });
    Ok(Split {
        update: order[..batch_size].to_vec(),
        carryover: order[..memory].to_vec(),
    })
}

/// What one spp step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub pool_size: usize,
    /// Dataset indices that received gradient, hardest first.
    pub update_indices: Vec<usize>,
    /// Dataset indices held over to the next step, hardest first.
    pub carryover_indices: Vec<usize>,
    /// Batch loss of the update (focal-weighted when enabled).
    pub loss: f64,
}

pub const STEP_LOG_HEADER: &str = "step,pool_size,update_indices,carryover_indices,mean_loss";

impl StepOutcome {
    /// CSV row; index lists are `;`-separated.
    pub fn csv_row(&self, step: usize) -> String {
        let join = |v: &[usize]| {
            v.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        format!(
            "{step},{},{},{},{}",
            self.pool_size,
            join(&self.update_indices),
            join(&self.carryover_indices),
            self.loss
        )
    }
}

/// The model side of a replay step.
pub trait Learner {
    /// Per-sample losses of every pool member, without updating anything.
    fn pool_losses(&mut self, pool: &ImageBatch, indices: &[usize]) -> Result<Vec<f64>>;

    /// One optimizer step on the pool rows at `selected`; returns the batch loss.
    fn update(
        &mut self,
        pool: &ImageBatch,
        indices: &[usize],
        selected: &[usize],
        weighting: bool,
    ) -> Result<f64>;
}

/// One spp step: pool, rank, carry over the `M` hardest, update on the `B` hardest.
pub fn spp_training_step<L: Learner + ?Sized>(
    learner: &mut L,
    incoming: &ImageBatch,
    incoming_indices: &[usize],
    buffer: &mut ReplayBuffer,
    cfg: &SppConfig,
) -> Result<StepOutcome> {
    if incoming.batch_size() != cfg.batch_size || incoming_indices.len() != cfg.batch_size {
        return shape_err(format!(
            "incoming batch has {} samples, expected {}",
            incoming.batch_size(),
            cfg.batch_size
        ));
    }
    if buffer.capacity() != cfg.memory {
        return Err(Error::Config(format!(
            "buffer capacity {} differs from memory {}",
            buffer.capacity(),
            cfg.memory
        )));
    }

    let dims = incoming.dims();
    let mut rows: Vec<&[f64]> = (0..incoming.batch_size())
        .map(|b| incoming.sample(b))
        .collect();
    let mut indices = incoming_indices.to_vec();
    let held = std::mem::take(&mut buffer.items);
    for h in &held {
        if h.pixels.len() != dims.len() {
            return shape_err("held sample does not match the incoming image size".to_string());
        }
        rows.push(&h.pixels);
        indices.push(h.index);
    }
    let pool = ImageBatch::from_samples(dims, &rows)?;

    let losses = learner.pool_losses(&pool, &indices)?;
    let split = rank_and_split(
        &losses,
        &indices,
        cfg.batch_size,
        cfg.memory.min(pool.batch_size()),
    )?;

    buffer.replace(
        split
            .carryover
            .iter()
            .map(|&p| HeldSample {
                index: indices[p],
                pixels: pool.sample(p).to_vec(),
                loss: losses[p],
            })
            .collect(),
    );

    let loss = learner.update(&pool, &indices, &split.update, cfg.weighting)?;
    Ok(StepOutcome {
        pool_size: pool.batch_size(),
        update_indices: split.update.iter().map(|&p| indices[p]).collect(),
        carryover_indices: split.carryover.iter().map(|&p| indices[p]).collect(),
        loss,
    })
}
