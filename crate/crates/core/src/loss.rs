//! Training losses selectable per run.

use crate::entropy::{self, EntropyLossConfig, SurprisalMap};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::tensor::{DenseMatrix, ImageBatch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    L2,
    L1,
    Entropy(EntropyLossConfig),
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::L2 => "l2",
            LossKind::L1 => "l1",
            LossKind::Entropy(_) => "entropy",
        }
    }

    /// Per-sample losses `ℓ_b`.
    pub fn sample_losses(&self, batch: &ImageBatch, recon: &ImageBatch) -> Result<Vec<f64>> {
        self.evaluate(batch, recon, false, Exec::default())
            .map(|(l, _)| l)
    }

    /// Per-sample losses and the rows `∂ℓ_b/∂X̂_b`.
    pub fn sample_losses_and_grads(
        &self,
        batch: &ImageBatch,
        recon: &ImageBatch,
    ) -> Result<(Vec<f64>, DenseMatrix)> {
        self.evaluate(batch, recon, true, Exec::default())
            .map(|(l, g)| (l, g.expect("gradient requested")))
    }

    pub fn sample_losses_with(
        &self,
        batch: &ImageBatch,
        recon: &ImageBatch,
        exec: Exec,
    ) -> Result<Vec<f64>> {
        self.evaluate(batch, recon, false, exec).map(|(l, _)| l)
    }

    fn evaluate(
        &self,
        batch: &ImageBatch,
        recon: &ImageBatch,
        want_grad: bool,
        exec: Exec,
    ) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
        batch.check_same_shape(recon)?;
        if batch.is_empty() {
            return Err(Error::Domain("empty batch".into()));
        }
        let n = batch.dims().len() as f64;
        match self {
            LossKind::Entropy(cfg) => {
                let map = SurprisalMap::compute_with(batch, cfg.bins, cfg.eps, exec)?;
                let losses = entropy::breakdown_from_map(batch, recon, &map, cfg.lambda).total;
                let grads =
                    want_grad.then(|| entropy::sample_gradients(batch, recon, &map, cfg.lambda));
                Ok((losses, grads))
            }
            LossKind::L2 | LossKind::L1 => {
                let l2 = matches!(self, LossKind::L2);
                let losses = exec.map(batch.batch_size(), |b| {
                    batch
                        .sample(b)
                        .iter()
                        .zip(recon.sample(b))
                        .map(|(x, y)| if l2 { (y - x) * (y - x) } else { (y - x).abs() })
                        .sum::<f64>()
                        / n
                });
                let grads = want_grad.then(|| {
                    let mut g = DenseMatrix::zeros(batch.batch_size(), batch.dims().len());
                    for b in 0..batch.batch_size() {
                        for ((g, x), y) in g
                            .row_mut(b)
                            .iter_mut()
                            .zip(batch.sample(b))
                            .zip(recon.sample(b))
                        {
                            let r = y - x;
                            *g = if l2 {
                                2.0 * r / n
                            } else {
                                entropy::sign(r) / n
                            };
                        }
                    }
                    g
                });
                Ok((losses, grads))
            }
        }
    }
}
