//! Experiment configuration: a sectioned `key = value` TOML file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adam::AdamConfig;
use crate::data::PendulumParams;
use crate::entropy::EntropyLossConfig;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::trainer::{Scheduler, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub loss: LossSection,
    pub scheduler: SchedulerSection,
    pub optimizer: OptimizerSection,
    pub train: TrainSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Pendulum,
    Folder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub source: DatasetSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub omega: f64,
    pub gamma: f64,
    pub theta0: f64,
    pub dt: f64,
    pub pivot_x: f64,
    pub pivot_y: f64,
    pub rod_length: f64,
    pub bob_radius: f64,
    pub rod: bool,
    pub noise_std: f64,
    pub rarity_bins: usize,
}

impl Default for DatasetSection {
    fn default() -> Self {
        let p = PendulumParams::default();
        Self {
            source: DatasetSource::Pendulum,
            path: None,
            frames: p.frames,
            height: p.height,
            width: p.width,
            omega: p.omega,
            gamma: p.gamma,
            theta0: p.theta0,
            dt: p.dt,
            pivot_x: p.pivot.0,
            pivot_y: p.pivot.1,
            rod_length: p.rod_length,
            bob_radius: p.bob_radius,
            rod: p.rod,
            noise_std: p.noise_std,
            rarity_bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden1: usize,
    pub hidden2: usize,
    pub latent: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden1: 2000,
            hidden2: 200,
            latent: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossSelector {
    L2,
    L1,
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSection {
    pub kind: LossSelector,
    pub lambda: f64,
    pub bins: usize,
    pub eps: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        let e = EntropyLossConfig::default();
        Self {
            kind: LossSelector::L2,
            lambda: e.lambda,
            bins: e.bins,
            eps: e.eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerSelector {
    Plain,
    Spp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerSection {
    pub kind: SchedulerSelector,
    pub k: usize,
    /// Focal-style weighting of the update batch; only used by spp.
    pub weighting: bool,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        Self {
            kind: SchedulerSelector::Plain,
            k: 4,
            weighting: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub lr: f64,
    pub weight_decay: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let a = AdamConfig::default();
        Self {
            lr: a.lr,
            weight_decay: a.weight_decay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: usize,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            batch_size: 32,
            epochs: 20,
            seeds: vec![0],
            out_dir: PathBuf::from("runs/default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    /// Number of rarest and of most common samples dumped as images.
    pub showcase: usize,
    pub surprise_bins: usize,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self {
            showcase: 4,
            surprise_bins: 50,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Validation(vec![e.message().to_string()]))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Validation(vec![format!("{}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    pub fn pendulum_params(&self) -> PendulumParams {
        let d = &self.dataset;
        PendulumParams {
            omega: d.omega,
            gamma: d.gamma,
            theta0: d.theta0,
            dt: d.dt,
            frames: d.frames,
            height: d.height,
            width: d.width,
            pivot: (d.pivot_x, d.pivot_y),
            rod_length: d.rod_length,
            bob_radius: d.bob_radius,
            rod: d.rod,
            noise_std: d.noise_std,
        }
    }

    pub fn loss_kind(&self) -> LossKind {
        match self.loss.kind {
            LossSelector::L2 => LossKind::L2,
            LossSelector::L1 => LossKind::L1,
            LossSelector::Entropy => LossKind::Entropy(EntropyLossConfig {
                lambda: self.loss.lambda,
                bins: self.loss.bins,
                eps: self.loss.eps,
            }),
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            hidden1: self.model.hidden1,
            hidden2: self.model.hidden2,
            latent: self.model.latent,
            loss: self.loss_kind(),
            scheduler: match self.scheduler.kind {
                SchedulerSelector::Plain => Scheduler::Plain,
                SchedulerSelector::Spp => Scheduler::Spp {
                    k: self.scheduler.k,
                    weighting: self.scheduler.weighting,
                },
            },
            adam: AdamConfig {
                lr: self.optimizer.lr,
                weight_decay: self.optimizer.weight_decay,
                ..AdamConfig::default()
            },
            batch_size: self.train.batch_size,
            epochs: self.train.epochs,
            seed,
        }
    }

    /// Checks every field, reporting all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let d = &self.dataset;
        match d.source {
            DatasetSource::Pendulum => {
                if let Err(e) = self.pendulum_params().validate() {
                    v.push(format!("dataset: {e}"));
                }
                if self.train.batch_size > d.frames {
                    v.push(format!(
                        "train.batch_size {} exceeds dataset.frames {}",
                        self.train.batch_size, d.frames
                    ));
                }
                let input = d.height * d.width;
                if self.model.hidden1 >= input {
                    v.push(format!(
                        "model.hidden1 {} must be below the input size {input}",
                        self.model.hidden1
                    ));
                }
            }
            DatasetSource::Folder => {
                if d.path.is_none() {
                    v.push("dataset.path is required for folder datasets".into());
                }
            }
        }
        if d.rarity_bins < 2 {
            v.push("dataset.rarity_bins must be at least 2".into());
        }
        let m = &self.model;
        if !(m.hidden1 > m.hidden2 && m.hidden2 > m.latent && m.latent >= 1) {
            v.push(format!(
                "model widths must strictly decrease: {} > {} > {} >= 1",
                m.hidden1, m.hidden2, m.latent
            ));
        }
        let l = &self.loss;
        if !(l.lambda >= 0.0 && l.lambda.is_finite()) {
            v.push(format!(
                "loss.lambda must be finite and non-negative, got {}",
                l.lambda
            ));
        }
        if l.bins < 2 {
            v.push("loss.bins must be at least 2".into());
        }
        if !(l.eps > 0.0 && l.eps.is_finite()) {
            v.push("loss.eps must be positive".into());
        }
        let o = &self.optimizer;
        if !(o.lr > 0.0 && o.lr.is_finite()) {
            v.push("optimizer.lr must be positive".into());
        }
        if !(o.weight_decay >= 0.0 && o.weight_decay.is_finite()) {
            v.push("optimizer.weight_decay must be non-negative".into());
        }
        let t = &self.train;
        if t.batch_size == 0 {
            v.push("train.batch_size must be positive".into());
        }
        if t.epochs == 0 {
            v.push("train.epochs must be positive".into());
        }
        if t.seeds.is_empty() {
            v.push("train.seeds must list at least one seed".into());
        }
        if self.scheduler.kind == SchedulerSelector::Spp {
            let k = self.scheduler.k;
            if k == 0 || k > t.batch_size {
                v.push(format!(
                    "scheduler.k = {k} gives memory ⌊{}/{k}⌋ = 0; need 1 <= k <= batch_size",
                    t.batch_size
                ));
            }
        }
        if self.evaluate.surprise_bins == 0 {
            v.push("evaluate.surprise_bins must be positive".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}
