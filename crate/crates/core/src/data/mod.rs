//! Datasets: the simulated damped pendulum, image folders, rarity tables
//! and seeded batch iteration.

mod archive;
mod folder;
mod loader;
mod pendulum;
mod rarity;

pub use archive::{read_manifest, write_archive, ManifestRow, MANIFEST_FILE};
pub use folder::load_image_folder;
pub use loader::{batch_iterator, epoch_permutation};
pub use pendulum::{angle_at, simulate_pendulum, simulate_pendulum_with, PendulumParams};
pub use rarity::{rarity_bins, RarityTable};

use crate::error::{Error, Result};
use crate::tensor::{ImageBatch, ImageDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Simulated,
    Folder,
}

/// An immutable set of frames with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    frames: ImageBatch,
    angles: Option<Vec<f64>>,
    source: Source,
}

impl Dataset {
    pub fn new(frames: ImageBatch, angles: Option<Vec<f64>>, source: Source) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Config("a dataset needs at least one frame".into()));
        }
        if let Some(a) = &angles {
            if a.len() != frames.batch_size() {
                return Err(Error::Shape(format!(
                    "{} angle labels for {} frames",
                    a.len(),
                    frames.batch_size()
                )));
            }
        }
        Ok(Self {
            frames,
            angles,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.batch_size()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> ImageDims {
        self.frames.dims()
    }

    pub fn frames(&self) -> &ImageBatch {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        self.frames.sample(i)
    }

    pub fn angles(&self) -> Option<&[f64]> {
        self.angles.as_deref()
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// The frames at `indices`, in that order.
    pub fn batch(&self, indices: &[usize]) -> ImageBatch {
        self.frames.select(indices)
    }
}
