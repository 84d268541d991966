//! Self-entropy reconstruction loss.
//!
//! Pixel values at each flattened location are histogrammed across the
//! batch, turned into a density estimate, and then into a per-pixel
//! surprisal `−log(p̂ + ε)`. Min–max normalizing the surprisal within each
//! (image, channel) plane gives the entropy mask, which weights an L1
//! residual that is added to the usual MSE.
//!
//! The mask depends only on the input batch, so it is a constant as far as
//! the gradient with respect to the reconstruction is concerned.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::tensor::{DenseMatrix, ImageBatch, ImageDims};

pub const DEFAULT_BINS: usize = 32;
pub const DEFAULT_EPS: f64 = 1e-8;
/// Floor added to the mask so that common pixels keep some weight.
pub const WEIGHT_FLOOR: f64 = 0.05;

/// Histogram bin `⌊x·(J−1)⌋` of an intensity in `[0, 1]`.
pub fn bin_index(x: f64, bins: usize) -> Result<usize> {
    if bins < 2 {
        return Err(Error::Domain(format!("need at least 2 bins, got {bins}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("intensity {x} outside [0, 1]")));
    }
    Ok(((x * (bins - 1) as f64).floor() as usize).min(bins - 1))
}

/// Per-location bin counts over a batch, stored `locations × bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelHistogram {
    locations: usize,
    bins: usize,
    batch_size: usize,
    counts: Vec<u32>,
}

impl PixelHistogram {
    pub fn locations(&self) -> usize {
        self.locations
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Bin width `δ = 1/J`.
    pub fn delta(&self) -> f64 {
        1.0 / self.bins as f64
    }

    pub fn count(&self, location: usize, bin: usize) -> u32 {
        self.counts[location * self.bins + bin]
    }

    pub fn location_counts(&self, location: usize) -> &[u32] {
        &self.counts[location * self.bins..(location + 1) * self.bins]
    }
}

pub fn build_histogram(batch: &ImageBatch, bins: usize) -> Result<PixelHistogram> {
    build_histogram_with(batch, bins, Exec::default())
}

/// Histogram construction, parallel over locations.
pub fn build_histogram_with(batch: &ImageBatch, bins: usize, exec: Exec) -> Result<PixelHistogram> {
    if batch.is_empty() {
        return Err(Error::Domain("cannot histogram an empty batch".into()));
    }
    bin_index(0.0, bins)?;
    if let Some(&x) = batch.values().iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("intensity {x} outside [0, 1]")));
    }
    let locations = batch.dims().len();
    let mut counts = vec![0u32; locations * bins];
    let scale = (bins - 1) as f64;
    exec.for_each_chunk_mut(&mut counts, bins, |loc, row| {
        for b in 0..batch.batch_size() {
            let x = batch.sample(b)[loc];
            let k = ((x * scale).floor() as usize).min(bins - 1);
            row[k] += 1;
        }
    });
    Ok(PixelHistogram {
        locations,
        bins,
        batch_size: batch.batch_size(),
        counts,
    })
}

/// Density estimate `p̂ = (J/B)·c` at every pixel of `batch`, shaped `B × L`.
pub fn density(hist: &PixelHistogram, batch: &ImageBatch) -> Result<DenseMatrix> {
    if batch.batch_size() != hist.batch_size || batch.dims().len() != hist.locations {
        return Err(Error::Shape(format!(
            "histogram of {}×{} does not describe batch {}×{}",
            hist.batch_size,
            hist.locations,
            batch.batch_size(),
            batch.dims().len()
        )));
    }
    let scale = hist.bins as f64 / hist.batch_size as f64;
    let mut out = DenseMatrix::zeros(batch.batch_size(), hist.locations);
    for b in 0..batch.batch_size() {
        let xs = batch.sample(b);
        for (l, p) in out.row_mut(b).iter_mut().enumerate() {
            let k = bin_index(xs[l], hist.bins)?;
            *p = scale * hist.count(l, k) as f64;
        }
    }
    Ok(out)
}

/// Surprisal `−log(p̂ + ε)`, elementwise.
pub fn surprisal(density: &DenseMatrix, eps: f64) -> DenseMatrix {
    let mut s = density.clone();
    s.map_inplace(|p| -(p + eps).ln());
    s
}

/// Min–max normalizes each (image, channel) plane of `s` into `[0, 1]`.
pub fn entropy_mask(s: &DenseMatrix, dims: ImageDims, eps: f64) -> Result<DenseMatrix> {
    if s.cols() != dims.len() {
        return Err(Error::Shape(format!(
            "surprisal rows of {} do not match {dims:?}",
            s.cols()
        )));
    }
    let mut mask = s.clone();
    let plane = dims.plane_len();
    for b in 0..mask.rows() {
        for p in mask.row_mut(b).chunks_mut(plane.max(1)) {
            let (lo, hi) = p
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let denom = hi - lo + eps;
            p.iter_mut()
                .for_each(|v| *v = ((*v - lo) / denom).clamp(0.0, 1.0));
        }
    }
    Ok(mask)
}

/// Raw surprisal and the normalized mask for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SurprisalMap {
    pub dims: ImageDims,
    pub raw: DenseMatrix,
    pub mask: DenseMatrix,
    pub eps: f64,
}

impl SurprisalMap {
    pub fn compute(batch: &ImageBatch, bins: usize, eps: f64) -> Result<Self> {
        Self::compute_with(batch, bins, eps, Exec::default())
    }

    pub fn compute_with(batch: &ImageBatch, bins: usize, eps: f64, exec: Exec) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::Domain(format!(
                "epsilon must be positive, got {eps}"
            )));
        }
        let hist = build_histogram_with(batch, bins, exec)?;
        let raw = surprisal(&density(&hist, batch)?, eps);
        let mask = entropy_mask(&raw, batch.dims(), eps)?;
        Ok(Self {
            dims: batch.dims(),
            raw,
            mask,
            eps,
        })
    }

    /// The loss weight `mask + 0.05`, in `[0.05, 1.05]`.
    pub fn weight(&self, b: usize, l: usize) -> f64 {
        self.mask.get(b, l) + WEIGHT_FLOOR
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyLossConfig {
    /// Trade-off between MSE and the entropy-weighted L1 term.
    pub lambda: f64,
    pub bins: usize,
    pub eps: f64,
}

impl Default for EntropyLossConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            bins: DEFAULT_BINS,
            eps: DEFAULT_EPS,
        }
    }
}

/// Per-sample pieces of the composite loss `ℓ_b = MSE_b + λ·Ent_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub ent: Vec<f64>,
    pub mse: Vec<f64>,
    pub total: Vec<f64>,
    pub mean: f64,
    pub lambda: f64,
}

fn check_pair(batch: &ImageBatch, recon: &ImageBatch) -> Result<()> {
    batch.check_same_shape(recon)?;
    if batch.is_empty() {
        return Err(Error::Domain("empty batch".into()));
    }
    Ok(())
}

pub fn composite_loss(
    batch: &ImageBatch,
    recon: &ImageBatch,
    cfg: &EntropyLossConfig,
) -> Result<LossBreakdown> {
    check_pair(batch, recon)?;
    let map = SurprisalMap::compute(batch, cfg.bins, cfg.eps)?;
    Ok(breakdown_from_map(batch, recon, &map, cfg.lambda))
}

/// Evaluates the composite loss against a precomputed mask.
pub fn breakdown_from_map(
    batch: &ImageBatch,
    recon: &ImageBatch,
    map: &SurprisalMap,
    lambda: f64,
) -> LossBreakdown {
    let n = batch.dims().len() as f64;
    let bsz = batch.batch_size();
    let mut ent = Vec::with_capacity(bsz);
    let mut mse = Vec::with_capacity(bsz);
    for b in 0..bsz {
        let (mut e, mut m) = (0.0, 0.0);
        let mask = map.mask.row(b);
        for ((x, y), w) in batch.sample(b).iter().zip(recon.sample(b)).zip(mask) {
            let r = y - x;
            e += r.abs() * (w + WEIGHT_FLOOR);
            m += r * r;
        }
        ent.push(e / n);
        mse.push(m / n);
    }
    let total: Vec<f64> = mse.iter().zip(&ent).map(|(m, e)| m + lambda * e).collect();
    let mean = total.iter().sum::<f64>() / bsz as f64;
    LossBreakdown {
        ent,
        mse,
        total,
        mean,
        lambda,
    }
}

/// Rows of `∂ℓ_b/∂X̂_b` for each sample (not divided by the batch size).
pub fn sample_gradients(
    batch: &ImageBatch,
    recon: &ImageBatch,
    map: &SurprisalMap,
    lambda: f64,
) -> DenseMatrix {
    let n = batch.dims().len() as f64;
    let mut grad = DenseMatrix::zeros(batch.batch_size(), batch.dims().len());
    for b in 0..batch.batch_size() {
        let mask = map.mask.row(b);
        for (((g, x), y), w) in grad
            .row_mut(b)
            .iter_mut()
            .zip(batch.sample(b))
            .zip(recon.sample(b))
            .zip(mask)
        {
            let r = y - x;
            *g = (2.0 * r + lambda * sign(r) * (w + WEIGHT_FLOOR)) / n;
        }
    }
    grad
}

/// Gradient of the batch mean `𝓛` with respect to the reconstruction.
pub fn composite_loss_grad(
    batch: &ImageBatch,
    recon: &ImageBatch,
    cfg: &EntropyLossConfig,
) -> Result<DenseMatrix> {
    check_pair(batch, recon)?;
    let map = SurprisalMap::compute(batch, cfg.bins, cfg.eps)?;
    let mut g = sample_gradients(batch, recon, &map, cfg.lambda);
    g.scale(1.0 / batch.batch_size() as f64);
    Ok(g)
}

pub(crate) fn sign(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Writes each mask plane as an 8-bit grayscale PNG (`round(mask·255)`)
/// plus `entropy_loss.csv` with per-sample `ent,mse,total` columns.
pub fn write_diagnostics(dir: &Path, map: &SurprisalMap, losses: &LossBreakdown) -> Result<()> {
    fs::create_dir_all(dir)?;
    let dims = map.dims;
    for b in 0..map.mask.rows() {
        for c in 0..dims.channels {
            let plane = &map.mask.row(b)[c * dims.plane_len()..(c + 1) * dims.plane_len()];
            let pixels: Vec<u8> = plane.iter().map(|v| (v * 255.0).round() as u8).collect();
            let img = image::GrayImage::from_raw(dims.width as u32, dims.height as u32, pixels)
                .ok_or_else(|| Error::Shape("mask plane size mismatch".into()))?;
            let path = dir.join(format!("mask_{b:05}_c{c}.png"));
            img.save(&path).map_err(|e| Error::Ingestion {
                path: path.clone(),
                reason: e.to_string(),
            })?;
        }
    }
    let mut f = fs::File::create(dir.join("entropy_loss.csv"))?;
    writeln!(f, "sample,ent,mse,total")?;
    for b in 0..losses.total.len() {
        writeln!(
            f,
            "{b},{},{},{}",
            losses.ent[b], losses.mse[b], losses.total[b]
        )?;
    }
    Ok(())
}
