//! Reconstruction metrics and the rarity diagnostics.

use crate::data::RarityTable;
use crate::error::{shape_err, Error, Result};
use crate::exec::Exec;
use crate::tensor::{ImageBatch, ImageDims};

/// PSNR reported for a perfect reconstruction.
pub const PSNR_CAP_DB: f64 = 99.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return shape_err(format!("images of {} and {} values", a.len(), b.len()));
    }
    Ok(())
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.is_empty() {
        return Err(Error::Domain("empty image".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

pub fn mean_abs_error(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.is_empty() {
        return Err(Error::Domain("empty image".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// `10·log10(peak²/mse)`, capped at [`PSNR_CAP_DB`].
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP_DB
    } else {
        (10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB)
    }
}

pub fn psnr(a: &[f64], b: &[f64], peak: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, peak))
}

fn gaussian_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-((i as f64 - half).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let total: f64 = g.iter().sum();
    let mut w = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    for y in 0..SSIM_WINDOW {
        for x in 0..SSIM_WINDOW {
            w[y * SSIM_WINDOW + x] = g[y] * g[x] / (total * total);
        }
    }
    w
}

/// Windowed SSIM of two single-channel `height × width` planes: 11×11
/// Gaussian window (σ = 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1,
/// averaged over every position where the window fits.
pub fn ssim_plane(a: &[f64], b: &[f64], height: usize, width: usize) -> Result<f64> {
    same_len(a, b)?;
    if a.len() != height * width {
        return shape_err(format!("{} values for a {height}x{width} plane", a.len()));
    }
    if height < SSIM_WINDOW || width < SSIM_WINDOW {
        return Err(Error::Config(format!(
            "{height}x{width} image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )));
    }
    let w = gaussian_window();
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut total = 0.0;
    let mut positions = 0usize;
    for top in 0..=height - SSIM_WINDOW {
        for left in 0..=width - SSIM_WINDOW {
            let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for dy in 0..SSIM_WINDOW {
                let row = (top + dy) * width + left;
                for dx in 0..SSIM_WINDOW {
                    let g = w[dy * SSIM_WINDOW + dx];
                    let (x, y) = (a[row + dx], b[row + dx]);
                    mx += g * x;
                    my += g * y;
                    xx += g * x * x;
                    yy += g * y * y;
                    xy += g * x * y;
                }
            }
            let vx = xx - mx * mx;
            let vy = yy - my * my;
            let cov = xy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            positions += 1;
        }
    }
    Ok(total / positions as f64)
}

/// SSIM averaged over channels.
pub fn ssim(a: &[f64], b: &[f64], dims: ImageDims) -> Result<f64> {
    same_len(a, b)?;
    if a.len() != dims.len() {
        return shape_err(format!("{} values for {dims:?}", a.len()));
    }
    let p = dims.plane_len();
    let mut sum = 0.0;
    for c in 0..dims.channels {
        sum += ssim_plane(
            &a[c * p..(c + 1) * p],
            &b[c * p..(c + 1) * p],
            dims.height,
            dims.width,
        )?;
    }
    Ok(sum / dims.channels as f64)
}

/// Uniform histogram over `[lo, hi]`; values outside are clamped into the end bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn build(values: impl Iterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0usize; bins.max(1)];
        let n = counts.len();
        for v in values {
            let k = if hi > lo {
                (((v - lo) / (hi - lo) * n as f64).floor().max(0.0) as usize).min(n - 1)
            } else {
                0
            };
            counts[k] += 1;
        }
        Self { lo, hi, counts }
    }

    pub fn bin_of(&self, v: f64) -> usize {
        let n = self.counts.len();
        if self.hi > self.lo {
            (((v - self.lo) / (self.hi - self.lo) * n as f64)
                .floor()
                .max(0.0) as usize)
                .min(n - 1)
        } else {
            0
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Per-pixel `(surprise, |error|)` pairs with both marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct SurpriseErrorTable {
    pub pairs: Vec<(f64, f64)>,
    pub surprise_hist: Histogram,
    /// Over `[0, 1]`, so bin 0 holds exact reconstructions.
    pub error_hist: Histogram,
}

impl SurpriseErrorTable {
    /// Joint counts, `surprise_bin × error_bin`.
    pub fn joint_counts(&self) -> Vec<Vec<usize>> {
        let mut joint =
            vec![vec![0usize; self.error_hist.counts.len()]; self.surprise_hist.counts.len()];
        for &(s, e) in &self.pairs {
            joint[self.surprise_hist.bin_of(s)][self.error_hist.bin_of(e)] += 1;
        }
        joint
    }

    /// Appends another batch's pairs, rebuilding the marginals.
    pub fn merge(tables: Vec<SurpriseErrorTable>, bins: usize) -> Self {
        let pairs: Vec<(f64, f64)> = tables.into_iter().flat_map(|t| t.pairs).collect();
        Self::from_pairs(pairs, bins)
    }

    fn from_pairs(pairs: Vec<(f64, f64)>, bins: usize) -> Self {
        let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        Self {
            surprise_hist: Histogram::build(pairs.iter().map(|p| p.0), lo, hi, bins),
            error_hist: Histogram::build(pairs.iter().map(|p| p.1), 0.0, 1.0, bins),
            pairs,
        }
    }
}

/// One `(surprise, |X̂ − X|)` pair per pixel; `surprisal` is the raw map for `batch`.
pub fn error_vs_surprise(
    batch: &ImageBatch,
    recon: &ImageBatch,
    surprisal: &crate::tensor::DenseMatrix,
    bins: usize,
) -> Result<SurpriseErrorTable> {
    batch.check_same_shape(recon)?;
    if surprisal.shape() != (batch.batch_size(), batch.dims().len()) {
        return shape_err("surprisal map does not align with the batch".to_string());
    }
    let pairs = batch
        .values()
        .iter()
        .zip(recon.values())
        .zip(surprisal.as_slice())
        .map(|((x, y), s)| (*s, (y - x).abs()))
        .collect();
    Ok(SurpriseErrorTable::from_pairs(pairs, bins))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub bin: usize,
    pub lower: f64,
    pub upper: f64,
    /// Occurrence count of the bin.
    pub count: usize,
    /// Mean of member samples' errors; `None` for empty bins.
    pub mean_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub rows: Vec<FrequencyRow>,
    /// Rarest-bin error over commonest-bin error.
    pub flatness: f64,
}

/// Mean per-sample error per occupancy bin plus the flatness ratio.
///
/// Bins tied for the smallest (largest) occupancy are pooled when forming
/// the rarest (commonest) error.
pub fn error_vs_frequency(errors: &[f64], rarity: &RarityTable) -> Result<FrequencyTable> {
    if errors.len() != rarity.len() {
        return shape_err(format!(
            "{} errors for a rarity table of {}",
            errors.len(),
            rarity.len()
        ));
    }
    let n_bins = rarity.bin_counts.len();
    let mut sums = vec![0.0; n_bins];
    for (i, e) in errors.iter().enumerate() {
        sums[rarity.sample_bin[i]] += e;
    }
    let rows: Vec<FrequencyRow> = (0..n_bins)
        .map(|b| {
            let count = rarity.bin_counts[b];
            FrequencyRow {
                bin: b,
                lower: rarity.edges[b],
                upper: rarity.edges[b + 1],
                count,
                mean_error: (count > 0).then(|| sums[b] / count as f64),
            }
        })
        .collect();

    let occupied: Vec<usize> = rarity
        .bin_counts
        .iter()
        .copied()
        .filter(|&c| c > 0)
        .collect();
    let min_c = *occupied
        .iter()
        .min()
        .expect("a non-empty table has an occupied bin");
    let max_c = *occupied
        .iter()
        .max()
        .expect("a non-empty table has an occupied bin");
    let pooled = |c: usize| {
        let members: Vec<f64> = (0..errors.len())
            .filter(|&i| rarity.sample_count[i] == c)
            .map(|i| errors[i])
            .collect();
        members.iter().sum::<f64>() / members.len() as f64
    };
    let (rare, common) = (pooled(min_c), pooled(max_c));
    let flatness = if common > 0.0 {
        rare / common
    } else if rare == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(FrequencyTable { rows, flatness })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Per-sample metrics for a whole dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mse: Vec<f64>,
    pub psnr: Vec<f64>,
    pub ssim: Vec<f64>,
    pub mae: Vec<f64>,
}

impl MetricsReport {
    pub fn compute(truth: &ImageBatch, recon: &ImageBatch) -> Result<Self> {
        Self::compute_with(truth, recon, Exec::default())
    }

    /// Per-sample metrics, evaluated in parallel over samples.
    pub fn compute_with(truth: &ImageBatch, recon: &ImageBatch, exec: Exec) -> Result<Self> {
        truth.check_same_shape(recon)?;
        let dims = truth.dims();
        let rows = exec.map(truth.batch_size(), |b| -> Result<[f64; 4]> {
            let (x, y) = (truth.sample(b), recon.sample(b));
            let m = mse(x, y)?;
            Ok([
                m,
                psnr_from_mse(m, 1.0),
                ssim(x, y, dims)?,
                mean_abs_error(x, y)?,
            ])
        });
        let mut report = Self {
            mse: Vec::with_capacity(rows.len()),
            psnr: Vec::with_capacity(rows.len()),
            ssim: Vec::with_capacity(rows.len()),
            mae: Vec::with_capacity(rows.len()),
        };
        for r in rows {
            let [m, p, s, a] = r?;
            report.mse.push(m);
            report.psnr.push(p);
            report.ssim.push(s);
            report.mae.push(a);
        }
        Ok(report)
    }

    pub fn len(&self) -> usize {
        self.mse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mse.is_empty()
    }

    pub fn aggregates(&self) -> [(&'static str, Aggregate); 4] {
        [
            ("mse", Aggregate::of(&self.mse)),
            ("psnr", Aggregate::of(&self.psnr)),
            ("ssim", Aggregate::of(&self.ssim)),
            ("mae", Aggregate::of(&self.mae)),
        ]
    }

    /// Mean MSE over the listed samples.
    pub fn mean_mse_over(&self, samples: &[usize]) -> f64 {
        samples.iter().map(|&i| self.mse[i]).sum::<f64>() / samples.len().max(1) as f64
    }

    /// `sample,mse,psnr,ssim,mae` rows, then `mean` and `std` footer rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sample,mse,psnr,ssim,mae\n");
        for i in 0..self.len() {
            s.push_str(&format!(
                "{i},{},{},{},{}\n",
                self.mse[i], self.psnr[i], self.ssim[i], self.mae[i]
            ));
        }
        let agg = self.aggregates();
        s.push_str(&format!(
            "mean,{},{},{},{}\n",
            agg[0].1.mean, agg[1].1.mean, agg[2].1.mean, agg[3].1.mean
        ));
        s.push_str(&format!(
            "std,{},{},{},{}\n",
            agg[0].1.std, agg[1].1.std, agg[2].1.std, agg[3].1.std
        ));
        s
    }
}
