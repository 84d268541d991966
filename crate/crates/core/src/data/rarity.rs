use super::Dataset;
use crate::error::{Error, Result};

/// Occupancy of uniform bins over a per-sample statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct RarityTable {
    /// `n_bins + 1` bin edges.
    pub edges: Vec<f64>,
    pub bin_counts: Vec<usize>,
    pub statistic: Vec<f64>,
    pub sample_bin: Vec<usize>,
    /// Occurrence count of each sample's bin.
    pub sample_count: Vec<usize>,
    /// Position of each sample when ordered rarest first (ties by index).
    pub rank: Vec<usize>,
}

impl RarityTable {
    pub fn from_statistic(statistic: Vec<f64>, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::Config(format!(
                "need at least 2 rarity bins, got {n_bins}"
            )));
        }
        if statistic.is_empty() || statistic.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "rarity statistic must be finite and non-empty".into(),
            ));
        }
        let lo = statistic.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = statistic.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / n_bins as f64;
        let edges: Vec<f64> = (0..=n_bins)
            .map(|i| {
                if i == n_bins {
                    hi
                } else {
                    lo + width * i as f64
                }
            })
            .collect();
        let sample_bin: Vec<usize> = statistic
            .iter()
            .map(|&v| {
                if hi > lo {
                    (((v - lo) / (hi - lo) * n_bins as f64).floor() as usize).min(n_bins - 1)
                } else {
                    0
                }
            })
            .collect();
        let mut bin_counts = vec![0usize; n_bins];
        for &b in &sample_bin {
            bin_counts[b] += 1;
        }
        let sample_count: Vec<usize> = sample_bin.iter().map(|&b| bin_counts[b]).collect();
        let mut order: Vec<usize> = (0..statistic.len()).collect();
        order.sort_by_key(|&i| (sample_count[i], i));
        let mut rank = vec![0usize; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Ok(Self {
            edges,
            bin_counts,
            statistic,
            sample_bin,
            sample_count,
            rank,
        })
    }

    pub fn len(&self) -> usize {
        self.statistic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statistic.is_empty()
    }

    /// Sample indices ordered rarest first.
    pub fn rarest_first(&self) -> Vec<usize> {
        let mut order = vec![0usize; self.rank.len()];
        for (i, &r) in self.rank.iter().enumerate() {
            order[r] = i;
        }
        order
    }

    /// The `⌈fraction·N⌉` rarest samples.
    pub fn rarest_fraction(&self, fraction: f64) -> Vec<usize> {
        let n = ((fraction * self.len() as f64).ceil() as usize).clamp(1, self.len());
        self.rarest_first()[..n].to_vec()
    }
}

/// Bins samples by pendulum angle, or for unlabeled data by the mean
/// absolute deviation of each frame from the dataset-mean image.
pub fn rarity_bins(dataset: &Dataset, n_bins: usize) -> Result<RarityTable> {
    let statistic = match dataset.angles() {
        Some(a) => a.to_vec(),
        None => mean_deviation(dataset),
    };
    RarityTable::from_statistic(statistic, n_bins)
}

fn mean_deviation(dataset: &Dataset) -> Vec<f64> {
    let len = dataset.dims().len();
    let n = dataset.len() as f64;
    let mut mean = vec![0.0; len];
    for i in 0..dataset.len() {
        mean.iter_mut()
            .zip(dataset.frame(i))
            .for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    (0..dataset.len())
        .map(|i| {
            dataset
                .frame(i)
                .iter()
                .zip(&mean)
                .map(|(v, m)| (v - m).abs())
                .sum::<f64>()
                / len as f64
        })
        .collect()
}
