//! The `generate`, `train`, `evaluate` and `compare` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::checkpoint::Checkpoint;
use crate::config::{DatasetSource, ExperimentConfig};
use crate::data::{
    load_image_folder, rarity_bins, simulate_pendulum, write_archive, Dataset, RarityTable,
    MANIFEST_FILE,
};
use crate::entropy::{SurprisalMap, DEFAULT_BINS, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::metrics::{
    error_vs_frequency, error_vs_surprise, Aggregate, MetricsReport, SurpriseErrorTable,
};
use crate::sampling::STEP_LOG_HEADER;
use crate::tensor::ImageBatch;
use crate::trainer::{reconstruct_dataset, train};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const STEP_LOG_FILE: &str = "step_log.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Loads or simulates the configured dataset.
pub fn load_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<Dataset> {
    match cfg.dataset.source {
        DatasetSource::Pendulum => simulate_pendulum(&cfg.pendulum_params(), seed),
        DatasetSource::Folder => {
            let path = cfg.dataset.path.as_ref().ok_or_else(|| {
                Error::Validation(vec!["dataset.path is required for folder datasets".into()])
            })?;
            load_image_folder(path)
        }
    }
}

/// Writes the simulated dataset as numbered frames plus a manifest.
pub fn generate(cfg: &ExperimentConfig, out: &Path, seed: u64) -> Result<usize> {
    cfg.validate()?;
    if cfg.dataset.source != DatasetSource::Pendulum {
        return Err(Error::Validation(vec![
            "generate only applies to simulated datasets (dataset.source = \"pendulum\")".into(),
        ]));
    }
    let data = simulate_pendulum(&cfg.pendulum_params(), seed)?;
    let rarity = rarity_bins(&data, cfg.dataset.rarity_bins)?;
    write_archive(out, &data, &rarity)?;
    Ok(data.len())
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

/// Trains one run per seed under `out/seed-<seed>/`.
pub fn train_runs(
    cfg: &ExperimentConfig,
    out: &Path,
    seeds: &[u64],
    quiet: bool,
) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut dirs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let dir = seed_dir(out, seed);
        train_one(cfg, &dir, seed, quiet)?;
        dirs.push(dir);
    }
    Ok(dirs)
}

fn train_one(cfg: &ExperimentConfig, dir: &Path, seed: u64, quiet: bool) -> Result<()> {
    let data = load_dataset(cfg, seed)?;
    let tc = cfg.train_config(seed);
    if tc.hidden1 >= data.dims().len() {
        return Err(Error::Validation(vec![format!(
            "model.hidden1 {} must be below the input size {}",
            tc.hidden1,
            data.dims().len()
        )]));
    }
    if tc.batch_size > data.len() {
        return Err(Error::Validation(vec![format!(
            "train.batch_size {} exceeds the {} frames available",
            tc.batch_size,
            data.len()
        )]));
    }
    fs::create_dir_all(dir)?;
    let outcome = train(&data, &tc, |r| {
        if !quiet {
            eprintln!(
                "seed {seed} epoch {} loss {:.6e} ({:.1}s)",
                r.epoch, r.mean_loss, r.wall_seconds
            );
        }
    })?;

    let mut log = String::from("epoch,mean_loss\n");
    let mut timing = String::from("epoch,wall_seconds\n");
    for r in &outcome.epochs {
        writeln!(log, "{},{}", r.epoch, r.mean_loss).unwrap();
        writeln!(timing, "{},{:.3}", r.epoch, r.wall_seconds).unwrap();
    }
    fs::write(dir.join(TRAIN_LOG_FILE), log)?;
    fs::write(dir.join(TIMING_FILE), timing)?;
    if !outcome.steps.is_empty() {
        let mut steps = format!("{STEP_LOG_HEADER}\n");
        for (i, s) in outcome.steps.iter().enumerate() {
            steps.push_str(&s.csv_row(i));
            steps.push('\n');
        }
        fs::write(dir.join(STEP_LOG_FILE), steps)?;
    }
    Checkpoint::new(outcome.model, data.dims())?.save(&dir.join(CHECKPOINT_FILE))?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    Ok(())
}

/// Evaluates a checkpoint on the configured dataset.
pub fn evaluate(
    cfg: &ExperimentConfig,
    checkpoint: &Path,
    out: &Path,
    seed: u64,
) -> Result<MetricsReport> {
    cfg.validate()?;
    let ckpt = Checkpoint::load(checkpoint)?;
    let data = load_dataset(cfg, seed)?;
    if ckpt.image_dims != data.dims() {
        return Err(Error::Shape(format!(
            "checkpoint expects {:?} images, dataset has {:?}",
            ckpt.image_dims,
            data.dims()
        )));
    }
    let recon = reconstruct_dataset(&ckpt.model, &data, cfg.train.batch_size)?;
    write_evaluation(cfg, &data, &recon, out)
}

/// Writes every report for `recon` against the ground truth.
pub fn write_evaluation(
    cfg: &ExperimentConfig,
    data: &Dataset,
    recon: &ImageBatch,
    out: &Path,
) -> Result<MetricsReport> {
    fs::create_dir_all(out)?;
    let truth = data.frames();
    let report = MetricsReport::compute(truth, recon)?;
    let rarity = rarity_bins(data, cfg.dataset.rarity_bins)?;
    fs::write(out.join("metrics.csv"), report.to_csv())?;
    fs::write(out.join(MANIFEST_FILE), manifest_csv(data, &rarity))?;

    let freq = error_vs_frequency(&report.mae, &rarity)?;
    let mut s = String::from("bin,lower,upper,count,mean_abs_error\n");
    for r in &freq.rows {
        let e = r.mean_error.map(|e| e.to_string()).unwrap_or_default();
        writeln!(s, "{},{},{},{},{e}", r.bin, r.lower, r.upper, r.count).unwrap();
    }
    fs::write(out.join("error_vs_frequency.csv"), s)?;

    let surprise = surprise_table(cfg, truth, recon)?;
    write_surprise_tables(out, &surprise)?;

    let rare = rarity.rarest_fraction(0.1);
    let mut summary = String::from("metric,mean,std\n");
    for (name, agg) in report.aggregates() {
        writeln!(summary, "{name},{},{}", agg.mean, agg.std).unwrap();
    }
    writeln!(summary, "flatness,{},", freq.flatness).unwrap();
    writeln!(summary, "rare10_mse,{},", report.mean_mse_over(&rare)).unwrap();
    fs::write(out.join(SUMMARY_FILE), summary)?;

    dump_showcase(out, truth, recon, &rarity, cfg.evaluate.showcase)?;
    Ok(report)
}

fn manifest_csv(data: &Dataset, rarity: &RarityTable) -> String {
    let mut csv = String::from("index,angle,bin,count\n");
    for i in 0..data.len() {
        let angle = data.angles().map(|a| a[i].to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{i},{angle},{},{}",
            rarity.sample_bin[i], rarity.sample_count[i]
        )
        .unwrap();
    }
    csv
}

/// Surprisal is a batch-level quantity, so it is computed over consecutive
/// batches of the training batch size.
fn surprise_table(
    cfg: &ExperimentConfig,
    truth: &ImageBatch,
    recon: &ImageBatch,
) -> Result<SurpriseErrorTable> {
    let (bins, eps) = match cfg.loss_kind() {
        crate::loss::LossKind::Entropy(e) => (e.bins, e.eps),
        _ => (DEFAULT_BINS, DEFAULT_EPS),
    };
    let n = truth.batch_size();
    let step = cfg.train.batch_size.max(1);
    let mut tables = Vec::new();
    for start in (0..n).step_by(step) {
        let rows: Vec<usize> = (start..(start + step).min(n)).collect();
        let (x, y) = (truth.select(&rows), recon.select(&rows));
        let map = SurprisalMap::compute(&x, bins, eps)?;
        tables.push(error_vs_surprise(
            &x,
            &y,
            &map.raw,
            cfg.evaluate.surprise_bins,
        )?);
    }
    Ok(SurpriseErrorTable::merge(
        tables,
        cfg.evaluate.surprise_bins,
    ))
}

fn write_surprise_tables(out: &Path, t: &SurpriseErrorTable) -> Result<()> {
    let edges = |h: &crate::metrics::Histogram, k: usize| {
        let w = (h.hi - h.lo) / h.counts.len() as f64;
        (h.lo + w * k as f64, h.lo + w * (k + 1) as f64)
    };
    let mut s = String::from("bin,lower,upper,count\n");
    for (k, c) in t.surprise_hist.counts.iter().enumerate() {
        let (lo, hi) = edges(&t.surprise_hist, k);
        writeln!(s, "{k},{lo},{hi},{c}").unwrap();
    }
    fs::write(out.join("surprise_marginal.csv"), s)?;
    let mut s = String::from("bin,lower,upper,count\n");
    for (k, c) in t.error_hist.counts.iter().enumerate() {
        let (lo, hi) = edges(&t.error_hist, k);
        writeln!(s, "{k},{lo},{hi},{c}").unwrap();
    }
    fs::write(out.join("error_marginal.csv"), s)?;
    let mut s = String::from("surprise_bin,error_bin,count\n");
    for (i, row) in t.joint_counts().iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if *c > 0 {
                writeln!(s, "{i},{j},{c}").unwrap();
            }
        }
    }
    fs::write(out.join("error_vs_surprise.csv"), s)?;
    Ok(())
}

/// Ground truth and reconstruction side by side for the rarest and the most
/// common samples.
fn dump_showcase(
    out: &Path,
    truth: &ImageBatch,
    recon: &ImageBatch,
    rarity: &RarityTable,
    count: usize,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let dir = out.join("showcase");
    fs::create_dir_all(&dir)?;
    let order = rarity.rarest_first();
    let count = count.min(order.len());
    let picks = order[..count]
        .iter()
        .enumerate()
        .map(|(r, &i)| (format!("rare_{r:02}_{i:05}.png"), i))
        .chain(
            order
                .iter()
                .rev()
                .take(count)
                .enumerate()
                .map(|(r, &i)| (format!("common_{r:02}_{i:05}.png"), i)),
        );
    let dims = truth.dims();
    let (w, h, p) = (dims.width, dims.height, dims.plane_len());
    let to_u8 = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    for (name, i) in picks {
        let path = dir.join(name);
        let pixel = |img: &[f64], c: usize, x: usize, y: usize| to_u8(img[c * p + y * w + x]);
        let pair = |x: u32, y: u32| {
            let (x, y) = (x as usize, y as usize);
            if x < w {
                (truth.sample(i), x, y)
            } else {
                (recon.sample(i), x - w, y)
            }
        };
        let saved = if dims.channels == 3 {
            image::RgbImage::from_fn((2 * w) as u32, h as u32, |x, y| {
                let (img, x, y) = pair(x, y);
                image::Rgb([
                    pixel(img, 0, x, y),
                    pixel(img, 1, x, y),
                    pixel(img, 2, x, y),
                ])
            })
            .save(&path)
        } else {
            image::GrayImage::from_fn((2 * w) as u32, h as u32, |x, y| {
                let (img, x, y) = pair(x, y);
                image::Luma([pixel(img, 0, x, y)])
            })
            .save(&path)
        };
        saved.map_err(|e| Error::Ingestion {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    }
    Ok(())
}

fn read_summary(dir: &Path) -> Result<Vec<(String, f64)>> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::Ingestion {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut f = l.split(',');
            let name = f.next().unwrap_or_default().to_string();
            let value = f
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Ingestion {
                    path: path.clone(),
                    reason: format!("bad row {l:?}"),
                })?;
            Ok((name, value))
        })
        .collect()
}

/// Side-by-side table of every summary metric, with deltas against the first report.
pub fn compare(dirs: &[PathBuf], out: &Path) -> Result<String> {
    if dirs.is_empty() {
        return Err(Error::Validation(vec![
            "compare needs at least one report directory".into(),
        ]));
    }
    for d in dirs {
        if !d.is_dir() {
            return Err(Error::Ingestion {
                path: d.clone(),
                reason: "report directory does not exist".into(),
            });
        }
    }
    let manifests: Vec<String> = dirs
        .iter()
        .map(|d| {
            fs::read_to_string(d.join(MANIFEST_FILE)).map_err(|e| Error::Ingestion {
                path: d.join(MANIFEST_FILE),
                reason: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    if let Some(i) = manifests.iter().position(|m| m != &manifests[0]) {
        return Err(Error::Ingestion {
            path: dirs[i].join(MANIFEST_FILE),
            reason: format!("manifest differs from {}", dirs[0].display()),
        });
    }
    let summaries: Vec<Vec<(String, f64)>> = dirs
        .iter()
        .map(|d| read_summary(d))
        .collect::<Result<_>>()?;

    let mut csv = String::from("metric,method,value,delta\n");
    // Spread across the reports, e.g. one evaluation per training seed.
    let mut spread = String::from("metric,mean,std,reports\n");
    for (metric, base) in &summaries[0] {
        let mut values = Vec::with_capacity(dirs.len());
        for (dir, summary) in dirs.iter().zip(&summaries) {
            let value = summary
                .iter()
                .find(|(m, _)| m == metric)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Ingestion {
                    path: dir.join(SUMMARY_FILE),
                    reason: format!("missing metric {metric}"),
                })?;
            writeln!(csv, "{metric},{},{value},{}", dir.display(), value - base).unwrap();
            values.push(value);
        }
        let agg = Aggregate::of(&values);
        writeln!(spread, "{metric},{},{},{}", agg.mean, agg.std, values.len()).unwrap();
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("compare.csv"), &csv)?;
    fs::write(out.join("compare_spread.csv"), spread)?;
    Ok(csv)
}
