use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Dataset, RarityTable};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub index: usize,
    pub angle: Option<f64>,
    pub bin: usize,
    pub count: usize,
}

/// Writes `frame_NNNNN.png` (8-bit grayscale, `round(v·255)`) for each frame
/// and a `manifest.csv` with `index,angle,bin,count` columns.
pub fn write_archive(dir: &Path, dataset: &Dataset, rarity: &RarityTable) -> Result<()> {
    let dims = dataset.dims();
    if dims.channels != 1 {
        return Err(Error::Config(
            "archives hold single-channel frames only".into(),
        ));
    }
    if rarity.len() != dataset.len() {
        return Err(Error::Shape(
            "rarity table does not cover the dataset".into(),
        ));
    }
    fs::create_dir_all(dir)?;
    for i in 0..dataset.len() {
        let pixels: Vec<u8> = dataset
            .frame(i)
            .iter()
            .map(|v| (v * 255.0).round() as u8)
            .collect();
        let img = image::GrayImage::from_raw(dims.width as u32, dims.height as u32, pixels)
            .expect("frame length matches dims");
        let path = dir.join(format!("frame_{i:05}.png"));
        img.save(&path).map_err(|e| Error::Ingestion {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    }
    let mut csv = String::from("index,angle,bin,count\n");
    for i in 0..dataset.len() {
        let angle = dataset
            .angles()
            .map(|a| a[i].to_string())
            .unwrap_or_default();
        writeln!(
            csv,
            "{i},{angle},{},{}",
            rarity.sample_bin[i], rarity.sample_count[i]
        )
        .unwrap();
    }
    fs::write(dir.join(MANIFEST_FILE), csv)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let bad = |line: usize, why: &str| Error::Ingestion {
        path: path.to_path_buf(),
        reason: format!("line {line}: {why}"),
    };
    let text = fs::read_to_string(path).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("index,angle,bin,count") {
        return Err(bad(1, "unexpected header"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(n + 2, "expected 4 fields"));
            }
            let angle = if f[1].is_empty() {
                None
            } else {
                Some(f[1].parse().map_err(|_| bad(n + 2, "bad angle"))?)
            };
            Ok(ManifestRow {
                index: f[0].parse().map_err(|_| bad(n + 2, "bad index"))?,
                angle,
                bin: f[2].parse().map_err(|_| bad(n + 2, "bad bin"))?,
                count: f[3].parse().map_err(|_| bad(n + 2, "bad count"))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_image_folder, rarity_bins, simulate_pendulum, PendulumParams};

    #[test]
    fn archive_reloads_with_angles() {
        let dir = tempfile::tempdir().unwrap();
        let p = PendulumParams {
            frames: 12,
            ..Default::default()
        };
        let d = simulate_pendulum(&p, 0).unwrap();
        let r = rarity_bins(&d, 4).unwrap();
        write_archive(dir.path(), &d, &r).unwrap();

        let rows = read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[3].angle, Some(d.angles().unwrap()[3]));

        let back = load_image_folder(dir.path()).unwrap();
        assert_eq!(back.len(), 12);
        assert_eq!(back.angles(), d.angles());
        for i in 0..12 {
            for (a, b) in back.frame(i).iter().zip(d.frame(i)) {
                assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
            }
        }
    }
}
