use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage};

use super::{read_manifest, Dataset, Source, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::tensor::{ImageBatch, ImageDims};

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp"];

fn ingestion(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn is_color(c: ColorType) -> bool {
    !matches!(
        c,
        ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16
    )
}

/// Loads every image in `dir` (sorted by file name) scaled to `[0, 1]`.
///
/// All-grayscale folders load with one channel, otherwise three. When the
/// folder holds a dataset manifest, its angle column becomes the labels.
pub fn load_image_folder(dir: &Path) -> Result<Dataset> {
    let entries = fs::read_dir(dir).map_err(|e| ingestion(dir, e.to_string()))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| ingestion(dir, e.to_string()))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if paths.is_empty() {
        return Err(ingestion(dir, "folder contains no images"));
    }

    let images: Vec<DynamicImage> = paths
        .iter()
        .map(|p| image::open(p).map_err(|e| ingestion(p, e.to_string())))
        .collect::<Result<_>>()?;
    let (w, h) = (images[0].width(), images[0].height());
    if let Some((p, img)) = paths
        .iter()
        .zip(&images)
        .find(|(_, i)| (i.width(), i.height()) != (w, h))
    {
        return Err(ingestion(
            p,
            format!("size {}x{} differs from {w}x{h}", img.width(), img.height()),
        ));
    }
    let channels = if images.iter().any(|i| is_color(i.color())) {
        3
    } else {
        1
    };
    let dims = ImageDims::new(channels, h as usize, w as usize);

    let mut values = Vec::with_capacity(images.len() * dims.len());
    for img in &images {
        if channels == 1 {
            values.extend(img.to_luma16().as_raw().iter().map(|&v| v as f64 / 65535.0));
        } else {
            // Interleaved RGB to planar C×H×W.
            let rgb = img.to_rgb16();
            let raw = rgb.as_raw();
            for c in 0..3 {
                values.extend(raw.iter().skip(c).step_by(3).map(|&v| v as f64 / 65535.0));
            }
        }
    }
    let frames = ImageBatch::new(images.len(), dims, values)?;

    let manifest = dir.join(MANIFEST_FILE);
    let angles = if manifest.is_file() {
        let rows = read_manifest(&manifest)?;
        if rows.len() != images.len() {
            return Err(ingestion(
                &manifest,
                format!("{} rows for {} images", rows.len(), images.len()),
            ));
        }
        rows.iter().map(|r| r.angle).collect::<Option<Vec<f64>>>()
    } else {
        None
    };
    Dataset::new(frames, angles, Source::Folder)
}
