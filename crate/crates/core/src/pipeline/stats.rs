use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::render::{filling_rate, RasterImage};

use super::manifest::DatasetManifest;
use super::{fnv1a64, registry, DatasetConfig, Family, CONFIG_FILE, MANIFEST_FILE, REGISTRY_FILE};

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryStats {
    pub label: usize,
    pub images: usize,
    pub mean_filling_rate: f64,
    pub min_filling_rate: f64,
    pub max_filling_rate: f64,
    /// Filling rate measured at search time (fractal datasets only).
    pub canonical_filling_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub config_digest: u64,
    pub family: Family,
    pub total_images: usize,
    pub categories: Vec<CategoryStats>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::integrity(path, "missing"),
        _ => Error::io(path, e),
    })
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read(path)?).map_err(|_| Error::integrity(path, "not UTF-8"))
}

/// Verifies every manifest entry against the files on disk and summarises
/// filling rates per category. `root` is a dataset directory (the one that
/// holds `manifest.csv`).
pub fn dataset_stats(root: &Path) -> Result<DatasetStats> {
    let manifest_path = root.join(MANIFEST_FILE);
    let manifest = DatasetManifest::parse(&manifest_path, &read_text(&manifest_path)?)?;
    let config_path = root.join(CONFIG_FILE);
    let config_text = read_text(&config_path)?;
    if fnv1a64(config_text.as_bytes()) != manifest.config_digest {
        return Err(Error::integrity(
            &config_path,
            "config digest does not match manifest",
        ));
    }
    let cfg = DatasetConfig::from_canonical_text(&config_text)?;
    let background = cfg.render.background_value;

    let rates: Vec<(usize, f64)> = manifest
        .records
        .par_iter()
        .map(|r| {
            let path = root.join(&r.relative_path);
            let bytes = read(&path)?;
            let digest = fnv1a64(&bytes);
            if digest != r.file_digest {
                return Err(Error::integrity(
                    &path,
                    format!("digest {digest:016x}, manifest says {:016x}", r.file_digest),
                ));
            }
            let img = RasterImage::decode_png(&bytes, background)
                .map_err(|e| Error::integrity(&path, format!("undecodable PNG: {e}")))?;
            Ok((r.label, filling_rate(&img)))
        })
        .collect::<Result<_>>()?;

    let canonical: Vec<f64> = if cfg.family == Family::Fractal {
        let registry_path = root.join(REGISTRY_FILE);
        let (_, specs) =
            registry::read_fractal_registry(&registry_path, &read_text(&registry_path)?)?;
        specs.iter().map(|s| s.canonical_filling_rate).collect()
    } else {
        Vec::new()
    };

    let count = manifest.label_histogram().len().max(cfg.category_count);
    let mut categories: Vec<CategoryStats> = (0..count)
        .map(|label| CategoryStats {
            label,
            images: 0,
            mean_filling_rate: 0.0,
            min_filling_rate: f64::INFINITY,
            max_filling_rate: f64::NEG_INFINITY,
            canonical_filling_rate: canonical.get(label).copied(),
        })
        .collect();
    for (label, r) in rates {
        let c = &mut categories[label];
        c.images += 1;
        c.mean_filling_rate += r;
        c.min_filling_rate = c.min_filling_rate.min(r);
        c.max_filling_rate = c.max_filling_rate.max(r);
    }
    for c in &mut categories {
        if c.images > 0 {
            c.mean_filling_rate /= c.images as f64;
        } else {
            c.min_filling_rate = 0.0;
            c.max_filling_rate = 0.0;
        }
    }
    Ok(DatasetStats {
        config_digest: manifest.config_digest,
        family: cfg.family,
        total_images: manifest.records.len(),
        categories,
    })
}
