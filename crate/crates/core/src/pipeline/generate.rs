use std::collections::HashMap;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::augment::{self, WeightSet};
use crate::baselines::{self, BezierCategory, PerlinCategory};
use crate::error::{Error, Result};
use crate::render::{RasterImage, RenderConfig};
use crate::search::{self, CategorySpec, SearchStats};
use crate::seed;

use super::manifest::{DatasetManifest, ManifestRecord};
use super::{
    fnv1a64, image_path, registry, DatasetConfig, Family, CONFIG_FILE, MANIFEST_FILE, REGISTRY_FILE,
};

enum Catalog {
    Fractal {
        specs: Vec<CategorySpec>,
        weights: WeightSet,
        stats: SearchStats,
    },
    Bezier(Vec<BezierCategory>),
    Perlin(Vec<PerlinCategory>),
}

impl Catalog {
    fn build(cfg: &DatasetConfig) -> Result<Self> {
        Ok(match cfg.family {
            Family::Fractal => {
                let (specs, stats) = search::search_with_stats(&cfg.effective_search())?;
                Catalog::Fractal {
                    specs,
                    weights: cfg.weights()?,
                    stats,
                }
            }
            Family::Bezier => Catalog::Bezier(baselines::generate_bezier_categories(
                cfg.category_count,
                cfg.global_seed,
            )?),
            Family::Perlin => {
                let cats =
                    baselines::generate_perlin_categories(cfg.category_count, cfg.global_seed)?;
                for c in &cats {
                    c.validate_for(cfg.render.width, cfg.render.height)?;
                }
                Catalog::Perlin(cats)
            }
        })
    }

    fn registry_text(&self, cfg: &DatasetConfig) -> String {
        match self {
            Catalog::Fractal { specs, .. } => {
                let s = cfg.effective_search();
                registry::write_fractal_registry(s.seed, &s.canonical_render, specs)
            }
            Catalog::Bezier(c) => registry::write_bezier_registry(c),
            Catalog::Perlin(c) => registry::write_perlin_registry(c),
        }
    }

    fn search_stats(&self) -> Option<SearchStats> {
        match self {
            Catalog::Fractal { stats, .. } => Some(stats.clone()),
            _ => None,
        }
    }

    /// Renders every instance of category `label` in instance order.
    fn for_each_instance<T: Send>(
        &self,
        label: usize,
        count: usize,
        render: &RenderConfig,
        sink: impl Fn(usize, &dyn Fn() -> Result<RasterImage>) -> Result<T> + Sync,
    ) -> Result<Vec<T>> {
        match self {
            Catalog::Fractal { specs, weights, .. } => {
                let cat = &specs[label];
                augment::enumerate_instances(cat, count, weights)?
                    .par_iter()
                    .map(|inst| {
                        sink(inst.instance_id, &|| {
                            augment::render_instance(cat, inst, render)
                        })
                    })
                    .collect()
            }
            Catalog::Bezier(cats) => {
                let cat = &cats[label];
                (0..count)
                    .into_par_iter()
                    .map(|i| {
                        sink(i, &|| {
                            baselines::render_bezier(cat, seed::mix(cat.seed, i as u64), render)
                        })
                    })
                    .collect()
            }
            Catalog::Perlin(cats) => {
                let cat = &cats[label];
                (0..count)
                    .into_par_iter()
                    .map(|i| {
                        sink(i, &|| {
                            baselines::render_perlin(cat, seed::mix(cat.seed, i as u64), render)
                        })
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerateReport {
    pub dataset_dir: PathBuf,
    pub manifest: DatasetManifest,
    pub images_written: usize,
    pub images_skipped: usize,
    pub search: Option<SearchStats>,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidConfig("worker count must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))
}

/// Runs `f` inside a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    thread_pool(workers)?.install(f)
}

/// Writes `text` unless an identical file exists; a differing file is an
/// integrity failure. Returns whether anything was written.
fn write_checked(path: &Path, bytes: &[u8]) -> Result<bool> {
    match fs::read(path) {
        Ok(existing) if existing == bytes => Ok(false),
        Ok(_) => Err(Error::integrity(
            path,
            "existing file differs from regenerated content",
        )),
        Err(e) if e.kind() == ErrorKind::NotFound => {
            write_atomic(path, bytes)?;
            Ok(true)
        }
        Err(e) => Err(Error::io(path, e)),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Ensures the image at `path` exists with the right content; returns its
/// digest and whether it had to be written.
fn materialize(
    path: &Path,
    recorded: Option<u64>,
    render: &dyn Fn() -> Result<RasterImage>,
) -> Result<(u64, bool)> {
    match fs::read(path) {
        Ok(existing) => {
            let digest = fnv1a64(&existing);
            match recorded {
                Some(d) if d == digest => Ok((digest, false)),
                Some(d) => Err(Error::integrity(
                    path,
                    format!("file digest {digest:016x} does not match manifest digest {d:016x}"),
                )),
                None if render()?.encode_png() == existing => Ok((digest, false)),
                None => Err(Error::integrity(
                    path,
                    "existing file differs from rendered image",
                )),
            }
        }
        Err(e) if e.kind() == ErrorKind::NotFound => {
            let bytes = render()?.encode_png();
            write_atomic(path, &bytes)?;
            Ok((fnv1a64(&bytes), true))
        }
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Searches (or enumerates) categories, renders every instance and writes
/// registry, images and manifest. Files already present are verified rather
/// than rewritten, so an interrupted run can be resumed with the same config.
pub fn generate_dataset(cfg: &DatasetConfig) -> Result<GenerateReport> {
    cfg.validate()?;
    thread_pool(cfg.worker_count)?.install(|| generate_in_pool(cfg))
}

fn generate_in_pool(cfg: &DatasetConfig) -> Result<GenerateReport> {
    let dir = cfg.dataset_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let config_text = cfg.canonical_text();
    let digest = fnv1a64(config_text.as_bytes());
    let manifest_path = dir.join(MANIFEST_FILE);
    let recorded: HashMap<String, u64> = match fs::read_to_string(&manifest_path) {
        Ok(text) => {
            let prev = DatasetManifest::parse(&manifest_path, &text)?;
            if prev.config_digest != digest {
                return Err(Error::integrity(
                    &manifest_path,
                    format!(
                        "manifest digest {:016x} belongs to a different config ({digest:016x})",
                        prev.config_digest
                    ),
                ));
            }
            prev.records
                .into_iter()
                .map(|r| (r.relative_path, r.file_digest))
                .collect()
        }
        Err(e) if e.kind() == ErrorKind::NotFound => HashMap::new(),
        Err(e) => return Err(Error::io(&manifest_path, e)),
    };
    write_checked(&dir.join(CONFIG_FILE), config_text.as_bytes())?;

    let catalog = Catalog::build(cfg)?;
    write_checked(
        &dir.join(REGISTRY_FILE),
        catalog.registry_text(cfg).as_bytes(),
    )?;

    for label in 0..cfg.category_count {
        let sub = dir.join(format!("{label:05}"));
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    }

    let per_category: Vec<Vec<(ManifestRecord, bool)>> = (0..cfg.category_count)
        .into_par_iter()
        .map(|label| {
            catalog.for_each_instance(
                label,
                cfg.instances_per_category,
                &cfg.render,
                |instance, render| {
                    let relative_path = image_path(label, instance);
                    let (file_digest, written) = materialize(
                        &dir.join(&relative_path),
                        recorded.get(&relative_path).copied(),
                        render,
                    )?;
                    Ok((
                        ManifestRecord {
                            relative_path,
                            label,
                            file_digest,
                        },
                        written,
                    ))
                },
            )
        })
        .collect::<Result<_>>()?;

    let mut images_written = 0;
    let mut records = Vec::with_capacity(cfg.category_count * cfg.instances_per_category);
    for (record, written) in per_category.into_iter().flatten() {
        images_written += written as usize;
        records.push(record);
    }
    let manifest = DatasetManifest {
        config_digest: digest,
        records,
    };
    let text = manifest.to_text();
    if fs::read_to_string(&manifest_path).ok().as_deref() != Some(text.as_str()) {
        write_atomic(&manifest_path, text.as_bytes())?;
    }
    Ok(GenerateReport {
        dataset_dir: dir,
        images_skipped: manifest.records.len() - images_written,
        manifest,
        images_written,
        search: catalog.search_stats(),
    })
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub images: usize,
    pub workers: usize,
    pub catalog_seconds: f64,
    pub render_seconds: f64,
    pub encoded_bytes: u64,
}

impl BenchReport {
    pub fn images_per_second(&self) -> f64 {
        self.images as f64 / self.render_seconds.max(1e-9)
    }
}

/// Builds the catalog and renders plus PNG-encodes every image in memory.
pub fn bench(cfg: &DatasetConfig) -> Result<BenchReport> {
    cfg.validate()?;
    thread_pool(cfg.worker_count)?.install(|| {
        let start = Instant::now();
        let catalog = Catalog::build(cfg)?;
        let catalog_seconds = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let sizes: Vec<Vec<u64>> = (0..cfg.category_count)
            .into_par_iter()
            .map(|label| {
                catalog.for_each_instance(
                    label,
                    cfg.instances_per_category,
                    &cfg.render,
                    |_, render| Ok(render()?.encode_png().len() as u64),
                )
            })
            .collect::<Result<_>>()?;
        Ok(BenchReport {
            images: cfg.category_count * cfg.instances_per_category,
            workers: cfg.worker_count,
            catalog_seconds,
            render_seconds: start.elapsed().as_secs_f64(),
            encoded_bytes: sizes.iter().flatten().sum(),
        })
    })
}
