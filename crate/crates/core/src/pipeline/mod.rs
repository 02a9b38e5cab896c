//! Dataset orchestration: category search, instance rendering, on-disk
//! layout, manifests and the exploration grid.
//!
//! Layout under `output_root`:
//!
//! ```text
//! <family>-<category_count>/
//!     config.json        canonical config text (digest source)
//!     params.csv         category registry
//!     manifest.csv       image path, label, FNV-1a digest of the file
//!     00000/00000_0000.png
//!     ...
//! ```

mod config;
mod explore;
mod generate;
mod manifest;
mod registry;
mod stats;

pub use config::{DatasetConfig, Family};
pub use explore::{run_exploration_grid, Axis};
pub use generate::{bench, generate_dataset, with_workers, BenchReport, GenerateReport};
pub use manifest::{DatasetManifest, ManifestRecord};
pub use registry::{
    read_bezier_registry, read_fractal_registry, read_perlin_registry, write_bezier_registry,
    write_fractal_registry, write_perlin_registry, RegistryHeader,
};
pub use stats::{dataset_stats, CategoryStats, DatasetStats};

pub const CONFIG_FILE: &str = "config.json";
pub const REGISTRY_FILE: &str = "params.csv";
pub const MANIFEST_FILE: &str = "manifest.csv";

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Relative path of an image: `<label>/<label>_<instance>.png`.
pub fn image_path(label: usize, instance: usize) -> String {
    format!("{label:05}/{label:05}_{instance:04}.png")
}
