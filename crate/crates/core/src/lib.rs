//! Formula-driven image dataset synthesis.
//!
//! Categories are random iterated function systems accepted by their
//! filling rate; instances are weighted, flipped and patch-varied renders of
//! each category. Every stage is seeded from a single `u64` and produces
//! byte-identical output regardless of thread count.

pub mod augment;
pub mod baselines;
pub mod error;
pub mod ifs;
pub mod pipeline;
pub mod render;
pub mod search;
pub mod seed;

pub use error::{Error, Result};
pub use ifs::{
    compute_probabilities, iterate, AffineMap, IfsSystem, IterationConfig, Point, PointCloud,
};
pub use render::{
    filling_rate, normalize_points, rasterize, DrawMode, Flip, RasterImage, RenderConfig,
};
pub use search::{sample_system, search_categories, CategorySpec, SearchConfig};
