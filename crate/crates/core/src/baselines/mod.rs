//! Non-fractal formula-driven baselines: Bezier-stroke and Perlin-noise
//! categories rendered into the same binary images as the fractal datasets.

mod bezier;
mod perlin;

pub use bezier::{
    de_casteljau, generate_bezier_categories, render_bezier, render_strokes, BezierCategory,
    INSTANCE_JITTER,
};
pub use perlin::{
    generate_perlin_categories, perlin_field, render_perlin, PerlinCategory, PerlinNoise,
};
