use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::Point;
use crate::render::{RasterImage, RenderConfig};
use crate::seed;

/// Maximum per-coordinate displacement of control points between instances.
pub const INSTANCE_JITTER: f64 = 0.1;
const MIN_SAMPLES_PER_STROKE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BezierCategory {
    pub category_id: usize,
    pub control_point_count: u32,
    pub stroke_count: u32,
    pub thickness: u32,
    pub seed: u64,
}

impl BezierCategory {
    fn structure(&self) -> (u32, u32, u32, u64) {
        (
            self.control_point_count,
            self.stroke_count,
            self.thickness,
            self.seed,
        )
    }

    /// Category-level control points in the unit square, one list per stroke.
    pub fn base_strokes(&self) -> Vec<Vec<Point>> {
        let mut rng = seed::rng(seed::mix(self.seed, u64::MAX));
        (0..self.stroke_count)
            .map(|_| {
                (0..self.control_point_count)
                    .map(|_| Point::new(seed::unit_f64(&mut rng), seed::unit_f64(&mut rng)))
                    .collect()
            })
            .collect()
    }

    /// Base strokes with every control point displaced by up to
    /// [`INSTANCE_JITTER`], clamped to the unit square.
    pub fn instance_strokes(&self, instance_seed: u64) -> Vec<Vec<Point>> {
        let mut rng = seed::rng(seed::mix(self.seed, instance_seed));
        let mut jitter = |v: f64| {
            (v + seed::uniform(&mut rng, -INSTANCE_JITTER, INSTANCE_JITTER)).clamp(0.0, 1.0)
        };
        self.base_strokes()
            .into_iter()
            .map(|stroke| {
                stroke
                    .into_iter()
                    .map(|p| Point::new(jitter(p.x), jitter(p.y)))
                    .collect()
            })
            .collect()
    }
}

/// Grid over control points {3..6} x strokes {1..6} x thickness {1..6}
/// (144 entries), then seeded random combinations for any further slots.
pub fn generate_bezier_categories(count: usize, seed: u64) -> Result<Vec<BezierCategory>> {
    if count == 0 {
        return Err(Error::InvalidCount(0));
    }
    let mut out: Vec<BezierCategory> = Vec::with_capacity(count);
    'grid: for control_point_count in 3..=6 {
        for stroke_count in 1..=6 {
            for thickness in 1..=6 {
                if out.len() == count {
                    break 'grid;
                }
                let category_id = out.len();
                out.push(BezierCategory {
                    category_id,
                    control_point_count,
                    stroke_count,
                    thickness,
                    seed: seed::mix(seed, category_id as u64),
                });
            }
        }
    }
    let mut rng = seed::rng(seed::mix(seed, u64::MAX));
    let mut seen: HashSet<_> = out.iter().map(BezierCategory::structure).collect();
    while out.len() < count {
        let category_id = out.len();
        let cat = BezierCategory {
            category_id,
            control_point_count: 3 + seed::below(&mut rng, 4) as u32,
            stroke_count: 1 + seed::below(&mut rng, 8) as u32,
            thickness: 1 + seed::below(&mut rng, 4) as u32,
            seed: seed::mix(seed, category_id as u64),
        };
        if seen.insert(cat.structure()) {
            out.push(cat);
        }
    }
    Ok(out)
}

/// Evaluates the Bezier curve with the given control points at `t`.
pub fn de_casteljau(control: &[Point], t: f64) -> Point {
    assert!(
        !control.is_empty(),
        "Bezier curve needs at least one control point"
    );
    let mut pts = control.to_vec();
    for level in (1..pts.len()).rev() {
        for i in 0..level {
            pts[i] = Point::new(
                pts[i].x + t * (pts[i + 1].x - pts[i].x),
                pts[i].y + t * (pts[i + 1].y - pts[i].y),
            );
        }
    }
    pts[0]
}

/// Draws each stroke (unit-square control points) with a square brush of
/// side `thickness`.
pub fn render_strokes(
    strokes: &[Vec<Point>],
    thickness: u32,
    cfg: &RenderConfig,
) -> Result<RasterImage> {
    cfg.validate()?;
    if thickness == 0 {
        return Err(Error::InvalidConfig("thickness must be >= 1".into()));
    }
    let (w, h) = (cfg.width as i64, cfg.height as i64);
    let samples = MIN_SAMPLES_PER_STROKE.max(2 * (cfg.width + cfg.height) as usize);
    let lo = -((thickness as i64 - 1) / 2);
    let hi = thickness as i64 / 2;
    let mut img = RasterImage::blank(cfg.width, cfg.height, cfg.background_value);
    for stroke in strokes.iter().filter(|s| !s.is_empty()) {
        for k in 0..samples {
            let p = de_casteljau(stroke, k as f64 / (samples - 1) as f64);
            let cx = (p.x * (w - 1) as f64).round() as i64;
            let cy = (p.y * (h - 1) as f64).round() as i64;
            for dy in lo..=hi {
                for dx in lo..=hi {
                    let (x, y) = (cx + dx, cy + dy);
                    if (0..w).contains(&x) && (0..h).contains(&y) {
                        img.pixels[(y * w + x) as usize] = cfg.pixel_value;
                    }
                }
            }
        }
    }
    Ok(img)
}

pub fn render_bezier(
    category: &BezierCategory,
    instance_seed: u64,
    cfg: &RenderConfig,
) -> Result<RasterImage> {
    render_strokes(
        &category.instance_strokes(instance_seed),
        category.thickness,
        cfg,
    )
}
