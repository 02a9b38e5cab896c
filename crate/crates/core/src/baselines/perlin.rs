use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::render::{RasterImage, RenderConfig};
use crate::seed;

/// Largest magnitude of 2D gradient noise with unit gradients.
const NOISE_AMPLITUDE: f64 = std::f64::consts::FRAC_1_SQRT_2;
const DEFAULT_OCTAVES: u32 = 3;
const DEFAULT_THRESHOLD: f64 = 0.5;
/// Lattice offset between octaves so they sample unrelated cells.
const OCTAVE_SHIFT: i64 = 71;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerlinCategory {
    pub category_id: usize,
    pub freq_x: u32,
    pub freq_y: u32,
    pub octaves: u32,
    pub threshold: f64,
    pub seed: u64,
}

impl PerlinCategory {
    pub fn validate_for(&self, width: u32, height: u32) -> Result<()> {
        if self.freq_x == 0 || self.freq_y == 0 || self.octaves == 0 {
            return Err(Error::InvalidConfig(
                "perlin frequencies and octaves must be >= 1".into(),
            ));
        }
        if self.freq_x > width / 4 || self.freq_y > height / 4 {
            return Err(Error::InvalidConfig(format!(
                "perlin frequency {}x{} exceeds a quarter of the {width}x{height} image",
                self.freq_x, self.freq_y
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold {} not in (0, 1)",
                self.threshold
            )));
        }
        Ok(())
    }
}

fn exact_root(count: usize, power: u32) -> Option<usize> {
    let r = (count as f64).powf(1.0 / power as f64).round() as usize;
    (r.max(1).saturating_sub(1)..=r + 1).find(|k| k.pow(power) == count)
}

fn threshold_level(j: usize, k: usize) -> f64 {
    DEFAULT_THRESHOLD + 0.05 * (j as f64 - (k as f64 - 1.0) / 2.0)
}

/// Category grids: a count of `k^4` enumerates `k` values of each of
/// (freq_x, freq_y, octaves, threshold); a count of `k^2` enumerates
/// frequencies `1..=k` at 3 octaves and threshold 0.5; any other count takes
/// the leading entries of the smallest 4D grid that holds it.
pub fn generate_perlin_categories(count: usize, seed: u64) -> Result<Vec<PerlinCategory>> {
    if count == 0 {
        return Err(Error::InvalidCount(0));
    }
    let make =
        |category_id: usize, fx: usize, fy: usize, octaves: u32, threshold: f64| PerlinCategory {
            category_id,
            freq_x: fx as u32,
            freq_y: fy as u32,
            octaves,
            threshold,
            seed: seed::mix(seed, category_id as u64),
        };
    let mut out = Vec::with_capacity(count);
    if exact_root(count, 4).is_none() {
        if let Some(k) = exact_root(count, 2) {
            for fx in 1..=k {
                for fy in 1..=k {
                    out.push(make(out.len(), fx, fy, DEFAULT_OCTAVES, DEFAULT_THRESHOLD));
                }
            }
            return Ok(out);
        }
    }
    let k = (1..).find(|k: &usize| k.pow(4) >= count).unwrap();
    'grid: for fx in 1..=k {
        for fy in 1..=k {
            for oct in 1..=k {
                for t in 0..k {
                    if out.len() == count {
                        break 'grid;
                    }
                    out.push(make(out.len(), fx, fy, oct as u32, threshold_level(t, k)));
                }
            }
        }
    }
    Ok(out)
}

/// Classic gradient-lattice noise: 256 random unit gradients addressed
/// through a shuffled permutation, smoothstep-interpolated.
#[derive(Debug, Clone)]
pub struct PerlinNoise {
    perm: [u8; 256],
    gradients: [(f64, f64); 256],
}

impl PerlinNoise {
    pub fn new(seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut perm = [0u8; 256];
        for (i, v) in perm.iter_mut().enumerate() {
            *v = i as u8;
        }
        for i in (1..256).rev() {
            let j = seed::below(&mut rng, i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        let mut gradients = [(0.0, 0.0); 256];
        for g in gradients.iter_mut() {
            let angle = seed::uniform(&mut rng, 0.0, std::f64::consts::TAU);
            *g = (angle.cos(), angle.sin());
        }
        PerlinNoise { perm, gradients }
    }

    #[inline]
    fn gradient(&self, ix: i64, iy: i64) -> (f64, f64) {
        let h = self.perm[(ix & 255) as usize] as i64;
        self.gradients[self.perm[((h + iy) & 255) as usize] as usize]
    }

    /// Noise at lattice coordinates `(x, y)`; within `[-1/sqrt(2), 1/sqrt(2)]`.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (ix, iy) = (x0 as i64, y0 as i64);
        let dot = |cx: i64, cy: i64, dx: f64, dy: f64| {
            let g = self.gradient(ix + cx, iy + cy);
            g.0 * dx + g.1 * dy
        };
        let n00 = dot(0, 0, fx, fy);
        let n10 = dot(1, 0, fx - 1.0, fy);
        let n01 = dot(0, 1, fx, fy - 1.0);
        let n11 = dot(1, 1, fx - 1.0, fy - 1.0);
        let (u, v) = (smoothstep(fx), smoothstep(fy));
        let a = n00 + u * (n10 - n00);
        let b = n01 + u * (n11 - n01);
        a + v * (b - a)
    }
}

#[inline]
fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Octave sum mapped to `[0, 1]`, row-major `width x height`.
pub fn perlin_field(
    category: &PerlinCategory,
    instance_seed: u64,
    width: u32,
    height: u32,
) -> Vec<f64> {
    let noise = PerlinNoise::new(seed::mix(category.seed, instance_seed));
    let amp_sum: f64 = (0..category.octaves).map(|o| 0.5f64.powi(o as i32)).sum();
    let scale = 1.0 / (2.0 * NOISE_AMPLITUDE * amp_sum);
    let mut field = Vec::with_capacity(width as usize * height as usize);
    for py in 0..height {
        for px in 0..width {
            let mut n = 0.0;
            for o in 0..category.octaves {
                let f = (1u64 << o) as f64;
                let x = (px as f64 + 0.5) / width as f64 * category.freq_x as f64 * f;
                let y = (py as f64 + 0.5) / height as f64 * category.freq_y as f64 * f;
                let shift = (o as i64 * OCTAVE_SHIFT) as f64;
                n += 0.5f64.powi(o as i32) * noise.sample(x + shift, y + shift);
            }
            field.push((0.5 + n * scale).clamp(0.0, 1.0));
        }
    }
    field
}

pub fn render_perlin(
    category: &PerlinCategory,
    instance_seed: u64,
    cfg: &RenderConfig,
) -> Result<RasterImage> {
    cfg.validate()?;
    let field = perlin_field(category, instance_seed, cfg.width, cfg.height);
    let mut img = RasterImage::blank(cfg.width, cfg.height, cfg.background_value);
    for (px, v) in img.pixels.iter_mut().zip(field) {
        if v >= category.threshold {
            *px = cfg.pixel_value;
        }
    }
    Ok(img)
}
