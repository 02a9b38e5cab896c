//! Rasterization of point clouds into binary-occupancy grayscale images.

use std::fmt;
use std::str::FromStr;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{self, IfsSystem, IterationConfig, Point, PointCloud};
use crate::seed;

pub const DEFAULT_MARGIN: f64 = 0.02;
pub const DEFAULT_PIXEL_VALUE: u8 = 127;
pub const MIN_IMAGE_SIDE: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DrawMode {
    /// One pixel per dot.
    Point,
    /// A fresh 3x3 pattern per dot.
    PatchRandom,
    /// One 3x3 pattern, derived from `pattern_seed`, stamped at every dot.
    PatchFixed { pattern_seed: u64 },
}

impl DrawMode {
    pub fn is_patch(self) -> bool {
        !matches!(self, DrawMode::Point)
    }
}

impl fmt::Display for DrawMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrawMode::Point => f.write_str("point"),
            DrawMode::PatchRandom => f.write_str("patch-random"),
            DrawMode::PatchFixed { pattern_seed: 0 } => f.write_str("patch-fix"),
            DrawMode::PatchFixed { pattern_seed } => write!(f, "patch-fix:{pattern_seed}"),
        }
    }
}

impl FromStr for DrawMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(DrawMode::Point),
            "patch-random" => Ok(DrawMode::PatchRandom),
            "patch-fix" => Ok(DrawMode::PatchFixed { pattern_seed: 0 }),
            _ => s
                .strip_prefix("patch-fix:")
                .and_then(|v| v.parse().ok())
                .map(|pattern_seed| DrawMode::PatchFixed { pattern_seed })
                .ok_or_else(|| Error::InvalidConfig(format!("unknown draw mode {s:?}"))),
        }
    }
}

/// A 3x3 binary stamp; bit `3 * row + col` covers offset `(col - 1, row - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchPattern(u16);

impl PatchPattern {
    pub const FULL: PatchPattern = PatchPattern(0x1FF);
    pub const CENTER: PatchPattern = PatchPattern(1 << 4);

    pub fn new(mask: u16) -> Option<Self> {
        let mask = mask & 0x1FF;
        (mask != 0).then_some(PatchPattern(mask))
    }

    /// Each cell on with probability 1/2, redrawn while empty.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        loop {
            if let Some(p) = PatchPattern::new((rng.next_u64() & 0x1FF) as u16) {
                return p;
            }
        }
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn cell_count(self) -> u32 {
        self.0.count_ones()
    }

    fn offsets(self) -> impl Iterator<Item = (isize, isize)> {
        (0..9)
            .filter(move |bit| self.0 & (1 << bit) != 0)
            .map(|bit| ((bit % 3) as isize - 1, (bit / 3) as isize - 1))
    }
}

/// Per-dot pattern source for `PatchRandom`: every `u64` is cut into seven
/// 9-bit patterns; an all-zero slot is skipped.
struct PatternStream {
    rng: seed::Rng,
    word: u64,
    left: u32,
}

impl PatternStream {
    fn new(seed: u64) -> Self {
        PatternStream {
            rng: seed::rng(seed),
            word: 0,
            left: 0,
        }
    }

    fn next(&mut self) -> PatchPattern {
        loop {
            if self.left == 0 {
                self.word = self.rng.next_u64();
                self.left = 7;
            }
            let mask = (self.word & 0x1FF) as u16;
            self.word >>= 9;
            self.left -= 1;
            if let Some(p) = PatchPattern::new(mask) {
                return p;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    pub point_count: usize,
    pub draw_mode: DrawMode,
    pub pixel_value: u8,
    pub background_value: u8,
    pub margin: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            width: 256,
            height: 256,
            point_count: 200_000,
            draw_mode: DrawMode::PatchFixed { pattern_seed: 0 },
            pixel_value: DEFAULT_PIXEL_VALUE,
            background_value: 0,
            margin: DEFAULT_MARGIN,
        }
    }
}

impl RenderConfig {
    /// Rendering used to measure filling rates during category search:
    /// 512x512, 100k dots, point mode.
    pub fn canonical() -> Self {
        RenderConfig {
            width: 512,
            height: 512,
            point_count: 100_000,
            draw_mode: DrawMode::Point,
            ..RenderConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < MIN_IMAGE_SIDE || self.height < MIN_IMAGE_SIDE {
            return Err(Error::InvalidConfig(format!(
                "image size {}x{} below minimum {MIN_IMAGE_SIDE}",
                self.width, self.height
            )));
        }
        if self.point_count == 0 {
            return Err(Error::InvalidConfig("point_count must be >= 1".into()));
        }
        if self.pixel_value == self.background_value {
            return Err(Error::InvalidConfig(
                "pixel_value must differ from background_value".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(Error::InvalidConfig(format!(
                "margin {} not in [0, 0.5)",
                self.margin
            )));
        }
        Ok(())
    }

    /// `WxH,t,mode` as written in registry headers.
    pub fn summary(&self) -> String {
        format!(
            "{}x{},{},{}",
            self.width, self.height, self.point_count, self.draw_mode
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flip {
    None,
    Horizontal,
    Vertical,
    Both,
}

impl Flip {
    pub const ALL: [Flip; 4] = [Flip::None, Flip::Horizontal, Flip::Vertical, Flip::Both];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub background: u8,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn blank(width: u32, height: u32, background: u8) -> Self {
        RasterImage {
            width,
            height,
            background,
            pixels: vec![background; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels
            .iter()
            .filter(|&&v| v != self.background)
            .count()
    }

    pub fn flipped(&self, flip: Flip) -> RasterImage {
        let (w, h) = (self.width as usize, self.height as usize);
        let (mirror_x, mirror_y) = match flip {
            Flip::None => return self.clone(),
            Flip::Horizontal => (true, false),
            Flip::Vertical => (false, true),
            Flip::Both => (true, true),
        };
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for y in 0..h {
            let src_y = if mirror_y { h - 1 - y } else { y };
            let row = &self.pixels[src_y * w..(src_y + 1) * w];
            if mirror_x {
                pixels.extend(row.iter().rev());
            } else {
                pixels.extend_from_slice(row);
            }
        }
        RasterImage { pixels, ..*self }
    }

    /// 8-bit grayscale, non-interlaced PNG.
    pub fn encode_png(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() / 4);
        PngEncoder::new_with_quality(&mut out, CompressionType::Fast, FilterType::Adaptive)
            .write_image(&self.pixels, self.width, self.height, ExtendedColorType::L8)
            .expect("in-memory PNG encoding of a valid L8 buffer");
        out
    }

    pub fn decode_png(bytes: &[u8], background: u8) -> std::result::Result<Self, String> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| e.to_string())?;
        let gray = img.to_luma8();
        Ok(RasterImage {
            width: gray.width(),
            height: gray.height(),
            background,
            pixels: gray.into_raw(),
        })
    }
}

pub fn filling_rate(img: &RasterImage) -> f64 {
    let total = img.width as usize * img.height as usize;
    if total == 0 {
        return 0.0;
    }
    img.foreground_count() as f64 / total as f64
}

#[derive(Debug, Clone, Copy)]
struct AxisMap {
    min: f64,
    scale: f64,
    offset: f64,
    last: i64,
    center: Option<u32>,
}

impl AxisMap {
    fn new(min: f64, max: f64, size: u32, margin: f64) -> Self {
        let size_f = size as f64;
        let lo = margin * size_f;
        let hi = (1.0 - margin) * size_f;
        let last = (hi.ceil() as i64 - 1).max(0);
        if max > min {
            AxisMap {
                min,
                scale: (hi - lo) / (max - min),
                offset: lo,
                last,
                center: None,
            }
        } else {
            AxisMap {
                min,
                scale: 0.0,
                offset: lo,
                last,
                center: Some(size / 2),
            }
        }
    }

    #[inline]
    fn map(&self, v: f64) -> u32 {
        if let Some(c) = self.center {
            return c;
        }
        // non-negative, so truncation is floor
        let px = (self.offset + (v - self.min) * self.scale) as i64;
        px.min(self.last) as u32
    }
}

/// Min-max normalises x and y independently onto
/// `[margin*W, (1-margin)*W) x [margin*H, (1-margin)*H)`.
struct Normalizer {
    x: AxisMap,
    y: AxisMap,
}

impl Normalizer {
    fn fit(points: &[Point], width: u32, height: u32, margin: f64) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyCloud)?;
        let (mut min_x, mut max_x, mut min_y, mut max_y) = (first.x, first.x, first.y, first.y);
        for p in points {
            if p.x < min_x {
                min_x = p.x;
            }
            if p.x > max_x {
                max_x = p.x;
            }
            if p.y < min_y {
                min_y = p.y;
            }
            if p.y > max_y {
                max_y = p.y;
            }
        }
        Ok(Normalizer {
            x: AxisMap::new(min_x, max_x, width, margin),
            y: AxisMap::new(min_y, max_y, height, margin),
        })
    }

    #[inline]
    fn map(&self, p: Point) -> (u32, u32) {
        (self.x.map(p.x), self.y.map(p.y))
    }
}

pub fn normalize_points(
    cloud: &PointCloud,
    width: u32,
    height: u32,
    margin: f64,
) -> Result<Vec<(u32, u32)>> {
    if !(0.0..0.5).contains(&margin) {
        return Err(Error::InvalidConfig(format!(
            "margin {margin} not in [0, 0.5)"
        )));
    }
    let n = Normalizer::fit(&cloud.points, width, height, margin)?;
    Ok(cloud.points.iter().map(|&p| n.map(p)).collect())
}

/// Row-major index offsets of the pattern cells for an image `width` wide.
fn linear_offsets(pattern: PatchPattern, width: u32) -> ([isize; 9], usize) {
    let mut out = [0isize; 9];
    let mut n = 0;
    for (dx, dy) in pattern.offsets() {
        out[n] = dy * width as isize + dx;
        n += 1;
    }
    (out, n)
}

fn stamp(img: &mut RasterImage, x: u32, y: u32, pattern: PatchPattern, value: u8) {
    let (w, h) = (img.width as isize, img.height as isize);
    for (dx, dy) in pattern.offsets() {
        let (px, py) = (x as isize + dx, y as isize + dy);
        if px >= 0 && py >= 0 && px < w && py < h {
            img.pixels[(py * w + px) as usize] = value;
        }
    }
}

#[inline]
fn is_interior(img: &RasterImage, x: u32, y: u32) -> bool {
    x >= 1 && y >= 1 && x + 1 < img.width && y + 1 < img.height
}

pub fn rasterize(
    cloud: &PointCloud,
    cfg: &RenderConfig,
    patch_rng_seed: u64,
) -> Result<RasterImage> {
    cfg.validate()?;
    let n = Normalizer::fit(&cloud.points, cfg.width, cfg.height, cfg.margin)?;
    let mut img = RasterImage::blank(cfg.width, cfg.height, cfg.background_value);
    let value = cfg.pixel_value;
    let w = cfg.width as usize;
    match cfg.draw_mode {
        DrawMode::Point => {
            for &p in &cloud.points {
                let (x, y) = n.map(p);
                img.pixels[y as usize * w + x as usize] = value;
            }
        }
        DrawMode::PatchFixed { pattern_seed } => {
            let pattern = PatchPattern::from_seed(pattern_seed);
            let (offsets, count) = linear_offsets(pattern, cfg.width);
            for &p in &cloud.points {
                let (x, y) = n.map(p);
                if is_interior(&img, x, y) {
                    let center = (y as usize * w + x as usize) as isize;
                    for off in &offsets[..count] {
                        img.pixels[(center + off) as usize] = value;
                    }
                } else {
                    stamp(&mut img, x, y, pattern, value);
                }
            }
        }
        DrawMode::PatchRandom => {
            let mut patterns = PatternStream::new(patch_rng_seed);
            for &p in &cloud.points {
                let (x, y) = n.map(p);
                let pattern = patterns.next();
                if is_interior(&img, x, y) {
                    let center = y as usize * w + x as usize;
                    let mut bits = pattern.mask();
                    while bits != 0 {
                        let bit = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        img.pixels[center + (bit / 3) * w + bit % 3 - w - 1] = value;
                    }
                } else {
                    stamp(&mut img, x, y, pattern, value);
                }
            }
        }
    }
    Ok(img)
}

/// Draw mode used for patch variant `variant`: variant 0 keeps the configured
/// fixed pattern, later variants derive a new one from it.
pub fn variant_draw_mode(mode: DrawMode, variant: u32) -> DrawMode {
    match mode {
        DrawMode::PatchFixed { pattern_seed } if variant > 0 => DrawMode::PatchFixed {
            pattern_seed: seed::mix(pattern_seed, variant as u64),
        },
        m => m,
    }
}

/// Iterates `system` for `cfg.point_count` dots (default burn-in) from
/// `iteration_seed` and rasterizes them with patch variant `variant`.
pub fn render_ifs(
    system: &IfsSystem,
    cfg: &RenderConfig,
    iteration_seed: u64,
    variant: u32,
) -> Result<RasterImage> {
    cfg.validate()?;
    let cloud = ifs::iterate(
        system,
        &IterationConfig::new(cfg.point_count, iteration_seed),
    )?;
    let cfg = RenderConfig {
        draw_mode: variant_draw_mode(cfg.draw_mode, variant),
        ..*cfg
    };
    rasterize(&cloud, &cfg, seed::mix(iteration_seed, variant as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: DrawMode) -> RenderConfig {
        RenderConfig {
            draw_mode: mode,
            margin: 0.0,
            ..RenderConfig::default()
        }
    }

    fn center_cloud() -> PointCloud {
        PointCloud::from(vec![Point::new(0.5, 0.5)])
    }

    #[test]
    fn endpoints_of_min_max_map() {
        let cloud = PointCloud::from(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]);
        let px = normalize_points(&cloud, 256, 256, 0.0).unwrap();
        assert_eq!(px, vec![(0, 0), (255, 255)]);
    }

    #[test]
    fn identical_points_map_to_center() {
        let cloud = PointCloud::from(vec![Point::new(3.0, -2.0); 5]);
        let px = normalize_points(&cloud, 100, 60, 0.1).unwrap();
        assert!(px.iter().all(|&p| p == (50, 30)));
    }

    #[test]
    fn margin_bounds_are_respected() {
        let cloud = PointCloud::from(vec![
            Point::new(-4.0, 2.0),
            Point::new(7.0, 9.0),
            Point::new(0.3, 5.5),
        ]);
        let px = normalize_points(&cloud, 256, 256, 0.02).unwrap();
        for (x, y) in px {
            assert!((5..=250).contains(&x) && (5..=250).contains(&y), "{x},{y}");
        }
    }

    #[test]
    fn empty_cloud_is_rejected() {
        assert!(matches!(
            normalize_points(&PointCloud::default(), 64, 64, 0.0),
            Err(Error::EmptyCloud)
        ));
        assert!(matches!(
            rasterize(&PointCloud::default(), &cfg(DrawMode::Point), 0),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn single_point_and_full_patch() {
        let img = rasterize(&center_cloud(), &cfg(DrawMode::Point), 0).unwrap();
        assert_eq!(img.foreground_count(), 1);
        assert_eq!(img.get(128, 128), DEFAULT_PIXEL_VALUE);

        let mut full = None;
        for seed in 0..10_000u64 {
            if PatchPattern::from_seed(seed) == PatchPattern::FULL {
                full = Some(seed);
                break;
            }
        }
        let img = rasterize(
            &center_cloud(),
            &cfg(DrawMode::PatchFixed {
                pattern_seed: full.unwrap(),
            }),
            0,
        )
        .unwrap();
        assert_eq!(img.foreground_count(), 9);
    }

    #[test]
    fn patches_clip_at_borders() {
        let cloud = PointCloud::from(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]);
        let mut img = RasterImage::blank(16, 16, 0);
        let n = Normalizer::fit(&cloud.points, 16, 16, 0.0).unwrap();
        for &p in &cloud.points {
            let (x, y) = n.map(p);
            stamp(&mut img, x, y, PatchPattern::FULL, 1);
        }
        assert_eq!(img.foreground_count(), 8);
    }

    #[test]
    fn pattern_law_never_empty() {
        for seed in 0..2000 {
            let p = PatchPattern::from_seed(seed);
            assert!((1..=9).contains(&p.cell_count()));
        }
        let mut s = PatternStream::new(5);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..20_000 {
            let p = s.next();
            assert_ne!(p.mask(), 0);
            seen.insert(p.mask());
        }
        assert_eq!(seen.len(), 511);
    }

    #[test]
    fn filling_rate_ratios() {
        let mut img = RasterImage::blank(256, 256, 0);
        assert_eq!(filling_rate(&img), 0.0);
        for v in img.pixels.iter_mut().take(6554) {
            *v = 127;
        }
        assert!((filling_rate(&img) - 0.1).abs() < 1e-4);
        img.pixels.fill(127);
        assert_eq!(filling_rate(&img), 1.0);
    }

    #[test]
    fn flips_are_involutions() {
        let mut img = RasterImage::blank(9, 8, 0);
        img.set(1, 2, 5);
        img.set(8, 7, 6);
        for flip in Flip::ALL {
            let once = img.flipped(flip);
            assert_eq!(once.foreground_count(), img.foreground_count());
            assert_eq!(once.flipped(flip), img);
        }
        assert_eq!(img.flipped(Flip::Horizontal).get(7, 2), 5);
        assert_eq!(img.flipped(Flip::Vertical).get(1, 5), 5);
        assert_eq!(img.flipped(Flip::Both).get(0, 0), 6);
    }

    #[test]
    fn draw_mode_text_round_trip() {
        for m in [
            DrawMode::Point,
            DrawMode::PatchRandom,
            DrawMode::PatchFixed { pattern_seed: 0 },
            DrawMode::PatchFixed { pattern_seed: 99 },
        ] {
            assert_eq!(m.to_string().parse::<DrawMode>().unwrap(), m);
        }
        assert!("blob".parse::<DrawMode>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = RenderConfig::default();
        assert!(c.validate().is_ok());
        c.width = 4;
        assert!(c.validate().is_err());
        c = RenderConfig {
            pixel_value: 0,
            ..RenderConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn png_round_trip() {
        let img = render_ifs(&IfsSystem::sierpinski(), &RenderConfig::default(), 1, 0).unwrap();
        let bytes = img.encode_png();
        assert_eq!(&bytes[1..4], b"PNG");
        assert_eq!(RasterImage::decode_png(&bytes, 0).unwrap(), img);
    }
}
