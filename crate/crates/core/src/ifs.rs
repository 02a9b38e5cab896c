//! Iterated function systems of planar affine maps and the random
//! iteration ("chaos game") algorithm that samples their attractors.

// Negated comparisons here are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Determinant sums below this are treated as an all-singular system.
pub const DEGENERATE_DET_SUM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// `w(p) = [a b; c d] p + (e, f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl AffineMap {
    pub const fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        AffineMap { a, b, c, d, e, f }
    }

    pub const fn from_params(p: [f64; 6]) -> Self {
        AffineMap::new(p[0], p[1], p[2], p[3], p[4], p[5])
    }

    /// Scaled identity plus a shift.
    pub const fn scaled(scale: f64, e: f64, f: f64) -> Self {
        AffineMap::new(scale, 0.0, 0.0, scale, e, f)
    }

    pub fn params(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    pub fn param_mut(&mut self, index: usize) -> &mut f64 {
        match index {
            0 => &mut self.a,
            1 => &mut self.b,
            2 => &mut self.c,
            3 => &mut self.d,
            4 => &mut self.e,
            5 => &mut self.f,
            _ => panic!("affine parameter index {index} out of range 0..6"),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        Point {
            x: self.a * p.x + self.b * p.y + self.e,
            y: self.c * p.x + self.d * p.y + self.f,
        }
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let s = a * a + b * b + c * c + d * d;
        let det = self.det();
        let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
        ((s + disc) / 2.0).sqrt()
    }

    /// Solution of `w(p) = p`, if `I - A` is invertible.
    pub fn fixed_point(&self) -> Option<Point> {
        let (m00, m01, m10, m11) = (1.0 - self.a, -self.b, -self.c, 1.0 - self.d);
        let det = m00 * m11 - m01 * m10;
        if det.abs() < 1e-15 {
            return None;
        }
        Some(Point {
            x: (m11 * self.e - m01 * self.f) / det,
            y: (m00 * self.f - m10 * self.e) / det,
        })
    }
}

/// Selection probabilities `p_i = |det A_i| / sum_j |det A_j|`.
pub fn compute_probabilities(maps: &[AffineMap]) -> Result<Vec<f64>> {
    if maps.is_empty() {
        return Err(Error::InvalidCount(0));
    }
    let dets: Vec<f64> = maps.iter().map(|m| m.det().abs()).collect();
    let det_sum: f64 = dets.iter().sum();
    if !(det_sum >= DEGENERATE_DET_SUM) {
        return Err(Error::DegenerateSystem { det_sum });
    }
    Ok(dets.into_iter().map(|d| d / det_sum).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    maps: Vec<AffineMap>,
    probs: Vec<f64>,
}

impl IfsSystem {
    /// Builds a system with determinant-proportional probabilities.
    pub fn from_maps(maps: Vec<AffineMap>) -> Result<Self> {
        let probs = compute_probabilities(&maps)?;
        Ok(IfsSystem { maps, probs })
    }

    /// Builds a system with explicit probabilities.
    pub fn with_probabilities(maps: Vec<AffineMap>, probs: Vec<f64>) -> Result<Self> {
        if maps.is_empty() || maps.len() != probs.len() {
            return Err(Error::InvalidConfig(format!(
                "{} maps with {} probabilities",
                maps.len(),
                probs.len()
            )));
        }
        if let Some(m) = maps.iter().find(|m| !m.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite map {m:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "probabilities {probs:?} do not form a distribution"
            )));
        }
        Ok(IfsSystem { maps, probs })
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// The three-map Sierpinski gasket on the triangle (0,0), (1,0), (0,1).
    pub fn sierpinski() -> Self {
        IfsSystem::from_maps(vec![
            AffineMap::scaled(0.5, 0.0, 0.0),
            AffineMap::scaled(0.5, 0.5, 0.0),
            AffineMap::scaled(0.5, 0.0, 0.5),
        ])
        .expect("sierpinski maps are non-degenerate")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub point_count: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub initial_point: (f64, f64),
    pub divergence_bound: f64,
}

impl IterationConfig {
    pub const DEFAULT_BURN_IN: usize = 20;
    pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e6;

    pub fn new(point_count: usize, seed: u64) -> Self {
        IterationConfig {
            point_count,
            burn_in: Self::DEFAULT_BURN_IN,
            seed,
            initial_point: (0.0, 0.0),
            divergence_bound: Self::DEFAULT_DIVERGENCE_BOUND,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.point_count == 0 {
            return Err(Error::InvalidConfig("point_count must be >= 1".into()));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::InvalidConfig("divergence_bound must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl From<Vec<Point>> for PointCloud {
    fn from(points: Vec<Point>) -> Self {
        PointCloud { points }
    }
}

/// Runs the random iteration algorithm: each step draws map `i` with
/// probability `p_i` from a stream seeded by `cfg.seed` and moves the point
/// through it. The first `burn_in` iterates are dropped, the next
/// `point_count` are returned.
pub fn iterate(system: &IfsSystem, cfg: &IterationConfig) -> Result<PointCloud> {
    cfg.validate()?;
    let selector = Selector::new(system.probs());
    let maps = system.maps();
    let mut rng = seed::rng(cfg.seed);
    let bound = cfg.divergence_bound;
    let mut p = Point::new(cfg.initial_point.0, cfg.initial_point.1);
    let mut points = Vec::with_capacity(cfg.point_count);
    let total = cfg.burn_in as u64 + cfg.point_count as u64;
    for step in 0..total {
        let i = selector.pick(seed::unit_f64(&mut rng));
        p = maps[i].apply(p);
        let magnitude = p.x.abs().max(p.y.abs());
        if !(magnitude <= bound) {
            return Err(Error::Diverged {
                iteration: step + 1,
                magnitude,
                bound,
            });
        }
        if step >= cfg.burn_in as u64 {
            points.push(p);
        }
    }
    Ok(PointCloud { points })
}

const FAST_SELECT: usize = 8;

/// Inverse-CDF map selection: map `i` is chosen for `u` in
/// `[cum_{i-1}, cum_i)`. Systems with up to eight maps count thresholds
/// without branching, since the choice is unpredictable by construction.
struct Selector {
    cumulative: Vec<f64>,
    padded: [f64; FAST_SELECT],
}

impl Selector {
    fn new(probs: &[f64]) -> Self {
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in probs {
            acc += p;
            cumulative.push(acc);
        }
        // rounding must not leave a gap at the top of [0, 1)
        *cumulative.last_mut().unwrap() = f64::INFINITY;
        let mut padded = [f64::INFINITY; FAST_SELECT];
        if cumulative.len() <= FAST_SELECT {
            padded[..cumulative.len()].copy_from_slice(&cumulative);
        }
        Selector { cumulative, padded }
    }

    #[inline]
    fn pick(&self, u: f64) -> usize {
        if self.cumulative.len() <= FAST_SELECT {
            self.padded.iter().map(|&c| (u >= c) as usize).sum()
        } else {
            self.cumulative.iter().position(|&c| u < c).unwrap()
        }
    }
}
