use std::fmt;
use std::str::FromStr;

use crate::augment::WeightSet;
use crate::error::{Error, Result};
use crate::render::{DrawMode, MIN_IMAGE_SIDE};

use super::DatasetConfig;

/// Width of the filling-rate window opened at each explored value.
pub const FILLING_RATE_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Category,
    Instance,
    PatchMode,
    FillingRate,
    WeightInterval,
    DotCount,
    ImageSize,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::Category,
        Axis::Instance,
        Axis::PatchMode,
        Axis::FillingRate,
        Axis::WeightInterval,
        Axis::DotCount,
        Axis::ImageSize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Category => "category",
            Axis::Instance => "instance",
            Axis::PatchMode => "patch_mode",
            Axis::FillingRate => "filling_rate",
            Axis::WeightInterval => "weight_interval",
            Axis::DotCount => "dot_count",
            Axis::ImageSize => "image_size",
        }
    }

    /// Values explored for this axis in the original study.
    pub fn reference_values(self) -> &'static [&'static str] {
        match self {
            Axis::Category | Axis::Instance => &["16", "32", "64", "128", "256", "512", "1000"],
            Axis::PatchMode => &["point", "patch-random", "patch-fix"],
            Axis::FillingRate => &["0.05", "0.10", "0.15", "0.20", "0.25"],
            Axis::WeightInterval => &["0.1", "0.2", "0.3", "0.4", "0.5"],
            Axis::DotCount => &["100000", "200000", "400000", "800000"],
            Axis::ImageSize => &["256", "362", "512", "724", "1024"],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown exploration axis {s:?}")))
    }
}

fn apply(cfg: &mut DatasetConfig, axis: Axis, value: &str) -> Option<()> {
    match axis {
        Axis::Category => {
            cfg.category_count = value.parse().ok().filter(|&n| n >= 1)?;
        }
        Axis::Instance => {
            cfg.instances_per_category = value.parse().ok().filter(|&n| n >= 1)?;
        }
        Axis::PatchMode => cfg.render.draw_mode = value.parse::<DrawMode>().ok()?,
        Axis::FillingRate => {
            let r: f64 = value.parse().ok().filter(|r| *r > 0.0 && *r < 1.0)?;
            cfg.search.r_min = r;
            cfg.search.r_max = (r + FILLING_RATE_BAND).min(1.0);
        }
        Axis::WeightInterval => {
            let w: f64 = value.parse().ok()?;
            WeightSet::from_interval(w).ok()?;
            cfg.weight_interval = w;
        }
        Axis::DotCount => cfg.render.point_count = value.parse().ok().filter(|&n| n >= 1)?,
        Axis::ImageSize => {
            let s: u32 = value.parse().ok().filter(|&s| s >= MIN_IMAGE_SIDE)?;
            cfg.render.width = s;
            cfg.render.height = s;
        }
    }
    Some(())
}

/// One config per value, varying `axis` from `base`, with output root
/// `<base root>/<axis>=<value>`.
pub fn run_exploration_grid(
    base: &DatasetConfig,
    axis: Axis,
    values: &[String],
) -> Result<Vec<DatasetConfig>> {
    values
        .iter()
        .map(|value| {
            let mut cfg = base.clone();
            apply(&mut cfg, axis, value).ok_or_else(|| Error::InvalidAxisValue {
                axis: axis.to_string(),
                value: value.clone(),
            })?;
            cfg.output_root = base.output_root.join(format!("{axis}={value}"));
            Ok(cfg)
        })
        .collect()
}
