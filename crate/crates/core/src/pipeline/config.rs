use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::augment::{WeightSet, DEFAULT_WEIGHT_INTERVAL};
use crate::error::{Error, Result};
use crate::render::RenderConfig;
use crate::search::SearchConfig;

use super::fnv1a64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fractal,
    Bezier,
    Perlin,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Fractal => "fractal",
            Family::Bezier => "bezier",
            Family::Perlin => "perlin",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fractal" => Ok(Family::Fractal),
            "bezier" => Ok(Family::Bezier),
            "perlin" => Ok(Family::Perlin),
            _ => Err(Error::InvalidConfig(format!("unknown family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub family: Family,
    pub category_count: usize,
    pub instances_per_category: usize,
    pub render: RenderConfig,
    /// Template for the category search; count and seed come from this config.
    /// `max_attempts == 0` means `1000 * category_count`.
    pub search: SearchConfig,
    pub weight_interval: f64,
    pub output_root: PathBuf,
    pub global_seed: u64,
    pub worker_count: usize,
}

/// Everything that determines the bytes of a dataset.
#[derive(Serialize, Deserialize)]
struct CanonicalConfig {
    format: String,
    family: Family,
    category_count: usize,
    instances_per_category: usize,
    global_seed: u64,
    weight_interval: f64,
    render: RenderConfig,
    search: SearchConfig,
}

impl DatasetConfig {
    /// Defaults: 256x256, 200k dots, fixed 3x3 patch, filling-rate window
    /// [0.05, 0.25], weight interval 0.4.
    pub fn new(family: Family, category_count: usize, instances_per_category: usize) -> Self {
        let mut search = SearchConfig::new(category_count, 0);
        search.max_attempts = 0;
        DatasetConfig {
            family,
            category_count,
            instances_per_category,
            render: RenderConfig::default(),
            search,
            weight_interval: DEFAULT_WEIGHT_INTERVAL,
            output_root: PathBuf::from("data"),
            global_seed: 0,
            worker_count: 1,
        }
    }

    pub fn effective_search(&self) -> SearchConfig {
        let mut s = self.search.clone();
        s.category_count = self.category_count;
        s.seed = self.global_seed;
        if s.max_attempts == 0 {
            s.max_attempts = 1000 * self.category_count as u64;
        }
        s
    }

    pub fn weights(&self) -> Result<WeightSet> {
        WeightSet::from_interval(self.weight_interval)
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.output_root
            .join(format!("{}-{}", self.family, self.category_count))
    }

    pub fn validate(&self) -> Result<()> {
        if self.category_count == 0 {
            return Err(Error::InvalidCount(0));
        }
        if self.instances_per_category == 0 {
            return Err(Error::InvalidCount(0));
        }
        if self.worker_count == 0 {
            return Err(Error::InvalidConfig("worker_count must be >= 1".into()));
        }
        self.render.validate()?;
        self.weights()?;
        if self.family == Family::Fractal {
            self.effective_search().validate()?;
        }
        Ok(())
    }

    pub fn canonical_text(&self) -> String {
        let c = CanonicalConfig {
            format: "fdsl-config v1".into(),
            family: self.family,
            category_count: self.category_count,
            instances_per_category: self.instances_per_category,
            global_seed: self.global_seed,
            weight_interval: self.weight_interval,
            render: self.render,
            search: self.effective_search(),
        };
        serde_json::to_string_pretty(&c).expect("config serializes to JSON")
    }

    pub fn digest(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }

    /// Rebuilds a config from its canonical text; output root and worker
    /// count are not part of it and take defaults.
    pub fn from_canonical_text(text: &str) -> Result<Self> {
        let c: CanonicalConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("config text: {e}")))?;
        Ok(DatasetConfig {
            family: c.family,
            category_count: c.category_count,
            instances_per_category: c.instances_per_category,
            render: c.render,
            search: c.search,
            weight_interval: c.weight_interval,
            output_root: PathBuf::from("."),
            global_seed: c.global_seed,
            worker_count: 1,
        })
    }
}
