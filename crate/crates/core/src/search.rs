//! Rejection sampling of random IFS categories.
//!
//! Attempt `k` draws a system from the stream seeded by
//! `mix(search_seed, k)`, renders it with the canonical configuration and
//! keeps it when the filling rate lands inside `[r_min, r_max]`. Attempts
//! are evaluated in parallel batches but merged strictly by attempt index,
//! so the accepted list only depends on the config.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{AffineMap, IfsSystem};
use crate::render::{self, RasterImage, RenderConfig};
use crate::seed;

/// Consecutive degenerate draws tolerated by [`sample_system`].
pub const MAX_DEGENERATE_DRAWS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub category_count: usize,
    pub n_choices: Vec<usize>,
    pub param_range: (f64, f64),
    pub r_min: f64,
    pub r_max: f64,
    pub canonical_render: RenderConfig,
    pub seed: u64,
    pub max_attempts: u64,
}

impl SearchConfig {
    pub fn new(category_count: usize, seed: u64) -> Self {
        SearchConfig {
            category_count,
            n_choices: (2..=8).collect(),
            param_range: (-1.0, 1.0),
            r_min: 0.05,
            r_max: 0.25,
            canonical_render: RenderConfig::canonical(),
            seed,
            max_attempts: 1000 * category_count as u64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.category_count == 0 {
            return Err(Error::InvalidCount(0));
        }
        if self.n_choices.is_empty() || self.n_choices.contains(&0) {
            return Err(Error::InvalidConfig(
                "n_choices must be non-empty and positive".into(),
            ));
        }
        let (lo, hi) = self.param_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig(format!("bad param_range {lo}..{hi}")));
        }
        if !(0.0 <= self.r_min && self.r_min < self.r_max && self.r_max <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "filling-rate window [{}, {}] must satisfy 0 <= r_min < r_max <= 1",
                self.r_min, self.r_max
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be >= 1".into()));
        }
        self.canonical_render.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategorySpec {
    pub category_id: usize,
    pub system: IfsSystem,
    pub seed: u64,
    pub canonical_filling_rate: f64,
}

impl CategorySpec {
    /// Seed of the chaos-game stream behind the canonical rendering. It
    /// coincides with the seed of instance 0.
    pub fn iteration_seed(&self) -> u64 {
        seed::mix(self.seed, 0)
    }

    pub fn render_canonical(&self, cfg: &RenderConfig) -> Result<RasterImage> {
        render::render_ifs(&self.system, cfg, self.iteration_seed(), 0)
    }
}

/// Draws `N` uniformly from `n_choices` and all `6N` affine parameters
/// uniformly from `param_range`, redrawing while the system is degenerate.
pub fn sample_system(rng: &mut seed::Rng, cfg: &SearchConfig) -> Result<IfsSystem> {
    let (lo, hi) = cfg.param_range;
    for _ in 0..MAX_DEGENERATE_DRAWS {
        let n = cfg.n_choices[seed::below(rng, cfg.n_choices.len() as u64) as usize];
        let maps: Vec<AffineMap> = (0..n)
            .map(|_| {
                let mut p = [0.0; 6];
                for v in &mut p {
                    *v = seed::uniform(rng, lo, hi);
                }
                AffineMap::from_params(p)
            })
            .collect();
        match IfsSystem::from_maps(maps) {
            Ok(sys) => return Ok(sys),
            Err(Error::DegenerateSystem { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ExhaustedRetries {
        attempts: MAX_DEGENERATE_DRAWS,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attempt {
    Accepted {
        system: IfsSystem,
        filling_rate: f64,
    },
    OutsideWindow {
        filling_rate: f64,
    },
    Diverged,
}

/// Evaluates attempt `index` in isolation.
pub fn evaluate_attempt(cfg: &SearchConfig, index: u64) -> Result<(u64, Attempt)> {
    let attempt_seed = seed::mix(cfg.seed, index);
    let system = sample_system(&mut seed::rng(attempt_seed), cfg)?;
    let probe = CategorySpec {
        category_id: 0,
        system,
        seed: attempt_seed,
        canonical_filling_rate: 0.0,
    };
    let outcome = match probe.render_canonical(&cfg.canonical_render) {
        Ok(img) => {
            let filling_rate = render::filling_rate(&img);
            if (cfg.r_min..=cfg.r_max).contains(&filling_rate) {
                Attempt::Accepted {
                    system: probe.system,
                    filling_rate,
                }
            } else {
                Attempt::OutsideWindow { filling_rate }
            }
        }
        Err(Error::Diverged { .. }) => Attempt::Diverged,
        Err(e) => return Err(e),
    };
    Ok((attempt_seed, outcome))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub attempts: u64,
    pub accepted: usize,
    pub outside_window: u64,
    pub diverged: u64,
}

impl SearchStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempts as f64
        }
    }
}

/// Runs the search until `category_count` acceptances, returning the specs
/// and how many attempts were consumed. Parallelism comes from the ambient
/// rayon pool.
pub fn search_with_stats(cfg: &SearchConfig) -> Result<(Vec<CategorySpec>, SearchStats)> {
    cfg.validate()?;
    let batch = (rayon::current_num_threads() as u64 * 32).max(64);
    let mut specs = Vec::with_capacity(cfg.category_count);
    let mut stats = SearchStats::default();
    let mut next = 0u64;
    while next < cfg.max_attempts {
        let end = (next + batch).min(cfg.max_attempts);
        let results: Vec<(u64, Attempt)> = (next..end)
            .into_par_iter()
            .map(|k| evaluate_attempt(cfg, k))
            .collect::<Result<_>>()?;
        for (seed, attempt) in results {
            stats.attempts += 1;
            match attempt {
                Attempt::Accepted {
                    system,
                    filling_rate,
                } => {
                    specs.push(CategorySpec {
                        category_id: specs.len(),
                        system,
                        seed,
                        canonical_filling_rate: filling_rate,
                    });
                    stats.accepted += 1;
                    if specs.len() == cfg.category_count {
                        return Ok((specs, stats));
                    }
                }
                Attempt::OutsideWindow { .. } => stats.outside_window += 1,
                Attempt::Diverged => stats.diverged += 1,
            }
        }
        next = end;
    }
    Err(Error::SearchTimeout {
        accepted: specs.len(),
        required: cfg.category_count,
        attempts: stats.attempts,
    })
}

pub fn search_categories(cfg: &SearchConfig) -> Result<Vec<CategorySpec>> {
    search_with_stats(cfg).map(|(specs, _)| specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(count: usize) -> SearchConfig {
        let mut cfg = SearchConfig::new(count, 11);
        cfg.canonical_render.width = 64;
        cfg.canonical_render.height = 64;
        cfg.canonical_render.point_count = 5_000;
        cfg
    }

    #[test]
    fn sampled_systems_respect_ranges() {
        let cfg = SearchConfig::new(1, 0);
        let mut rng = seed::rng(5);
        for _ in 0..500 {
            let sys = sample_system(&mut rng, &cfg).unwrap();
            assert!((2..=8).contains(&sys.len()));
            for m in sys.maps() {
                assert!(m.params().iter().all(|v| (-1.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn mean_map_count_is_five() {
        let cfg = SearchConfig::new(1, 0);
        let mut rng = seed::rng(99);
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| sample_system(&mut rng, &cfg).unwrap().len())
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 5.0).abs() < 0.1, "mean N = {mean}");
    }

    #[test]
    fn zero_range_exhausts_retries() {
        let mut cfg = SearchConfig::new(1, 0);
        cfg.param_range = (0.0, 0.0);
        assert!(matches!(
            sample_system(&mut seed::rng(1), &cfg),
            Err(Error::ExhaustedRetries { attempts: 1000 })
        ));
    }

    #[test]
    fn open_window_accepts_first_renderable_draw() {
        let mut cfg = small(1);
        cfg.r_min = 0.0;
        cfg.r_max = 1.0;
        let (specs, stats) = search_with_stats(&cfg).unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(stats.outside_window, 0);
        assert_eq!(stats.attempts, stats.diverged + 1);
    }

    #[test]
    fn accepted_categories_lie_in_window() {
        let cfg = small(5);
        let specs = search_categories(&cfg).unwrap();
        assert_eq!(specs.len(), 5);
        for (i, s) in specs.iter().enumerate() {
            assert_eq!(s.category_id, i);
            assert!((cfg.r_min..=cfg.r_max).contains(&s.canonical_filling_rate));
            let again = render::filling_rate(&s.render_canonical(&cfg.canonical_render).unwrap());
            assert_eq!(again.to_bits(), s.canonical_filling_rate.to_bits());
        }
    }

    #[test]
    fn timeout_reports_progress() {
        let mut cfg = small(3);
        cfg.max_attempts = 10;
        cfg.r_min = 0.99;
        cfg.r_max = 1.0;
        match search_categories(&cfg) {
            Err(Error::SearchTimeout {
                accepted,
                required,
                attempts,
            }) => {
                assert_eq!((accepted, required, attempts), (0, 3, 10));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_windows_rejected() {
        let mut cfg = small(1);
        cfg.r_min = 0.3;
        cfg.r_max = 0.3;
        assert!(search_categories(&cfg).is_err());
        cfg = small(0);
        assert!(matches!(
            search_categories(&cfg),
            Err(Error::InvalidCount(0))
        ));
    }
}
