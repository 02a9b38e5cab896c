//! Intra-category instances: parameter weighting, mirror flips and patch
//! variants.
//!
//! A category expands over the grid `W x F x P` in lexicographic order,
//! where `W` holds the identity plus every (parameter, non-unit factor) pair
//! (1 + 6 * 4 = 25 entries), `F` the four flips and `P` as many patch
//! variants as needed. 1000 instances are exactly 25 x 4 x 10.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{AffineMap, IfsSystem};
use crate::render::{self, Flip, RasterImage, RenderConfig};
use crate::search::CategorySpec;
use crate::seed;

pub const DEFAULT_WEIGHT_INTERVAL: f64 = 0.4;
/// Halvings of the weight deviation tried before falling back to identity.
pub const MAX_WEIGHT_RETRIES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightTarget {
    Identity,
    /// 0..6 for a, b, c, d, e, f.
    Param(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub target: WeightTarget,
    pub factor: f64,
}

impl WeightConfig {
    pub const IDENTITY: WeightConfig = WeightConfig {
        target: WeightTarget::Identity,
        factor: 1.0,
    };

    pub fn param(index: u8, factor: f64) -> Result<Self> {
        if index >= 6 {
            return Err(Error::InvalidConfig(format!(
                "parameter index {index} not in 0..6"
            )));
        }
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weight factor {factor} must be > 0"
            )));
        }
        Ok(WeightConfig {
            target: WeightTarget::Param(index),
            factor,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.target == WeightTarget::Identity || self.factor == 1.0
    }

    /// Same target with the deviation from 1 halved.
    fn relaxed(self) -> Self {
        WeightConfig {
            factor: 1.0 + (self.factor - 1.0) / 2.0,
            ..self
        }
    }
}

/// The five weight factors for a given interval, centred on 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    factors: [f64; 5],
}

impl WeightSet {
    /// `{1-2i, 1-i, 1, 1+i, 1+2i}` for `0 < i <= 0.5`; a non-positive lowest
    /// factor is replaced by 0.01 (so 0.5 gives `{0.01, 0.5, 1, 1.5, 2}`).
    pub fn from_interval(interval: f64) -> Result<Self> {
        if !(interval > 0.0 && interval <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "weight interval {interval} not in (0, 0.5]"
            )));
        }
        let round = |v: f64| (v * 1e6).round() / 1e6;
        let mut factors = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| round(1.0 + k * interval));
        if factors[0] <= 0.0 {
            factors[0] = 0.01;
        }
        Ok(WeightSet { factors })
    }

    pub fn factors(&self) -> &[f64; 5] {
        &self.factors
    }

    pub fn non_identity(&self) -> impl Iterator<Item = f64> + '_ {
        self.factors.iter().copied().filter(|&f| f != 1.0)
    }

    /// Identity followed by every (parameter, non-identity factor) pair.
    pub fn configs(&self) -> Vec<WeightConfig> {
        let mut out = vec![WeightConfig::IDENTITY];
        for index in 0..6u8 {
            for factor in self.non_identity() {
                out.push(WeightConfig {
                    target: WeightTarget::Param(index),
                    factor,
                });
            }
        }
        out
    }
}

impl Default for WeightSet {
    fn default() -> Self {
        WeightSet::from_interval(DEFAULT_WEIGHT_INTERVAL).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub category_id: usize,
    pub instance_id: usize,
    pub weight: WeightConfig,
    pub flip: Flip,
    pub patch_variant: u32,
    pub seed: u64,
}

/// Multiplies the selected parameter of every map by the factor and
/// recomputes the selection probabilities.
pub fn apply_weight(system: &IfsSystem, weight: &WeightConfig) -> Result<IfsSystem> {
    let index = match weight.target {
        WeightTarget::Identity => return Ok(system.clone()),
        WeightTarget::Param(i) if i < 6 => i as usize,
        WeightTarget::Param(i) => {
            return Err(Error::InvalidConfig(format!(
                "parameter index {i} not in 0..6"
            )))
        }
    };
    let maps: Vec<AffineMap> = system
        .maps()
        .iter()
        .map(|m| {
            let mut m = *m;
            *m.param_mut(index) *= weight.factor;
            m
        })
        .collect();
    IfsSystem::from_maps(maps)
}

pub fn enumerate_instances(
    category: &CategorySpec,
    instances_per_category: usize,
    weights: &WeightSet,
) -> Result<Vec<InstanceSpec>> {
    if instances_per_category < 1 {
        return Err(Error::InvalidCount(instances_per_category));
    }
    let configs = weights.configs();
    let per_variant = configs.len() * Flip::ALL.len();
    let variants = instances_per_category.div_ceil(per_variant);
    let mut out = Vec::with_capacity(instances_per_category);
    'grid: for weight in &configs {
        for flip in Flip::ALL {
            for patch_variant in 0..variants as u32 {
                if out.len() == instances_per_category {
                    break 'grid;
                }
                let instance_id = out.len();
                out.push(InstanceSpec {
                    category_id: category.category_id,
                    instance_id,
                    weight: *weight,
                    flip,
                    patch_variant,
                    seed: seed::mix(category.seed, instance_id as u64),
                });
            }
        }
    }
    Ok(out)
}

/// Renders an instance and reports the weight actually used. A weighted
/// system that diverges is retried with the deviation from 1 halved, up to
/// [`MAX_WEIGHT_RETRIES`] times, then with the identity weight.
pub fn render_instance_with_weight(
    category: &CategorySpec,
    inst: &InstanceSpec,
    cfg: &RenderConfig,
) -> Result<(RasterImage, WeightConfig)> {
    let attempt = |w: &WeightConfig| -> Result<RasterImage> {
        let system = apply_weight(&category.system, w)?;
        render::render_ifs(&system, cfg, inst.seed, inst.patch_variant)
    };
    let mut weight = inst.weight;
    let mut retries = 0;
    let img = loop {
        if weight.is_identity() {
            break attempt(&WeightConfig::IDENTITY)?;
        }
        match attempt(&weight) {
            Ok(img) => break img,
            Err(Error::Diverged { .. } | Error::DegenerateSystem { .. }) => {
                retries += 1;
                weight = if retries > MAX_WEIGHT_RETRIES {
                    WeightConfig::IDENTITY
                } else {
                    weight.relaxed()
                };
            }
            Err(e) => return Err(e),
        }
    };
    Ok((img.flipped(inst.flip), weight))
}

pub fn render_instance(
    category: &CategorySpec,
    inst: &InstanceSpec,
    cfg: &RenderConfig,
) -> Result<RasterImage> {
    render_instance_with_weight(category, inst, cfg).map(|(img, _)| img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn category(system: IfsSystem) -> CategorySpec {
        CategorySpec {
            category_id: 3,
            system,
            seed: 77,
            canonical_filling_rate: 0.1,
        }
    }

    #[test]
    fn weight_sets_for_each_interval() {
        let expect: [(f64, [f64; 5]); 5] = [
            (0.1, [0.8, 0.9, 1.0, 1.1, 1.2]),
            (0.2, [0.6, 0.8, 1.0, 1.2, 1.4]),
            (0.3, [0.4, 0.7, 1.0, 1.3, 1.6]),
            (0.4, [0.2, 0.6, 1.0, 1.4, 1.8]),
            (0.5, [0.01, 0.5, 1.0, 1.5, 2.0]),
        ];
        for (interval, factors) in expect {
            assert_eq!(
                WeightSet::from_interval(interval).unwrap().factors(),
                &factors
            );
        }
        assert!(WeightSet::from_interval(0.0).is_err());
        assert!(WeightSet::from_interval(0.6).is_err());
        assert_eq!(WeightSet::default().configs().len(), 25);
    }

    #[test]
    fn identity_weight_is_a_no_op() {
        let sys = IfsSystem::sierpinski();
        assert_eq!(apply_weight(&sys, &WeightConfig::IDENTITY).unwrap(), sys);
    }

    #[test]
    fn weighting_a_keeps_symmetric_probabilities() {
        let out = apply_weight(
            &IfsSystem::sierpinski(),
            &WeightConfig::param(0, 0.8).unwrap(),
        )
        .unwrap();
        for (m, p) in out.maps().iter().zip(out.probs()) {
            assert!((m.a - 0.4).abs() < 1e-15);
            assert_eq!(m.d, 0.5);
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weighting_shift_leaves_linear_part() {
        let sys = IfsSystem::sierpinski();
        let out = apply_weight(&sys, &WeightConfig::param(4, 1.8).unwrap()).unwrap();
        assert_eq!(out.maps()[1].e, 0.9);
        assert_eq!(out.probs(), sys.probs());
    }

    #[test]
    fn weight_config_validation() {
        assert!(WeightConfig::param(6, 1.0).is_err());
        assert!(WeightConfig::param(0, 0.0).is_err());
        assert!(WeightConfig::param(0, -1.0).is_err());
    }

    #[test]
    fn thousand_instances_fill_the_grid() {
        let cat = category(IfsSystem::sierpinski());
        let insts = enumerate_instances(&cat, 1000, &WeightSet::default()).unwrap();
        assert_eq!(insts.len(), 1000);
        let tuples: HashSet<String> = insts
            .iter()
            .map(|i| format!("{:?}/{:?}/{}", i.weight, i.flip, i.patch_variant))
            .collect();
        assert_eq!(tuples.len(), 1000);
        assert_eq!(insts.iter().map(|i| i.patch_variant).max(), Some(9));
        assert!(insts
            .iter()
            .enumerate()
            .all(|(k, i)| i.instance_id == k && i.category_id == 3));
    }

    #[test]
    fn single_instance_is_identity() {
        let cat = category(IfsSystem::sierpinski());
        let insts = enumerate_instances(&cat, 1, &WeightSet::default()).unwrap();
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].weight, WeightConfig::IDENTITY);
        assert_eq!(insts[0].flip, Flip::None);
        assert_eq!(insts[0].patch_variant, 0);
        assert_eq!(insts[0].seed, cat.iteration_seed());
        assert!(matches!(
            enumerate_instances(&cat, 0, &WeightSet::default()),
            Err(Error::InvalidCount(0))
        ));
    }

    #[test]
    fn hundred_instances_are_a_prefix() {
        let cat = category(IfsSystem::sierpinski());
        let all = enumerate_instances(&cat, 1000, &WeightSet::default()).unwrap();
        let some = enumerate_instances(&cat, 100, &WeightSet::default()).unwrap();
        // with one patch variant per (weight, flip) the order is weight-major
        assert!(some.iter().all(|i| i.patch_variant == 0));
        let pairs: HashSet<String> = some
            .iter()
            .map(|i| format!("{:?}/{:?}", i.weight, i.flip))
            .collect();
        assert_eq!(pairs.len(), 100);
        assert_eq!(all[0].weight, some[0].weight);
    }

    #[test]
    fn diverging_weight_falls_back() {
        // Contractive but close to the unit circle: a x 1.8 expands.
        let sys = IfsSystem::from_maps(vec![
            AffineMap::new(0.95, 0.0, 0.0, 0.95, 0.1, 0.0),
            AffineMap::new(0.9, 0.0, 0.0, 0.9, -0.1, 0.2),
        ])
        .unwrap();
        let cat = category(sys);
        let cfg = RenderConfig {
            point_count: 5_000,
            ..RenderConfig::default()
        };
        let inst = InstanceSpec {
            category_id: 3,
            instance_id: 7,
            weight: WeightConfig::param(0, 1.8).unwrap(),
            flip: Flip::None,
            patch_variant: 0,
            seed: 1,
        };
        let weighted = apply_weight(&cat.system, &inst.weight).unwrap();
        assert!(matches!(
            render::render_ifs(&weighted, &cfg, inst.seed, 0),
            Err(Error::Diverged { .. })
        ));
        let (img, used) = render_instance_with_weight(&cat, &inst, &cfg).unwrap();
        assert!(used.factor < 1.8);
        assert!(render::filling_rate(&img) > 0.0);
    }
}
