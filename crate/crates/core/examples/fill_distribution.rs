//! Filling-rate distribution of unconstrained random systems under several
//! canonical render settings. Usage: `fill_distribution [draws]`.

use fdsl_core::render::{filling_rate, DrawMode, RenderConfig};
use fdsl_core::search::{sample_system, SearchConfig};
use fdsl_core::{render, seed};
use rayon::prelude::*;

fn main() {
    let draws: u64 = std::env::args().nth(1).map_or(5000, |v| v.parse().unwrap());
    let settings = [
        (256u32, 100_000usize, 0.02),
        (256, 100_000, 0.0),
        (512, 100_000, 0.02),
        (256, 50_000, 0.02),
        (362, 100_000, 0.02),
    ];
    let scfg = SearchConfig::new(1, 0);
    for (size, dots, margin) in settings {
        let cfg = RenderConfig {
            width: size,
            height: size,
            point_count: dots,
            draw_mode: DrawMode::Point,
            margin,
            ..RenderConfig::default()
        };
        let rates: Vec<Option<f64>> = (0..draws)
            .into_par_iter()
            .map(|k| {
                let s = seed::mix(0, k);
                let sys = sample_system(&mut seed::rng(s), &scfg).unwrap();
                render::render_ifs(&sys, &cfg, seed::mix(s, 0), 0)
                    .ok()
                    .map(|i| filling_rate(&i))
            })
            .collect();
        let ok: Vec<f64> = rates.iter().flatten().copied().collect();
        let inw = ok.iter().filter(|r| (0.05..=0.25).contains(*r)).count();
        let over = ok.iter().filter(|r| **r > 0.30).count();
        let mut sorted = ok.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
        println!("{size}px {dots} dots margin {margin}: diverged {:.3} in[.05,.25] {:.4} over.30 {:.5} q50 {:.3} q90 {:.3} q99 {:.3} max {:.3}",
            1.0 - ok.len() as f64 / draws as f64, inw as f64 / draws as f64, over as f64 / draws as f64, q(0.5), q(0.9), q(0.99), sorted[sorted.len()-1]);
    }
}
