use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdsl_core::pipeline::{self, Axis, DatasetConfig, Family};
use fdsl_core::render::{DrawMode, RenderConfig};
use fdsl_core::search::{self, SearchConfig};
use fdsl_core::Error;

const WORKERS_ENV: &str = "FDSL_WORKERS";

#[derive(Parser)]
#[command(
    name = "fdsl",
    version,
    about = "Formula-driven image dataset generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search random IFS categories inside a filling-rate window.
    Search(SearchArgs),
    /// Generate a dataset (registry, images, manifest).
    Generate(GenerateArgs),
    /// Verify a generated dataset and summarise filling rates.
    Stats {
        /// Dataset directory holding manifest.csv.
        #[arg(long)]
        root: PathBuf,
    },
    /// Emit (and optionally generate) one config per value of an exploration axis.
    Explore(ExploreArgs),
    /// Generate a Bezier or Perlin baseline dataset.
    Baseline(BaselineArgs),
    /// Measure rendering throughput without touching the disk.
    Bench(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Draw {
    Point,
    PatchRandom,
    PatchFix,
}

impl From<Draw> for DrawMode {
    fn from(d: Draw) -> Self {
        match d {
            Draw::Point => DrawMode::Point,
            Draw::PatchRandom => DrawMode::PatchRandom,
            Draw::PatchFix => DrawMode::PatchFixed { pattern_seed: 0 },
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 1000)]
    categories: usize,
    #[arg(long, default_value_t = 0.05)]
    rmin: f64,
    #[arg(long, default_value_t = 0.25)]
    rmax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to 1000 x categories.
    #[arg(long)]
    max_attempts: Option<u64>,
    /// Canonical render size used to measure filling rates.
    #[arg(long, default_value_t = 512)]
    size: u32,
    #[arg(long, default_value_t = 100_000)]
    dots: usize,
    #[arg(long, value_enum, default_value_t = Draw::Point)]
    draw: Draw,
    #[arg(long)]
    workers: Option<usize>,
    /// Registry file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GenerateArgs {
    #[arg(long, default_value = "fractal")]
    family: String,
    #[arg(long, default_value_t = 16)]
    categories: usize,
    #[arg(long, default_value_t = 16)]
    instances: usize,
    #[arg(long, default_value_t = 256)]
    size: u32,
    #[arg(long, default_value_t = 200_000)]
    dots: usize,
    #[arg(long, value_enum, default_value_t = Draw::PatchFix)]
    draw: Draw,
    #[arg(long, default_value_t = 0.05)]
    rmin: f64,
    #[arg(long, default_value_t = 0.25)]
    rmax: f64,
    #[arg(long, default_value_t = 0.4)]
    weight_interval: f64,
    /// Search attempt budget; defaults to 1000 x categories.
    #[arg(long)]
    max_attempts: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "data")]
    out: PathBuf,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    axis: String,
    /// Comma-separated values; defaults to the reference grid of the axis.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    /// Generate every emitted config instead of only listing it.
    #[arg(long)]
    run: bool,
    #[command(flatten)]
    base: GenerateArgs,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(value_parser = ["bezier", "perlin"])]
    family: String,
    #[arg(long, default_value_t = 144)]
    categories: usize,
    #[arg(long, default_value_t = 16)]
    instances: usize,
    #[arg(long, default_value_t = 256)]
    size: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "data")]
    out: PathBuf,
}

fn workers(flag: Option<usize>) -> Result<usize, Error> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return v.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            Error::InvalidConfig(format!("{WORKERS_ENV}={v:?} is not a positive integer"))
        });
    }
    Ok(flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

impl GenerateArgs {
    fn config(&self) -> Result<DatasetConfig, Error> {
        let mut cfg = DatasetConfig::new(self.family.parse()?, self.categories, self.instances);
        cfg.render.width = self.size;
        cfg.render.height = self.size;
        cfg.render.point_count = self.dots;
        cfg.render.draw_mode = self.draw.into();
        cfg.search.r_min = self.rmin;
        cfg.search.r_max = self.rmax;
        cfg.search.max_attempts = self.max_attempts.unwrap_or(0);
        cfg.weight_interval = self.weight_interval;
        cfg.global_seed = self.seed;
        cfg.output_root = self.out.clone();
        cfg.worker_count = workers(self.workers)?;
        Ok(cfg)
    }
}

fn run_search(args: SearchArgs) -> Result<(), Error> {
    let mut cfg = SearchConfig::new(args.categories, args.seed);
    cfg.r_min = args.rmin;
    cfg.r_max = args.rmax;
    if let Some(m) = args.max_attempts {
        cfg.max_attempts = m;
    }
    cfg.canonical_render = RenderConfig {
        width: args.size,
        height: args.size,
        point_count: args.dots,
        draw_mode: args.draw.into(),
        ..RenderConfig::canonical()
    };
    let (specs, stats) =
        pipeline::with_workers(workers(args.workers)?, || search::search_with_stats(&cfg))?;
    if let Some(out) = &args.out {
        let text = pipeline::write_fractal_registry(cfg.seed, &cfg.canonical_render, &specs);
        fs::write(out, text).map_err(|e| Error::Io {
            path: out.clone(),
            source: e,
        })?;
    }
    let (lo, hi) = specs
        .iter()
        .map(|s| s.canonical_filling_rate)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        });
    println!(
        "search ok accepted={} attempts={} outside_window={} diverged={} acceptance_rate={:.6} min_rate={lo:.6} max_rate={hi:.6}",
        stats.accepted,
        stats.attempts,
        stats.outside_window,
        stats.diverged,
        stats.acceptance_rate()
    );
    Ok(())
}

fn run_generate(cfg: &DatasetConfig) -> Result<(), Error> {
    let report = pipeline::generate_dataset(cfg)?;
    let hist = report.manifest.label_histogram();
    println!(
        "generate ok dir={} images={} written={} skipped={} labels={} digest={:016x}",
        report.dataset_dir.display(),
        report.manifest.records.len(),
        report.images_written,
        report.images_skipped,
        hist.len(),
        report.manifest.config_digest
    );
    if let Some(s) = report.search {
        println!(
            "search accepted={} attempts={} acceptance_rate={:.6}",
            s.accepted,
            s.attempts,
            s.acceptance_rate()
        );
    }
    Ok(())
}

fn run_stats(root: PathBuf) -> Result<(), Error> {
    let stats = pipeline::dataset_stats(&root)?;
    println!("label,images,mean_rate,min_rate,max_rate,canonical_rate");
    for c in &stats.categories {
        println!(
            "{},{},{:.6},{:.6},{:.6},{}",
            c.label,
            c.images,
            c.mean_filling_rate,
            c.min_filling_rate,
            c.max_filling_rate,
            c.canonical_filling_rate
                .map_or(String::new(), |r| format!("{r:.6}"))
        );
    }
    println!(
        "stats ok family={} categories={} images={} digest={:016x}",
        stats.family,
        stats.categories.len(),
        stats.total_images,
        stats.config_digest
    );
    Ok(())
}

fn run_explore(args: ExploreArgs) -> Result<(), Error> {
    let axis: Axis = args.axis.parse()?;
    let values = if args.values.is_empty() {
        axis.reference_values()
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        args.values
    };
    let base = args.base.config()?;
    for cfg in pipeline::run_exploration_grid(&base, axis, &values)? {
        println!(
            "explore config out={} digest={:016x}",
            cfg.output_root.display(),
            cfg.digest()
        );
        if args.run {
            run_generate(&cfg)?;
        }
    }
    Ok(())
}

fn run_baseline(args: BaselineArgs) -> Result<(), Error> {
    let family: Family = args.family.parse()?;
    let mut cfg = DatasetConfig::new(family, args.categories, args.instances);
    cfg.render.width = args.size;
    cfg.render.height = args.size;
    cfg.global_seed = args.seed;
    cfg.output_root = args.out;
    cfg.worker_count = workers(args.workers)?;
    run_generate(&cfg)
}

fn run_bench(cfg: &DatasetConfig) -> Result<(), Error> {
    let r = pipeline::bench(cfg)?;
    println!(
        "bench ok family={} images={} workers={} catalog_s={:.3} render_s={:.3} images_per_sec={:.2} png_bytes={}",
        cfg.family,
        r.images,
        r.workers,
        r.catalog_seconds,
        r.render_seconds,
        r.images_per_second(),
        r.encoded_bytes
    );
    Ok(())
}

fn error_line(e: &Error) -> String {
    let mut line = format!("error kind={}", e.kind());
    match e {
        Error::SearchTimeout {
            accepted,
            required,
            attempts,
        } => line.push_str(&format!(
            " accepted={accepted} required={required} attempts={attempts}"
        )),
        Error::Integrity { path, .. } | Error::Io { path, .. } | Error::Parse { path, .. } => {
            line.push_str(&format!(" path={}", path.display()))
        }
        _ => {}
    }
    line.push_str(&format!(" message={:?}", e.to_string()));
    line
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Search(a) => run_search(a),
        Command::Generate(a) => a.config().and_then(|c| run_generate(&c)),
        Command::Stats { root } => run_stats(root),
        Command::Explore(a) => run_explore(a),
        Command::Baseline(a) => run_baseline(a),
        Command::Bench(a) => a.config().and_then(|c| run_bench(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}
