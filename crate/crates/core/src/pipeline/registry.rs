//! Category registry files (`params.csv`).
//!
//! Fractal registries start with
//! `fdsl-params v1, seed=<u64>, render=<WxH,t,mode>` followed, per category,
//! by a `category_id,N,seed,filling_rate` record and `N` rows of
//! `a,b,c,d,e,f,p`. Baseline registries start with
//! `fdsl-params v1, family=bezier|perlin` and hold one row per category.
//! Reals are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::baselines::{BezierCategory, PerlinCategory};
use crate::error::{Error, Result};
use crate::ifs::{AffineMap, IfsSystem};
use crate::render::RenderConfig;
use crate::search::CategorySpec;

use super::Family;

const MAGIC: &str = "fdsl-params v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryHeader {
    pub family: Family,
    pub seed: Option<u64>,
    pub render: Option<String>,
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_fractal_registry(
    seed: u64,
    canonical: &RenderConfig,
    specs: &[CategorySpec],
) -> String {
    let mut out = format!("{MAGIC}, seed={seed}, render={}\n", canonical.summary());
    for spec in specs {
        let sys = &spec.system;
        writeln!(
            out,
            "{},{},{},{}",
            spec.category_id,
            sys.len(),
            spec.seed,
            real(spec.canonical_filling_rate)
        )
        .unwrap();
        for (m, p) in sys.maps().iter().zip(sys.probs()) {
            let row: Vec<String> = m.params().iter().chain([p]).map(|v| real(*v)).collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
    }
    out
}

pub fn write_bezier_registry(categories: &[BezierCategory]) -> String {
    let mut out = format!("{MAGIC}, family=bezier\n");
    for c in categories {
        writeln!(
            out,
            "{},{},{},{},{}",
            c.category_id, c.control_point_count, c.stroke_count, c.thickness, c.seed
        )
        .unwrap();
    }
    out
}

pub fn write_perlin_registry(categories: &[PerlinCategory]) -> String {
    let mut out = format!("{MAGIC}, family=perlin\n");
    for c in categories {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.category_id,
            c.freq_x,
            c.freq_y,
            c.octaves,
            real(c.threshold),
            c.seed
        )
        .unwrap();
    }
    out
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines {
            path,
            inner: text.lines().enumerate(),
        }
    }

    fn err(&self, line: usize, reason: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: line + 1,
            reason: reason.into(),
        }
    }

    fn next_fields(&mut self) -> Option<(usize, Vec<&'a str>)> {
        self.inner
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| (n, l.split(',').map(str::trim).collect()))
    }

    fn parse<T: FromStr>(&self, line: usize, field: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.err(line, format!("cannot parse {field:?}")))
    }
}

fn parse_header(lines: &mut Lines<'_>) -> Result<RegistryHeader> {
    let (n, first) = lines
        .inner
        .next()
        .ok_or_else(|| lines.err(0, "empty registry"))?;
    let rest = first
        .strip_prefix(MAGIC)
        .and_then(|r| r.strip_prefix(", "))
        .ok_or_else(|| lines.err(n, "missing fdsl-params v1 header"))?;
    if let Some(family) = rest.strip_prefix("family=") {
        return Ok(RegistryHeader {
            family: family.parse().map_err(|_| lines.err(n, "unknown family"))?,
            seed: None,
            render: None,
        });
    }
    let (seed, render) = rest
        .strip_prefix("seed=")
        .and_then(|r| r.split_once(", render="))
        .ok_or_else(|| lines.err(n, "expected seed=<u64>, render=<...>"))?;
    Ok(RegistryHeader {
        family: Family::Fractal,
        seed: Some(lines.parse(n, seed)?),
        render: Some(render.to_string()),
    })
}

fn expect_family(lines: &Lines<'_>, header: &RegistryHeader, family: Family) -> Result<()> {
    if header.family != family {
        return Err(lines.err(
            0,
            format!("expected a {family} registry, found {}", header.family),
        ));
    }
    Ok(())
}

pub fn read_fractal_registry(
    path: &Path,
    text: &str,
) -> Result<(RegistryHeader, Vec<CategorySpec>)> {
    let mut lines = Lines::new(path, text);
    let header = parse_header(&mut lines)?;
    expect_family(&lines, &header, Family::Fractal)?;
    let mut specs = Vec::new();
    while let Some((n, rec)) = lines.next_fields() {
        if rec.len() != 4 {
            return Err(lines.err(
                n,
                format!("expected 4-field category record, got {}", rec.len()),
            ));
        }
        let category_id: usize = lines.parse(n, rec[0])?;
        let count: usize = lines.parse(n, rec[1])?;
        let seed: u64 = lines.parse(n, rec[2])?;
        let canonical_filling_rate: f64 = lines.parse(n, rec[3])?;
        let mut maps = Vec::with_capacity(count);
        let mut probs = Vec::with_capacity(count);
        for _ in 0..count {
            let (m, row) = lines
                .next_fields()
                .ok_or_else(|| lines.err(n, "truncated category"))?;
            if row.len() != 7 {
                return Err(lines.err(m, format!("expected 7 map fields, got {}", row.len())));
            }
            let mut v = [0.0; 7];
            for (slot, f) in v.iter_mut().zip(&row) {
                *slot = lines.parse(m, f)?;
            }
            maps.push(AffineMap::new(v[0], v[1], v[2], v[3], v[4], v[5]));
            probs.push(v[6]);
        }
        let system =
            IfsSystem::with_probabilities(maps, probs).map_err(|e| lines.err(n, e.to_string()))?;
        specs.push(CategorySpec {
            category_id,
            system,
            seed,
            canonical_filling_rate,
        });
    }
    Ok((header, specs))
}

pub fn read_bezier_registry(path: &Path, text: &str) -> Result<Vec<BezierCategory>> {
    let mut lines = Lines::new(path, text);
    let header = parse_header(&mut lines)?;
    expect_family(&lines, &header, Family::Bezier)?;
    let mut out = Vec::new();
    while let Some((n, r)) = lines.next_fields() {
        if r.len() != 5 {
            return Err(lines.err(n, "expected 5 fields"));
        }
        out.push(BezierCategory {
            category_id: lines.parse(n, r[0])?,
            control_point_count: lines.parse(n, r[1])?,
            stroke_count: lines.parse(n, r[2])?,
            thickness: lines.parse(n, r[3])?,
            seed: lines.parse(n, r[4])?,
        });
    }
    Ok(out)
}

pub fn read_perlin_registry(path: &Path, text: &str) -> Result<Vec<PerlinCategory>> {
    let mut lines = Lines::new(path, text);
    let header = parse_header(&mut lines)?;
    expect_family(&lines, &header, Family::Perlin)?;
    let mut out = Vec::new();
    while let Some((n, r)) = lines.next_fields() {
        if r.len() != 6 {
            return Err(lines.err(n, "expected 6 fields"));
        }
        out.push(PerlinCategory {
            category_id: lines.parse(n, r[0])?,
            freq_x: lines.parse(n, r[1])?,
            freq_y: lines.parse(n, r[2])?,
            octaves: lines.parse(n, r[3])?,
            threshold: lines.parse(n, r[4])?,
            seed: lines.parse(n, r[5])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{generate_bezier_categories, generate_perlin_categories};

    fn spec(id: usize) -> CategorySpec {
        CategorySpec {
            category_id: id,
            system: IfsSystem::from_maps(vec![
                AffineMap::new(0.1, -0.7, 0.3333333333333333, 0.9, -1.0, 1e-300),
                AffineMap::new(-0.0, 0.25, 0.5, -0.123_456_789_012_345_68, 0.6, 0.7),
            ])
            .unwrap(),
            seed: u64::MAX - id as u64,
            canonical_filling_rate: 0.123_456_789_012_345_68,
        }
    }

    #[test]
    fn fractal_registry_round_trip_is_exact() {
        let specs = vec![spec(0), spec(1)];
        let text = write_fractal_registry(42, &RenderConfig::canonical(), &specs);
        assert!(text.starts_with("fdsl-params v1, seed=42, render=512x512,100000,point\n"));
        let (header, back) = read_fractal_registry(Path::new("p"), &text).unwrap();
        assert_eq!(header.seed, Some(42));
        assert_eq!(header.render.as_deref(), Some("512x512,100000,point"));
        assert_eq!(back, specs);
        for (a, b) in back.iter().zip(&specs) {
            for (x, y) in a.system.probs().iter().zip(b.system.probs()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn record_layout() {
        let text = write_fractal_registry(1, &RenderConfig::canonical(), &[spec(0)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 1 + 2);
        assert_eq!(lines[1].split(',').count(), 4);
        assert!(lines[1].starts_with("0,2,18446744073709551615,"));
        assert_eq!(lines[2].split(',').count(), 7);
        assert!(lines[2].starts_with("1.0000000000000001e-1,"));
    }

    #[test]
    fn baseline_registries_round_trip() {
        let b = generate_bezier_categories(150, 4).unwrap();
        let text = write_bezier_registry(&b);
        assert!(text.starts_with("fdsl-params v1, family=bezier\n"));
        assert_eq!(read_bezier_registry(Path::new("b"), &text).unwrap(), b);

        let p = generate_perlin_categories(16, 4).unwrap();
        let text = write_perlin_registry(&p);
        assert!(text.starts_with("fdsl-params v1, family=perlin\n"));
        assert_eq!(read_perlin_registry(Path::new("p"), &text).unwrap(), p);
        assert!(read_bezier_registry(Path::new("p"), &text).is_err());
    }

    #[test]
    fn malformed_registries() {
        let p = Path::new("bad.csv");
        assert!(read_fractal_registry(p, "").is_err());
        assert!(read_fractal_registry(p, "hello\n").is_err());
        let truncated = "fdsl-params v1, seed=1, render=8x8,1,point\n0,2,5,0.1\n1,0,0,1,0,0,1\n";
        match read_fractal_registry(p, truncated) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
