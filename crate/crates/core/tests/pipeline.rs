use std::fs;
use std::path::Path;

use fdsl_core::pipeline::{
    self, dataset_stats, generate_dataset, image_path, DatasetConfig, DatasetManifest, Family,
    MANIFEST_FILE,
};
use fdsl_core::render::{filling_rate, RasterImage};
use fdsl_core::search::CategorySpec;
use fdsl_core::Error;
use tempfile::TempDir;

fn small(family: Family, root: &Path, workers: usize) -> DatasetConfig {
    let mut cfg = DatasetConfig::new(family, 4, 6);
    cfg.render.width = 64;
    cfg.render.height = 64;
    cfg.render.point_count = 5_000;
    cfg.search.canonical_render.width = 64;
    cfg.search.canonical_render.height = 64;
    cfg.search.canonical_render.point_count = 5_000;
    cfg.global_seed = 11;
    cfg.output_root = root.to_path_buf();
    cfg.worker_count = workers;
    cfg
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn dataset_is_complete_with_flat_histogram() {
    let tmp = TempDir::new().unwrap();
    let cfg = small(Family::Fractal, tmp.path(), 2);
    let report = generate_dataset(&cfg).unwrap();
    assert_eq!(report.manifest.records.len(), 24);
    assert_eq!(report.manifest.label_histogram(), vec![6; 4]);
    assert_eq!(report.images_written, 24);
    for r in &report.manifest.records {
        assert!(report.dataset_dir.join(&r.relative_path).is_file());
    }
    let stats = dataset_stats(&report.dataset_dir).unwrap();
    assert_eq!(stats.total_images, 24);
    assert!(stats
        .categories
        .iter()
        .all(|c| c.images == 6 && c.canonical_filling_rate.is_some()));
}

#[test]
fn second_run_is_a_no_op() {
    let tmp = TempDir::new().unwrap();
    let cfg = small(Family::Fractal, tmp.path(), 1);
    let first = generate_dataset(&cfg).unwrap();
    let before = tree(&first.dataset_dir);
    let second = generate_dataset(&cfg).unwrap();
    assert_eq!(second.images_written, 0);
    assert_eq!(second.images_skipped, 24);
    assert_eq!(second.manifest, first.manifest);
    assert_eq!(tree(&second.dataset_dir), before);
}

#[test]
fn worker_count_does_not_change_bytes() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for family in [Family::Fractal, Family::Bezier, Family::Perlin] {
        let ra = generate_dataset(&small(family, a.path(), 1)).unwrap();
        let rb = generate_dataset(&small(family, b.path(), 3)).unwrap();
        assert_eq!(tree(&ra.dataset_dir), tree(&rb.dataset_dir), "{family}");
    }
}

#[test]
fn missing_image_is_reported_by_path() {
    let tmp = TempDir::new().unwrap();
    let report = generate_dataset(&small(Family::Fractal, tmp.path(), 1)).unwrap();
    let victim = report.dataset_dir.join(image_path(2, 3));
    fs::remove_file(&victim).unwrap();
    match dataset_stats(&report.dataset_dir) {
        Err(Error::Integrity { path, .. }) => assert_eq!(path, victim),
        other => panic!("expected integrity error, got {other:?}"),
    }
    // Resuming restores the missing file.
    let again = generate_dataset(&small(Family::Fractal, tmp.path(), 1)).unwrap();
    assert_eq!(again.images_written, 1);
    assert!(dataset_stats(&report.dataset_dir).is_ok());
}

#[test]
fn empty_directory_is_an_integrity_error() {
    let tmp = TempDir::new().unwrap();
    let err = dataset_stats(tmp.path()).unwrap_err();
    assert_eq!(err.kind(), "integrity_error");
}

#[test]
fn corrupted_image_fails_resume() {
    let tmp = TempDir::new().unwrap();
    let cfg = small(Family::Fractal, tmp.path(), 1);
    let report = generate_dataset(&cfg).unwrap();
    let victim = report.dataset_dir.join(image_path(1, 0));
    let mut bytes = fs::read(&victim).unwrap();
    let last = bytes.len() - 20;
    bytes[last] ^= 0xff;
    fs::write(&victim, &bytes).unwrap();
    match generate_dataset(&cfg) {
        Err(Error::Integrity { path, .. }) => assert_eq!(path, victim),
        other => panic!("expected integrity error, got {other:?}"),
    }
    assert!(matches!(
        dataset_stats(&report.dataset_dir),
        Err(Error::Integrity { .. })
    ));
}

#[test]
fn changed_config_refuses_existing_directory() {
    let tmp = TempDir::new().unwrap();
    let cfg = small(Family::Fractal, tmp.path(), 1);
    generate_dataset(&cfg).unwrap();
    let mut other = cfg.clone();
    other.global_seed = 12;
    assert!(matches!(
        generate_dataset(&other),
        Err(Error::Integrity { .. })
    ));
}

#[test]
fn identity_instance_matches_registry_canonical_render() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small(Family::Fractal, tmp.path(), 1);
    cfg.search.canonical_render = cfg.render;
    let report = generate_dataset(&cfg).unwrap();
    let text = fs::read_to_string(report.dataset_dir.join(pipeline::REGISTRY_FILE)).unwrap();
    let (_, specs) = pipeline::read_fractal_registry(Path::new("params.csv"), &text).unwrap();
    for spec in &specs {
        let bytes = fs::read(report.dataset_dir.join(image_path(spec.category_id, 0))).unwrap();
        let stored = RasterImage::decode_png(&bytes, cfg.render.background_value).unwrap();
        let canonical = CategorySpec::render_canonical(spec, &cfg.render).unwrap();
        assert_eq!(stored, canonical);
        assert!((filling_rate(&stored) - spec.canonical_filling_rate).abs() < 1e-15);
    }
}

#[test]
fn manifest_round_trips_from_disk() {
    let tmp = TempDir::new().unwrap();
    let report = generate_dataset(&small(Family::Perlin, tmp.path(), 2)).unwrap();
    let path = report.dataset_dir.join(MANIFEST_FILE);
    let parsed = DatasetManifest::parse(&path, &fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed, report.manifest);
}

#[test]
fn baseline_datasets_verify() {
    let tmp = TempDir::new().unwrap();
    for family in [Family::Bezier, Family::Perlin] {
        let report = generate_dataset(&small(family, tmp.path(), 2)).unwrap();
        let stats = dataset_stats(&report.dataset_dir).unwrap();
        assert_eq!(stats.family, family);
        assert_eq!(stats.categories.len(), 4);
        assert!(stats
            .categories
            .iter()
            .all(|c| c.canonical_filling_rate.is_none()));
    }
}
