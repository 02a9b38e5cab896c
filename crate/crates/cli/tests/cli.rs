use std::process::Command;

use tempfile::TempDir;

fn fdsl(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fdsl"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn stats_on_empty_directory_fails_with_kind_and_path() {
    let tmp = TempDir::new().unwrap();
    let (ok, _, err) = fdsl(&["stats", "--root", tmp.path().to_str().unwrap()]);
    assert!(!ok);
    assert!(err.starts_with("error kind=integrity_error path="), "{err}");
    assert!(err.contains("manifest.csv"));
}

#[test]
fn exhausted_search_reports_counts() {
    let (ok, _, err) = fdsl(&[
        "search",
        "--categories",
        "5",
        "--rmin",
        "0.9",
        "--rmax",
        "1.0",
        "--max-attempts",
        "20",
        "--size",
        "32",
        "--dots",
        "500",
    ]);
    assert!(!ok);
    assert!(
        err.contains("kind=search_timeout accepted=0 required=5 attempts=20"),
        "{err}"
    );
}

#[test]
fn invalid_arguments_are_rejected() {
    let (ok, _, err) = fdsl(&["search", "--rmin", "0.3", "--rmax", "0.2"]);
    assert!(!ok);
    assert!(err.contains("kind=invalid_config"), "{err}");
    let (ok, _, _) = fdsl(&["baseline", "mandelbrot"]);
    assert!(!ok);
}

#[test]
fn generate_then_stats_round_trip() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let (ok, stdout, err) = fdsl(&[
        "generate",
        "--categories",
        "2",
        "--instances",
        "3",
        "--size",
        "32",
        "--dots",
        "2000",
        "--workers",
        "2",
        "--out",
        out,
    ]);
    assert!(ok, "{err}");
    assert!(stdout.starts_with("generate ok"));
    assert!(stdout.contains("images=6 written=6 skipped=0 labels=2"));
    let dir = tmp.path().join("fractal-2");
    let (ok, stdout, err) = fdsl(&["stats", "--root", dir.to_str().unwrap()]);
    assert!(ok, "{err}");
    assert!(stdout
        .lines()
        .last()
        .unwrap()
        .starts_with("stats ok family=fractal categories=2 images=6"));
}

#[test]
fn explore_lists_configs_per_value() {
    let tmp = TempDir::new().unwrap();
    let (ok, stdout, err) = fdsl(&[
        "explore",
        "--axis",
        "filling_rate",
        "--values",
        "0.05,0.10",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.starts_with("explore config"))
            .count(),
        2
    );
}
