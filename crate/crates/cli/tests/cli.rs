use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infiltrate"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a variant of a bundled config with textual replacements applied.
fn variant(dir: &TempDir, base: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = std::fs::read_to_string(bundled(base)).unwrap();
    for (from, to) in edits {
        assert!(text.contains(from), "{from} not in {base}");
        text = text.replacen(from, to, 1);
    }
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let path = dir.path().join(format!(
        "variant_{}.toml",
        NEXT.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&path, text).unwrap();
    path
}

const SHORT_TIMES: (&str, &str) = (
    "times_s = [0.0, 900.0, 1800.0, 2700.0, 3600.0, 4500.0, 5400.0, 6300.0, 7200.0]",
    "times_s = [0.0, 600.0, 1800.0]",
);

#[test]
fn solve_writes_grid_and_plots() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("grid.csv");
    let svg = dir.path().join("profiles.svg");
    let out = run(&[
        "solve",
        "--config",
        s(&bundled("example1.toml")),
        "--output",
        s(&csv),
        "--plot",
        s(&svg),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_m,t_s,theta,w,wx,quad_err"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 26 * 9);
    for r in rows.iter().filter(|r| r[0] == 0.25) {
        assert!((r[2] - 0.03).abs() < 1e-6);
    }
    for file in [svg.clone(), dir.path().join("profiles_heatmap.svg")] {
        let body = std::fs::read_to_string(file).unwrap();
        assert!(body.starts_with("<svg"));
    }
}

#[test]
fn output_is_byte_stable_and_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "example2.toml", &[SHORT_TIMES]);
    let (a, b, c) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("c.csv"),
    );
    let eff = dir.path().join("effective.toml");
    let first = run(&[
        "solve",
        "--config",
        s(&cfg),
        "--output",
        s(&a),
        "--effective-config",
        s(&eff),
    ]);
    assert!(first.status.success());
    assert!(run(&["solve", "--config", s(&cfg), "--output", s(&b)])
        .status
        .success());
    assert!(run(&["solve", "--config", s(&eff), "--output", s(&c)])
        .status
        .success());
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
    let effective = std::fs::read_to_string(&eff).unwrap();
    assert!(effective.contains("[fd]") && effective.contains("right_angle"));
}

#[test]
fn csv_goes_to_stdout_without_a_path() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "example2.toml", &[SHORT_TIMES]);
    let out = run(&["solve", "--config", s(&cfg)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x_m,t_s,theta,w,wx,quad_err\n"));
    assert_eq!(text.lines().count(), 1 + 17 * 3);
}

#[test]
fn empty_times_request_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "example1.toml", &[(SHORT_TIMES.0, "times_s = []")]);
    let out = run(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no output requested"));
}

#[test]
fn usage_errors_exit_with_one() {
    let cfg = bundled("example1.toml");
    assert_eq!(
        run(&["compare", "--config", s(&cfg), "--oracle", "fourier"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["solve", "--config", "/no/such/file.toml"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["integrate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let dir = TempDir::new().unwrap();
    let bad = variant(&dir, "example1.toml", &[("q = 3.4e-6", "q = -1.0")]);
    assert_eq!(run(&["solve", "--config", s(&bad)]).status.code(), Some(1));
}

#[test]
fn early_cells_fail_strict_runs_and_are_blank_otherwise() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(
        &dir,
        "example1.toml",
        &[(SHORT_TIMES.0, "times_s = [0.0, 0.5, 600.0]")],
    );
    let strict = run(&["solve", "--config", s(&cfg), "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
    let loose = run(&["solve", "--config", s(&cfg)]);
    assert!(loose.status.success());
    let text = String::from_utf8(loose.stdout).unwrap();
    let blank = text.lines().filter(|l| l.ends_with(",,,,")).count();
    assert_eq!(blank, 26);
}

#[test]
fn compare_against_finite_differences() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "example1.toml", &[SHORT_TIMES, ("nx = 26", "nx = 6")]);
    let csv = dir.path().join("diff.csv");
    let out = run(&[
        "compare",
        "--config",
        s(&cfg),
        "--oracle",
        "cn",
        "--output",
        s(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("max abs_diff"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x_m,t_s,theta_fokas,theta_oracle,abs_diff\n"));
    assert_eq!(text.lines().count(), 1 + 6 * 3);

    let tight = variant(
        &dir,
        "example1.toml",
        &[
            SHORT_TIMES,
            ("nx = 26", "nx = 6"),
            ("max_theta_diff = 1e-4", "max_theta_diff = 1e-14"),
        ],
    );
    assert_eq!(
        run(&["compare", "--config", s(&tight)]).status.code(),
        Some(3)
    );
}

#[test]
fn compare_against_the_series() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "example2.toml", &[SHORT_TIMES]);
    let out = run(&["compare", "--config", s(&cfg), "--oracle", "series"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    // The t = 0 column is skipped for the series.
    assert_eq!(text.lines().count(), 1 + 17 * 2);
    for line in text.lines().skip(1) {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff <= 1e-3);
    }
}

#[test]
fn convergence_table() {
    let dir = TempDir::new().unwrap();
    let single = variant(
        &dir,
        "example1.toml",
        &[("ns = [10, 50, 250, 1000, 2000]", "ns = [40]")],
    );
    let svg = dir.path().join("conv.svg");
    let out = run(&["convergence", "--config", s(&single), "--plot", s(&svg)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,max_abs_err");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("40,"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let at_zero = variant(&dir, "example1.toml", &[("t_s = 2400.0", "t_s = 0.0")]);
    assert_eq!(
        run(&["convergence", "--config", s(&at_zero)]).status.code(),
        Some(1)
    );
}
