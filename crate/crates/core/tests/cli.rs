use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use schelling_core::cli::{execute, Config};
use schelling_core::experiments::{AGGREGATE_HEADER, BUILTIN_SWEEPS};

const GRID: &str = "\
# two cells on a small population
n = 80
initial_degree = 8
degree_floor = 6
max_steps = 60
0.5, 0.5, 0.5
0.9, 0.6, 0.25
";

fn schelling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schelling"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_grid(dir: &Path) -> String {
    let path = dir.join("tiny.grid");
    fs::write(&path, GRID).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn custom_grid_writes_archive_table_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write_grid(dir.path());
    let out = dir.path().join("out");
    let o = schelling(&[
        "--sweep",
        &grid,
        "--reps",
        "3",
        "--seed",
        "2",
        "--k",
        "10",
        "--out",
        out.to_str().unwrap(),
        "--plots",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let agg = fs::read_to_string(out.join("tiny_agg.csv")).unwrap();
    let mut lines = agg.lines();
    assert_eq!(lines.next(), Some(AGGREGATE_HEADER));
    assert_eq!(lines.count(), 2);
    let raw = fs::read_to_string(out.join("tiny_raw.txt")).unwrap();
    assert_eq!(raw.lines().count(), 6);
    for suffix in ["stabilisation", "similarity", "dimension"] {
        assert!(out.join(format!("tiny_{suffix}.svg")).is_file());
    }
    let listed = String::from_utf8(o.stdout).unwrap();
    assert_eq!(listed.lines().count(), 5);
}

#[test]
fn symmetric_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let o = schelling(&[
            "--sweep",
            "symmetric",
            "--reps",
            "1",
            "--seed",
            "7",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["symmetric_raw.txt", "symmetric_agg.csv"] {
        let x = fs::read(a.join(file)).unwrap();
        let y = fs::read(b.join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file} differs");
    }
    let agg = fs::read_to_string(a.join("symmetric_agg.csv")).unwrap();
    assert_eq!(agg.lines().count(), 21);
}

#[test]
fn unknown_sweep_is_a_usage_error() {
    let o = schelling(&["--sweep", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    for name in BUILTIN_SWEEPS {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(
        schelling(&["--sweep", "symmetric", "--reps", "zero"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(schelling(&["--frobnicate"]).status.code(), Some(2));
    assert_eq!(schelling(&[]).status.code(), Some(2));
    assert_eq!(
        schelling(&["--sweep", "symmetric", "--k", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(schelling(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write_grid(dir.path());
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = schelling(&[
        "--sweep",
        &grid,
        "--reps",
        "1",
        "--k",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        schelling(&["--config", "/nonexistent/run.conf"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn config_file_and_library_agree_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write_grid(dir.path());
    let conf = dir.path().join("run.conf");
    let cli_out = dir.path().join("cli");
    fs::write(
        &conf,
        format!(
            "sweep = {grid}\nreps = 9\nseed = 4\nk = 10\nout = {}\n",
            cli_out.display()
        ),
    )
    .unwrap();
    let o = schelling(&["--config", conf.to_str().unwrap(), "--reps", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read_to_string(cli_out.join("tiny_raw.txt"))
            .unwrap()
            .lines()
            .count(),
        4
    );

    let lib_out = dir.path().join("lib");
    let mut cfg = Config::new(grid);
    cfg.reps = 2;
    cfg.seed = 4;
    cfg.k_singular = 10;
    cfg.out_dir = lib_out.clone();
    let written = execute(&cfg).unwrap();
    assert_eq!(
        fs::read(&written.aggregate).unwrap(),
        fs::read(cli_out.join("tiny_agg.csv")).unwrap()
    );
    assert_eq!(
        fs::read(&written.raw).unwrap(),
        fs::read(cli_out.join("tiny_raw.txt")).unwrap()
    );
}
