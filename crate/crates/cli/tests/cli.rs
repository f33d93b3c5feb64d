use std::path::{Path, PathBuf};
use std::process::Command;

use multidisk_cli::{run, CliError, RunConfig};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multidisk"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

const THREE_DISKS: &str = r#"
version = 1
k = 6.283185307179586
seed = 7

[geometry]
type = "random"
region = { x_min = -2.0, x_max = 2.0, y_min = -2.0, y_max = 2.0 }
count = 6
a_min = 0.2
a_max = 0.4
d_min = 0.1

[incident]
type = "plane_wave"
beta = 0.7

[formulation]
type = "cfie"

[solver]
type = "gmres"
tol = 1e-10

[outputs.far_field]
angles = 90

[outputs.grid]
x1 = [-3.0, 3.0]
x2 = [-3.0, 3.0]
n1 = 31
n2 = 27
"#;

#[test]
fn reruns_are_bit_identical() {
    let cfg = RunConfig::from_toml(THREE_DISKS).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run::cmd_solve(&cfg, d.path()).unwrap();
    }
    for file in ["far_field.csv", "grid.csv"] {
        let (a, b) = (read(&dirs[0].path().join(file)), read(&dirs[1].path().join(file)));
        assert!(a.lines().count() > 90);
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn single_disk_far_field_matches_series() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--log-level", "warn", "solve", "--config"])
        .arg(example("single_disk.toml"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let reference: Vec<(f64, f64, f64)> = include_str!("../../core/tests/fixtures/mie_single_disk.csv")
        .lines()
        .filter(|l| l.starts_with("dirichlet,far,"))
        .map(|l| {
            let f: Vec<f64> = l.split(',').skip(2).map(|s| s.parse().unwrap()).collect();
            (f[0], f[2], f[3])
        })
        .collect();
    let mut rdr = csv::Reader::from_path(out.path().join("far_field.csv")).unwrap();
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), reference.len());
    for (row, (theta, re, im)) in rows.iter().zip(&reference) {
        assert!((row[0].to_radians() - theta).abs() < 1e-12);
        let err = ((row[1] - re).powi(2) + (row[2] - im).powi(2)).sqrt() / re.hypot(*im);
        assert!(err < 1e-10, "theta {theta}: {err:e}");
        let rcs = 10.0 * (2.0 * std::f64::consts::PI * (re * re + im * im)).log10();
        assert!((row[3] - rcs).abs() < 1e-8);
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["orders"], serde_json::json!([16]));
    assert_eq!(manifest["solve"]["converged"], true);
    assert_eq!(manifest["outputs"], serde_json::json!(["far_field.csv", "grid.csv"]));
    let grid = read(&out.path().join("grid.csv"));
    assert!(grid.starts_with("# grid x1=-4:4:81 x2=-4:4:81\n# k=1\n"));
    assert_eq!(grid.lines().filter(|l| !l.starts_with('#')).count(), 1 + 81 * 81);
}

#[test]
fn missing_wavenumber_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, read(&example("single_disk.toml")).replace("k = 1.0", "")).unwrap();
    let out = bin().arg("validate").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("missing field `k`") && err.contains("bad.toml"), "{err}");
}

#[test]
fn empty_configuration_has_a_zero_spectrum() {
    let cfg = RunConfig::from_toml(
        "version = 1\nk = 3.0\n[geometry]\ntype = \"inline\"\ndisks = []\n[dort]\nn_alpha = 16\n",
    )
    .unwrap();
    let out = tempfile::tempdir().unwrap();
    let m = run::cmd_dort(&cfg, out.path()).unwrap();
    let d = m.dort.unwrap();
    assert_eq!(d.eigenvalues, vec![0.0; 16]);
    assert_eq!(d.significant, 0);
    let csv = read(&out.path().join("eigen.csv"));
    assert_eq!(csv.lines().count(), 17);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0,0")));
}

#[test]
fn dort_reruns_are_identical() {
    let text = read(&example("dort_three_disks.toml")).replace("n_alpha = 128", "n_alpha = 32");
    let text = text.replace("n1 = 151", "n1 = 31").replace("n2 = 251", "n2 = 51");
    let cfg = RunConfig::from_toml(&text).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let m = run::cmd_dort(&cfg, d.path()).unwrap();
        assert_eq!(m.outputs, ["eigen.csv", "focus_0.csv", "focus_1.csv", "focus_2.csv"]);
    }
    for file in ["eigen.csv", "focus_0.csv", "focus_2.csv"] {
        assert_eq!(read(&dirs[0].path().join(file)), read(&dirs[1].path().join(file)), "{file}");
    }
}

#[test]
fn validate_reports_without_solving() {
    let out = bin()
        .args(["validate", "--config"])
        .arg(example("penetrable_lattice.toml"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.starts_with("penetrable_lattice: 400 disks"), "{report}");

    let cfg = RunConfig::load(&example("benchmark_dirichlet.toml")).unwrap();
    let r = run::cmd_validate(&cfg).unwrap();
    assert_eq!(r.disks, 360);
    assert!(r.min_gap.unwrap() >= 0.001);
}

#[test]
fn lattice_removals_are_checked() {
    let text = read(&example("penetrable_lattice.toml")).replace("rows = [10]", "rows = [21]");
    let cfg = RunConfig::from_toml(&text).unwrap();
    assert!(matches!(run::cmd_validate(&cfg), Err(CliError::Config(_))));
}

#[test]
fn every_example_parses() {
    for entry in std::fs::read_dir(example("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap();
            run::cmd_validate(&cfg).unwrap();
        }
    }
}

#[test]
fn non_convergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.toml");
    let text = THREE_DISKS.replace("tol = 1e-10", "tol = 1e-14\nrestart = 2\nmax_cycles = 1");
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["--threads", "1", "solve", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("out/manifest.json"))).unwrap();
    assert_eq!(manifest["solve"]["converged"], false);
    assert_eq!(manifest["outputs"], serde_json::json!([]));
}
