use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn priceform(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_priceform"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = priceform(&["check", "--L", "1", "--a", "0.5", "--mb", "1", "--mv", "1"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(text(&ok.stdout).contains("alpha: 1"));

    let flagged = priceform(&["check", "--L", "1", "--a", "0.5", "--mb", "6", "--mv", "1"], dir.path());
    assert_eq!(flagged.status.code(), Some(2));
    assert!(text(&flagged.stdout).contains("inadmissible"));

    let bad = priceform(&["check", "--L", "1", "--a", "1.5", "--mb", "1", "--mv", "1"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_writes_the_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[model]\nL = 1.0\na = 0.5\n[time]\nsamples = 5\n[solver]\nkind = \"both\"\n[output]\ndir = \"out\"\n",
    )
    .unwrap();
    let out = priceform(&["simulate", "-c", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let run = dir.path().join("out");
    for file in [
        "config.toml",
        "times.csv",
        "path.csv",
        "masses.csv",
        "strips.csv",
        "coefficients.csv",
        "frequencies.csv",
        "comparison.csv",
        "manifest.txt",
        "profiles/profile_0000.csv",
        "profiles/profile_0004.csv",
    ] {
        assert!(run.join(file).is_file(), "{file} missing");
    }
    let comparison = fs::read_to_string(run.join("comparison.csv")).unwrap();
    let worst = comparison
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(0.0f64, f64::max);
    assert!(worst < 1e-3, "{comparison}");

    // the effective configuration reproduces the run
    let again = priceform(&["simulate", "-c", "out/config.toml", "--out", "again"], dir.path());
    assert_eq!(again.status.code(), Some(0), "{}", text(&again.stderr));
    assert_eq!(
        fs::read_to_string(run.join("path.csv")).unwrap(),
        fs::read_to_string(dir.path().join("again/path.csv")).unwrap()
    );
}

#[test]
fn breakdown_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = priceform(
        &["simulate", "--L", "1", "--a", "0.5", "--p0", "0.42", "--samples", "11", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("breakdown at t ="));
}

#[test]
fn malformed_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[model]\nL = 1.0\na = 0.5\n[grid]\nn = \"many\"\n").unwrap();
    let out = priceform(&["validate", "-c", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("bad.toml") && err.contains("line 5"), "{err}");
}

#[test]
fn validate_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let ok = priceform(&["validate", "--L", "1", "--a", "0.5"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stderr));
    let table = text(&ok.stdout);
    for key in ["a/h", "max dispersion residual", "gram condition", "frame bounds", "projection residual"] {
        assert!(table.contains(key), "{key} missing from\n{table}");
    }

    let misaligned = priceform(&["validate", "--L", "1", "--a", "0.5", "--n", "401"], dir.path());
    assert_eq!(misaligned.status.code(), Some(1));
    assert!(text(&misaligned.stderr).contains("a/h"));

    let coarse = priceform(
        &["validate", "--L", "1", "--a", "0.5", "--set", "spectral.refine=1"],
        dir.path(),
    );
    assert_eq!(coarse.status.code(), Some(1));
}

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep.toml"),
        "[sweep]\nL = [1.0]\na = [0.5]\nMB = [1.0, 6.0]\nMV = [1.0, 2.0]\n",
    )
    .unwrap();
    let out = priceform(&["sweep", "-c", "sweep.toml", "--out", "s"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().any(|l| l.starts_with("1.0,0.5,6.0,1.0,") && l.contains(",false,")));
}
