use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tenergy(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tenergy"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn tenergy")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sim_manifest(dir: &Path, streams: usize) {
    let mut s = String::from(
        "config_id=h1\ncommand_template=decode --in {stream}\nenergy_source=simulator\nseed=11\n",
    );
    for i in 0..streams {
        s += &format!("stream=bs{i:02}\n");
    }
    fs::write(dir.join("m.txt"), s).unwrap();
}

fn h1_model(dir: &Path) {
    fs::write(
        dir.join("h1.model"),
        "format_version=1\nconfig_id=h1\ntiming_method=wall\nalpha=0.99\nn_samples=120\n\
         power_w=0.5377\noffset_j=0.0480\ncorrelation=0.999937\n",
    )
    .unwrap();
}

#[test]
fn missing_manifest() {
    let dir = TempDir::new().unwrap();
    let o = tenergy(dir.path(), &["measure", "absent.txt", "d.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("manifest not found"));
}

#[test]
fn unconverged_campaign_has_its_own_exit() {
    let dir = TempDir::new().unwrap();
    sim_manifest(dir.path(), 3);
    let o = tenergy(
        dir.path(),
        &["--max-repeats", "2", "--rel-bound", "1e-6", "measure", "m.txt", "d.csv"],
    );
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("UNCONVERGED"));
    // the data gathered so far is still written
    assert!(dir.path().join("d.csv").exists());
}

#[test]
fn one_row_dataset() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("d.csv"), "stream_id,time_s,energy_j\na,1.0,0.5\n").unwrap();
    let o = tenergy(dir.path(), &["fit", "d.csv", "m.model"]);
    assert_eq!(code(&o), 3);
    assert!(!dir.path().join("m.model").exists());
}

#[test]
fn constant_times() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("d.csv"),
        "stream_id,time_s,energy_j\na,2.0,1.0\nb,2.0,1.1\nc,2.0,0.9\n",
    )
    .unwrap();
    let o = tenergy(dir.path(), &["fit", "d.csv", "m.model"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("variance"), "{}", stderr(&o));
}

#[test]
fn corrupted_model() {
    let dir = TempDir::new().unwrap();
    h1_model(dir.path());
    let text = fs::read_to_string(dir.path().join("h1.model")).unwrap();
    let bad = text.replace("power_w=0.5377", "power_w=0.53x7");
    fs::write(dir.path().join("bad.model"), bad).unwrap();
    let o = tenergy(dir.path(), &["predict", "bad.model", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 6"), "{}", stderr(&o));
}

#[test]
fn predict_h1() {
    let dir = TempDir::new().unwrap();
    h1_model(dir.path());
    let o = tenergy(dir.path(), &["predict", "h1.model", "10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "5.42500");
    let o = tenergy(dir.path(), &["predict", "h1.model", "0"]);
    assert_eq!(stdout(&o).trim(), "0.0480000");
    let o = tenergy(dir.path(), &["predict", "h1.model", "-1"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&tenergy(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&tenergy(dir.path(), &["--help"])), 0);
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = tenergy(dir.path(), &["--seed", "5", "simulate", "trace", name, "--noise", "0.05"]);
        assert_eq!(code(&o), 0);
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());

    let o = tenergy(dir.path(), &["simulate", "trace", "c.csv"]);
    assert!(stdout(&o).contains("net_energy_j=0.800000"), "{}", stdout(&o));
}

#[test]
fn zero_interval_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = tenergy(dir.path(), &["simulate", "trace", "t.csv", "--interval", "0"]);
    assert_ne!(code(&o), 0);
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn measure_fit_report_pipeline() {
    let dir = TempDir::new().unwrap();
    sim_manifest(dir.path(), 8);
    assert_eq!(code(&tenergy(dir.path(), &["measure", "m.txt", "d.csv"])), 0);
    let fit = tenergy(dir.path(), &["fit", "d.csv", "h1.model"]);
    assert_eq!(code(&fit), 0);
    let model = fs::read_to_string(dir.path().join("h1.model")).unwrap();
    assert!(model.contains("config_id=h1"));
    let rep = tenergy(
        dir.path(),
        &["report", "d.csv", "h1.model", "r.csv", "--summary", "s.txt"],
    );
    assert_eq!(code(&rep), 0);
    let first = |s: &str| s.lines().next().unwrap_or_default().to_owned();
    assert_eq!(first(&stdout(&fit)), first(&stdout(&rep)));
    let summary = fs::read_to_string(dir.path().join("s.txt")).unwrap();
    assert_eq!(summary, stdout(&rep));
    let residuals = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(residuals.lines().count(), 9);
}

#[test]
fn time_only_dataset_cannot_be_fitted() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("m.txt"),
        "config_id=t\ncommand_template=true {stream}\nenergy_source=none\nstream=a\nstream=b\n",
    )
    .unwrap();
    let o = tenergy(dir.path(), &["--max-repeats", "3", "measure", "m.txt", "d.csv"]);
    assert!(matches!(code(&o), 0 | 4), "{}", stderr(&o));
    let o = tenergy(dir.path(), &["fit", "d.csv", "x.model"]);
    assert_ne!(code(&o), 0);
    assert!(stderr(&o).contains("energy_j"));
}
