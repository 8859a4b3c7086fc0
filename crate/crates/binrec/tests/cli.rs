//! End-to-end runs of the `binrec` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn binrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binrec")).args(args).output().expect("spawn binrec")
}

fn ok(args: &[&str]) -> String {
    let out = binrec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn json(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn read(p: &str) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn intervals_round_trip() {
    let dir = TempDir::new().unwrap();
    let (u, b, rec, rep) = (path(&dir, "u.csv"), path(&dir, "b.csv"), path(&dir, "rec.csv"), path(&dir, "rep.json"));
    ok(&["generate", "--signal", "intervals:4", "--n", "64", "--seed", "9", "--out", &u]);
    ok(&["measure", "--signal", &u, "--mask", "low:4", "--out", &b]);
    assert!(read(&b).starts_with("# geometry 1 64\n"));
    ok(&["reconstruct", "--meas", &b, "--out", &rec, "--report", &rep]);
    assert_eq!(read(&rec), read(&u));
    let r = json(&rep);
    assert_eq!(r["converged"], true);
    assert!(r["iterations"].as_u64().unwrap() > 0);
}

#[test]
fn disk_round_trip_in_2d() {
    let dir = TempDir::new().unwrap();
    let (u, b, rec) = (path(&dir, "u.pgm"), path(&dir, "b.csv"), path(&dir, "rec.pgm"));
    ok(&["generate", "--signal", "disk:0.3", "--n", "32", "--dim", "2", "--out", &u]);
    ok(&["measure", "--signal", &u, "--mask", "disk:4", "--out", &b]);
    ok(&["reconstruct", "--meas", &b, "--out", &rec]);
    assert_eq!(std::fs::read(&rec).unwrap(), std::fs::read(&u).unwrap());
}

#[test]
fn restricting_to_fewer_frequencies_still_recovers() {
    let dir = TempDir::new().unwrap();
    let (u, b, rec) = (path(&dir, "u.csv"), path(&dir, "b.csv"), path(&dir, "rec.csv"));
    ok(&["generate", "--signal", "intervals:2", "--n", "32", "--seed", "3", "--out", &u]);
    ok(&["measure", "--signal", &u, "--mask", "full", "--out", &b]);
    ok(&["reconstruct", "--meas", &b, "--mask", "low:2", "--out", &rec]);
    assert_eq!(read(&rec), read(&u));
    let out = binrec(&["reconstruct", "--meas", &b, "--mask", "low:x", "--out", &rec]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn blurred_barcode_recovers() {
    let dir = TempDir::new().unwrap();
    let (u, y, rec) = (path(&dir, "u.csv"), path(&dir, "y.csv"), path(&dir, "rec.csv"));
    ok(&["generate", "--signal", "barcode:1100111000010111", "--n", "64", "--out", &u]);
    ok(&["blur", "--signal", &u, "--sigma", "2", "--out", &y]);
    ok(&["reconstruct", "--blurred", &y, "--sigma", "2", "--out", &rec]);
    assert_eq!(read(&rec), read(&u));
}

#[test]
fn noise_is_seeded() {
    let dir = TempDir::new().unwrap();
    let (u, a, b, c) = (path(&dir, "u.csv"), path(&dir, "a.csv"), path(&dir, "b.csv"), path(&dir, "c.csv"));
    ok(&["generate", "--signal", "intervals:3", "--n", "32", "--out", &u]);
    ok(&["noise", "--signal", &u, "--std", "0.1", "--seed", "5", "--out", &a]);
    ok(&["noise", "--signal", &u, "--std", "0.1", "--seed", "5", "--out", &b]);
    ok(&["noise", "--signal", &u, "--std", "0.1", "--seed", "6", "--out", &c]);
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn bad_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let (u, b, rec) = (path(&dir, "u.csv"), path(&dir, "b.csv"), path(&dir, "rec.csv"));
    assert_eq!(binrec(&["generate", "--signal", "blob:1", "--n", "16", "--out", &u]).status.code(), Some(2));
    assert_eq!(binrec(&["generate", "--signal", "intervals:2", "--n", "15", "--out", &u]).status.code(), Some(2));
    std::fs::write(&b, "0,1.0,0.0\n").unwrap();
    let out = binrec(&["reconstruct", "--meas", &b, "--out", &rec]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));
    assert_eq!(binrec(&["measure", "--signal", &path(&dir, "missing.csv"), "--mask", "full"]).status.code(), Some(2));
    assert_eq!(binrec(&["scenario", "--preset", "nope"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let (u, b, rec, rep) = (path(&dir, "u.csv"), path(&dir, "b.csv"), path(&dir, "rec.csv"), path(&dir, "rep.json"));
    ok(&["generate", "--signal", "intervals:6", "--n", "64", "--seed", "2", "--out", &u]);
    ok(&["measure", "--signal", &u, "--mask", "low:6", "--out", &b]);
    let out = binrec(&["reconstruct", "--meas", &b, "--max-iters", "2", "--out", &rec, "--report", &rep]);
    assert_eq!(out.status.code(), Some(3));
    assert!(Path::new(&rec).exists());
    assert_eq!(json(&rep)["converged"], false);
}

#[test]
fn certify_reports_verdicts() {
    let dir = TempDir::new().unwrap();
    let (u, c) = (path(&dir, "u.csv"), path(&dir, "c.json"));
    ok(&["generate", "--signal", "intervals:3", "--n", "32", "--seed", "4", "--out", &u]);
    ok(&["certify", "--signal", &u, "--mask", "low:3", "--out", &c]);
    let r = json(&c);
    assert_eq!(r["certifiable"], true);
    assert_eq!(r["verdict"], "unique");
    assert!(r["margin"].as_f64().unwrap() > 0.0 && r["h"].as_f64().unwrap() > 0.0);
    assert!(r["lp_iterations"].as_u64().is_some());
    let r: Value = serde_json::from_str(&ok(&["certify", "--signal", &u, "--mask", "low:2"])).unwrap();
    assert_eq!(r["certifiable"], false);
    assert!(r["h"].is_null());
    assert_ne!(r["verdict"], "unique");
}

#[test]
fn certify_nonneg_needs_support() {
    let dir = TempDir::new().unwrap();
    let (u, s) = (path(&dir, "u.csv"), path(&dir, "s.txt"));
    ok(&["generate", "--signal", "intervals:1", "--n", "16", "--seed", "1", "--out", &u]);
    assert_ne!(binrec(&["certify", "--signal", &u, "--mask", "low:2", "--nonneg"]).status.code(), Some(0));
    std::fs::write(&s, "3\n4\n").unwrap();
    let r: Value = serde_json::from_str(&ok(&["certify", "--signal", &u, "--mask", "low:2", "--nonneg", "--support", &s])).unwrap();
    assert!(r.get("verdict").is_some() && r.get("margin").is_some());
}

#[test]
fn complexity_of_a_square() {
    let dir = TempDir::new().unwrap();
    let u = path(&dir, "u.pgm");
    ok(&["generate", "--signal", "square:0.5", "--n", "64", "--dim", "2", "--out", &u]);
    let r: Value = serde_json::from_str(&ok(&["complexity", "--image", &u, "--angles", "8"])).unwrap();
    let k = r["k_theta"].as_array().unwrap();
    assert_eq!(k.len(), 8);
    assert_eq!(r["theta"].as_array().unwrap().len(), 8);
    assert_eq!(r["angles"][0]["k_theta"], k[0]);
    let max = k.iter().map(|v| v.as_f64().unwrap()).fold(0.0, f64::max);
    assert_eq!(r["max"].as_f64().unwrap(), max);
    assert!(r["perimeter"].as_f64().unwrap() > 1.5 && r["perimeter"].as_f64().unwrap() < 2.5);
    assert_eq!(binrec(&["complexity", "--image", &u, "--angles", "0"]).status.code(), Some(2));
}

#[test]
fn prob_matches_closed_form() {
    let r: Value = serde_json::from_str(&ok(&["prob", "--r", "7", "--n", "15"])).unwrap();
    assert_eq!(r["probability"].as_f64().unwrap(), 0.5);
    assert!(r["exact"].as_str().unwrap().ends_with("/2^15"));
    assert!(r["hoeffding_lower"].as_f64().unwrap() <= r["hoeffding_upper"].as_f64().unwrap());
    let r: Value = serde_json::from_str(&ok(&["prob", "--r", "11", "--n", "15"])).unwrap();
    assert!((r["probability"].as_f64().unwrap() - 0.98242).abs() < 5e-6);
}

#[test]
fn montecarlo_csv() {
    let out = ok(&["montecarlo", "--n", "8", "--r", "2,4,8", "--trials", "50", "--seed", "3"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "N,r,trials,empirical,predicted,ci_low,ci_high");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("8,8,50,1,1,"));
    assert_eq!(out, ok(&["montecarlo", "--n", "8", "--r", "2,4,8", "--trials", "50", "--seed", "3"]));
    let fourier = ok(&["montecarlo", "--n", "8", "--r", "4", "--trials", "20", "--kind", "fourier"]);
    assert_eq!(fourier.lines().count(), 2);
}

#[test]
fn scenario_writes_outputs() {
    let dir = TempDir::new().unwrap();
    let out_dir = path(&dir, "run");
    std::fs::create_dir(&out_dir).unwrap();
    let report = ok(&["scenario", "--preset", "custom", "--set", "signal=intervals:3", "--set", "n=48", "--set", "mask=low:3", "--out-dir", &out_dir]);
    let r: Value = serde_json::from_str(&report).unwrap();
    assert_eq!(r["outcome"]["kind"], "single");
    assert_eq!(r["outcome"]["misses"], 0);
    for f in ["truth.csv", "reconstruction.csv", "report.json"] {
        assert!(Path::new(&out_dir).join(f).exists(), "{f}");
    }
    assert_eq!(read(&format!("{out_dir}/truth.csv")), read(&format!("{out_dir}/reconstruction.csv")));
}

#[test]
fn scenario_from_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "sweep.cfg");
    let text = "# small sweep\nscenario = custom\nkind = sweep\nsignal = intervals:3\nn = 32\nblur_sigma = 2\nsolver = noisy\n\
                noise_levels = 0.01, 0.1\nmask_sizes = 3, 6\ntrials = 4\nout_dir = "
        .to_string()
        + dir.path().to_str().unwrap()
        + "\n";
    std::fs::write(&cfg, text).unwrap();
    let r: Value = serde_json::from_str(&ok(&["scenario", "--config", &cfg])).unwrap();
    assert_eq!(r["outcome"]["kind"], "sweep");
    assert_eq!(r["outcome"]["mean_misses"].as_array().unwrap().len(), 2);
    let grid = read(&path(&dir, "grid.csv"));
    assert_eq!(grid.lines().count(), 5);
    std::fs::write(&cfg, "n = 32\nscenario = custom\n").unwrap();
    let out = binrec(&["scenario", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));
}
