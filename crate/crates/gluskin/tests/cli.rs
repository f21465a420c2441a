use std::path::Path;
use std::process::{Command, Output};

use gluskin::record::read_record;

fn gluskin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gluskin")).args(args).current_dir(dir).env_remove("GLUSKIN_OUT_DIR").output().unwrap()
}

#[test]
fn measure_records_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["measure", "--family", "l1ball", "--n", "4", "--h", "1.5", "--samples", "10000", "--seed", "3", "--no-timing"];
    assert_eq!(gluskin(&args, dir.path()).status.code(), Some(0));
    let path = dir.path().join("results/measure-l1ball-seed3.json");
    let first = std::fs::read(&path).unwrap();
    let out = gluskin(&[&["--threads", "2"][..], &args].concat(), dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), first);
    let rec = read_record(&path).unwrap();
    assert_eq!(rec.wall_time, None);
    assert_eq!(rec.parameters["family"], "l1ball");
}

#[test]
fn wall_time_recorded_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = gluskin(&["verify-lemma", "--name", "decomposition", "--trials", "20", "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rec = read_record(&dir.path().join("o/decomposition-seed0.json")).unwrap();
    assert!(rec.wall_time.unwrap() >= 0.0);
    assert!(rec.passed && rec.asserted);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gluskin"))
        .args(["optimize", "--log-n", "60"])
        .current_dir(dir.path())
        .env("GLUSKIN_OUT_DIR", "env-out")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("env-out/optimize-seed0.json").exists());
}

#[test]
fn optimize_sweep_csv_matches_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = gluskin(&["optimize", "--log-n", "100", "--sweep", "10", "--output", "sweep.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = read_record(&dir.path().join("sweep.json")).unwrap();
    let rows = rec.details["rows"].as_array().unwrap();
    let mut csv = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.headers().unwrap(), vec!["log_n", "log_rho", "slope", "active_branch"]);
    let lines: Vec<csv::StringRecord> = csv.records().map(Result::unwrap).collect();
    assert_eq!(lines.len(), 10);
    for (line, row) in lines.iter().zip(rows) {
        for (i, key) in ["log_n", "log_rho", "slope"].iter().enumerate() {
            assert_eq!(line[i].parse::<f64>().unwrap().to_bits(), row[key].as_f64().unwrap().to_bits());
        }
        assert_eq!(&line[3], row["active_branch"].as_str().unwrap());
    }
    assert_eq!(lines[9][0].parse::<f64>().unwrap(), 1000.0);
}

#[test]
fn span_distance_default_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = gluskin(&["verify-lemma", "--name", "span-distance", "--output", "s.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rec = read_record(&dir.path().join("s.json")).unwrap();
    assert!(rec.empirical_rate >= 0.99);
    assert_eq!(rec.trials, 200);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(gluskin(&["--help"], d).status.code(), Some(0));
    assert_eq!(gluskin(&["measure", "--n"], d).status.code(), Some(2));
    assert_eq!(gluskin(&["measure", "--samples", "5"], d).status.code(), Some(2));
    assert_eq!(gluskin(&["verify-lemma", "--name", "span-distance", "--delta", "2"], d).status.code(), Some(2));
    assert_eq!(gluskin(&["optimize", "--tilt-decay", "-1"], d).status.code(), Some(2));
    // distances are near sqrt(30) but the threshold is 0.27, with bound 0.31
    let out = gluskin(&["verify-lemma", "--name", "span-distance", "--tau", "0.05", "--trials", "5"], d);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    std::fs::write(d.join("bad.json"), "{}").unwrap();
    assert_eq!(gluskin(&["replay", "bad.json"], d).status.code(), Some(1));
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(gluskin(&["verify-lemma", "--name", "event-e2", "--trials", "20", "--output", "e2.json"], d).status.code(), Some(0));
    assert_eq!(gluskin(&["--threads", "4", "replay", "e2.json"], d).status.code(), Some(0));
    let text = std::fs::read_to_string(d.join("e2.json")).unwrap();
    let rec = read_record(&d.join("e2.json")).unwrap();
    let tampered = text.replacen(&format!("\"successes\":{}", rec.details["successes"]), "\"successes\":9999", 1);
    assert_ne!(tampered, text);
    std::fs::write(d.join("e2.json"), tampered).unwrap();
    assert_eq!(gluskin(&["replay", "e2.json"], d).status.code(), Some(1));
}

#[test]
fn config_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        "command = \"measure\"\nseed = 4\nsamples = 5000\noutput = \"cfg.json\"\n\n[parameters]\nfamily = \"tilt\"\nn = 6\nno-timing = true\n",
    )
    .unwrap();
    let out = gluskin(&["run", "--config", "run.toml"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let via_config = std::fs::read(d.join("cfg.json")).unwrap();
    let flags = ["measure", "--family", "tilt", "--n", "6", "--samples", "5000", "--seed", "4", "--no-timing", "--output", "flags.json"];
    assert_eq!(gluskin(&flags, d).status.code(), Some(0));
    assert_eq!(std::fs::read(d.join("flags.json")).unwrap(), via_config);
    std::fs::write(d.join("bad.toml"), "command = \"measure\"\nbogus = 1\n").unwrap();
    assert_eq!(gluskin(&["run", "--config", "bad.toml"], d).status.code(), Some(2));
}
