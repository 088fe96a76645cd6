//! End-to-end runs of the `eacap` binary.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn eacap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eacap")).args(args).env("EACAP_THREADS", "2").output().expect("run eacap")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn capacity_from_kraus_file_matches_named_channel() {
    let dir = tempfile::tempdir().unwrap();
    let g: f64 = 0.3;
    let (a, b) = ((1.0 - g).sqrt(), g.sqrt());
    let spec = format!(
        r#"{{"kind":"kraus","d_in":2,"d_out":2,"kraus":[
            [[[1,0],[0,0]],[[0,0],[{a},0]]],
            [[[0,0],[{b},0]],[[0,0],[0,0]]]]}}"#
    );
    let path = dir.path().join("ad.json");
    fs::write(&path, spec).unwrap();
    let out_path = dir.path().join("cap.json");
    let o = eacap(&["capacity", "--channel", path.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let from_file: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();

    let o = eacap(&["capacity", "--named", "amplitude_damping", "--gamma", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("C_ea = 1.3252301"), "{}", stdout(&o));
    let c = from_file["c_ea"].as_f64().unwrap();
    assert!((c - 1.32523019104).abs() < 1e-7, "{c}");
    assert!(from_file["converged"].as_bool().unwrap());
}

#[test]
fn named_spec_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.json");
    fs::write(&path, r#"{"kind": "named", "name": "identity", "d": 3}"#).unwrap();
    let o = eacap(&["capacity", "--channel", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("C_ea")).unwrap().to_string();
    let v: f64 = line.trim_start_matches("C_ea = ").parse().unwrap();
    assert!((v - 2.0 * 3f64.log2()).abs() < 1e-6);
}

#[test]
fn parse_errors_exit_2_and_cite_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"kind":"kraus","d_in":2,"d_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],"x"]]]}"#).unwrap();
    let o = eacap(&["capacity", "--channel", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("$.kraus[0][1][1]"), "{}", stderr(&o));

    let o = eacap(&["capacity", "--channel", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = eacap(&["secondorder", "--named", "dephasing", "--eps", "0.1", "--n", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p"));
}

#[test]
fn secondorder_csv_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("so.csv");
    let o = eacap(&[
        "secondorder", "--named", "dephasing", "--p", "0.1", "--eps", "0.5", "--n-list", "64,256",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,eps,gaussian_bits,lower_bits,upper_bits,c_ea,v_sel"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 7);
        let g: f64 = cells[2].parse().unwrap();
        let lo: f64 = cells[3].parse().unwrap();
        let hi: f64 = cells[4].parse().unwrap();
        assert!(lo <= hi + 1e-6, "{line}");
        assert!(g <= hi + 1e-6, "{line}");
    }

    let o = eacap(&["secondorder", "--named", "dephasing", "--p", "0.1", "--eps", "0.1", "--n", "100"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("n >= 901"), "{}", stderr(&o));
}

#[test]
fn simulate_reports_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let o = eacap(&[
        "simulate", "--named", "identity", "--M", "4", "--trials", "10", "--seed", "3", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("trial,p_succ\n"));
    assert_eq!(text.lines().count(), 11);
    for line in text.lines().skip(1) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((p - 1.0).abs() < 1e-10);
    }
}

#[test]
fn verify_suites_and_fault_injection() {
    let o = eacap(&["verify", "--suite", "types", "--n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS types"));

    let o = eacap(&["verify", "--suite", "validate", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL validate"));

    let o = eacap(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}
