use std::path::Path;
use std::process::{Command, Output};

fn gangsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gangsched")).args(args).output().unwrap()
}

const TWO_PARTITIONS: &str = r#"{"platform":{"processors":3},"tasks":[
  {"id":1,"wcet":2,"period":5,"deadline":5,"volume":1},
  {"id":2,"wcet":3,"period":6,"deadline":6,"volume":2},
  {"id":3,"wcet":2,"period":7,"deadline":7,"volume":2}]}"#;

const UNPLACEABLE: &str = r#"{"platform":{"processors":2},"tasks":[
  {"id":1,"wcet":1,"period":3,"deadline":3,"volume":1},
  {"id":2,"wcet":1,"period":4,"deadline":4,"volume":2},
  {"id":3,"wcet":3,"period":5,"deadline":5,"volume":1}]}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", TWO_PARTITIONS);
    let bad = write(dir.path(), "bad.json", UNPLACEABLE);
    let junk = write(dir.path(), "junk.json", "not json");

    let out = gangsched(&["analyze", &ok]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"partitions\""));
    assert_eq!(gangsched(&["analyze", &bad]).status.code(), Some(1));
    assert_eq!(gangsched(&["analyze", &junk]).status.code(), Some(2));
    assert_eq!(gangsched(&["analyze", "--tests", "SP-G(FP-P)", &ok]).status.code(), Some(0));
    assert_eq!(gangsched(&["analyze", "--tests", "SP-X(FP-P)", &ok]).status.code(), Some(2));
}

#[test]
fn grid_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = gangsched(&[
            "grid",
            "--seed",
            "9",
            "--sets-per-cell",
            "2",
            "--tests",
            "SP-U(FP-P),SP-B(EDF-P)",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert_eq!(a.lines().next(), Some("scenario,M,n,volume_level,norm_util,test,schedulable,total,ratio"));
    // 2 M × 2 n × 3 levels × 10 utilizations × 2 tests
    assert_eq!(a.lines().count(), 1 + 240);
    let avg = std::fs::read_to_string(dir.path().join("a_avg.csv")).unwrap();
    assert_eq!(avg.lines().count(), 1 + 60);
}

#[test]
fn grid_rejects_empty_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let status = gangsched(&["grid", "--sets-per-cell", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn casestudy_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cs.csv");
    let status = gangsched(&["casestudy", "--card", "tpu16", "--sets-per-cell", "3", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20);
    assert!(csv.lines().nth(1).unwrap().starts_with("tpu16,16,7,tpu,0.1,SP-U(FP-NP),"));
}

#[test]
fn gen_then_analyze_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let sets = dir.path().join("sets");
    let out = gangsched(&[
        "gen",
        "--processors",
        "4",
        "--tasks",
        "6",
        "--level",
        "low",
        "--util",
        "0.3",
        "--count",
        "2",
        "--out",
        sets.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let first = sets.join("set-0000.json");
    assert!(sets.join("set-0001.json").exists());
    let code = gangsched(&["analyze", first.to_str().unwrap()]).status.code();
    assert!(matches!(code, Some(0) | Some(1)));

    let ok = write(dir.path(), "ok.json", TWO_PARTITIONS);
    let trace = gangsched(&["simulate", &ok, "--horizon", "20"]);
    assert_eq!(trace.status.code(), Some(0));
    let text = String::from_utf8(trace.stdout).unwrap();
    assert!(text.starts_with("tick,kind,task,partition,processors\n"));
    let global = gangsched(&["simulate", &ok, "--global", "gang-fp-np", "--horizon", "20"]);
    assert!(global.status.code().is_some());
}
