use std::path::PathBuf;
use std::process::{Command, Output};

fn spinswap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinswap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spinswap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn spectrum_of_three_sites() {
    let o = spinswap(&["spectrum", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("1,0.5"));
    assert!(rows[1].starts_with("2,0.5"));
    assert!(rows[2].starts_with("3,-1"));
}

#[test]
fn exit_codes() {
    assert_eq!(spinswap(&["spectrum", "--n", "4"]).status.code(), Some(2));
    assert_eq!(spinswap(&["scan", "--exchange", "bogus", "--n", "7"]).status.code(), Some(2));
    assert_eq!(spinswap(&["scan", "--exchange", "p1", "--n", "7", "--tau", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(spinswap(&["oracle", "--ns", "13"]).status.code(), Some(2));
    let raw = spinswap(&["scan", "--exchange", "pe", "--n", "7", "--raw", "--tau", "0.5"]);
    assert_eq!(raw.status.code(), Some(3));
    assert!(!raw.stderr.is_empty());
}

#[test]
fn scan_is_byte_identical_across_runs() {
    let args = ["scan", "--exchange", "p3", "--n", "11", "--tau", "0:3:0.01"];
    let a = spinswap(&args);
    let b = spinswap(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scan_short_time_value() {
    let o = spinswap(&["scan", "--exchange", "p1", "--n", "7", "--tau", "0.07"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tau,best_phase,best_p,cluster_dim,label"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "0.07");
    let p: f64 = fields[2].parse().unwrap();
    assert!((p - 0.4997).abs() < 1e-4, "{p}");
    assert_eq!(fields[4], "none");
}

#[test]
fn out_writes_a_manifest() {
    let out = scratch("scan.csv");
    let o = spinswap(&["scan", "--exchange", "p1", "--n", "7", "--tau", "0:1:0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
    let manifest = std::fs::read_to_string(out.with_file_name("scan.csv.manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(json["command"], "scan");
    assert!(json["version"].is_string());
}

#[test]
fn sweep_reports_one_row_per_size() {
    let o = spinswap(&["sweep", "--exchange", "p1", "--ns", "7,9", "--tau", "0.01:5:0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("7,"));
}

#[test]
fn fidelity_column_is_added() {
    let o = spinswap(&[
        "scan",
        "--exchange",
        "p1",
        "--n",
        "7",
        "--include-zero",
        "--fidelity",
        "0.8,0.6",
        "--tau",
        "0,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("tau,best_phase,best_p,cluster_dim,label,fidelity\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn oracle_passes_and_demos_print() {
    let o = spinswap(&["oracle", "--ns", "3,5", "--demo-gates"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
}
