use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn svperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svperc"))
        .args(args)
        .env_remove("SVPERC_THREADS")
        .output()
        .expect("spawn svperc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn enumerate_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "t.csv");
    let r = svperc(&["enumerate", "--dim", "2", "--max-edges", "3", "--out", &out]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# svtable v1 d=2 n_max=3 pc=0.5");
    assert_eq!(&lines[1..], ["1,6,4", "2,8,18", "3,9,16", "3,10,72"]);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"][0], Value::String(out.clone()));
    assert_eq!(manifest["table_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn enumerate_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(dir.path(), "a.csv");
    let b = path(dir.path(), "b.csv");
    assert_eq!(code(&svperc(&["--threads", "1", "enumerate", "--max-edges", "8", "--out", &a])), 0);
    assert_eq!(
        code(&svperc(&["--threads", "3", "enumerate", "--max-edges", "8", "--out", &b, "--split-depth", "3"])),
        0
    );
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn pmf_and_tn_reports() {
    let r = svperc(&["analyze", "pmf", "--max-edges", "1", "--p", "0.5", "--n", "1"]);
    assert_eq!(code(&r), 0);
    let v = stdout_json(&r);
    // 4 * 2^-1 * 2^-6
    assert_eq!(v["records"][0]["pmf"].as_f64().unwrap(), 0.03125);

    let r = svperc(&["analyze", "tn", "--max-edges", "2"]);
    assert_eq!(code(&r), 0);
    let v = stdout_json(&r);
    let t1 = v["records"][0]["t_n"].as_f64().unwrap();
    let t2 = v["records"][1]["t_n"].as_f64().unwrap();
    assert!((t1 - 1.0 / 7.0).abs() < 1e-9, "{t1}");
    assert!((t2 - 0.2).abs() < 1e-9, "{t2}");
    assert_eq!(v["table"]["source"], "in-memory");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.csv");

    let r = svperc(&["enumerate", "--max-edges", "10000", "--out", &out]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("10^"));

    assert_eq!(code(&svperc(&["check", "--table", &path(dir.path(), "missing.csv")])), 1);

    let garbled = path(dir.path(), "garbled.csv");
    std::fs::write(&garbled, "# svtable v1 d=2 n_max=1 pc=0.5\n1,six,4\n").unwrap();
    assert_eq!(code(&svperc(&["check", "--table", &garbled])), 1);

    assert_eq!(code(&svperc(&["exponents", "lambda", "--max-edges", "6", "--window", "5:6"])), 3);

    let good = path(dir.path(), "good.csv");
    assert_eq!(code(&svperc(&["enumerate", "--max-edges", "3", "--out", &good])), 0);
    assert_eq!(code(&svperc(&["check", "--table", &good])), 0);
    let tampered = path(dir.path(), "tampered.csv");
    let text = std::fs::read_to_string(&good).unwrap().replace("1,6,4", "1,6,5");
    std::fs::write(&tampered, text).unwrap();
    assert_eq!(code(&svperc(&["check", "--table", &tampered])), 4);

    assert_eq!(code(&svperc(&["mc", "--p", "1.5", "--samples", "1", "--seed", "1", "--out", &out])), 5);
    assert_eq!(code(&svperc(&["no-such-command"])), 5);
    assert_eq!(code(&svperc(&["--help"])), 0);
}

#[test]
fn mc_at_zero_is_a_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = path(dir.path(), "mc");
    let r = svperc(&["mc", "--p", "0", "--samples", "1000", "--seed", "7", "--out", &prefix]);
    assert_eq!(code(&r), 0);
    let csv = std::fs::read_to_string(format!("{prefix}.csv")).unwrap();
    assert_eq!(csv, "n,m,count\n0,4,1000\n");
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(format!("{prefix}.json")).unwrap()).unwrap();
    assert_eq!(summary["total"], 1000);
    assert_eq!(summary["truncated"], 0);
}

#[test]
fn mc_is_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(dir.path(), "a");
    let b = path(dir.path(), "b");
    let args = ["mc", "--p", "0.35", "--samples", "40000", "--seed", "99"];
    let mut one: Vec<&str> = vec!["--threads", "1"];
    one.extend(args);
    one.extend(["--out", &a]);
    let mut four: Vec<&str> = vec!["--threads", "4"];
    four.extend(args);
    four.extend(["--out", &b]);
    assert_eq!(code(&svperc(&one)), 0);
    assert_eq!(code(&svperc(&four)), 0);
    for ext in [".csv", ".json"] {
        assert_eq!(
            std::fs::read(format!("{a}{ext}")).unwrap(),
            std::fs::read(format!("{b}{ext}")).unwrap(),
            "{ext}"
        );
    }
}

#[test]
fn bridge_accepts_a_matching_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let table = path(dir.path(), "t.csv");
    let prefix = path(dir.path(), "mc");
    assert_eq!(code(&svperc(&["enumerate", "--max-edges", "5", "--out", &table])), 0);
    assert_eq!(
        code(&svperc(&["mc", "--p", "0.3", "--samples", "50000", "--seed", "3", "--out", &prefix])),
        0
    );
    let r = svperc(&["check", "bridge", "--table", &table, "--mc", &prefix, "--max-n", "5"]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let v = stdout_json(&r);
    assert_eq!(v["report"]["conserved"], true);
}

#[test]
fn identities_pass() {
    let r = svperc(&["check", "identities"]);
    assert_eq!(code(&r), 0);
    assert_eq!(stdout_json(&r)["passed"], true);
}

#[test]
fn report_written_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "self.json");
    assert_eq!(code(&svperc(&["exponents", "selftest", "--out", &out])), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(Path::new(&format!("{out}.manifest.json")).exists());
}
