use std::path::Path;
use std::process::Command;

fn fpplab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fpplab"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const ORIENTED: &str = r#"{"master_seed":4,"trials":8,"params":{"p":[0.8,1.0],"levels":40}}"#;

#[test]
fn success_prints_one_json_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "o.json", ORIENTED);
    let out = fpplab()
        .args(["oriented", "--config"])
        .arg(&cfg)
        .args(["--seed", "9", "--trials", "6", "--threads", "2"])
        .env("FPPLAB_OUT", tmp.path().join("root"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(v["kind"], "oriented");
    assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);
    let dir = Path::new(v["out_dir"].as_str().unwrap());
    assert!(dir.starts_with(tmp.path().join("root")));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["master_seed"], 9);
    assert_eq!(summary["config"]["trials"], 6);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"trials":3,"params":{"p":[0.8]}}"#,
        r#"{"master_seed":1,"params":{"p":[0.8],"colour":1}}"#,
        r#"{"master_seed":1,"trials":0,"params":{"p":[0.8]}}"#,
        r#"{"kind":"ends","master_seed":1,"params":{"p":[0.8]}}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("bad{i}.json"), text);
        let out = fpplab().args(["oriented", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = fpplab().args(["oriented", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // The critical-point grid lies entirely above p_c, so it cannot bracket.
    let cfg = write(
        tmp.path(),
        "o.json",
        r#"{"master_seed":1,"trials":10,"params":{"p":[0.9],"levels":30,"pc":{"grid":[0.95,0.97,0.99]}}}"#,
    );
    let out = fpplab().args(["oriented", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let ok = write(tmp.path(), "ok.json", ORIENTED);
    let blocker = write(tmp.path(), "file", "");
    let out = fpplab().args(["oriented", "--config"]).arg(&ok).arg("--out").arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "unwritable output directory");
}

#[test]
fn sweep_subcommand_records_bad_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(tmp.path(), "a.json", r#"{"kind":"oriented","master_seed":1,"trials":5,"params":{"p":[0.8],"levels":30}}"#);
    let b = write(tmp.path(), "b.json", r#"{"kind":"oriented","master_seed":1,"trials":5,"params":{"p":[0.9],"levels":30}}"#);
    let bad = write(tmp.path(), "c.json", r#"{"kind":"oriented","trials":5}"#);
    let out = fpplab().arg("sweep").args([&a, &bad, &b]).arg("--out").arg(tmp.path().join("sw")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let merged = std::fs::read_to_string(tmp.path().join("sw/sweep.csv")).unwrap();
    let lines: Vec<&str> = merged.lines().collect();
    assert_eq!(lines[0], "config,config_hash,status,p,T,trials,survival_rate,alpha_durrett,stderr");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,") && lines[1].contains(",ok,0.8,"));
    assert!(lines[2].starts_with("1,,") && lines[2].contains("error: config error"));
    assert!(lines[3].starts_with("2,") && lines[3].contains(",ok,0.9,"));
}
