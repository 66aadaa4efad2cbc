use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cosmowave-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosmowave"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn classify_big_brake() {
    let out = scratch("classify");
    let o = run(&["classify"], &scenarios().join("big_brake.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("classify.json")).unwrap()).unwrap();
    let r = &v["result"][0];
    assert_eq!(r["singularity_class"], "BigBrake");
    assert_eq!(r["phi0_exists"], true);
    assert_eq!(r["phi1_exists"], true);
}

#[test]
fn constant_universe_creates_no_pairs() {
    let out = scratch("bogoliubov");
    let o = run(&["bogoliubov"], &scenarios().join("constant.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("bogoliubov.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["n_pairs"].as_f64(), Some(0.0));
}

#[test]
fn duffing_periods_stay_below_two_pi() {
    let out = scratch("duffing");
    let o = run(&["duffing"], &scenarios().join("duffing.json"), &out);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("duffing.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let cfg = scenarios().join("constant.json");
    let (a, b) = (scratch("t1"), scratch("t4"));
    assert!(run(&["bogoliubov", "--threads", "1"], &cfg, &a).status.success());
    assert!(run(&["bogoliubov", "--threads", "4"], &cfg, &b).status.success());
    for f in ["bogoliubov.json", "spectrum.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_one() {
    let dir = scratch("bad");
    let missing = run(&["classify"], &dir.join("nope.json"), &dir);
    assert_eq!(missing.status.code(), Some(1));

    let unknown = write_config(&dir, r#"{"universe": {"kind": "constant", "c": 1, "t_minus": 0, "t_plus": 1, "oops": 2}}"#);
    let o = run(&["classify"], &unknown, &dir);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oops"));

    let typed = write_config(&dir, r#"{"coupling": {"xi": 0, "d": "three"}}"#);
    let o = run(&["classify"], &typed, &dir);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coupling.d"));

    let o = Command::new(env!("CARGO_BIN_EXE_cosmowave")).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two_with_the_error_name() {
    let dir = scratch("num");
    let cfg = write_config(&dir, r#"{"riccati": {"input": [{"kind": "power", "gamma": -2.5}], "m": [2]}}"#);
    let o = run(&["riccati"], &cfg, &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NoAdmissibleTau0"));
}
