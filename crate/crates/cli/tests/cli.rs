use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn reenact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reenact")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = reenact(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stepwise_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    let (src, tgt) = (fixture("source.jsonl"), fixture("target.jsonl"));

    ok(&["crop-target", "--in", s(&tgt), "--out", s(&d("t.jsonl")), "--spec-out", s(&d("crop.json")), "--profile-out", s(&d("profile.json"))]);
    ok(&["crop-source", "--in", s(&src), "--profile", s(&d("profile.json")), "--out", s(&d("s.jsonl"))]);
    ok(&["retarget", "--source", s(&d("s.jsonl")), "--target", s(&d("t.jsonl")), "--out", s(&d("r.jsonl")), "--calib-out", s(&d("calib.json"))]);
    ok(&["retarget", "--source", s(&d("s.jsonl")), "--calib-in", s(&d("calib.json")), "--out", s(&d("r2.jsonl"))]);
    assert_eq!(fs::read(d("r.jsonl")).unwrap(), fs::read(d("r2.jsonl")).unwrap());

    ok(&["build-scheme", "--target", s(&d("t.jsonl")), "--out", s(&d("scheme.json"))]);
    ok(&["render-conditioning", "--in", s(&d("r.jsonl")), "--scheme", s(&d("scheme.json")), "--out-dir", s(&d("frames")), "--raw"]);
    assert!(d("frames/ccbr_000000.png").is_file());
    assert!(d("frames/gaze_000000.png").is_file());
    assert_eq!(fs::metadata(d("frames/cond_000000.raw")).unwrap().len(), 256 * 256 * 6);

    let apd = ok(&["apd", "--a", s(&d("frames")), "--b", s(&d("frames")), "--report", s(&d("apd.json")), "--heatmap", s(&d("heat.png")), "--curve", s(&d("curve.csv"))]);
    assert_eq!(apd.trim().parse::<f64>().unwrap(), 0.0);
    assert!(d("heat.png").is_file());
    assert_eq!(fs::read_to_string(d("curve.csv")).unwrap().lines().count(), 61);

    let err = ok(&["cycle-error", "--original", s(&d("r.jsonl")), "--cycled", s(&d("r2.jsonl"))]);
    assert_eq!(err.trim().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let body = serde_json::json!({
        "source": fixture("source.jsonl"),
        "target": fixture("target.jsonl"),
        "output": dir.path().join("out"),
    });
    fs::write(&cfg, body.to_string()).unwrap();
    let out = ok(&["--jobs", "2", "run", "--config", s(&cfg)]);
    assert_eq!(out.lines().count(), 5);
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn run_rejects_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "source = \"nope.jsonl\"\ntarget = \"nope.jsonl\"\noutput = \"out\"\n").unwrap();
    let out = reenact(&["run", "--config", s(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn extract_without_adapter_reports_it() {
    let out = Command::new(env!("CARGO_BIN_EXE_reenact"))
        .args(["extract", "--video", "v.mp4", "--out", "o.jsonl"])
        .env("REENACT_ADAPTER", "/nonexistent/reenact-extract")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no landmark extraction adapter"));
}

#[cfg(unix)]
#[test]
fn extract_delegates_to_adapter() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("adapter.sh");
    fs::write(&script, "#!/bin/sh\necho \"$@\" > \"$(dirname \"$0\")/args.txt\"\n").unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    ok(&["extract", "--video", "clip.mp4", "--out", "o.jsonl", "--min-det", "0.7", "--adapter", s(&script)]);
    let args = fs::read_to_string(dir.path().join("args.txt")).unwrap();
    assert_eq!(args.trim(), "--video clip.mp4 --out o.jsonl --min-det 0.7 --min-track 0.5");
}

#[test]
fn help_lists_defaults() {
    let help = ok(&["run", "--help"]);
    assert!(help.contains("max_iter [1000]"));
    let help = ok(&["render-conditioning", "--help"]);
    assert!(help.contains("[default: 2]"));
}
