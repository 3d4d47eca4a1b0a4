use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dwp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwp"))
        .args(args)
        .current_dir(dir)
        .env_remove("DWP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap_or("")).expect("json error line")
}

#[test]
fn preset_list_names_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dwp(&["preset", "list"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.contains("dust_collision"));
    assert!(text.contains("expanding_riemann_delta"));
}

#[test]
fn run_writes_outputs_and_repeats_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "preset = \"gravity_static_2d\"\nsteps = 4\n[grid]\nshape = [16, 16]\n[output]\nsnapshot_every = 2\n",
    )
    .unwrap();
    for name in ["a", "b"] {
        let out = dwp(
            &["run", "--config", "c.toml", "--out", name, "--seed", "3"],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    // config.toml differs only in out_dir
    for file in [
        "diagnostics.jsonl",
        "snapshot_000002.csv",
        "final.csv",
        "summary.json",
    ] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let echo = fs::read_to_string(dir.path().join("a/config.toml")).unwrap();
    assert!(echo.contains("seed = 3"));
}

#[test]
fn bad_config_reports_key_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "preset = \"dust_collision\"\nsteps = -5\n",
    )
    .unwrap();
    let out = dwp(&["check", "--config", "c.toml"], dir.path());
    assert!(!out.status.success());
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("`steps`"));
}

#[test]
fn check_accepts_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "preset = \"riemann_1d\"\n").unwrap();
    let out = dwp(&["check", "--config", "c.toml"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["cells"], 200);
}

#[test]
fn out_dir_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dwp"))
        .args(["run", "--preset", "riemann_1d", "--steps", "2"])
        .current_dir(dir.path())
        .env("DWP_OUT_DIR", "from_env")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("from_env/summary.json").exists());
}

#[test]
fn failing_run_exits_nonzero_with_state_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    // no solver reaches this tolerance
    fs::write(
        dir.path().join("c.toml"),
        "preset = \"gravity_static_1d\"\nsteps = 5\n[physics]\nmax_iter = 1\nsolver_tol = 1e-300\n",
    )
    .unwrap();
    let out = dwp(&["run", "--config", "c.toml", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "solver");
    assert!(dir.path().join("o/final.csv").exists());
}
