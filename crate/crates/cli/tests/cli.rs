use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lis_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lis-sim")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn small_drops(dir: &Path) -> String {
    write_config(dir, "drops.json", r#"{"drops": 30, "aperture": {"width": 4, "height": 4}}"#)
}

#[test]
fn selftest_passes() {
    let out = lis_sim(&["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 5);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_drops(dir.path());
    for format in ["csv", "json"] {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "4"] {
            let out = dir.path().join(format!("t{threads}-{}.{format}", outputs.len()));
            let status = lis_sim(&[
                "user-drops", "--config", &cfg, "--threads", threads, "--format", format, "--out", out.to_str().unwrap(),
            ]);
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            outputs.push(fs::read(&out).unwrap());
        }
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[1], outputs[2]);
    }
}

#[test]
fn seed_flag_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_drops(dir.path());
    let a = lis_sim(&["user-drops", "--config", &cfg, "--seed", "1"]);
    let b = lis_sim(&["user-drops", "--config", &cfg, "--seed", "2"]);
    let c = lis_sim(&["user-drops", "--config", &cfg, "--seed", "1"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn csv_sidecar_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_drops(dir.path());
    let out = dir.path().join("drops.csv");
    assert!(lis_sim(&["user-drops", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap()]).status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("drops.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["config"]["drops"], 30);
    assert_eq!(meta["config"]["aperture"]["width"], 4.0);
    assert_eq!(meta["resampled_drops"], 0);

    let bare = dir.path().join("bare.csv");
    assert!(lis_sim(&["user-drops", "--config", &cfg, "--no-meta", "--out", bare.to_str().unwrap()]).status.success());
    assert!(!dir.path().join("bare.csv.meta.json").exists());
}

#[test]
fn json_output_layout() {
    let out = lis_sim(&["beampattern", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"]["azimuth"].as_array().unwrap().len(), 4 * 2001);
    assert_eq!(v["metadata"]["config"]["experiment"], "beam_pattern");
}

#[test]
fn every_experiment_runs() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write_config(dir.path(), "grid.json", r#"{"angle_grid": 11}"#);
    for cmd in ["beampattern", "se-loss-map", "width-sweep"] {
        let out = lis_sim(&[cmd, "--config", &grid]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.len() > 100);
    }
    let out = lis_sim(&["user-drops", "--drops", "5", "--users", "3", "--utility", "harmonic_mean", "--dense"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",harmonic_mean,")));
}

#[test]
fn power_alloc_one_shot() {
    let out = lis_sim(&["power-alloc", "--gains", "1,4", "--costs", "1,1", "--budget", "3", "--utility", "harmonic_mean"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 2.0);
    assert_eq!(rows[1][3].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(dir.path(), "typo.json", r#"{"dropz": 3}"#);
    let out = lis_sim(&["user-drops", "--config", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dropz"));

    let wrong = write_config(dir.path(), "wrong.json", r#"{"experiment": "beam_pattern"}"#);
    assert_eq!(lis_sim(&["user-drops", "--config", &wrong]).status.code(), Some(2));
    assert_eq!(lis_sim(&["power-alloc", "--gains", "1,0", "--costs", "1,1"]).status.code(), Some(2));
    assert_eq!(lis_sim(&["power-alloc", "--gains", "1", "--costs", "1", "--utility", "max_min"]).status.code(), Some(2));
}

#[test]
fn degenerate_scenario_exits_3() {
    // a 2 x 2 array only resolves two azimuths in the horizontal plane
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tiny.json",
        r#"{"aperture": {"width": 1, "height": 1}, "spacings": [0.5], "users": 3, "drops": 5}"#,
    );
    let out = lis_sim(&["user-drops", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn io_errors_exit_4() {
    assert_eq!(lis_sim(&["beampattern", "--config", "/nonexistent/cfg.json"]).status.code(), Some(4));
    let out = lis_sim(&["beampattern", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/out.csv"));
}
