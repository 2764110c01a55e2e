//! End-to-end CLI checks: exit codes, schema errors, the selftest command
//! and a miniature train -> eval -> sweep round trip.

use std::path::PathBuf;
use std::process::Command;

fn leoris() -> Command {
    Command::new(env!("CARGO_BIN_EXE_leoris"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("leoris_cli_tests").join(name);
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn tiny_config(dir: &PathBuf, agent: &str) -> PathBuf {
    // Down-scaled scenario so the whole round trip runs in seconds.
    let text = format!(
        r#"{{
  "scenario": {{
    "num_sat_antennas": 2, "num_ris_elements": 2, "num_users": 2,
    "users": {{"fixed": [[1200.0, 1800.0], [3600.0, 2800.0]]}},
    "uav_altitude_m": 2000.0, "noise_power_w": 1e-3,
    "link_gain_scale": {{"sat_user": 1e-4, "sat_uav": 1e-4, "uav_user": 1e-2}}
  }},
  "env": {{"horizon": 10, "reward_scale": 100.0}},
  "agent": {{"kind": "{agent}", "hidden": [16], "steps_per_update": 10, "value_iters": 2}},
  "episodes": 3,
  "seeds": [1, 2],
  "eval_episodes": 2,
  "out_dir": "{}"
}}"#,
        dir.join("run").display()
    );
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn selftest_exits_zero() {
    let out = leoris().arg("selftest").output().unwrap();
    assert!(out.status.success(), "selftest failed: {}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn missing_config_exits_nonzero() {
    let out = leoris().args(["train", "--config", "/nonexistent/nope.json"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schema error"), "stderr: {err}");
}

#[test]
fn unknown_key_exits_nonzero_and_names_it() {
    let dir = tmp("schema");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"definitely_not_a_key": 1}"#).unwrap();
    let out = leoris().args(["train", "--config", path.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("definitely_not_a_key"));
}

#[test]
fn unknown_sweep_variable_exits_nonzero() {
    let dir = tmp("sweepvar");
    let cfg = tiny_config(&dir, "trpo");
    let out = leoris()
        .args([
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--var",
            "warp_factor",
            "--values",
            "1,2",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_factor"));
}

#[test]
fn train_eval_sweep_round_trip() {
    let dir = tmp("roundtrip");
    let cfg = tiny_config(&dir, "trpo");

    let out = leoris().args(["train", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "train failed: {}", String::from_utf8_lossy(&out.stderr));
    let run_dir = dir.join("run");
    assert!(run_dir.join("metrics.csv").exists());
    assert!(run_dir.join("config.json").exists());
    let ckpt = run_dir.join("checkpoint_seed1.ckpt");
    assert!(ckpt.exists());
    assert!(run_dir.join("checkpoint_seed1.ckpt.json").exists());

    let metrics = std::fs::read_to_string(run_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("# config_hash="));
    // 2 seeds x 3 episodes plus comment and header.
    assert_eq!(metrics.lines().count(), 2 + 6);

    let out = leoris()
        .args([
            "eval",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--episodes",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "eval failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("eval over 2 episodes"));

    let out = leoris()
        .args([
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--var",
            "csi_error_variance",
            "--values",
            "0.0001,0.01",
            "--mode",
            "eval",
            "--checkpoints",
            run_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "sweep failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(run_dir.join("sweep.csv").exists());

    // Evaluating under mismatched dimensions is a checkpoint error.
    let dir2 = tmp("mismatch");
    let cfg2 = tiny_config(&dir2, "trpo");
    let text = std::fs::read_to_string(&cfg2).unwrap().replace("\"num_sat_antennas\": 2", "\"num_sat_antennas\": 4");
    std::fs::write(&cfg2, text).unwrap();
    let out = leoris()
        .args([
            "eval",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--config",
            cfg2.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("checkpoint"));
}

#[test]
fn committed_configs_parse_and_match_presets() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["desk_td3", "desk_a3c", "desk_trpo", "full_scale_trpo"] {
        let path = root.join(format!("{name}.json"));
        let cfg = leoris_harness::ExperimentConfig::load(&path)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.validate().unwrap();
    }
    // Desk presets stay in sync with the committed files.
    let desk = leoris_harness::ExperimentConfig::load(&root.join("desk_trpo.json")).unwrap();
    let mut preset = leoris_harness::ExperimentConfig::desk_trpo();
    preset.out_dir = desk.out_dir.clone();
    assert_eq!(serde_json::to_string(&desk).unwrap(), serde_json::to_string(&preset).unwrap());
}
