use std::path::Path;
use std::process::{Command, Output};

fn gqn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gqn"))
        .args(args)
        .env("GQN_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

const TINY: &[&str] = &["--preset", "desk", "--users", "100", "--episode-length", "5", "--seeds", "1", "--batch-size", "4"];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(TINY).chain(tail).copied().collect()
}

#[test]
fn help_lists_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = gqn(&["--help"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["train", "eval", "sweep-w", "heuristic-baseline"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn zero_step_training_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = gqn(&with(&["train"], &["--steps", "0"]), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("gqn/tilt/seed0");
    for f in ["metrics.csv", "checkpoint.bin", "config.snapshot"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let report = dir.path().join("eval.json");
    let ckpt = run.join("checkpoint.bin");
    let out = gqn(
        &[
            "eval",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--episodes",
            "2",
            "--sites",
            "19",
            "--report",
            report.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["n_agents"], 57);
    assert_eq!(json["episodes"].as_array().unwrap().len(), 2);
}

#[test]
fn short_training_reports_each_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = gqn(&with(&["train"], &["--steps", "20", "--algorithm", "dqn"]), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("seed0"));
    let csv = std::fs::read_to_string(dir.path().join("dqn/tilt/seed0/metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.toml");
    std::fs::write(&file, "algorithm = \"gaq\"\nsteps = 10\n[env]\nscenario = \"tilt\"\n").unwrap();
    let out = gqn(
        &with(&["train"], &["--algorithm", "dqn", "--steps", "0", "--config", file.to_str().unwrap()]),
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("gaq/tilt/seed0/checkpoint.bin").exists());
    let csv = std::fs::read_to_string(dir.path().join("gaq/tilt/seed0/metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2);
}

#[test]
fn bad_configuration_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        with(&["train"], &["--w", "1.5"]),
        with(&["train"], &["--algorithm", "ppo"]),
        with(&["train"], &["--sites", "5"]),
        with(&["train"], &["--isd-min", "900", "--isd-max", "300"]),
        with(&["train"], &["--scenario", "tilt", "--split"]),
        with(&["train"], &["--learning-rate", "-1"]),
        vec!["eval", "--episodes", "0"],
    ] {
        let out = gqn(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn mismatched_inputs_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = gqn(&with(&["sweep-w"], &["--steps", "0"]), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = gqn(&with(&["train"], &["--steps", "0", "--scenario", "joint"]), dir.path());
    assert!(out.status.success());
    let ckpt = dir.path().join("gqn/joint/seed0/checkpoint.bin");
    let out = gqn(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--scenario", "tilt"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn runtime_failures_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.bin");
    let out = gqn(&["eval", "--checkpoint", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let bogus = dir.path().join("bogus.bin");
    std::fs::write(&bogus, b"not a checkpoint").unwrap();
    let out = gqn(&["eval", "--checkpoint", bogus.to_str().unwrap()], dir.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}

#[test]
fn heuristic_baseline_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = gqn(&with(&["heuristic-baseline"], &["--steps", "10"]), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("heuristic/tilt/summary.json").exists());
    let out = gqn(&with(&["sweep-w"], &["--steps", "10", "--scenario", "joint", "--w-list", "0,0.5"]), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("sweep_w.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}
