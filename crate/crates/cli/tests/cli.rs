// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qsynapse_cli::{run_scenario, RunOptions, Scenario};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsynapse"))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

fn csv_column(bytes: &[u8], column: &str) -> Vec<String> {
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == column).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn golden_scenario_is_reproduced_byte_for_byte() {
    let scenario = Scenario::load(&golden_dir().join("scenario.toml")).unwrap();
    for _ in 0..2 {
        let out = tempfile::tempdir().unwrap();
        run_scenario(&scenario, scenario.seed(), out.path(), RunOptions { calibrate: true }).unwrap();
        for name in ["trace.csv", "quantum.csv", "calibration.csv"] {
            assert!(read(out.path(), name) == read(&golden_dir().join("expected"), name), "{name} drifted");
        }
    }
}

#[test]
fn minimal_trace_is_pure_relaxation() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("minimal.toml");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = read(out.path(), "trace.csv");
    let t = csv_column(&trace, "t_ms");
    let v = csv_column(&trace, "v_0");
    assert_eq!(v.len(), 101);
    for (t, v) in t.iter().zip(&v) {
        let (t, v): (f64, f64) = (t.parse().unwrap(), v.parse().unwrap());
        let analytic = -65.0 + (-70.6837 + 65.0) * (-t * 0.0551f64).exp();
        assert!((v - analytic).abs() < 1e-9, "t = {t}");
    }
    assert!(csv_column(&trace, "spike_0").iter().all(|s| s == "0"));
    assert!(!out.path().join("quantum.csv").exists());
}

#[test]
fn same_seed_gives_identical_outputs_and_override_moves_spikes_only() {
    let cfg = configs_dir().join("bidirectional.toml");
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, seed) in dirs.iter().zip(["7", "7", "8"]) {
        let o = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
            "--quiet",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["trace.csv", "quantum.csv", "spikes.csv"] {
        assert!(read(dirs[0].path(), name) == read(dirs[1].path(), name), "{name}");
    }
    let a = read(dirs[0].path(), "trace.csv");
    let b = read(dirs[2].path(), "trace.csv");
    assert_ne!(a, b);
    assert_ne!(read(dirs[0].path(), "spikes.csv"), read(dirs[2].path(), "spikes.csv"));
    let meta = String::from_utf8(read(dirs[0].path(), "meta.toml")).unwrap();
    assert!(meta.contains("seed = 7") && meta.contains("config_seed = 11") && meta.contains("v_thres = -50.0"));
}

#[test]
fn seed_override_leaves_zero_input_neuron_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mixed.toml");
    std::fs::write(
        &cfg,
        "[simulation]\ndt = 0.1\nt_end = 50.0\nseed = 1\n[topology]\nupstream = [[], [0]]\n[[spikes.links]]\nid = 0\nrate = 0.5\n",
    )
    .unwrap();
    let traces: Vec<Vec<u8>> = ["1", "2"]
        .iter()
        .map(|seed| {
            let out = dir.path().join(format!("out{seed}"));
            let o =
                run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()]);
            assert!(o.status.success());
            read(&out, "trace.csv")
        })
        .collect();
    assert_eq!(csv_column(&traces[0], "v_0"), csv_column(&traces[1], "v_0"));
    assert_ne!(csv_column(&traces[0], "v_1"), csv_column(&traces[1], "v_1"));
}

#[test]
fn unknown_field_fails_validation_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "[simulation]\ndt = 0.1\nt_end = 10.0\nseed = 1\nstep_size = 3\n[topology]\nupstream = [[]]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    for cmd in ["validate", "simulate"] {
        let o = run(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&o.stderr).contains("step_size"));
    }
    assert!(!out.exists());
}

#[test]
fn validate_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("closure.toml");
    let o = bin()
        .args(["validate", "--config", cfg.to_str().unwrap()])
        .current_dir(dir.path())
        .env("QSYNAPSE_OUT", dir.path().join("runs"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn missing_config_prints_usage_and_exits_one() {
    let o = run(&["simulate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert!(run(&["version"]).status.success());
}

#[test]
fn divergence_leaves_partial_outputs_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("diverge.toml");
    // Forward Euler far past its stability limit, with the threshold out of reach.
    std::fs::write(
        &cfg,
        "[simulation]\ndt = 5.0\nt_end = 5000.0\nseed = 1\n[lif]\ng_leak = 551.0\nv_thres = 1.7976931348623157e308\nintegrator = \"euler\"\nv_init = -70.0\n[topology]\nupstream = [[]]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("error.txt").exists() && out.join("trace.csv").exists());
    assert!(String::from_utf8(read(&out, "meta.toml")).unwrap().contains("status = \"failed\""));
}

#[test]
fn env_var_sets_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("minimal.toml");
    let o = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--quiet"])
        .env("QSYNAPSE_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("minimal/trace.csv").exists());
}

#[test]
fn calibrate_sweep_writes_seed_ordered_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_dir().join("scenario.toml");
    let o = run(&[
        "calibrate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--sweep",
        "6",
        "--quiet",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = read(dir.path(), "sweep.csv");
    let seeds: Vec<u64> = csv_column(&sweep, "seed").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(seeds, (11..17).collect::<Vec<_>>());
    let first_tv = &csv_column(&sweep, "tv_distance")[0];
    let single = csv_column(&read(dir.path(), "calibration.csv"), "value");
    let cal = String::from_utf8(read(dir.path(), "calibration.csv")).unwrap();
    assert!(cal.contains(&format!("tv_distance,{first_tv}")), "{single:?}");
}

#[test]
fn fuse_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("fusion.toml");
    let o = run(&["fuse", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("fusion PASS"));
    let table = read(dir.path(), "fusion.csv");
    assert_eq!(csv_column(&table, "reference").len(), 3);
}
