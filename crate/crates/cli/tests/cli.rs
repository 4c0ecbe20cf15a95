//! End-to-end tests against the built binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn empuct(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_empuct"))
        .args(args)
        .current_dir(cwd)
        .env_remove("EMPUCT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn gen_world_is_deterministic_and_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let a = empuct(&["gen-world", "--seed", "7", "--dims", "4x4x4"], dir.path());
    let b = empuct(&["gen-world", "--seed", "7", "--dims", "4x4x4"], dir.path());
    assert!(a.status.success());
    assert_eq!(
        stdout(&a),
        stdout(&b),
        "seeded generation must be byte-identical"
    );
    assert!(stderr(&a).contains("seed: 7"));
    assert!(stdout(&a).starts_with("dims 4 4 4\n"));

    // stdout is a valid world file: feed it back through simulate
    let world_path = dir.path().join("w.world");
    fs::write(&world_path, stdout(&a)).unwrap();
    let sim = empuct(&["simulate", "w.world", "wait"], dir.path());
    assert!(sim.status.success(), "{}", stderr(&sim));
}

#[test]
fn gen_world_emits_the_bridge_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = empuct(&["gen-world", "--scenario", "bridge"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out), empuct::scenarios::BRIDGE_WORLD_TEXT);
    let bad = empuct(&["gen-world", "--scenario", "nope"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_crosses_the_bridge_in_four_moves() {
    let dir = tempfile::tempdir().unwrap();
    let gen = empuct(
        &["gen-world", "--scenario", "bridge", "-o", "bridge.world"],
        dir.path(),
    );
    assert!(gen.status.success());
    let sim = empuct(
        &["simulate", "bridge.world", "e", "e", "e", "e"],
        dir.path(),
    );
    assert!(sim.status.success());
    let text = stdout(&sim);
    assert!(text.contains("tick 4, agent (5,3,3), alive"), "got: {text}");
}

#[test]
fn simulate_rejects_unknown_actions_and_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("w.world"),
        "dims 2 2 1\nlayer z=0\nA.\n..\n",
    )
    .unwrap();
    let bad_action = empuct(&["simulate", "w.world", "teleport"], dir.path());
    assert_eq!(bad_action.status.code(), Some(2));
    assert!(stderr(&bad_action).contains("teleport"));

    fs::write(
        dir.path().join("bad.world"),
        "dims 2 2 1\nlayer z=0\nAX\n..\n",
    )
    .unwrap();
    let bad_file = empuct(&["simulate", "bad.world", "wait"], dir.path());
    assert_eq!(bad_file.status.code(), Some(2));
    assert!(
        stderr(&bad_file).contains("line 3"),
        "{}",
        stderr(&bad_file)
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = empuct(
        &[
            "act",
            "w.world",
            "--n",
            "2",
            "--budget",
            "10",
            "--variant",
            "bogus",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let none = empuct(&["frobnicate"], dir.path());
    assert_eq!(none.status.code(), Some(1));
    let help = empuct(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn empower_json_has_unit_counts_at_horizon_zero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("w.world"),
        "dims 2 2 1\nlayer z=0\nA.\n..\n",
    )
    .unwrap();
    let out = empuct(&["empower", "w.world", "--n", "0", "--json"], dir.path());
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["horizon"], 0);
    assert_eq!(value["calls_used"], 12);
    let per_action = value["per_action"].as_array().unwrap();
    assert_eq!(per_action.len(), 12);
    for entry in per_action {
        assert_eq!(entry["count"], 1);
        assert_eq!(entry["bits"], 0.0);
    }
}

#[test]
fn empower_budget_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("w.world"),
        "dims 2 2 1\nlayer z=0\nA.\n..\n",
    )
    .unwrap();
    let out = empuct(
        &["empower", "w.world", "--n", "2", "--budget", "10"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn act_reports_choice_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    empuct(
        &["gen-world", "--scenario", "bridge", "-o", "b.world"],
        dir.path(),
    );
    let args = [
        "act",
        "b.world",
        "--n",
        "3",
        "--budget",
        "500",
        "--variant",
        "ucta-both",
        "--seed",
        "5",
        "--json",
    ];
    let a = empuct(&args, dir.path());
    let b = empuct(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let value: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(value["variant"], "UCTa+Both");
    assert_eq!(value["degenerate"], false);
    assert!(value["calls_used"].as_u64().unwrap() <= 500);
    assert_eq!(value["root_children"].as_array().unwrap().len(), 12);

    let degenerate = empuct(
        &[
            "act",
            "b.world",
            "--n",
            "3",
            "--budget",
            "1",
            "--variant",
            "uct",
            "--seed",
            "5",
        ],
        dir.path(),
    );
    assert!(degenerate.status.success());
    assert!(
        stderr(&degenerate).contains("warning"),
        "{}",
        stderr(&degenerate)
    );
}

#[test]
fn bench_writes_csvs_manifest_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = empuct(
        &[
            "bench",
            "--worlds",
            "2",
            "--n",
            "2",
            "--fractions",
            "1/2,1/4",
            "--dims",
            "4x4x4",
            "--seed",
            "3",
            "--out-dir",
            "results",
            "--plot",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let results = dir.path().join("results");
    for name in [
        "optimal_ratio.csv",
        "relative_performance.csv",
        "optimal_ratio.svg",
        "relative_performance.svg",
        "manifest.json",
    ] {
        assert!(results.join(name).exists(), "missing {name}");
    }
    let csv = fs::read_to_string(results.join("relative_performance.csv")).unwrap();
    assert!(csv.starts_with("fraction,Basic,UCT,"));
    assert_eq!(csv.lines().count(), 3); // header + two fractions
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(results.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "bench");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config"]["worlds"], 2);

    // reruns are byte-identical
    let rerun = empuct(
        &[
            "bench",
            "--worlds",
            "2",
            "--n",
            "2",
            "--fractions",
            "1/2,1/4",
            "--dims",
            "4x4x4",
            "--seed",
            "3",
            "--out-dir",
            "results2",
        ],
        dir.path(),
    );
    assert!(rerun.status.success());
    assert_eq!(
        fs::read_to_string(results.join("relative_performance.csv")).unwrap(),
        fs::read_to_string(dir.path().join("results2/relative_performance.csv")).unwrap()
    );
}

#[test]
fn bridge_writes_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = empuct(
        &[
            "bridge",
            "--budgets",
            "150",
            "--runs",
            "2",
            "--n",
            "4",
            "--out-dir",
            "results",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("UCTa+Both"));
    let csv = fs::read_to_string(dir.path().join("results/bridge.csv")).unwrap();
    assert!(csv.starts_with("budget,Basic,"));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_empuct"))
        .args(["bridge", "--budgets", "100", "--runs", "1", "--n", "3"])
        .current_dir(dir.path())
        .env("EMPUCT_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/bridge.csv").exists());
}
