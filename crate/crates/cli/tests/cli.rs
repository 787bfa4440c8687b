//! End-to-end tests of the installed binary: every subcommand, the exit-code
//! contract, and the reproducibility guarantees, all against a small cohort
//! (8 slides at 1024 px) that keeps each invocation in the seconds range.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bahop(out_root: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bahop"));
    // Ambient configuration must not leak in; the one test that exercises
    // the environment override sets it back explicitly.
    cmd.env_remove("BAHOP_OUT");
    cmd.arg("--out").arg(out_root);
    cmd
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("spawn bahop");
    assert!(
        output.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("stdout is UTF-8")
}

fn run_err(cmd: &mut Command, expected_code: i32) -> String {
    let Output { status, stdout, stderr } = cmd.output().expect("spawn bahop");
    let stderr = String::from_utf8_lossy(&stderr).into_owned();
    assert_eq!(
        status.code(),
        Some(expected_code),
        "stdout: {}\nstderr: {stderr}",
        String::from_utf8_lossy(&stdout)
    );
    stderr
}

/// First stdout line `run <id>` names the run directory.
fn parse_run_id(stdout: &str) -> String {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix("run "))
        .expect("optimize prints the run id")
        .to_string()
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.toml");
    fs::write(
        &path,
        "[run]\nseed = 7\nbudget = 40\n\n[space]\npreset = \"small\"\n\n\
         [cohort]\nseed = 1\nslides = 8\nslide_px = 1024\n",
    )
    .unwrap();
    path
}

#[test]
fn optimize_compare_landscape_verify_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("artifacts");
    let config = small_config(tmp.path());

    // One gated run; rerunning it must reproduce the ledger byte for byte.
    let stdout = run_ok(bahop(&out).args(["optimize", "--config"]).arg(&config));
    let hop_id = parse_run_id(&stdout);
    let hop_dir = out.join("runs").join(&hop_id);
    for artifact in ["ledger.jsonl", "manifest.json", "best.json", "cost.json", "patches.csv"] {
        assert!(hop_dir.join(artifact).exists(), "missing {artifact}");
    }
    assert_eq!(fs::read_dir(hop_dir.join("thumbs")).unwrap().count(), 8);
    let first_ledger = fs::read(hop_dir.join("ledger.jsonl")).unwrap();
    let rerun = run_ok(bahop(&out).args(["optimize", "--config"]).arg(&config));
    assert_eq!(parse_run_id(&rerun), hop_id, "same config must map to the same run");
    assert_eq!(
        fs::read(hop_dir.join("ledger.jsonl")).unwrap(),
        first_ledger,
        "rerun must reproduce the ledger byte for byte"
    );

    // patches.csv: one row per slide plus the header.
    let patches = fs::read_to_string(hop_dir.join("patches.csv")).unwrap();
    assert_eq!(patches.lines().count(), 9);
    assert!(patches.starts_with("slide,name,label,predicted,retained,top_score\n"));

    // The exhaustive sweep for landscape export.
    let stdout = run_ok(
        bahop(&out)
            .args(["optimize", "--config"])
            .arg(&config)
            .args(["--strategy", "grid", "--budget", "full"]),
    );
    let grid_id = parse_run_id(&stdout);
    let grid_best = stdout
        .lines()
        .find_map(|l| l.strip_prefix("best "))
        .and_then(|l| l.split_whitespace().next())
        .expect("optimize prints the best key")
        .to_string();

    // Compare: stable-sorted by strategy, one row per requested run.
    let table = run_ok(bahop(&out).arg("compare").arg(&grid_id).arg(&hop_id));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "strategy,run,best_objective,expensive_evals,sim_latency_minutes,sim_feature_bytes"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with(&format!("bahop,{hop_id},")), "{}", lines[1]);
    assert!(lines[2].starts_with(&format!("grid,{grid_id},")), "{}", lines[2]);
    assert!(lines[2].contains(",1296,"), "grid evaluates the whole space: {}", lines[2]);

    // A run compared with itself yields identical rows.
    let twice = run_ok(bahop(&out).arg("compare").arg(&hop_id).arg(&hop_id));
    let rows: Vec<&str> = twice.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);

    // Landscape: one row per configuration, the reference row at infinity.
    let csv_path = tmp.path().join("landscape.csv");
    run_ok(bahop(&out).args(["landscape", &grid_id, "--output"]).arg(&csv_path));
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 1_297, "header plus one row per configuration");
    assert_eq!(csv.lines().next().unwrap(), "params,psnr_db_vs_reference,objective");
    assert!(
        csv.lines().any(|l| l.starts_with(&format!("{grid_best},inf,"))),
        "the reference's own row reports infinite similarity"
    );

    // Landscape refuses runs that did not cover the space.
    let stderr = run_err(bahop(&out).args(["landscape", &hop_id]), 2);
    assert!(stderr.contains("exhaustive"), "{stderr}");
    // ... and references outside the space.
    let stderr = run_err(
        bahop(&out).args(["landscape", &grid_id, "--reference", "99:1:1:1:1:1"]),
        2,
    );
    assert!(stderr.contains("outside"), "{stderr}");

    // Verify: the untouched run replays; a tampered ledger fails with 3.
    let stdout = run_ok(bahop(&out).args(["verify", &hop_id]));
    assert!(stdout.contains(&format!("verified run {hop_id}")));
    let ledger_path = hop_dir.join("ledger.jsonl");
    let original = fs::read_to_string(&ledger_path).unwrap();
    let tampered = original.replace("\"iterations\":40", "\"iterations\":39");
    assert_ne!(tampered, original, "tamper target must exist in the summary");
    fs::write(&ledger_path, tampered).unwrap();
    let stderr = run_err(bahop(&out).args(["verify", &hop_id]), 3);
    assert!(stderr.contains("summary"), "{stderr}");

    // Unknown run ids are lookup failures.
    run_err(bahop(&out).args(["verify", "no-such-run"]), 4);
    run_err(bahop(&out).args(["compare", "no-such-run"]), 4);
}

#[test]
fn generate_is_reproducible_and_guards_existing_content() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("artifacts");
    let args = ["generate", "--seed", "1", "--slides", "8", "--slide-px", "1024"];

    let stdout = run_ok(bahop(&out).args(args));
    let id = stdout
        .lines()
        .find_map(|l| l.strip_prefix("cohort "))
        .expect("generate prints the cohort id")
        .to_string();
    let dir = out.join("cohorts").join(&id);
    let manifest = fs::read(dir.join("manifest.json")).unwrap();
    assert_eq!(fs::read_dir(dir.join("slides")).unwrap().count(), 8);
    let labels = fs::read_to_string(dir.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 9);

    // Same request, same bytes: regeneration is idempotent.
    run_ok(bahop(&out).args(args));
    assert_eq!(fs::read(dir.join("manifest.json")).unwrap(), manifest);

    // Foreign or corrupt content is refused without --force.
    fs::write(dir.join("manifest.json"), b"not a manifest").unwrap();
    let stderr = run_err(bahop(&out).args(args), 4);
    assert!(stderr.contains("--force"), "{stderr}");
    run_ok(bahop(&out).args(args).arg("--force"));
    assert_eq!(
        fs::read(dir.join("manifest.json")).unwrap(),
        manifest,
        "--force regenerates the original bytes"
    );
}

#[test]
fn config_errors_exit_2_and_name_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("artifacts");

    let stderr = run_err(bahop(&out).args(["optimize", "--strategy", "gradient"]), 2);
    assert!(stderr.contains("gradient"), "{stderr}");

    let stderr = run_err(bahop(&out).args(["optimize", "--budget", "everything"]), 2);
    assert!(stderr.contains("budget"), "{stderr}");

    let stderr = run_err(
        bahop(&out).args(["generate", "--profile", "sepia", "--slides", "8", "--slide-px", "1024"]),
        2,
    );
    assert!(stderr.contains("sepia"), "{stderr}");

    // A config file that does not parse names the offending key.
    let config = tmp.path().join("broken.toml");
    fs::write(&config, "[run]\nstrtegy = \"bahop\"\n").unwrap();
    let stderr = run_err(bahop(&out).args(["optimize", "--config"]).arg(&config), 2);
    assert!(stderr.contains("strtegy"), "{stderr}");

    // A missing config file is an I/O failure, not a config failure.
    run_err(bahop(&out).args(["optimize", "--config", "/no/such/file.toml"]), 4);
}

#[test]
fn environment_variable_selects_the_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("from-env");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bahop"));
    cmd.env("BAHOP_OUT", &root);
    cmd.args(["generate", "--seed", "1", "--slides", "8", "--slide-px", "1024"]);
    let output = cmd.output().expect("spawn bahop");
    assert!(output.status.success());
    assert!(root.join("cohorts").is_dir(), "artifacts land under BAHOP_OUT");
}
